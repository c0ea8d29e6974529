"""Experiment config, runner determinism, bandwidth, timing table, CLI."""

import json

import pytest

from byzsfl import paillier
from byzsfl.cli import main as cli_main
from byzsfl.experiment import (
    TIMING_ROWS,
    bandwidth_estimate,
    echo_config,
    load_metrics,
    measure_bandwidth,
    parse_config,
    run_experiment,
    timing_table,
)
from byzsfl.protocol import ConfigError

TOY_FLAGS = dict(
    mode="byzsfl_toy", clients=2, params=4, rounds=2, seed=1,
    paillier_bits=24, frac_bits=14, grad_word_bits=16, noise_sigma=0.02,
    examples_per_client=12, eta=0.2,
)


def toy_cfg(**extra):
    return parse_config(None, {**TOY_FLAGS, **extra})


class TestParseConfig:
    def test_minimal_file(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[run]\nmode = duoagg_plain\nclients = 3\nparams = 8\nrounds = 2\n"
            "[paillier]\nmodulus_bits = 1024\n"
        )
        cfg = parse_config(str(path))
        assert cfg.mode == "duoagg_plain" and cfg.clients == 3

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[run]\nmoode = duoagg_plain\n")
        with pytest.raises(ConfigError):
            parse_config(str(path))

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[runs]\nmode = duoagg_plain\n")
        with pytest.raises(ConfigError):
            parse_config(str(path))

    def test_cross_field_violation(self):
        with pytest.raises(ConfigError):
            parse_config(None, dict(mode="byzsfl_toy", paillier_bits=2048))

    def test_flag_overrides_file(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[run]\nclients = 3\n[paillier]\nmodulus_bits = 1024\n")
        cfg = parse_config(str(path), {"clients": 7, "mode": "duoagg_plain"})
        assert cfg.clients == 7

    def test_attack_section(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[run]\nmode = duoagg_plain\n[paillier]\nmodulus_bits = 1024\n"
            "[attack]\na = sign_flip:1\nb = scale:0:4\n"
        )
        cfg = parse_config(str(path))
        assert [a.kind for a in cfg.attacks] == ["sign_flip", "scale"]
        assert cfg.attacks[1].lam == 4.0

    def test_echo_round_trips(self, tmp_path):
        cfg = toy_cfg()
        path = tmp_path / "echo.ini"
        path.write_text(echo_config(cfg))
        again = parse_config(str(path))
        assert again == cfg


class TestRunExperiment:
    def test_deterministic_nontiming_fields(self):
        _, rec_a, _ = run_experiment(toy_cfg())
        _, rec_b, _ = run_experiment(toy_cfg())
        strip = lambda r: {
            k: v for k, v in json.loads(r.to_json()).items()
            if k not in ("client_compute", "client_encrypt", "client_prove",
                         "sc_compute", "sc_verify", "se_decrypt")
        }
        assert [strip(r) for r in rec_a] == [strip(r) for r in rec_b]

    def test_outputs_written(self, tmp_path):
        cfg = toy_cfg(out_dir=str(tmp_path / "run1"))
        _, records, _ = run_experiment(cfg)
        out = tmp_path / "run1"
        assert (out / "metrics.jsonl").exists()
        assert (out / "config.ini").exists()
        assert (out / "summary.csv").exists()
        lines = (out / "metrics.jsonl").read_text().splitlines()
        assert len(lines) == len(records) == cfg.rounds
        length, reread = load_metrics(str(out))
        assert length == cfg.params
        assert [r.to_json() for r in reread] == [r.to_json() for r in records]

    def test_mlp_model_roundtrip(self):
        cfg = toy_cfg(
            mode="byzsfl_large", paillier_bits=1024, model="mlp", hidden=2,
            params=3, grad_word_bits=18,
        )
        assert cfg.vector_len() == 3 * 2 + 2 * 2 + 1
        _, records, _ = run_experiment(cfg)
        assert records[-1].accepted == [0, 1]


class TestBandwidth:
    def test_closed_form_at_paper_scale(self):
        bw = bandwidth_estimate(9000, 2048)
        assert bw.client_to_sc_encrypted_vector == 9000 * 512 == 4_608_000
        assert bw.sc_to_se_encrypted_vector == bw.client_to_sc_encrypted_vector

    def test_zero_length(self):
        assert bandwidth_estimate(0, 2048).client_to_sc_encrypted_vector == 0

    def test_estimate_matches_measured_frames(self):
        ek, _ = paillier.keygen(128, b"bw")
        for L in (1, 5, 64):
            est = bandwidth_estimate(L, 128)
            meas = measure_bandwidth(ek, L)
            assert est.client_to_sc_encrypted_vector == meas.client_to_sc_encrypted_vector
            assert est.sc_to_se_encrypted_vector == meas.sc_to_se_encrypted_vector

    def test_measured_on_live_run(self):
        cfg = toy_cfg()
        _, records, bw = run_experiment(cfg)
        width = 2 * ((24 + 7) // 8)
        assert bw.client_to_sc_encrypted_vector == cfg.vector_len() * width
        # live submission frame = overheads + (L+1) residues + proof
        fixed = 5 + 4 + width + 4 + cfg.vector_len() * width
        sizes = set(records[0].submission_bytes.values())
        assert all(s > fixed for s in sizes)
        assert bw.client_to_sc_proof == max(sizes) - fixed

    def test_transparent_proof_bytes_grow_with_length(self):
        # unlike a succinct backend, the transparent payload is the witness
        sizes = {}
        for L in (4, 8):
            _, _, bw = run_experiment(toy_cfg(params=L))
            sizes[L] = bw.client_to_sc_proof
        assert sizes[8] > sizes[4] > 0


class TestTimingTable:
    def _records(self):
        _, records, _ = run_experiment(toy_cfg())
        return records

    def test_row_labels_exact(self):
        table = timing_table([(4, self._records())])
        lines = table.splitlines()
        assert [l.split("  ")[0].strip() for l in lines[1:]] == list(TIMING_ROWS)
        assert TIMING_ROWS == (
            "Client Compute", "Client Encrypt", "Client Prove",
            "Server S_C Compute", "Server S_C Verify", "Server S_E Decrypt",
            "Total",
        )

    def test_total_is_column_sum(self):
        from byzsfl.experiment import timing_cells

        cells = timing_cells([(4, self._records())])
        body = sum(cells[r][0] for r in TIMING_ROWS[:-1])
        assert cells["Total"][0] == pytest.approx(body, abs=1e-12)

    def test_multiple_columns(self):
        records = self._records()
        table = timing_table([(4, records), (8, records)])
        assert table.splitlines()[0].split()[-2:] == ["4", "8"]

    def test_needs_rounds(self):
        with pytest.raises(ValueError):
            timing_table([(4, [])])


class TestCli:
    def test_run_with_flags(self, tmp_path, capsys):
        rc = cli_main([
            "run", "--mode", "byzsfl_toy", "--clients", "2", "--params", "4",
            "--rounds", "1", "--seed", "1", "--paillier-bits", "24",
            "--frac-bits", "14", "--grad-word-bits", "16",
            "--examples-per-client", "12", "--eta", "0.2",
            "--out", str(tmp_path / "out"),
        ])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "Server S_E Decrypt" in printed
        assert (tmp_path / "out" / "metrics.jsonl").exists()

    def test_run_with_attack_flag(self, capsys):
        rc = cli_main([
            "run", "--mode", "byzsfl_toy", "--clients", "2", "--params", "4",
            "--rounds", "1", "--seed", "1", "--paillier-bits", "24",
            "--frac-bits", "14", "--grad-word-bits", "16",
            "--examples-per-client", "12", "--eta", "0.2",
            "--attack", "forged_proof:1",
        ])
        assert rc == 0
        assert "rejected: [1]" in capsys.readouterr().out

    def test_bad_config_exit_code(self, capsys):
        rc = cli_main(["run", "--mode", "byzsfl_toy", "--paillier-bits", "2048"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_bandwidth_subcommand(self, capsys):
        rc = cli_main(["bandwidth", "--params", "9000", "--modulus-bits", "2048"])
        assert rc == 0
        assert "4608000 B" in capsys.readouterr().out

    def test_table_subcommand(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        cli_main([
            "run", "--mode", "byzsfl_toy", "--clients", "2", "--params", "4",
            "--rounds", "1", "--seed", "1", "--paillier-bits", "24",
            "--frac-bits", "14", "--grad-word-bits", "16",
            "--examples-per-client", "12", "--eta", "0.2", "--out", out,
        ])
        capsys.readouterr()
        rc = cli_main(["table", out])
        assert rc == 0
        assert "Client Prove" in capsys.readouterr().out
