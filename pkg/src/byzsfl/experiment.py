"""Experiment orchestration: config, metrics, bandwidth and timing tables.

Experiments are described by an INI-style config (key=value sections)
or CLI flags; flags override the file. A run emits line-delimited JSON
metric records, a CSV summary, and an echo of the resolved config, so
every experiment is a reviewable artifact.

Timings are recorded per phase and reported, but never asserted: they
are hardware facts, not correctness facts.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import paillier, protocol
from .attacks import AttackSpec, apply_attacks
from .fixedpoint import FixedPointConfig
from .fltrust import (
    Dataset,
    TinyMLP,
    TrainingConfig,
    datasets_from_idx,
    make_synthetic_regression,
)
from .protocol import (
    Client,
    ClientSubmission,
    ConfigError,
    EncryptionServer,
    ProtocolConfig,
    RoundReport,
    run_training,
    serialize_broadcast,
    serialize_submission,
    ModelBroadcast,
)

TIMING_ROWS = (
    "Client Compute",
    "Client Encrypt",
    "Client Prove",
    "Server S_C Compute",
    "Server S_C Verify",
    "Server S_E Decrypt",
    "Total",
)


@dataclass
class ExperimentConfig:
    mode: str = protocol.MODE_TOY
    clients: int = 4
    params: int = 16                   # feature count; model length for linear
    rounds: int = 3
    seed: int = 0
    backend: str = "transparent"
    eta: float = 0.1
    alpha: float = 1.0
    model: str = "linear"              # "linear" or "mlp"
    hidden: int = 8                    # MLP hidden width
    frac_bits: int = 16
    word_bits: int = 40
    grad_word_bits: int = 40
    paillier_bits: int = 2048
    data_source: str = "synthetic"     # "synthetic" or "idx"
    examples_per_client: int = 32
    noise_sigma: float = 0.05
    idx_images: str = ""
    idx_labels: str = ""
    reference_examples: int = 32
    attacks: list[AttackSpec] = field(default_factory=list)
    out_dir: str = ""

    def training(self) -> TrainingConfig:
        model = TinyMLP(self.hidden) if self.model == "mlp" else None
        kwargs = {"eta": self.eta, "alpha": self.alpha, "epochs": self.rounds}
        if model is not None:
            kwargs["model"] = model
        return TrainingConfig(**kwargs)

    def vector_len(self) -> int:
        return self.training().model.param_len(self.params)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            mode=self.mode,
            vector_len=self.vector_len(),
            n_clients=self.clients,
            training=self.training(),
            fp=FixedPointConfig(frac_bits=self.frac_bits, word_bits=self.word_bits),
            grad_word_bits=self.grad_word_bits,
            paillier_bits=self.paillier_bits,
        )

    def build_data(self) -> tuple[list[Dataset], Dataset]:
        if self.data_source == "synthetic":
            datasets, d_star, _ = make_synthetic_regression(
                self.params, self.clients, self.examples_per_client,
                self.noise_sigma, self.seed,
            )
            return datasets, d_star
        if self.data_source == "idx":
            return datasets_from_idx(
                self.idx_images, self.idx_labels, self.clients,
                self.examples_per_client, self.reference_examples, self.seed,
            )
        raise ConfigError(f"unknown data source {self.data_source!r}")


_SCHEMA = {
    "run": {"mode": str, "clients": int, "params": int, "rounds": int,
            "seed": int, "backend": str},
    "training": {"eta": float, "alpha": float, "model": str, "hidden": int},
    "fixedpoint": {"frac_bits": int, "word_bits": int, "grad_word_bits": int},
    "paillier": {"modulus_bits": int},
    "data": {"source": str, "examples_per_client": int, "noise_sigma": float,
             "images": str, "labels": str, "reference_examples": int},
    "attack": None,  # every key holds one attack spec string
    "output": {"dir": str},
}

_FIELD_BY_KEY = {
    ("run", "mode"): "mode", ("run", "clients"): "clients",
    ("run", "params"): "params", ("run", "rounds"): "rounds",
    ("run", "seed"): "seed", ("run", "backend"): "backend",
    ("training", "eta"): "eta", ("training", "alpha"): "alpha",
    ("training", "model"): "model", ("training", "hidden"): "hidden",
    ("fixedpoint", "frac_bits"): "frac_bits",
    ("fixedpoint", "word_bits"): "word_bits",
    ("fixedpoint", "grad_word_bits"): "grad_word_bits",
    ("paillier", "modulus_bits"): "paillier_bits",
    ("data", "source"): "data_source",
    ("data", "examples_per_client"): "examples_per_client",
    ("data", "noise_sigma"): "noise_sigma",
    ("data", "images"): "idx_images",
    ("data", "labels"): "idx_labels",
    ("data", "reference_examples"): "reference_examples",
    ("output", "dir"): "out_dir",
}


def parse_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Load an INI config and apply CLI overrides (overrides win).

    Unknown sections or keys are hard errors: a typo silently reverting
    a parameter to its default is worse than a crash.
    """
    cfg = ExperimentConfig()
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            if section == "attack":
                for _, value in parser.items(section):
                    cfg.attacks.append(AttackSpec.from_string(value))
                continue
            for key, value in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                typ = _SCHEMA[section][key]
                try:
                    setattr(cfg, _FIELD_BY_KEY[(section, key)], typ(value))
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name == "attacks":
            cfg.attacks = [AttackSpec.from_string(s) for s in value]
        elif hasattr(cfg, name):
            setattr(cfg, name, value)
        else:
            raise ConfigError(f"unknown config field {name!r}")
    cfg.protocol_config()  # surface cross-field violations now
    if cfg.backend != "transparent":
        raise ConfigError(f"unknown proof backend {cfg.backend!r}")
    return cfg


def echo_config(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    for (section, key), attr in _FIELD_BY_KEY.items():
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, str(getattr(cfg, attr)))
    if cfg.attacks:
        parser.add_section("attack")
        for i, a in enumerate(cfg.attacks):
            ids = ",".join(str(t) for t in a.targets)
            arg = {"scale": a.lam, "gaussian_noise": a.sigma, "label_flip": a.fraction}.get(a.kind)
            parser.set("attack", f"spec{i}", f"{a.kind}:{ids}" + (f":{arg}" if arg is not None else ""))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# -- metrics ------------------------------------------------------------------

@dataclass
class MetricsRecord:
    """One round of observables; phase names follow the timing table."""

    round_index: int
    loss: float
    ts_norm_per_client: dict[int, float]   # oracle-side, analysis only
    accepted: list[int]
    rejected: list[int]
    submission_bytes: dict[int, int]
    aggregate_bytes: int
    broadcast_bytes: int
    client_compute: float                  # slowest client, seconds
    client_encrypt: float
    client_prove: float
    sc_compute: float
    sc_verify: float
    se_decrypt: float

    def to_json(self) -> str:
        d = asdict(self)
        d["ts_norm_per_client"] = {str(k): v for k, v in d["ts_norm_per_client"].items()}
        d["submission_bytes"] = {str(k): v for k, v in d["submission_bytes"].items()}
        return json.dumps(d, sort_keys=True)


def _records_from_reports(reports: Sequence[RoundReport], scale: int) -> list[MetricsRecord]:
    out = []
    for r in reports:
        out.append(MetricsRecord(
            round_index=r.round_index,
            loss=r.loss,
            ts_norm_per_client={k: v / scale for k, v in r.client_ts_norm_raw.items()},
            accepted=list(r.accepted),
            rejected=list(r.rejected),
            submission_bytes=dict(r.submission_bytes),
            aggregate_bytes=r.aggregate_bytes,
            broadcast_bytes=r.broadcast_bytes,
            client_compute=max(r.client_compute.values(), default=0.0),
            client_encrypt=max(r.client_encrypt.values(), default=0.0),
            client_prove=max(r.client_prove.values(), default=0.0),
            sc_compute=r.sc_compute,
            sc_verify=r.sc_verify,
            se_decrypt=r.se_decrypt,
        ))
    return out


# -- bandwidth ----------------------------------------------------------------

@dataclass(frozen=True)
class BandwidthReport:
    """Bytes per protocol leg for one round and one client.

    encrypted-vector fields count ciphertext residues only (the fixed
    2*ceil(bits/8) bytes each); proof bytes are the serialized proof
    frame, None when unknown (closed-form estimates for the transparent
    backend depend on the circuit, not just L).
    """

    client_to_sc_encrypted_vector: int
    client_to_sc_proof: Optional[int]
    sc_to_se_encrypted_vector: int
    se_to_client_vector: int


def bandwidth_estimate(L: int, modulus_bits: int, backend: str = "transparent") -> BandwidthReport:
    """Closed-form leg sizes: L * 2*ceil(modulus_bits/8) per encrypted
    vector, 8 bytes per plain fixed-point entry."""
    if L < 0 or modulus_bits < 0:
        raise ValueError("sizes must be non-negative")
    width = 2 * math.ceil(modulus_bits / 8)
    vec = L * width
    return BandwidthReport(
        client_to_sc_encrypted_vector=vec,
        client_to_sc_proof=None,
        sc_to_se_encrypted_vector=vec,
        se_to_client_vector=8 * L,
    )


def measure_bandwidth(
    ek: paillier.PaillierPublicKey,
    L: int,
    live_submission_bytes: Optional[int] = None,
) -> BandwidthReport:
    """Serialize real frames (zero-valued payloads) and measure the legs.

    Ciphertext widths are value-independent, so a zero-valued frame has
    exactly the size of a live one; this keeps measurement honest at
    sizes where actual encryption would take minutes. When a live
    submission frame size is supplied, the proof leg is derived from it;
    transparent proofs grow with the circuit, unlike succinct ones.
    """
    zero = paillier.zero_ciphertext(ek)
    sub = ClientSubmission(client_id=0, c_ts=zero, c_h=[zero] * L, proof=None)
    sub_bytes = len(serialize_submission(sub, ek))
    bc = ModelBroadcast(round_index=1, beta_raw=[0] * L, g_star_raw=[0] * L)
    bc_bytes = len(serialize_broadcast(bc))
    width = ek.ciphertext_bytes
    vec = L * width
    # frame(5) + id(4) + c_ts(width) + count(4) + vector + proof frame
    fixed = 5 + 4 + width + 4 + vec
    assert sub_bytes == fixed + 5  # empty proof header is 5 bytes
    proof_bytes = None
    if live_submission_bytes is not None:
        proof_bytes = live_submission_bytes - fixed
    return BandwidthReport(
        client_to_sc_encrypted_vector=vec,
        client_to_sc_proof=proof_bytes,
        sc_to_se_encrypted_vector=vec,
        se_to_client_vector=bc_bytes,
    )


# -- timing table -------------------------------------------------------------

def timing_cells(runs: Sequence[tuple[int, Sequence[MetricsRecord]]]) -> dict[str, list[float]]:
    """Table cells in seconds: per-round means of the slowest-client phase
    times, one column per run; Total is the column sum of the others."""
    if not runs:
        raise ValueError("need at least one run")
    cells: dict[str, list[float]] = {row: [] for row in TIMING_ROWS}
    for _, records in runs:
        if not records:
            raise ValueError("each run needs at least one round")
        phases = {
            "Client Compute": float(np.mean([m.client_compute for m in records])),
            "Client Encrypt": float(np.mean([m.client_encrypt for m in records])),
            "Client Prove": float(np.mean([m.client_prove for m in records])),
            "Server S_C Compute": float(np.mean([m.sc_compute for m in records])),
            "Server S_C Verify": float(np.mean([m.sc_verify for m in records])),
            "Server S_E Decrypt": float(np.mean([m.se_decrypt for m in records])),
        }
        phases["Total"] = sum(phases.values())
        for row in TIMING_ROWS:
            cells[row].append(phases[row])
    return cells


def timing_table(runs: Sequence[tuple[int, Sequence[MetricsRecord]]]) -> str:
    """Render phase timings: one column per parameter count, the fixed
    seven rows, slowest-client convention."""
    cols = [str(n) for n, _ in runs]
    cells = timing_cells(runs)
    name_w = max(len(r) for r in TIMING_ROWS)
    col_w = max(9, max(len(c) for c in cols) + 2)
    lines = ["Step".ljust(name_w) + "".join(c.rjust(col_w) for c in cols)]
    for row in TIMING_ROWS:
        lines.append(row.ljust(name_w) + "".join(f"{v:{col_w}.4f}" for v in cells[row]))
    return "\n".join(lines)


def timing_table_csv(runs: Sequence[tuple[int, Sequence[MetricsRecord]]]) -> str:
    table = timing_table(runs).splitlines()
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = table[0]
    writer.writerow(["Step"] + [str(n) for n, _ in runs])
    for line, row in zip(table[1:], TIMING_ROWS):
        vals = line[len(row):].split()
        writer.writerow([row] + vals)
    return buf.getvalue()


# -- runner -------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig) -> tuple[list[RoundReport], list[MetricsRecord], BandwidthReport]:
    """Run one experiment end to end; deterministic apart from timings."""
    datasets, d_star = cfg.build_data()
    pconf = cfg.protocol_config()
    se = EncryptionServer(pconf, d_star, cfg.seed)
    clients = [Client(i, datasets[i], cfg.seed) for i in range(cfg.clients)]
    apply_attacks(cfg.attacks, clients)
    reports = run_training(se, clients, cfg.rounds)
    records = _records_from_reports(reports, pconf.fp.scale)
    live = max(reports[0].submission_bytes.values()) if reports else None
    bandwidth = measure_bandwidth(se.ek, pconf.vector_len, live_submission_bytes=live)
    if cfg.out_dir:
        _write_outputs(cfg, records, bandwidth)
    return reports, records, bandwidth


def _write_outputs(cfg: ExperimentConfig, records: list[MetricsRecord], bw: BandwidthReport) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "metrics.jsonl"), "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    with open(os.path.join(cfg.out_dir, "config.ini"), "w") as fh:
        fh.write(echo_config(cfg))
    with open(os.path.join(cfg.out_dir, "summary.csv"), "w") as fh:
        fh.write(timing_table_csv([(cfg.vector_len(), records)]))
        writer = csv.writer(fh)
        writer.writerow([])
        writer.writerow(["final_loss", records[-1].loss if records else ""])
        writer.writerow(["client_to_sc_encrypted_vector_bytes", bw.client_to_sc_encrypted_vector])
        writer.writerow(["client_to_sc_proof_bytes", bw.client_to_sc_proof])
        writer.writerow(["sc_to_se_encrypted_vector_bytes", bw.sc_to_se_encrypted_vector])
        writer.writerow(["se_to_client_vector_bytes", bw.se_to_client_vector])


def load_metrics(out_dir: str) -> tuple[int, list[MetricsRecord]]:
    """Read back a run's metrics.jsonl plus its parameter count."""
    parser = configparser.ConfigParser()
    parser.read(os.path.join(out_dir, "config.ini"))
    cfg = ExperimentConfig()
    params = int(parser.get("run", "params", fallback=cfg.params))
    model = parser.get("training", "model", fallback="linear")
    hidden = int(parser.get("training", "hidden", fallback=cfg.hidden))
    length = TinyMLP(hidden).param_len(params) if model == "mlp" else params
    records = []
    with open(os.path.join(out_dir, "metrics.jsonl")) as fh:
        for line in fh:
            d = json.loads(line)
            d["ts_norm_per_client"] = {int(k): v for k, v in d["ts_norm_per_client"].items()}
            d["submission_bytes"] = {int(k): v for k, v in d["submission_bytes"].items()}
            records.append(MetricsRecord(**d))
    return length, records
