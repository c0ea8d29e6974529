"""Command-line experiment runner.

Subcommands:
  run        execute an experiment (config file and/or flags)
  bandwidth  closed-form or frame-measured transmission sizes
  table      render the phase-timing table from saved run directories
"""

from __future__ import annotations

import argparse
import sys

from . import paillier
from .experiment import (
    bandwidth_estimate,
    load_metrics,
    measure_bandwidth,
    parse_config,
    run_experiment,
    timing_table,
)
from .protocol import ConfigError, MODES


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="byzsfl")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="INI config file; flags override it")
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--clients", type=int)
    run.add_argument("--params", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", dest="out_dir", help="output directory")
    run.add_argument(
        "--attack", action="append", dest="attacks", metavar="KIND:IDS[:ARG]",
        help="attach an attack, e.g. sign_flip:1,2 or scale:0:10",
    )
    run.add_argument("--eta", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--paillier-bits", dest="paillier_bits", type=int)
    run.add_argument("--frac-bits", dest="frac_bits", type=int)
    run.add_argument("--word-bits", dest="word_bits", type=int)
    run.add_argument("--grad-word-bits", dest="grad_word_bits", type=int)
    run.add_argument("--examples-per-client", dest="examples_per_client", type=int)
    run.add_argument("--noise-sigma", dest="noise_sigma", type=float)

    bw = sub.add_parser("bandwidth", help="transmission sizes per leg")
    bw.add_argument("--params", type=int, required=True)
    bw.add_argument("--modulus-bits", type=int, default=2048)
    bw.add_argument("--backend", default="transparent")
    bw.add_argument(
        "--measured", action="store_true",
        help="measure serialized frames instead of the closed form",
    )
    bw.add_argument("--seed", type=int, default=0)

    tbl = sub.add_parser("table", help="timing table from saved runs")
    tbl.add_argument("dirs", nargs="+", help="run output directories")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        k: getattr(args, k)
        for k in (
            "mode", "clients", "params", "rounds", "seed", "out_dir", "attacks",
            "eta", "alpha", "paillier_bits", "frac_bits", "word_bits",
            "grad_word_bits", "examples_per_client", "noise_sigma",
        )
    }
    cfg = parse_config(args.config, overrides)
    reports, records, bw = run_experiment(cfg)
    for rec in records:
        print(rec.to_json())
    print()
    print(timing_table([(cfg.vector_len(), records)]))
    print()
    print(f"final loss on reference set: {records[-1].loss:.6g}")
    print(f"accepted last round: {records[-1].accepted}  rejected: {records[-1].rejected}")
    print(f"client->S_C encrypted vector: {bw.client_to_sc_encrypted_vector} B"
          f"  proof: {bw.client_to_sc_proof} B")
    print(f"S_C->S_E encrypted vector: {bw.sc_to_se_encrypted_vector} B")
    if cfg.out_dir:
        print(f"outputs written to {cfg.out_dir}")
    return 0


def _cmd_bandwidth(args: argparse.Namespace) -> int:
    if args.measured:
        ek, _ = paillier.keygen(args.modulus_bits, args.seed)
        bw = measure_bandwidth(ek, args.params)
    else:
        bw = bandwidth_estimate(args.params, args.modulus_bits, args.backend)
    print(f"client->S_C encrypted vector: {bw.client_to_sc_encrypted_vector} B")
    print(f"client->S_C proof: {bw.client_to_sc_proof}")
    print(f"S_C->S_E encrypted vector: {bw.sc_to_se_encrypted_vector} B")
    print(f"S_E->client vector: {bw.se_to_client_vector} B")
    return 0


def _cmd_table(args: argparse.Namespace) -> int:
    runs = [load_metrics(d) for d in args.dirs]
    runs.sort(key=lambda x: x[0])
    print(timing_table(runs))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bandwidth":
            return _cmd_bandwidth(args)
        if args.command == "table":
            return _cmd_table(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
