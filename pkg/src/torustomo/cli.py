"""Command-line experiment runner.

Subcommands: crofton, homogenize, volume-bound, semicontinuity, proof-trace,
barcode.  Each writes <experiment>.csv and <experiment>.summary.json into the
output directory and exits 0 iff every assertion row passed (2 on config or
usage errors, 3 on a DEGENERATE barcode input).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import _kernels
from .config import field_from_config, load_config
from .experiments import GATED, RUNNERS, run_gate
from .persistence import DegenerateFieldError, barcode
from .report import Report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _build_parser():
    parser = argparse.ArgumentParser(prog="torustomo",
                                     description="Crofton / barcode verification experiments")
    parser.add_argument("--config", help="YAML config overriding the built-in defaults")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=None, help="random seed override")
    parser.add_argument("--deterministic", action="store_true",
                        help="fix summation order; runs are bit-reproducible per seed")
    parser.add_argument("--trace", action="store_true",
                        help="emit per-sample Crofton records for the first integral")
    parser.add_argument("--skip-gate", action="store_true",
                        help="do not run the reduced gate before gated experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sub.add_parser(name)
    sub.add_parser("barcode")
    return parser


def _run_barcode(cfg, out_dir):
    import csv as _csv

    bcfg = cfg["barcode"]
    field = field_from_config(bcfg["field"])
    rep = Report("barcode")
    os.makedirs(out_dir, exist_ok=True)
    try:
        bc = barcode(field, int(bcfg["resolution"]))
    except DegenerateFieldError as exc:
        rep.meta["status"] = "DEGENERATE"
        rep.check_true("morse_input", False, reason=str(exc))
        rep.write(out_dir)
        print(f"barcode: DEGENERATE ({exc})")
        return EXIT_DEGENERATE
    with open(os.path.join(out_dir, "barcode_bars.csv"), "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["length", "is_infinite"])
        writer.writerows(bc.to_csv_rows())
    rep.add_info("bars", finite=len(bc.finite_lengths), infinite=bc.n_infinite,
                 shortest=bc.shortest_bar())
    rep.check_eq("infinite_bars", bc.n_infinite, 2 ** field.dimension)
    rep.write(out_dir)
    print(f"barcode: {len(bc.finite_lengths)} finite bars, {bc.n_infinite} infinite")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg["seed"] = args.seed

    if args.command == "barcode":
        return _run_barcode(cfg, args.out)

    if args.command in GATED and cfg.get("gate", {}).get("enabled", True) and not args.skip_gate:
        if not run_gate(cfg):
            print("gate failed: crofton suite / proof trace must pass first", file=sys.stderr)
            return EXIT_FAIL

    if args.trace and args.command == "crofton":
        os.makedirs(args.out, exist_ok=True)
        cfg["crofton"]["trace_path"] = os.path.join(args.out, "crofton_samples.csv")

    runner = RUNNERS[args.command]
    report = runner(cfg, seed=cfg["seed"])
    report.meta.update({
        "seed": cfg["seed"],
        "deterministic": bool(args.deterministic),
        "backend": _kernels.backend_name(),
    })
    csv_path, json_path = report.write(args.out)
    summary = report.summary()
    print(json.dumps({k: summary[k] for k in ("experiment", "pass", "rows", "worst_margin")}))
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
