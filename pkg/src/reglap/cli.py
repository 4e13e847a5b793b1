"""Experiment CLI.

    reglap-xp <concentration|core|residual|detection|cutnorm>
        [--config FILE] [--out DIR] [--seed U64] [--replicates K]
        [--threads K] [--svg]

Config files are plain-text key-value (UTF-8, '#' comments, comma- or
space-separated lists); command-line flags override config values.
"""
import argparse
import sys

from .experiments import EXPERIMENTS, SweepConfig, emit_report, parse_config_file, run_sweep


def build_parser():
    parser = argparse.ArgumentParser(prog="reglap-xp",
                                     description="Monte Carlo experiment sweeps")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key-value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--svg", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.config:
        cfg = parse_config_file(args.config, experiment=args.experiment)
    else:
        cfg = SweepConfig(experiment=args.experiment)
    for key in ("seed", "replicates", "threads", "out"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.svg:
        cfg.svg = True
    if cfg.out is None:
        cfg.out = f"reglap-{cfg.experiment}"
    records = run_sweep(cfg)
    if not records:
        print("no records produced (all grid points skipped)", file=sys.stderr)
        return 1
    written = emit_report(records, cfg.out, svg=cfg.svg)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
