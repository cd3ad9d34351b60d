"""``pac-lab``: run one seeded experiment and write its CSV.

Exit status is 0 when every verdict passes, 1 when any fails and 2 on a
parameter or I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import DomainError
from .experiments import CSV_COLUMNS, EXPERIMENTS, ExperimentConfig, run


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pac-lab", description=__doc__.splitlines()[0].strip("`: "))
    ap.add_argument("--list-experiments", action="store_true", help="print the experiment map and exit")
    sub = ap.add_subparsers(dest="experiment", metavar="<experiment>")
    for name, exp in EXPERIMENTS.items():
        params = ", ".join(f"{k}={v[1]}" for k, v in exp.params.items())
        sp = sub.add_parser(name, help=exp.claim, description=exp.runner.__doc__,
                            epilog=f"parameters (defaults): {params}.  CSV columns: experiment, trial, "
                                   f"seed, {CSV_COLUMNS[name]}.",
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", type=Path, help="flat 'key = value' file, '#' comments")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter; repeatable")
    return ap


def list_experiments() -> str:
    w = max(map(len, EXPERIMENTS))
    return "\n".join(f"{name:<{w}}  {exp.claim}" for name, exp in EXPERIMENTS.items())


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    if args.list_experiments:
        print(list_experiments())
        return 0
    if args.experiment is None:
        ap.print_usage(sys.stderr)
        return 2
    try:
        text = args.config.read_text() if args.config else ""
        for item in args.set:
            if "=" not in item:
                raise DomainError(f"--set expects KEY=VALUE, got {item!r}")
            text += "\n" + item
        cfg = ExperimentConfig.from_text(text, args.experiment)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = str(args.out)
        res = run(cfg)
        data = res.to_csv()
        if cfg.out:
            Path(cfg.out).write_text(data)
        else:
            sys.stdout.write(data)
    except (ValueError, OSError) as exc:
        print(f"pac-lab: error: {exc}", file=sys.stderr)
        return 2
    print(res.report(), file=sys.stderr)
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
