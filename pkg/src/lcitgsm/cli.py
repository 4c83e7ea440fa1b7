"""Command line front end: ``lcitgsm {map-table,simulate,bounds,complexity}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bounds import METHODS, bound_curve
from .config import ConfigError, emit_csv, parse_config
from .detectors import DETECTORS, complexity_model
from .harness import sweep
from .mapping import build_book, mapping_table

log = logging.getLogger("lcitgsm")


def complexity_rows(scenario, nt_min: int = 2):
    """Per-detector multiplication counts for Nt = nt_min .. scenario.nt."""
    c = scenario.constellation
    rows = []
    for nt in range(nt_min, scenario.nt + 1):
        book = build_book(scenario.scheme, nt, scenario.na)
        n, M, nr = book.n, c.order, scenario.nr
        rows.append([nt, n, "mld", complexity_model("mld", M, nr, nt, n)])
        rows.append([nt, n, "tmld", complexity_model("tmld", M, nr, nt, n)])
        rows.append([nt, n, "dmld", complexity_model("dmld", M, nr, nt, n, kind=c.kind)])
        if scenario.na is not None and scenario.na <= nt:
            rows.append([nt, n, "gsm", complexity_model("gsm", M, nr, nt, na=scenario.na)])
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("settings", nargs="*", metavar="key=value",
                        help="scenario settings, e.g. scheme=lut nt=4 nr=4 mod=qpsk snr=0:2:20")
    common.add_argument("--config", help="file of key=value settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="write CSV here instead of standard output")
    common.add_argument("--detector", choices=DETECTORS)
    common.add_argument("--tmld-c", type=float)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--method", choices=METHODS, default="quadrature",
                        help="integral evaluation for the improved bound")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on standard error")

    parser = argparse.ArgumentParser(prog="lcitgsm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("map-table", parents=[common], help="bit -> (active antennas, symbol) table")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo BER sweep")
    sub.add_parser("bounds", parents=[common], help="classic and improved union bounds")
    sub.add_parser("complexity", parents=[common], help="real multiplications per detection")
    return parser


def run(argv=None) -> str:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    text += "\n" + " ".join(args.settings)
    scenario = parse_config(text, seed=args.seed, detector=args.detector, tmld_c=args.tmld_c)

    if args.command == "map-table":
        out = emit_csv(mapping_table(scenario.book, scenario.constellation))
    elif args.command == "simulate":
        out = emit_csv(sweep(scenario, workers=args.workers, bound_method=args.method))
    elif args.command == "bounds":
        out = emit_csv(bound_curve(scenario.book, scenario.constellation, scenario.nr,
                                   scenario.snr_db, args.method))
    else:
        out = emit_csv(complexity_rows(scenario))

    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return out


def main(argv=None) -> int:
    try:
        run(argv)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
