"""kpplab-viz: render figures from kpplab run artifacts.

Subcommands:
  delay <trace.csv> <report.txt> -o out.png
  profile <snap1.csv> <snap2.csv> [...] --wave wave.csv -o out.png
  amplitude <trace.csv> <report.txt> -o out.png
"""

import argparse
import sys

from .io import SchemaError
from .plots import plot_amplitude, plot_delay, plot_profile


def build_parser():
    p = argparse.ArgumentParser(prog="kpplab-viz", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("delay", help="front delay versus log t with fit overlay")
    pd.add_argument("trace")
    pd.add_argument("report")
    pd.add_argument("-o", "--out", required=True)

    pp = sub.add_parser("profile", help="front-frame snapshots against the wave")
    pp.add_argument("snapshots", nargs="+")
    pp.add_argument("--wave", required=True)
    pp.add_argument("-o", "--out", required=True)

    pa = sub.add_parser("amplitude", help="amplitude law at the discontinuity")
    pa.add_argument("trace")
    pa.add_argument("report")
    pa.add_argument("-o", "--out", required=True)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "delay":
            out = plot_delay(args.trace, args.report, args.out)
        elif args.command == "profile":
            out = plot_profile(args.snapshots, args.wave, args.out)
        else:
            out = plot_amplitude(args.trace, args.report, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"figure written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
