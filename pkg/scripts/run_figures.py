#!/usr/bin/env python3
"""Run every analysis pipeline over a corpus directory in one go.

Produces profile.csv, sweep.csv, attrs.csv, tradeoff.csv, distances.csv,
embedding.csv and per-command report.json files under --out/<command>/.
"""
import argparse
import sys

from epf.cli import main as epf_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", default="figures")
    parser.add_argument("--filters", default=None)
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument("--cluster-levels", default="0.25,0.5,0.75")
    args = parser.parse_args()

    common = ["--corpus", args.corpus, "--parallel", str(args.parallel)]
    if args.filters:
        common += ["--filters", args.filters]
    for command, extra in (
        ("profile", []),
        ("sweep", []),
        ("attrs", []),
        ("tradeoff", []),
        ("cluster", ["--levels", args.cluster_levels]),
    ):
        rc = epf_main([command, *common, "--out", f"{args.out}/{command}", *extra])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
