#!/usr/bin/env python3
"""Write the bundled evaluation corpus (10 synthetic + 5 natural images)."""
import argparse

from epf.corpus import NATURAL_MAX_SIDE, SYNTHETIC_SIZE, build_default_corpus


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="corpus", help="output directory")
    parser.add_argument("--natural-max-side", type=int, default=NATURAL_MAX_SIDE)
    parser.add_argument("--synthetic-size", type=int, default=SYNTHETIC_SIZE)
    args = parser.parse_args()
    paths = build_default_corpus(args.out, args.natural_max_side, args.synthetic_size)
    for p in paths:
        print(p)


if __name__ == "__main__":
    main()
