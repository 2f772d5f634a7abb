#!/usr/bin/env python3
"""Regenerate the bundled synthetic fixture trio deterministically."""

import argparse
from pathlib import Path

from chaintrend import synth


def main() -> None:
    default_out = Path(__file__).resolve().parent.parent / "fixtures"
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=default_out, type=Path)
    ap.add_argument("--days", type=int, default=120)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    paths = synth.fixture_bundle(args.out, n_days=args.days, seed=args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
