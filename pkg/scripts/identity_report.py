#!/usr/bin/env python3
"""Demo: run the full internal-consistency report for a model.

Prints every invariant residual (ladder equations, factorization identity,
transform-vs-quadrature comparisons, twisted-chain identities) for a builtin
model name, a JSON model file, or a batch of randomized models.

Usage:
    python3 scripts/identity_report.py [--model onoff]
    python3 scripts/identity_report.py --random 5 --seed 0
"""

import argparse

from ruinflow.cli import _load
from ruinflow.report import invariant_report


def show(model, label: str) -> None:
    print(f"== {label} ==")
    rec = invariant_report(model)
    width = max(len(k) for k in rec)
    for key, value in rec.items():
        print(f"  {key:<{width}} : {value:.6e}")
    print()


def random_model(seed: int):
    import sys
    from pathlib import Path

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
    from conftest import make_random_model

    return make_random_model(seed)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default=None,
                    help="builtin name or path to a JSON model file")
    ap.add_argument("--random", type=int, default=0,
                    help="also report on N randomized admissible models")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.model is None and args.random == 0:
        args.model = "onoff"

    if args.model is not None:
        show(_load(args.model), args.model)

    for k in range(args.random):
        show(random_model(args.seed + k), f"random seed {args.seed + k}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
