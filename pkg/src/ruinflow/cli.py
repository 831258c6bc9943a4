"""Command-line surface.

Subcommands: validate, drift, ladder, decay, hitting, asymptotics, fluid,
simulate.  Results go to --out (default stdout) as a CSV table
(``--format csv``) or a JSON record (``--format record``); numbers use the
shortest round-trip decimal form.  Exit codes: 0 success, 1 computation
error, 2 validation/parse error; errors print one line
``ERROR:<code>: message`` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .errors import RuinFlowError, ValidationError
from .kernel import make_context
from .ladder import solve_ladder
from .model import MapModel, load_model, model_from_dict
from .renewal import asymptote_match, asymptotics, fluid_tail, solve_hitting
from .report import invariant_report
from .simulator import Estimator
from .spectral import decay_rate, perron

BUILTIN_MODELS = {
    "cl": {
        "states": 1,
        "v": [-1.0],
        "C": [[-0.5]],
        "D": [[0.5]],
        "jumps": [
            {"from": 0, "to": 0,
             "mixture": [{"weight": 1.0, "kind": "exp", "params": {"rate": 1.0}}]}
        ],
    },
    "onoff": {
        "states": 2,
        "v": [-1.0, 1.0],
        "C": [[-1.0, 1.0], [2.0, -2.0]],
        "D": [[0.0, 0.0], [0.0, 0.0]],
        "jumps": [],
    },
}


def _load(name: str) -> MapModel:
    if name in BUILTIN_MODELS:
        return model_from_dict(BUILTIN_MODELS[name])
    return load_model(name)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _flatten(prefix: str, obj, rows: list):
    obj = _jsonable(obj)
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list):
        if all(not isinstance(v, (list, dict)) for v in obj):
            for i, v in enumerate(obj):
                rows.append((f"{prefix}[{i}]", v))
        else:
            for i, v in enumerate(obj):
                _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def _emit(record, table, args):
    """Write either the JSON record or the CSV table (key,value fallback)."""
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "record":
            json.dump(_jsonable(record), out, indent=2)
            out.write("\n")
        elif table is not None:
            header, rows = table
            out.write(",".join(header) + "\n")
            for row in rows:
                out.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            rows: list = []
            _flatten("", record, rows)
            out.write("key,value\n")
            for k, v in rows:
                out.write(f"{k},{_fmt(v)}\n")
    finally:
        if args.out:
            out.close()


def _maybe_report(model, args):
    if getattr(args, "report", False):
        return invariant_report(model)
    return None


def cmd_validate(args) -> int:
    model = _load(args.model)
    part = model.partition
    record = {
        "ok": True,
        "states": model.n,
        "down_states": list(part.minus),
        "up_states": list(part.plus),
        "drift": model.mean_drift(),
    }
    record = _maybe_report(model, args) or record
    _emit(record, None, args)
    return 0


def cmd_drift(args) -> int:
    model = _load(args.model)
    record = {
        "drift": model.mean_drift(),
        "stationary": model.stationary_dist(),
        "jump_mean_rate": float(
            model.stationary_dist() @ model.jump_mean_matrix().sum(axis=1)
        ),
    }
    record = _maybe_report(model, args) or record
    _emit(record, None, args)
    return 0


def cmd_ladder(args) -> int:
    model = _load(args.model)
    lad = solve_ladder(model)
    record = {
        "K": lad.K,
        "L": lad.L,
        "kminus": lad.kminus,
        "Qdual": lad.Qdual,
        "Rdual": lad.Rdual,
        "residual": lad.residual,
    }
    record = _maybe_report(model, args) or record
    _emit(record, None, args)
    return 0


def cmd_decay(args) -> int:
    model = _load(args.model)
    res = asymptotics(model)
    record = {"alpha": res.alpha, "prefactor_total": res.prefactor_total,
              "eta_alpha": res.eta_alpha}
    record = _maybe_report(model, args) or record
    _emit(record, None, args)
    return 0


def cmd_hitting(args) -> int:
    model = _load(args.model)
    ctx = make_context(model)
    table = solve_hitting(model, args.xmax, args.h, ctx)
    n = model.n
    header = ["x"] + [f"psi_{i}_{j}" for i in range(n) for j in range(n)] + [
        f"rowsum_{i}" for i in range(n)
    ]
    rows = []
    tot = table.total
    for k, x in enumerate(table.x):
        rows.append([float(x)] + [float(table.psi[k, i, j])
                                  for i in range(n) for j in range(n)]
                    + [float(tot[k, i]) for i in range(n)])
    record = {"x": table.x, "psi": table.psi, "rowsum": tot, "step": table.step}
    record = _maybe_report(model, args) or record
    _emit(record, (header, rows), args)
    return 0


def cmd_asymptotics(args) -> int:
    model = _load(args.model)
    res = asymptotics(model)
    record = _maybe_report(model, args) or res
    _emit(record, None, args)
    return 0


def cmd_fluid(args) -> int:
    model = _load(args.model)
    ft = fluid_tail(model)
    record = _maybe_report(model, args) or ft
    _emit(record, None, args)
    return 0


def cmd_simulate(args) -> int:
    model = _load(args.model)
    sim = Estimator(model, seed=args.seed)
    start = args.start
    if start is None:
        part = model.partition
        start = part.minus[0] if part.minus else 0
    est = sim.estimate_hitting(args.xmax, start, args.reps, eps=args.tol)
    record = {
        "level": args.xmax,
        "start": start,
        "reps": args.reps,
        "seed": args.seed,
        "total": est["total"],
        "by_state": est["by_state"],
        "truncation_bias_bound": est["eps"],
    }
    record = _maybe_report(model, args) or record
    _emit(record, None, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruinflow",
        description="Upward hitting probabilities of a Markov additive process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--model", required=True,
                       help="model file path or a built-in name (cl, onoff)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "record"), default="csv")
        p.add_argument("--report", action="store_true",
                       help="emit the full invariant-suite record instead")
        p.add_argument("--tol", type=float, default=1e-13 if name != "simulate"
                       else 1e-6)
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, "check a model file and print its shape")
    add("drift", cmd_drift, "mean drift and stationary distribution")
    add("ladder", cmd_ladder, "first up-crossing matrices K, L and duals")
    add("decay", cmd_decay, "decay rate alpha and total prefactor")
    ph = add("hitting", cmd_hitting, "hitting probability table on a grid")
    ph.add_argument("--xmax", type=float, required=True)
    ph.add_argument("--h", type=float, required=True, dest="h")
    add("asymptotics", cmd_asymptotics, "full exponential asymptotics record")
    add("fluid", cmd_fluid, "stationary buffer tail coefficients")
    ps = add("simulate", cmd_simulate, "Monte Carlo hitting estimate")
    ps.add_argument("--xmax", type=float, required=True, help="target level")
    ps.add_argument("--start", type=int, default=None)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--reps", type=int, default=100_000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"ERROR:{exc.code}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"ERROR:Parse: {exc}", file=sys.stderr)
        return 2
    except RuinFlowError as exc:
        print(f"ERROR:{exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
