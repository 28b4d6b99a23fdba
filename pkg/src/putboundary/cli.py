"""Command-line interface: boundaries, prices, parameter functions and validation as CSV.

Exit codes: 0 success, 2 usage or parameter error, 3 model-validity error,
4 solver non-convergence, 5 validation failure.
"""
from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile

import numpy as np

from .closed_form import Family, ModelSpec, closed_form_boundary, parameter_function
from .errors import (ContractError, DomainError, ModelValidityError, PutBoundaryError,
                     SolverError)
from .numerics import TimeGrid
from .pricing import american_put_ladder, spot_ladder
from .validation import SUITES, default_spec, run_suite
from .volterra import SolverConfig, solve_standard_boundary, solve_strike_linear

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4, 5

# option name -> type, for both flags and config-file keys
PARAMS = {"model": str, "r": float, "delta": float, "sigma": float, "K": float, "KT": float,
          "T": float, "m": float, "grid": int, "spot": float, "t": float, "seed": int,
          "out": str, "suite": str}


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return format(float(v), ".12g")


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (p.strip() for p in line.partition("="))
            if not sep or key not in PARAMS:
                raise UsageError(f"{path}:{lineno}: expected 'key = value' with a known key")
            try:
                values[key] = PARAMS[key](value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key!r}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--model", choices=[f.value for f in Family])
    for name in ("r", "delta", "sigma", "K", "KT", "T", "m", "spot", "t"):
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--grid", type=int, help="number of time nodes (default 512)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default: standard output)")

    parser = argparse.ArgumentParser(prog="putboundary",
                                     description="American put exercise boundaries and prices.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("boundary", parents=[common], help="exercise boundary as CSV t,b")
    sub.add_parser("price", parents=[common], help="price decomposition as CSV")
    sub.add_parser("params", parents=[common], help="time-dependent parameter as CSV t,param")
    val = sub.add_parser("validate", parents=[common], help="run a validation suite")
    val.add_argument("--suite", default=None, help=f"one of {', '.join(SUITES)}")
    val.add_argument("--paths", type=int, default=200_000, help="Monte Carlo paths")
    return parser


def resolve(args) -> dict:
    """Merge config-file values with flags (flags win)."""
    opts = read_config(args.config) if args.config else {}
    for key in PARAMS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def make_spec(opts: dict) -> ModelSpec:
    if "model" not in opts:
        raise UsageError("--model is required")
    fam = Family(opts["model"])

    def need(*names):
        missing = [n for n in names if n not in opts]
        if missing:
            raise UsageError(f"model {fam.value} needs --{', --'.join(missing)}")
        return [opts[n] for n in names]

    allowed = {Family.STANDARD: {"r", "delta", "sigma", "K"}, Family.RATE: {"delta", "sigma", "K"},
               Family.DIVIDEND: {"r", "sigma", "K"}, Family.VOL: {"r", "K"},
               Family.STRIKE: {"r", "sigma", "KT", "m"}}[fam]
    extra = {"r", "delta", "sigma", "K", "KT", "m"} & set(opts) - allowed
    if extra:
        raise UsageError(f"model {fam.value} does not take --{', --'.join(sorted(extra))}")
    if fam is Family.STANDARD:
        r, d, s, K, T = need("r", "delta", "sigma", "K", "T")
        return ModelSpec.standard(K, T, r, d, s)
    if fam is Family.RATE:
        s, K, T = need("sigma", "K", "T")
        return ModelSpec.rate(K, T, s, opts.get("delta", 0.0))
    if fam is Family.DIVIDEND:
        r, s, K, T = need("r", "sigma", "K", "T")
        return ModelSpec.dividend(K, T, r, s)
    if fam is Family.VOL:
        r, K, T = need("r", "K", "T")
        return ModelSpec.vol(K, T, r)
    r, s, KT, T = need("r", "sigma", "KT", "T")
    return ModelSpec.strike(KT, T, r, s, opts.get("m", 0.0))


def _grid(spec, opts) -> TimeGrid:
    n = opts.get("grid", 512)
    if n < 2:
        raise UsageError("--grid must be at least 2")
    return TimeGrid.geometric(spec.T, n) if spec.family is Family.STANDARD else TimeGrid.uniform(spec.T, n)


def _boundary_curve(spec, opts):
    grid = _grid(spec, opts)
    if spec.family is Family.STANDARD:
        return solve_standard_boundary(spec, SolverConfig(grid=grid))
    return closed_form_boundary(spec, grid)


def cmd_boundary(opts) -> str:
    spec = make_spec(opts)
    bnd = _boundary_curve(spec, opts)
    rows = ["t,b"] + [f"{_fmt(t)},{_fmt(b)}" for t, b in zip(bnd.grid.nodes, bnd.values)]
    return "\n".join(rows) + "\n"


def cmd_price(opts) -> str:
    spec = make_spec(opts)
    t = opts.get("t", 0.0)
    bnd = _boundary_curve(spec, opts)
    spots = [opts["spot"]] if "spot" in opts else spot_ladder(spec, bnd, t)
    rows = ["x,european,premium,american"]
    for p in american_put_ladder(spec, bnd, t, spots):
        rows.append(",".join(_fmt(v) for v in (p.x, p.european, p.premium, p.american)))
    return "\n".join(rows) + "\n"


def cmd_params(opts) -> str:
    spec = make_spec(opts)
    if spec.family is Family.STANDARD:
        raise UsageError("the standard model has constant parameters")
    grid = TimeGrid.uniform(spec.T, opts.get("grid", 512))
    t = grid.nodes
    if spec.family is Family.STRIKE and spec.m != 0:
        cfg = SolverConfig(grid=TimeGrid.geometric(spec.T, max(opts.get("grid", 512), 512)))
        values = solve_strike_linear(spec, cfg)(t)
    else:
        if spec.family in (Family.RATE, Family.DIVIDEND):
            t = t[:-1]  # r and delta diverge at maturity
        values = parameter_function(spec)(t)
    rows = ["t,param"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(t, np.atleast_1d(values))]
    return "\n".join(rows) + "\n"


def cmd_validate(opts, paths) -> tuple[str, bool]:
    suite = opts.get("suite") or "all"
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if "model" in opts:
        specs = [make_spec(opts) if len(opts.keys() - {"model", "suite", "seed", "out"})
                 else default_spec(opts["model"])]
    else:
        specs = [default_spec(f) for f in Family]
    report = run_suite(suite, specs, seed=opts.get("seed", 42), mc_paths=paths)
    return report.to_text(), report.passed


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".putboundary-", suffix=".tmp")
    try:
        with io.open(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    code = EXIT_OK
    try:
        opts = resolve(args)
        if args.command == "boundary":
            text = cmd_boundary(opts)
        elif args.command == "price":
            text = cmd_price(opts)
        elif args.command == "params":
            text = cmd_params(opts)
        else:
            text, ok = cmd_validate(opts, args.paths)
            code = EXIT_OK if ok else EXIT_VALIDATION
    except (UsageError, DomainError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelValidityError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PutBoundaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if opts.get("out"):
        try:
            write_atomic(opts["out"], text)
        except OSError as exc:
            print(f"error: cannot write {opts['out']}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
