"""Command line front end: ``gramqfi eval | sweep | validate``.

Exit codes: 0 success, 1 failed validation, 2 usage error, 3 parameter
outside the model domain, 4 numerical failure, 5 I/O failure.
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import cats
from .cats import CatConfig, LossyConfig, SqueezedConfig
from .engine import qfi, scalar_qcrb
from .errors import (
    BadWeight,
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    ModelInvariantViolation,
    RankChange,
    SingularQfi,
    SolverFailure,
)

log = logging.getLogger("gramqfi")

MODELS = ("cat-params", "cat-lossy", "displacement", "squeezed")
PARAMS = ("c", "alpha", "alpha0", "gammabar", "r", "epsilon")
TOL_ENV = "GRAMQFI_TOL"

EXIT_FAILED, EXIT_USAGE, EXIT_DOMAIN, EXIT_SOLVER, EXIT_IO = 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _require(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n for n in missing))


def _qfi_fields(record, result, slds):
    names = result.parameter_names
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if j >= i:
                record[f"H_{a}_{b}"] = float(result.H[i, j])
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if j > i:
                record[f"Gamma_{a}_{b}"] = float(result.Gamma[i, j])
    for name, res, defi in zip(names, slds.residuals, slds.rank_deficiencies):
        record[f"residual_{name}"] = float(res)
        record[f"rank_deficiency_{name}"] = int(defi)
    record["imaginary_leakage"] = float(result.imaginary_leakage)


def _bound(record, H, weight, copies):
    try:
        record["bound"] = scalar_qcrb(H, weight, copies).bound
    except SingularQfi:
        record["bound"] = None


def evaluate(model, params, weight=None, copies=1):
    """One flat record of QFI quantities for ``model`` at ``params``.

    Sweeps and single evaluations both go through here, so a sweep row is
    bit-identical to the matching single-point evaluation.
    """
    p = {k: v for k, v in params.items() if v is not None}
    rec = {"model": model}
    if model == "cat-params":
        _require(p, "c", "alpha")
        cfg = CatConfig(p["c"], p["alpha"])
        if cfg.c >= 1.0:
            raise RankChange("c = 1: the state changes rank and H_cc diverges")
        result, slds = qfi(cats.build_alpha_model(cfg))
        rec.update(c=cfg.c, alpha=cfg.alpha, nbar=cats.mean_photon_cat(cfg))
        _qfi_fields(rec, result, slds)
        H = result.H
    elif model == "cat-lossy":
        _require(p, "alpha0", "gammabar")
        lcfg = LossyConfig(p["alpha0"], p["gammabar"])
        st = cats.lossy_map(lcfg)
        result, slds = cats.lossy_cat_qfi(lcfg)
        rec.update(
            alpha0=lcfg.alpha0,
            gammabar=lcfg.gammabar,
            c=st.c,
            alpha=st.alpha,
            nbar=cats.mean_photon_cat(st),
            nbar0=cats.mean_photon_pure_cat(lcfg.alpha0),
        )
        _qfi_fields(rec, result, slds)
        H = result.H
    elif model == "displacement":
        if p.get("alpha0") is not None:
            _require(p, "gammabar")
            if p.get("c") is not None or p.get("alpha") is not None:
                raise UsageError("give either (--c, --alpha) or (--alpha0, --gammabar)")
            lcfg = LossyConfig(p["alpha0"], p["gammabar"])
            st = cats.lossy_map(lcfg)
            cfg = CatConfig(st.c, st.alpha, p.get("epsilon", 0.0))
            rec.update(alpha0=lcfg.alpha0, gammabar=lcfg.gammabar,
                       nbar0=cats.mean_photon_pure_cat(lcfg.alpha0))
        else:
            _require(p, "c", "alpha")
            cfg = CatConfig(p["c"], p["alpha"], p.get("epsilon", 0.0))
        result, slds = qfi(cats.build_displacement_model(cfg))
        rec.update(c=cfg.c, alpha=cfg.alpha, epsilon=cfg.epsilon, nbar=cats.mean_photon_cat(cfg))
        rec["H"] = float(result.H[0, 0])
        rec["H_closed_form"] = cats.closed_form_qfi_displacement(cfg)
        _qfi_fields(rec, result, slds)
        H = result.H
    elif model == "squeezed":
        _require(p, "r")
        cfg = SqueezedConfig(p["r"], p.get("gammabar", 0.0))
        H = cats.qfi_squeezed(cfg)
        rec.update(r=cfg.r, gammabar=cfg.gammabar, nbar0=cats.mean_photon_squeezed(cfg.r))
        rec["H"] = H
        rec["H_limit"] = cats.squeezed_limit(cfg.gammabar)
        H = np.array([[H]])
    else:
        raise UsageError(f"unknown model {model!r}")
    _bound(rec, H, weight, copies)
    return rec


# --------------------------------------------------------------------------
# formatting


def fmt(x):
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_safe(rec):
    out = {}
    for k, v in rec.items():
        if isinstance(v, float) and not math.isfinite(v):
            v = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        out[k] = v
    return out


def parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--grid expects start:stop:points, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --grid {text!r}: {exc}") from None
    if points < 2:
        raise UsageError("--grid needs at least 2 points")
    return start, stop, points


def parse_weight(text):
    if text is None:
        return None
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
        return np.array(rows)
    except ValueError as exc:
        raise UsageError(f"bad --weight {text!r}: {exc}") from None


def write_sweep(path, model, sweep_var, grid, fixed, columns, weight=None, copies=1):
    start, stop, points = grid
    values = np.linspace(start, stop, points)
    rows = []
    for v in values:
        params = dict(fixed)
        params[sweep_var] = float(v)
        rec = evaluate(model, params, weight, copies)
        missing = [c for c in columns if c not in rec]
        if missing:
            raise UsageError(f"model {model} has no column(s) {', '.join(missing)}")
        rows.append([rec[c] for c in columns])
    fixed_txt = " ".join(f"{k}={fmt(v)}" for k, v in sorted(fixed.items()) if v is not None)
    lines = [
        f"# model={model} sweep={sweep_var} grid={fmt(start)}:{fmt(stop)}:{points} fixed: {fixed_txt}",
        ",".join(columns),
    ]
    lines += [",".join(fmt(x) for x in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(rows)


# --------------------------------------------------------------------------
# argument parsing


def _add_params(p):
    p.add_argument("--model", choices=MODELS, required=True)
    for name in PARAMS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--weight", help="weight matrix rows, e.g. '1,0;0,1' (default identity)")
    p.add_argument("--copies", type=int, default=1, help="number of probe copies M")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gramqfi",
        description="Quantum Fisher information of noisy cat-state models via Gramian metrics.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate one parameter point")
    _add_params(ev)
    ev.add_argument("--format", choices=("json", "csv"), default="json")

    sw = sub.add_parser("sweep", help="evaluate a 1-D parameter grid and write CSV")
    _add_params(sw)
    sw.add_argument("--sweep", dest="sweep_var", choices=PARAMS, required=True)
    sw.add_argument("--grid", required=True, help="start:stop:points")
    sw.add_argument("--columns", default=None, help="comma separated output columns")
    sw.add_argument("--out", required=True)

    va = sub.add_parser("validate", help="run the self-check suite")
    va.add_argument("--tol", type=float, default=None, help=f"override every tolerance (env {TOL_ENV})")
    va.add_argument("--only", action="append", default=None, help="run only this check (repeatable)")
    va.add_argument("--list", action="store_true", help="list check names and exit")
    return parser


def _params(args):
    return {name: getattr(args, name) for name in PARAMS}


def cmd_eval(args):
    rec = evaluate(args.model, _params(args), parse_weight(args.weight), args.copies)
    if args.format == "json":
        print(json.dumps(_json_safe(rec), indent=2))
    else:
        print(",".join(rec))
        print(",".join(fmt(v) for v in rec.values()))
    return 0


_DEFAULT_COLUMNS = {
    "cat-params": ("nbar", "H_c_c", "H_c_alpha", "H_alpha_alpha", "Gamma_c_alpha"),
    "cat-lossy": ("nbar", "H_gammabar_gammabar", "H_gammabar_alpha0", "H_alpha0_alpha0",
                  "Gamma_gammabar_alpha0"),
    "displacement": ("nbar", "H"),
    "squeezed": ("nbar0", "H"),
}


def cmd_sweep(args):
    fixed = {k: v for k, v in _params(args).items() if v is not None}
    if args.sweep_var in fixed:
        raise UsageError(f"--{args.sweep_var} is swept and cannot also be fixed")
    grid = parse_grid(args.grid)
    cols = args.columns.split(",") if args.columns else [args.sweep_var, *_DEFAULT_COLUMNS[args.model]]
    n = write_sweep(args.out, args.model, args.sweep_var, grid, fixed, cols,
                    parse_weight(args.weight), args.copies)
    log.info("wrote %d rows to %s", n, args.out)
    return 0


def cmd_validate(args):
    from .validation import CHECKS, run_checks

    if args.list:
        print("\n".join(CHECKS))
        return 0
    tol = args.tol
    if tol is None and os.environ.get(TOL_ENV):
        tol = float(os.environ[TOL_ENV])
    try:
        results = run_checks(args.only, tol)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {total:.2f}s")
    return EXIT_FAILED if failed else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    handler = {"eval": cmd_eval, "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except (UsageError, DimensionMismatch) as exc:
        parser.print_usage(sys.stderr)
        print(f"gramqfi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, BadWeight) as exc:
        print(f"gramqfi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SolverFailure, ConvergenceFailure, ModelInvariantViolation) as exc:
        print(f"gramqfi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"gramqfi: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
