"""Command-line interface.

Exit codes: 0 success, 1 domain violation, 2 input error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import assemblage as asm
from .decomposer import (
    DEFAULT_RESTARTS, compare_strategies, equal_value_bound, optimize_split, polar_grid, region_boundary,
    resolve_jobs, scan_region,
)
from .errors import BudgetError, ConstraintError, ShapeError, SolverError
from .keyrate import key_rate_lower_bound
from .lhs import esw_upper_bound, steering_weight
from .qubit import RestrictedAssemblage, rebit_canonicalize, to_restricted
from .realization import canonical_realization, induce_assemblage, marginal_entropy_bound, werner_assemblage

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
SANDWICH_TOL = 1e-7


class InputError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, str)):
        return str(v).lower() if isinstance(v, bool) else v
    return format(float(v), ".12g")


def _emit_table(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    if not rows:
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])


def _emit_json(doc, out) -> None:
    json.dump(doc, out, indent=2)
    out.write("\n")


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_assemblage(path: str) -> asm.Assemblage:
    try:
        return asm.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    except ShapeError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_valid(path: str, tol: float) -> asm.Assemblage:
    a = _load_assemblage(path)
    asm.require_valid(a, tol, tol)
    return a


# -- subcommands -------------------------------------------------------------

def cmd_validate(args, out) -> int:
    a = _load_assemblage(args.file)
    report = asm.validate(a, args.tol, args.tol)
    if report.ok:
        _emit_json({"ok": True}, out)
        return EXIT_OK
    _emit_json({"ok": False, "violations": [v.as_dict() for v in report.violations]}, sys.stderr)
    return EXIT_DOMAIN


def _restricted_or_none(a: asm.Assemblage) -> RestrictedAssemblage | None:
    if a.shape != (2, 2, 2):
        return None
    try:
        rb = to_restricted(a)
    except ShapeError:
        return None
    if abs(rb.t0) > 1e-9 or abs(rb.t1) > 1e-9:
        return None
    return rebit_canonicalize(rb)


def bounds_report(a: asm.Assemblage) -> tuple[dict, bool]:
    """All applicable bounds; the flag is False when some bound failed."""
    row: dict = {"s_marginal": marginal_entropy_bound(a)}
    provenance = {"s_marginal": "upper: von Neumann entropy of the marginal"}
    errors = {}
    try:
        row["e_sw"] = esw_upper_bound(a)
        provenance["e_sw"] = "upper: steering weight times entropy of the steerable part's marginal"
    except SolverError as exc:
        row["e_sw"] = None
        errors["e_sw"] = str(exc)
    rb = _restricted_or_none(a)
    if rb is not None:
        row["equal_value"] = equal_value_bound(rb)
        provenance["equal_value"] = "upper: best split into extremal points of equal entropy"
    if a.n_inputs >= 2:
        kr = key_rate_lower_bound(a)
        row["keyrate_lower"] = kr.clamped
        row["keyrate_pair"] = list(kr.pair)
        provenance["keyrate_lower"] = "lower: entropic-uncertainty key rate with Fano terms"
    else:
        row["keyrate_lower"] = None
    uppers = [row[k] for k in ("s_marginal", "e_sw", "equal_value") if row.get(k) is not None]
    lower = row["keyrate_lower"] or 0.0
    row["sandwich"] = bool(lower <= min(uppers) + SANDWICH_TOL)
    row["provenance"] = provenance
    if errors:
        row["errors"] = errors
    return row, not errors


def cmd_bounds(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    row, ok = bounds_report(a)
    _emit_json(row, out)
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_steering_weight(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    res = steering_weight(a)
    doc = {
        "sw": res.sw, "iterations": res.iterations, "gap": res.gap,
        "unsteerable": res.sw <= 1e-7,
        "lhs_states": {
            "".join(map(str, s.assignment)): asm.matrix_to_json(st)
            for s, st in zip(res.lhs_part.strategies, res.lhs_part.states)
        },
    }
    if res.steerable_part is not None:
        doc["steerable_part"] = asm.to_json_dict(res.steerable_part)
    _emit_json(doc, out)
    return EXIT_OK


def cmd_keyrate(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    kr = key_rate_lower_bound(a)
    _emit_json({
        "pair": list(kr.pair), "c": kr.c, "error_probabilities": list(kr.error_probabilities),
        "raw": kr.raw, "clamped": kr.clamped,
    }, out)
    return EXIT_OK


def werner_rows(p_min: float, p_max: float, step: float) -> list[dict]:
    if not (0.0 <= p_min < p_max <= 1.0) or step <= 0:
        raise InputError("need 0 <= p_min < p_max <= 1 and step > 0")
    n = int(math.floor((p_max - p_min) / step + 1e-9))
    rows = []
    for i in range(n + 1):
        p = round(p_min + i * step, 12)
        a = werner_assemblage(p)
        rows.append({
            "p": p,
            "s_marginal": marginal_entropy_bound(a),
            "e_sw": esw_upper_bound(a),
            "keyrate_lower": key_rate_lower_bound(a).clamped,
        })
    return rows


def cmd_scan_werner(args, out) -> int:
    _emit_table(werner_rows(args.p_min, args.p_max, args.step), args.format, out)
    return EXIT_OK


def cmd_scan_region(args, out) -> int:
    pts = polar_grid(args.n_rho, args.n_phi, args.rho_stride, args.phi_stride)
    rows = scan_region(pts, args.optimize, args.restarts, args.seed, args.jobs)
    table = [{
        "x1": r.x1, "z1": r.z1, "equal_value": r.equal_value, "esw": r.esw,
        "keyrate_lower": r.keyrate_lower, "optimized": r.optimized, "winner": r.winner,
        "improved": r.improved,
    } for r in rows]
    _emit_table(table, args.format, out)
    if args.boundary:
        bound = [{"phi_deg": phi, "rho_min": rho} for phi, rho in region_boundary(pts, rows)]
        with open(args.boundary, "w", encoding="utf-8") as fh:
            _emit_table(bound, "csv", fh)
    return EXIT_OK


def cmd_optimize(args, out) -> int:
    rb = RestrictedAssemblage(0.0, 0.0, args.x1, args.y1, args.z1)
    if not rb.is_valid(1e-9):
        raise ConstraintError("(x1, y1, z1) must lie in the unit ball")
    rb = rebit_canonicalize(rb)
    cand = optimize_split(rb, args.restarts, args.seed)
    cmp = compare_strategies(rb, optimize=False)
    _emit_json({
        "target": {"x1": rb.x1, "z1": rb.z1},
        "p": cand.p,
        "a": dict(zip(("t0", "t1", "x1", "y1", "z1"), cand.a.vector().tolist())),
        "b": dict(zip(("t0", "t1", "x1", "y1", "z1"), cand.b.vector().tolist())),
        "optimized": cand.value, "equal_value": cmp.equal_value, "esw": cmp.esw,
        "reconstruction_error": cand.reconstruction_error(rb),
        "diagnostics": cand.diagnostics,
    }, out)
    return EXIT_OK


def cmd_realize(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    re = canonical_realization(a)
    err = float(np.max(np.abs(induce_assemblage(re).elements - a.elements)))
    _emit_json({
        "dim_a": re.dim_a, "dim_b": re.dim_b,
        "state": asm.matrix_to_json(re.state),
        "measurements": {
            f"{n}|{r}": asm.matrix_to_json(re.measurements[n, r])
            for n in range(a.n_outputs) for r in range(a.n_inputs)
        },
        "roundtrip_error": err,
    }, out)
    return EXIT_OK


def cmd_tensor_power(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    _emit_json(asm.to_json_dict(asm.tensor_power(a, args.k)), out)
    return EXIT_OK


def cmd_rewire(args, out) -> int:
    a = _load_valid(args.file, args.tol)
    try:
        doc = json.loads(_read_text(args.map))
        w = asm.RewiringMap(doc["kind"], np.asarray(doc["table"], dtype=float))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{args.map}: malformed rewiring map ({exc})") from exc
    _emit_json(asm.to_json_dict(asm.rewire(a, w)), out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=asm.TOL_PSD, help="validation tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default $STEERKIT_JOBS or 1)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="steerkit", description="Entanglement bounds for steering assemblages.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, file_arg=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if file_arg:
            sp.add_argument("file", help="assemblage JSON ('-' for stdin)")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "check positivity, no-signalling and normalisation")
    add("bounds", cmd_bounds, "all upper and lower bounds for one assemblage")
    add("steering-weight", cmd_steering_weight, "steering weight and LHS model")
    add("keyrate", cmd_keyrate, "key-rate lower bound")
    sp = add("scan-werner", cmd_scan_werner, "bounds along the Werner family", file_arg=False)
    sp.add_argument("--p-min", type=float, default=0.34)
    sp.add_argument("--p-max", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=0.005)
    sp = add("scan-region", cmd_scan_region, "strategy comparison on the restricted polar grid", file_arg=False)
    sp.add_argument("--n-rho", type=int, default=50)
    sp.add_argument("--n-phi", type=int, default=90)
    sp.add_argument("--rho-stride", type=int, default=1)
    sp.add_argument("--phi-stride", type=int, default=1)
    sp.add_argument("--optimize", action="store_true", help="also run the split optimiser")
    sp.add_argument("--boundary", metavar="FILE", help="write the per-angle region boundary CSV")
    sp = add("optimize", cmd_optimize, "optimise a two-component split", file_arg=False)
    sp.add_argument("--x1", type=float, required=True)
    sp.add_argument("--y1", type=float, default=0.0)
    sp.add_argument("--z1", type=float, required=True)
    add("realize", cmd_realize, "canonical realization")
    sp = add("tensor-power", cmd_tensor_power, "k parallel copies")
    sp.add_argument("-k", type=int, default=2)
    sp = add("rewire", cmd_rewire, "apply a classical rewiring")
    sp.add_argument("map", help="rewiring JSON: {\"kind\": \"input\"|\"output\", \"table\": [...]}")
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    args.jobs = resolve_jobs(args.jobs)
    try:
        return args.func(args, out)
    except ConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, ShapeError, BudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def run_to_string(argv) -> tuple[int, str]:
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
