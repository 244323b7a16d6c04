"""Command-line front end.

Exit status: 0 success, 1 unreadable or malformed input, 2 a mathematical
failure (singularity, degeneracy, domain).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import fa, gallant, laurent, linmodel, pca
from .errors import DegenerateError, MathError, SingularPerturbationError
from .numerics import f_quantile

EXIT_OK, EXIT_INPUT, EXIT_MATH = 0, 1, 2


class InputError(Exception):
    def __init__(self, source: str, message: str, line: int | None = None, column: int | None = None):
        where = source
        if line is not None:
            where += f":{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {message}")


# ---------------------------------------------------------------------------
# file formats


def read_series_file(path: str) -> laurent.AnalyticMatrixSeries:
    """SeriesFile: {"rows": r, "cols": c, "coefficients": [[r*c numbers, row-major], ...]}."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(path, exc.strerror or str(exc)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, exc.msg, exc.lineno, exc.colno) from exc
    return parse_series(doc, path)


def parse_series(doc: Any, source: str = "<series>") -> laurent.AnalyticMatrixSeries:
    if not isinstance(doc, dict):
        raise InputError(source, "top level must be an object")
    rows, cols, coeffs = doc.get("rows"), doc.get("cols"), doc.get("coefficients")
    for key, val in (("rows", rows), ("cols", cols)):
        if not isinstance(val, int) or isinstance(val, bool) or val < 1:
            raise InputError(source, f'"{key}" must be a positive integer')
    if not isinstance(coeffs, list) or not coeffs:
        raise InputError(source, '"coefficients" must be a non-empty list')
    mats = []
    for k, flat in enumerate(coeffs):
        if isinstance(flat, list) and flat and all(isinstance(r, list) for r in flat):
            flat = [x for r in flat for x in r]
        if not isinstance(flat, list) or len(flat) != rows * cols:
            raise InputError(source, f"coefficients[{k}] must hold rows*cols = {rows * cols} numbers")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in flat):
            raise InputError(source, f"coefficients[{k}] has a non-numeric entry")
        mats.append(np.array(flat, dtype=float).reshape(rows, cols))
    return laurent.AnalyticMatrixSeries(tuple(mats))


def series_document(coefficients: Sequence[np.ndarray]) -> dict:
    rows, cols = np.asarray(coefficients[0]).shape
    return {"rows": rows, "cols": cols,
            "coefficients": [np.asarray(c, dtype=float).ravel().tolist() for c in coefficients]}


def read_matrix_csv(path: str) -> np.ndarray:
    """MatrixCsv: one row per line, comma separated, no header."""
    try:
        with open(path, newline="") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(path, exc.strerror or str(exc)) from exc
    rows = []
    for ln, cells in enumerate(lines, start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(path, f"non-numeric cell {cell!r}", ln, col) from None
            if not math.isfinite(v):
                raise InputError(path, f"non-finite cell {cell!r}", ln, col)
            row.append(v)
        if rows and len(row) != len(rows[0]):
            raise InputError(path, f"expected {len(rows[0])} cells, found {len(row)}", ln)
        rows.append(row)
    if not rows:
        raise InputError(path, "no data")
    return np.array(rows)


def parse_list(text: str, name: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(name, f"expected comma-separated numbers, got {text!r}") from None
    return np.array(vals)


def rank_tol() -> float:
    raw = os.environ.get("PERTURB_RANK_TOL")
    if raw is None or not raw.strip():
        return 0.0
    try:
        tol = float(raw)
    except ValueError:
        raise InputError("PERTURB_RANK_TOL", f"not a decimal number: {raw!r}") from None
    if not tol >= 0 or not math.isfinite(tol):
        raise InputError("PERTURB_RANK_TOL", "must be finite and nonnegative")
    return tol


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    if x is None:
        return "-"
    return str(x)


def _matrix_lines(m, indent: str = "    ") -> list[str]:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    cells = [[_fmt(v) for v in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    return [indent + "  ".join(c.rjust(width) for c in row) for row in cells]


def _vec(v) -> str:
    return "(" + ", ".join(_fmt(x) for x in np.ravel(v)) + ")"


def _emit(report: dict, table_lines: list[str], fmt: str, out) -> None:
    if fmt == "json":
        out.write(dumps(report))
    else:
        out.write("\n".join(table_lines) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_invert(args, out) -> int:
    series = read_series_file(args.series)
    inv = laurent.invert_series(series, args.order, args.max_t, rank_tol())
    coeffs = [{"power": k, "matrix": inv.coefficient(k)} for k in range(-inv.pole_order, inv.order + 1)]
    report = {"pole_order": inv.pole_order, "order": inv.order,
              "regular": inv.pole_order == 0, "coefficients": coeffs}
    lines = [f"pole order s = {inv.pole_order}"
             + (" (regular perturbation)" if inv.pole_order == 0 else " (singular perturbation)")]
    for c in coeffs:
        lines.append(f"  Y[{c['power']}] =")
        lines += _matrix_lines(c["matrix"])
    _emit(report, lines, args.format, out)
    return EXIT_OK


def _design(path: str) -> linmodel.PerturbedDesign:
    series = read_series_file(path)
    try:
        return linmodel.PerturbedDesign(series.coefficients)
    except ValueError as exc:
        raise InputError(path, str(exc)) from exc


def _y_vector(path: str, n: int) -> np.ndarray:
    y = read_matrix_csv(path)
    if y.shape[1] != 1 and y.shape[0] == 1:
        y = y.T
    if y.shape != (n, 1):
        raise InputError(path, f"expected a single column of {n} values, got shape {y.shape}")
    return y.ravel()


def cmd_fit(args, out) -> int:
    des = _design(args.design)
    y = _y_vector(args.y, des.n)
    tol = rank_tol()
    beta0 = None
    if args.beta0 is not None:
        beta0 = parse_list(args.beta0, "--beta0")
        if beta0.size != des.m:
            raise InputError("--beta0", f"expected {des.m} values, got {beta0.size}")

    if args.estimate_eps:
        # singular designs still have a Maclaurin SSE series, so this comes first
        linmodel.epsilon_hat(des, y, tol)

    if args.singular:
        sf = linmodel.fit_singular(des, y, beta0, tol)
        report = {"mode": "singular", "pole_order": sf.pole_order, "rank_X0": sf.r, "nu": sf.nu,
                  "beta_tilde": sf.beta_tilde, "b0_ginv": sf.b0_ginv, "sse_limit": sf.sse_limit,
                  "sse_projection_limit": sf.sse_projection_limit,
                  "f_tilde": sf.f_tilde, "f0_rank_based": sf.f0, "f_tilde_over_f0": sf.f_ratio,
                  "maclaurin_representation": sf.maclaurin}
        lines = [f"singular fit (pole order {sf.pole_order}, rank X0 = {sf.r}, nu = {sf.nu})",
                 f"  beta_tilde        {_vec(sf.beta_tilde)}",
                 f"  y^T D0 y          {_fmt(sf.sse_limit)}",
                 f"  lim SSE(eps)      {_fmt(sf.sse_projection_limit)}",
                 f"  F_tilde           {_fmt(sf.f_tilde)}  (= {_fmt(sf.f_ratio)} x rank-based F0 {_fmt(sf.f0)})",
                 f"  C(eps)X(eps) free of negative powers: {_fmt(sf.maclaurin)}",
                 "  B0 generalized inverse (Moore-Penrose):"] + _matrix_lines(sf.b0_ginv)
        _emit(report, lines, args.format, out)
        return EXIT_OK

    exp = linmodel.expand_gram(des, 0, tol)
    if exp.pole_order:
        raise SingularPerturbationError(
            f"B0 = X0 X0^T is singular (pole order {exp.pole_order}); rerun with --singular")

    res = linmodel.fit(des, y, args.order, args.eps, args.estimate_eps, beta0, args.exact, tol)
    m, n = des.m, des.n
    report: dict = {"mode": "regular", "order": args.order, "m": m, "n": n,
                    "beta_series": list(res.beta_series), "sse_series": list(res.sse_series),
                    "eps_hat": res.epsilon_hat, "sse_stationary_point": res.sse_stationary_point,
                    "eps": res.eps, "evaluation": "exact" if args.exact else f"series through order {args.order}",
                    "beta": res.beta, "stderr": res.stderr, "sigma2_hat": res.sigma2_hat}
    lines = [f"regular fit: m = {m}, n = {n}, series order {args.order}"]
    for k, b in enumerate(res.beta_series):
        lines.append(f"  beta[{k}]   {_vec(b)}")
    lines.append("  SSE series " + _vec(res.sse_series))
    lines.append(f"  eps_hat {_fmt(res.epsilon_hat)}   quadratic-SSE stationary point {_fmt(res.sse_stationary_point)}")
    lines.append(f"at eps = {_fmt(res.eps)} ({report['evaluation']}):")
    lines.append(f"  beta      {_vec(res.beta)}")
    lines.append(f"  std err   {_vec(res.stderr)}")
    lines.append(f"  sigma2    {_fmt(res.sigma2_hat)}")
    if beta0 is not None:
        thr = f_quantile(args.alpha, m, n - m)
        report.update({"beta0": beta0, "f_series": list(res.f_series), "F": res.f_value,
                       "alpha": args.alpha, "f_threshold": thr, "beta0_in_confidence_set": res.f_value <= thr})
        lines.append(f"  F(beta0)  {_fmt(res.f_value)}   F_alpha({_fmt(args.alpha)}; {m}, {n - m}) = {_fmt(thr)}"
                     f"   beta0 in {1 - args.alpha:.6g} confidence set: {_fmt(res.f_value <= thr)}")
    _emit(report, lines, args.format, out)
    return EXIT_OK


def cmd_pca(args, out) -> int:
    des = _design(args.design)
    y = read_matrix_csv(args.y)
    if y.shape[0] != des.n:
        raise InputError(args.y, f"expected {des.n} rows, got {y.shape[0]}")
    order = max(args.order, 1)
    cov = pca.covariance_series(des, y, order, rank_tol())
    s0, s1 = cov.coefficients[0], cov.coefficients[1]
    exps = pca.eigen_expansions(s0, s1)
    report: dict = {"p": y.shape[1], "S": list(cov.coefficients[:args.order + 1] if args.order else cov.coefficients[:1]),
                    "eigen": [], "degenerate": [i for i, e in enumerate(exps) if e is None]}
    lines = [f"covariance series (p = {y.shape[1]})"]
    for k, s in enumerate(report["S"]):
        lines.append(f"  S[{k}] =")
        lines += _matrix_lines(s)
    for i, e in enumerate(exps):
        if e is None:
            report["eigen"].append({"index": i, "degenerate": True})
            lines.append(f"  eigenpair {i}: degenerate (repeated eigenvalue), no expansion")
            continue
        report["eigen"].append({"index": i, "degenerate": False, "lambda0": e.lambda0, "lambda1": e.lambda1,
                                "d0": e.d0, "d1": e.d1})
        lines.append(f"  eigenpair {i}: lambda = {_fmt(e.lambda0)} + eps {_fmt(e.lambda1)}")
        lines.append(f"               d = {_vec(e.d0)} + eps {_vec(e.d1)}")
    if y.shape[1] == 2 and not report["degenerate"]:
        gap0, gap1 = pca.eigen_gap_2x2(s0, s1)
        report["gap"] = {"A": gap0, "first_order": gap1}
        lines.append(f"  lambda1 - lambda2 = {_fmt(gap0)} + eps {_fmt(gap1)}")
    _emit(report, lines, args.format, out)
    return EXIT_MATH if report["degenerate"] else EXIT_OK


def cmd_fa(args, out) -> int:
    gamma = read_matrix_csv(args.gamma)
    psi = parse_list(args.psi, "--psi")
    phi: tuple[np.ndarray, ...] = ()
    if args.phi:
        series = read_series_file(args.phi)
        k = gamma.shape[1]
        if series.shape != (k, k):
            raise InputError(args.phi, f"Phi coefficients must be {k}x{k}, got {series.shape}")
        if np.max(np.abs(series.coefficients[0] - np.eye(k))) > 0:
            raise InputError(args.phi, "coefficients[0] must be the identity (Phi(0) = I)")
        phi = series.coefficients[1:]
    if psi.size != gamma.shape[0]:
        raise InputError("--psi", f"expected {gamma.shape[0]} values, got {psi.size}")
    model = fa.FaModel(gamma, psi, phi)
    sig = fa.sigma_series(model, args.order)
    inv = fa.sigma_inverse_series(model, args.order)
    ld = fa.logdet_series(model, args.order)
    report: dict = {"p": model.p, "k": model.k, "order": args.order,
                    "sigma": list(sig.coefficients),
                    "sigma_inverse": [inv.coefficient(k) for k in range(args.order + 1)],
                    "logdet": list(ld.coefficients)}
    lines = [f"factor model p = {model.p}, k = {model.k}"]
    for k in range(args.order + 1):
        lines.append(f"  Sigma[{k}] =")
        lines += _matrix_lines(sig.coefficients[k])
    for k in range(args.order + 1):
        lines.append(f"  Sigma^-1[{k}] =")
        lines += _matrix_lines(inv.coefficient(k))
    lines.append("  ln det Sigma series " + _vec(ld.coefficients))
    if args.sample_cov:
        s = read_matrix_csv(args.sample_cov)
        if s.shape != (model.p, model.p):
            raise InputError(args.sample_cov, f"expected {model.p}x{model.p}, got {s.shape}")
        terms = fa.loglik_terms(model, s, args.order)
        report["loglik"] = terms
        lines.append("  log-likelihood series " + _vec(terms))
    _emit(report, lines, args.format, out)
    return EXIT_OK


def cmd_reproduce_gallant(args, out) -> int:
    rep = gallant.reproduce()
    lines = ["Gram series from the embedded data (computed | published | max deviation)"]
    for name, g in rep["gram"].items():
        lines.append(f"  {name}: max deviation {_fmt(g['max_deviation'])}"
                     f"  {'ok' if g['within_tolerance'] else 'EXCEEDS ' + _fmt(gallant.TOLERANCES['gram'])}")
        comp, pub = np.asarray(g["computed"]), np.asarray(g["published"])
        for rc, rp in zip(comp, pub):
            lines.append("    " + "  ".join(f"{_fmt(a):>10}" for a in rc) + "   |  "
                         + "  ".join(f"{_fmt(b):>10}" for b in rp))
    for ds in rep["data_sets"]:
        k = ds["data_set"] - 1
        c, dev = ds["computed"], ds["deviation"]
        lines.append(f"data set {ds['data_set']}: eps_hat = {_fmt(c['eps_hat'])}"
                     f" (published {_fmt(gallant.PUBLISHED['eps_hat'][k])}, dev {_fmt(dev['eps_hat'])});"
                     f" SSE quadratic stationary point {_fmt(c['sse_stationary_point'])}")
        for block, label in (("first_order", "first order at eps_hat"), ("at_zero", "at eps = 0")):
            pub = gallant.PUBLISHED[block]
            lines.append(f"  {label}:")
            lines.append("    theta  " + _vec(c[block]["theta"]) + "  published " + _vec(pub["theta"][k])
                         + f"  dev {_fmt(dev[block + '.theta'])}")
            lines.append("    se     " + _vec(c[block]["se"]) + "  published " + _vec(pub["se"][k])
                         + f"  dev {_fmt(dev[block + '.se'])}")
            lines.append(f"    F      {_fmt(c[block]['F'])}  published {_fmt(pub['F'][k])}"
                         f"  dev {_fmt(dev[block + '.F'])}")
        lines.append(f"  exact F at eps_hat {_fmt(c['exact_at_eps_hat']['F'])}")
        bad = [key for key, ok in ds["within_tolerance"].items() if not ok]
        lines.append("  all within tolerance" if not bad else "  outside tolerance: " + ", ".join(bad))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(dumps(rep))
    _emit(rep, lines, args.format, out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    default_fmt = "table" if sys.stdout.isatty() else "json"
    parser = argparse.ArgumentParser(prog="perturbstat",
                                     description="Laurent-series tools for perturbed linear models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("json", "table"), default=default_fmt)

    p = sub.add_parser("invert", help="Laurent expansion of A(eps)^-1")
    p.add_argument("--series", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--max-t", type=int, default=None)
    add_format(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("fit", help="perturbed least squares and inference")
    p.add_argument("--design", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--beta0", default=None, help="comma-separated null value, e.g. 1,1,1")
    p.add_argument("--order", type=int, default=1)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", type=float, default=None)
    g.add_argument("--estimate-eps", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--exact", action="store_true", help="evaluate at eps directly instead of by series")
    p.add_argument("--singular", action="store_true", help="report the eps -> 0 limits for singular B0")
    add_format(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("pca", help="perturbed covariance and eigen expansions")
    p.add_argument("--design", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--order", type=int, default=1)
    add_format(p)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("fa", help="factor-analysis covariance expansions")
    p.add_argument("--gamma", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi", default=None)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--sample-cov", default=None)
    add_format(p)
    p.set_defaults(func=cmd_fa)

    p = sub.add_parser("reproduce-gallant", help="rerun the treatment-control example")
    p.add_argument("--json-out", default=None)
    add_format(p)
    p.set_defaults(func=cmd_reproduce_gallant)
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    if getattr(args, "order", 0) is not None and getattr(args, "order", 0) < 0:
        err.write("error: --order must be >= 0\n")
        return EXIT_INPUT
    if getattr(args, "alpha", 0.5) is not None and not 0 < getattr(args, "alpha", 0.5) < 1:
        err.write("error: --alpha must lie in (0, 1)\n")
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except InputError as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except DegenerateError as exc:
        err.write(f"degenerate: {exc}\n")
        return EXIT_MATH
    except MathError as exc:
        err.write(f"math error: {exc}\n")
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
