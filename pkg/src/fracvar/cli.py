"""Batch driver: run configured experiments, emit CSV and a JSON summary.

    fracvar CONFIG.json [--output-dir DIR] [--jobs N]

Each config runs one command (see config.COMMANDS), usually over a sweep of
grid sizes; the rows land in a CSV (17-significant-digit numbers, LF line
endings) and a ``<output>.summary.json`` records pass/fail per declared
tolerance.  Exit codes: 0 all tolerances pass, 2 a tolerance failed,
1 configuration or runtime error.  Output location: --output-dir, else
$FRACVAR_OUTPUT_DIR, else the config file's directory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import tempfile
from typing import Callable, Optional, Sequence

import numpy as np

from .config import (ExperimentConfig, build_expression, build_grid,
                     build_kernels, build_lagrangian, build_orders,
                     build_psets, load_config)
from .dirichlet import DirichletSpec, bvp_residual, energy, minimize_energy
from .errors import ConfigError, FracvarError
from .ibp import check_K_duality, check_ibp
from .model import Field, GridND, interior_max_abs
from .noether import (SymmetryGenerator, chain_identity_residual,
                      invariance_residual, noether_residual)
from .operators import OpKind, apply_op_nd, make_plan
from .variational import (ProblemSpec, el_residual, el_residual_mixed,
                          wave_residual)


def _expr_field(grid: GridND, fn: Callable) -> Field:
    vals = np.asarray(fn(grid.coords()), dtype=float)
    return Field(grid, np.broadcast_to(vals, grid.shape).copy()[np.newaxis])


def _random_smooth_field(grid: GridND, rng: np.random.Generator) -> Field:
    coords = grid.coords()
    vals = np.zeros(grid.shape)
    for axis, c in enumerate(coords):
        a, b = grid.axes[axis].a, grid.axes[axis].b
        s = (c - a) / (b - a)
        amp = rng.standard_normal(3)
        vals = vals + (amp[0] * np.sin(np.pi * s) + amp[1] * s * (1.0 - s)
                       + amp[2] * s * s)
    return Field(grid, vals[np.newaxis])


# ---------------------------------------------------------------------------
# Command implementations: each returns (header, rows); a row is a list of
# floats (or ints) aligned with the header.


def _run_op_apply(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    ndim = grid.ndim
    kind = OpKind[problem["op"]]
    psets = build_psets(problem, "psets", ndim)
    orders = build_orders(problem, "orders", ndim)
    kernels = build_kernels(problem, "kernels", ndim)
    axis = problem.get("axis", 0)
    plan = make_plan(kind, orders[axis], psets[axis], kernels[axis],
                     grid.axes[axis], axis=axis)
    f = _expr_field(grid, build_expression(problem, "field", ndim))
    out = apply_op_nd(plan, f)
    oracle_fn = build_expression(problem, "oracle", ndim, required=False)
    header = [f"t{i + 1}" for i in range(ndim)] + ["value"]
    oracle = None
    if oracle_fn is not None:
        header.append("abs_error")
        oracle = np.broadcast_to(np.asarray(oracle_fn(grid.coords()),
                                            dtype=float), grid.shape)
    mesh = np.meshgrid(*(ax.nodes for ax in grid.axes), indexing="ij")
    rows = []
    for idx in np.ndindex(grid.shape):
        row = [m[idx] for m in mesh] + [out.values[0][idx]]
        if oracle is not None:
            row.append(abs(out.values[0][idx] - oracle[idx]))
        rows.append(row)
    return header, rows


def _run_ibp_check(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    ndim = grid.ndim
    pset = build_psets(problem, "psets", 1)[0]
    order = build_orders(problem, "orders", 1)[0]
    kernel = build_kernels(problem, "kernels", 1)[0]
    axis = problem.get("axis", 0)
    f = _expr_field(grid, build_expression(problem, "f", ndim))
    eta = _expr_field(grid, build_expression(problem, "eta", ndim))
    check = (check_K_duality if problem.get("identity", "full") == "duality"
             else check_ibp)
    rep = check(f, eta, pset, order, kernel, axis)
    header = ["n", "lhs", "rhs", "boundary_term", "residual_abs",
              "residual_rel"]
    return header, [[n, rep.lhs, rep.rhs, rep.boundary_term, rep.residual,
                     rep.residual_rel]]


def _variational_spec(cfg: ExperimentConfig, grid: GridND) -> ProblemSpec:
    problem = cfg.problem
    ndim = grid.ndim
    return ProblemSpec(
        grid, build_lagrangian(problem, ndim),
        build_psets(problem, "psets1", ndim), build_psets(problem, "psets2", ndim),
        build_orders(problem, "alphas", ndim), build_orders(problem, "betas", ndim),
        build_kernels(problem, "kernels_alpha", ndim),
        build_kernels(problem, "kernels_beta", ndim))


def _run_el_residual(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    spec = _variational_spec(cfg, grid)
    u = _expr_field(grid, build_expression(problem, "field", grid.ndim))
    res = (el_residual_mixed if problem.get("mixed", False)
           else el_residual)(spec, u)
    return ["n", "max_interior_residual"], [[n, interior_max_abs(res)]]


def _run_dirichlet_solve(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    ndim = grid.ndim
    psi = _expr_field(grid, build_expression(problem, "boundary", ndim))
    spec = DirichletSpec(grid, build_psets(problem, "psets", ndim),
                         build_orders(problem, "alphas", ndim),
                         build_kernels(problem, "kernels", ndim),
                         psi, tol=float(problem.get("tol", 1e-10)))
    result = minimize_energy(spec)
    header = ["n", "iterations", "gradient_norm", "bvp_residual", "energy"]
    return header, [[n, result.iterations, result.gradient_norm,
                     interior_max_abs(bvp_residual(spec, result.field)),
                     energy(spec, result.field)]]


def _run_noether_check(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    spec = _variational_spec(cfg, grid)
    u0_fn = build_expression(problem, "u0", grid.ndim, required=False)
    if u0_fn is not None:
        u = _expr_field(grid, u0_fn)
    else:
        u = _random_smooth_field(grid, np.random.default_rng(cfg.seed))
    gen_fn = build_expression(problem, "generator", grid.ndim, allow_u=True)
    gen = SymmetryGenerator(
        lambda t, uu: np.asarray(gen_fn(t, uu[0]), dtype=float)[np.newaxis],
        description=problem["generator"])
    header = ["n", "chain_defect", "noether_interior", "invariance_interior"]
    return header, [[n, chain_identity_residual(spec, u, gen),
                     interior_max_abs(noether_residual(spec, u, gen)),
                     interior_max_abs(invariance_residual(spec, u, gen))]]


def _run_wave_residual(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    ndim = grid.ndim
    fractional = "space_betas" in problem
    npsets = ndim if fractional else 1
    psets = build_psets(problem, "psets", npsets)
    kernels = build_kernels(problem, "kernels", npsets)
    alpha = build_orders(problem, "alphas", 1)[0]
    time_op = (psets[0], alpha, kernels[0])
    space_ops = None
    if fractional:
        betas = build_orders(problem, "space_betas", ndim - 1)
        space_ops = [(psets[i], betas[i - 1], kernels[i])
                     for i in range(1, ndim)]
    u = _expr_field(grid, build_expression(problem, "field", ndim))
    res = wave_residual(u, float(problem.get("rho", 1.0)),
                        float(problem.get("stiffness", 1.0)),
                        time_op, space_ops)
    return ["n", "max_interior_residual"], [[n, interior_max_abs(res)]]


def _run_convergence_sweep(cfg: ExperimentConfig, n: int) -> tuple[list[str], list[list]]:
    problem = cfg.problem
    grid = build_grid(problem, n)
    ndim = grid.ndim
    kind = OpKind[problem["op"]]
    psets = build_psets(problem, "psets", ndim)
    orders = build_orders(problem, "orders", ndim)
    kernels = build_kernels(problem, "kernels", ndim)
    axis = problem.get("axis", 0)
    plan = make_plan(kind, orders[axis], psets[axis], kernels[axis],
                     grid.axes[axis], axis=axis)
    f = _expr_field(grid, build_expression(problem, "f", ndim))
    out = apply_op_nd(plan, f)
    oracle = np.broadcast_to(
        np.asarray(build_expression(problem, "oracle", ndim)(grid.coords()),
                   dtype=float), grid.shape)
    err = interior_max_abs(Field(grid, (out.values[0] - oracle)[np.newaxis]))
    return ["n", "max_interior_error"], [[n, err]]


_RUNNERS = {
    "op-apply": _run_op_apply,
    "ibp-check": _run_ibp_check,
    "el-residual": _run_el_residual,
    "dirichlet-solve": _run_dirichlet_solve,
    "noether-check": _run_noether_check,
    "wave-residual": _run_wave_residual,
    "convergence-sweep": _run_convergence_sweep,
}

# Commands whose per-size rows gain an order_est column over the sweep.
_ERROR_COLUMN = {
    "ibp-check": "residual_abs",
    "el-residual": "max_interior_residual",
    "wave-residual": "max_interior_residual",
    "convergence-sweep": "max_interior_error",
}


def run_experiment(cfg: ExperimentConfig, jobs: int = 1
                   ) -> tuple[list[str], list[list]]:
    """Run the command over its sweep (or single default size) and collect
    rows in sweep order; sweep entries are independent and run in parallel
    up to ``jobs``."""
    runner = _RUNNERS[cfg.command]
    sizes = cfg.sweep if cfg.sweep is not None else (
        int(cfg.problem.get("size", 64)),)
    if jobs > 1 and len(sizes) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda n: runner(cfg, n), sizes))
    else:
        results = [runner(cfg, n) for n in sizes]
    header = results[0][0]
    rows = [row for _, chunk in results for row in chunk]
    err_col = _ERROR_COLUMN.get(cfg.command)
    if err_col is not None and err_col in header:
        j = header.index(err_col)
        header = header + ["order_est"]
        prev = None
        for row, n in zip(rows, sizes):
            if prev is None or row[j] == 0.0 or prev[0] == 0.0:
                row.append(math.nan)
            else:
                row.append(math.log(prev[0] / row[j])
                           / math.log(n / prev[1]))
            prev = (row[j], n)
    return header, rows


# ---------------------------------------------------------------------------
# Tolerance evaluation and output


def evaluate_tolerances(tolerances: dict, header: list[str],
                        rows: list[list]) -> dict:
    """Each entry: name -> {bound, value, pass}; see config module docstring
    for the key forms."""
    report = {}
    err_col = None
    for name in ("residual_abs", "max_interior_error", "max_interior_residual"):
        if name in header:
            err_col = header.index(name)
            break
    for key, bound in tolerances.items():
        if key == "order_est_range":
            j = header.index("order_est")
            value = rows[-1][j]
            ok = (not math.isnan(value)) and bound[0] <= value <= bound[1]
            report[key] = {"bound": bound, "value": value, "pass": bool(ok)}
            continue
        if key == "decrease_factor_min":
            if err_col is None:
                raise ConfigError(
                    "decrease_factor_min needs an error column", field=key)
            vals = [row[err_col] for row in rows]
            worst = math.inf
            for a, b in zip(vals, vals[1:]):
                worst = min(worst, math.inf if b == 0.0 else a / b)
            report[key] = {"bound": bound, "value": worst,
                           "pass": bool(worst >= bound)}
            continue
        if key.endswith("_max") and key[:-4] in header:
            j = header.index(key[:-4])
            value = max(row[j] for row in rows)
        elif key in header:
            value = rows[-1][header.index(key)]
        else:
            raise ConfigError(f"tolerance {key!r} names no CSV column",
                              field=key)
        report[key] = {"bound": bound, "value": value,
                       "pass": bool(value <= bound)}
    return report


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fracvar-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    _atomic_write(path, buf.getvalue())


def _summary_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".summary.json"


def resolve_output_dir(config_path: str, override: Optional[str]) -> str:
    if override:
        return override
    env = os.environ.get("FRACVAR_OUTPUT_DIR")
    if env:
        return env
    return os.path.dirname(os.path.abspath(config_path))


def run(config_path: str, output_dir: Optional[str] = None,
        jobs: int = 1) -> int:
    """Execute one config; returns the process exit code."""
    try:
        cfg = load_config(config_path)
        header, rows = run_experiment(cfg, jobs=jobs)
        report = evaluate_tolerances(cfg.tolerances, header, rows)
    except FracvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = resolve_output_dir(config_path, output_dir)
    csv_path = cfg.output_path
    if not os.path.isabs(csv_path):
        csv_path = os.path.join(out_dir, csv_path)
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    write_csv(csv_path, header, rows)
    passed = all(entry["pass"] for entry in report.values())
    summary = {
        "command": cfg.command,
        "config": os.path.abspath(config_path),
        "csv": os.path.abspath(csv_path),
        "rows": len(rows),
        "tolerances": report,
        "pass": passed,
    }
    _atomic_write(_summary_path(csv_path),
                  json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for name, entry in report.items():
        state = "pass" if entry["pass"] else "FAIL"
        print(f"{name}: value={entry['value']:.6g} "
              f"bound={entry['bound']} [{state}]")
    print(f"{cfg.command}: {len(rows)} rows -> {csv_path} "
          f"[{'pass' if passed else 'FAIL'}]")
    return 0 if passed else 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracvar",
        description="Run a configured fractional-variational experiment.")
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--output-dir", default=None,
                        help="directory for CSV/summary output "
                             "(default: $FRACVAR_OUTPUT_DIR or the config's "
                             "directory)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel sweep entries (default 1)")
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    return run(args.config, output_dir=args.output_dir, jobs=args.jobs)


if __name__ == "__main__":
    sys.exit(main())
