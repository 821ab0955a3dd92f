"""Lagrangian evaluation, Euler-Lagrange residuals, and wave residuals.

The functional under study is

    J[u] = int F(t, u, grad_B u, grad_K u) dt

with a B-gradient block v[k][i] = B_{P1_i}^{alpha_i} u_k and a K-gradient
block w[k][i] = K_{P2_i}^{beta_i} u_k (component-major ordering).  The
Euler-Lagrange residual of the fully fractional problem is

    dF/du_k + sum_i [ -A_{P1*_i}^{alpha_i} dF/dv[k][i]
                      + K_{P2*_i}^{beta_i} dF/dw[k][i] ],

zero at extremals.  A mixed variant replaces the w block by the classical
gradient and reads sum_i [ A_{P1*} dF/dv + d/dt_i dF/dw ] - dF/du.

Realizations of the starred operators: A_{P*} terms use the exact transpose
of the assembled B matrix in the trapezoid inner product (so residuals of
discrete-energy minimizers vanish to solver tolerance, and the Noether
chain identity closes in floating point); K_{P*} terms use the operator
built directly on the dual p-set (so the bracket antisymmetry is exact).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (BoundaryViolation, DomainError, GradientCheckError,
                     GridMismatch, LengthMismatch)
from .ibp import volume_integral
from .model import (Field, Grid1D, GridND, KernelSpec, ParamSet, dual,
                    same_grid)
from .operators import (OpKind, adjoint_apply, apply_matrix_along_axis,
                        apply_op_nd, d_matrix, make_plan)

_CHECK_RNG_SEED = 1729
_CHECK_POINTS = 7
_FD_STEP = 1e-5
_GRAD_RTOL = 1e-6


@dataclass(frozen=True)
class Lagrangian:
    """F(t, u, v, w) with its first partials, all vectorized over nodes.

    Callback contract (shape = grid node shape):
      eval_fn(t, u, v, w) -> array of shape  (*shape)
      d_u(t, u, v, w)     -> array of shape  (N, *shape)
      d_v / d_w           -> arrays of shape (N, n, *shape)
    with t a length-n list of broadcastable coordinate arrays, u of shape
    (N, *shape), v and w of shape (N, n, *shape).
    """

    n: int
    N: int
    eval_fn: Callable
    d_u: Callable
    d_v: Callable
    d_w: Callable
    name: str = ""

    @staticmethod
    def define(n: int, N: int, eval_fn, d_u, d_v, d_w, name: str = "") -> "Lagrangian":
        """Build a Lagrangian, validating the supplied partials against
        central finite differences of eval_fn at random arguments."""
        lag = Lagrangian(n, N, eval_fn, d_u, d_v, d_w, name)
        _gradient_check(lag)
        return lag


def _gradient_check(lag: Lagrangian) -> None:
    rng = np.random.default_rng(_CHECK_RNG_SEED)
    shape = (_CHECK_POINTS,)
    t = [rng.uniform(0.1, 0.9, size=shape) for _ in range(lag.n)]
    u = rng.standard_normal((lag.N,) + shape)
    v = rng.standard_normal((lag.N, lag.n) + shape)
    w = rng.standard_normal((lag.N, lag.n) + shape)

    def fd(block: np.ndarray, index) -> np.ndarray:
        hi = block.copy()
        lo = block.copy()
        hi[index] += _FD_STEP
        lo[index] -= _FD_STEP
        args_hi = {"u": u, "v": v, "w": w}
        args_lo = {"u": u, "v": v, "w": w}
        for nm, arr in (("u", u), ("v", v), ("w", w)):
            if arr is block:
                args_hi[nm] = hi
                args_lo[nm] = lo
        return (lag.eval_fn(t, args_hi["u"], args_hi["v"], args_hi["w"])
                - lag.eval_fn(t, args_lo["u"], args_lo["v"], args_lo["w"])) / (2 * _FD_STEP)

    du = np.asarray(lag.d_u(t, u, v, w))
    dv = np.asarray(lag.d_v(t, u, v, w))
    dw = np.asarray(lag.d_w(t, u, v, w))
    for k in range(lag.N):
        _compare_partial(du[k], fd(u, k), f"dF/du[{k}]", lag.name)
        for i in range(lag.n):
            _compare_partial(dv[k, i], fd(v, (k, i)), f"dF/dv[{k}][{i}]", lag.name)
            _compare_partial(dw[k, i], fd(w, (k, i)), f"dF/dw[{k}][{i}]", lag.name)


def _compare_partial(exact: np.ndarray, approx: np.ndarray, label: str,
                     name: str) -> None:
    scale = np.maximum(1.0, np.maximum(np.abs(exact), np.abs(approx)))
    err = np.max(np.abs(exact - approx) / scale)
    if err > _GRAD_RTOL:
        raise GradientCheckError(
            f"Lagrangian '{name}': partial {label} disagrees with finite "
            f"differences (relative error {err:.2e} > {_GRAD_RTOL})")


@dataclass(frozen=True)
class ProblemSpec:
    """A variational problem: grid, Lagrangian, per-axis operator data for
    the B block (psets1/alphas/kernels_alpha) and the K block
    (psets2/betas/kernels_beta), and optional boundary data psi (a field
    whose boundary nodes hold the prescribed trace)."""

    grid: GridND
    lagrangian: Lagrangian
    psets1: tuple[ParamSet, ...]
    psets2: tuple[ParamSet, ...]
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    kernels_alpha: tuple[KernelSpec, ...]
    kernels_beta: tuple[KernelSpec, ...]
    boundary: Optional[Field] = None

    def __post_init__(self) -> None:
        d = self.grid.ndim
        for nm in ("psets1", "psets2", "alphas", "betas",
                   "kernels_alpha", "kernels_beta"):
            val = tuple(getattr(self, nm))
            object.__setattr__(self, nm, val)
            if len(val) != d:
                raise LengthMismatch(f"{nm} must have length {d}, got {len(val)}")
        if self.lagrangian.n != d:
            raise LengthMismatch(
                f"Lagrangian expects {self.lagrangian.n} variables, grid has {d}")
        if self.boundary is not None:
            same_grid(self.boundary.grid, self.grid)
            if self.boundary.ncomp != self.lagrangian.N:
                raise GridMismatch("boundary data component count mismatch")

    def b_plans(self):
        return [make_plan(OpKind.B, self.alphas[i], self.psets1[i],
                          self.kernels_alpha[i], self.grid.axes[i], axis=i)
                for i in range(self.grid.ndim)]

    def k_plans(self):
        return [make_plan(OpKind.K, self.betas[i], self.psets2[i],
                          self.kernels_beta[i], self.grid.axes[i], axis=i)
                for i in range(self.grid.ndim)]

    def k_dual_plans(self):
        return [make_plan(OpKind.K, self.betas[i], dual(self.psets2[i]),
                          self.kernels_beta[i], self.grid.axes[i], axis=i)
                for i in range(self.grid.ndim)]


def check_admissible(spec: ProblemSpec, u: Field, tol: float = 1e-12) -> None:
    """Raise unless u matches the grid and its boundary trace equals psi."""
    same_grid(u.grid, spec.grid)
    if u.ncomp != spec.lagrangian.N:
        raise GridMismatch(
            f"field has {u.ncomp} components, Lagrangian expects {spec.lagrangian.N}")
    if spec.boundary is None:
        return
    mask = ~spec.grid.interior_mask()
    diff = np.max(np.abs(u.values[:, mask] - spec.boundary.values[:, mask]))
    if diff > tol:
        raise BoundaryViolation(
            f"boundary trace differs from psi by {diff:.3e} (> {tol})")


def _blocks(spec: ProblemSpec, u: Field):
    """(t, u, v, w) arguments for the Lagrangian callbacks at the field u."""
    d, N = spec.grid.ndim, spec.lagrangian.N
    shape = spec.grid.shape
    v = np.empty((N, d) + shape)
    w = np.empty((N, d) + shape)
    for i, (bp, kp) in enumerate(zip(spec.b_plans(), spec.k_plans())):
        v[:, i] = apply_op_nd(bp, u).values
        w[:, i] = apply_op_nd(kp, u).values
    return spec.grid.coords(), u.values, v, w


def _blocks_mixed(spec: ProblemSpec, u: Field):
    """As _blocks, but the w block is the classical gradient d u / d t_i."""
    d, N = spec.grid.ndim, spec.lagrangian.N
    shape = spec.grid.shape
    v = np.empty((N, d) + shape)
    w = np.empty((N, d) + shape)
    for i, bp in enumerate(spec.b_plans()):
        v[:, i] = apply_op_nd(bp, u).values
        w[:, i] = apply_matrix_along_axis(d_matrix(spec.grid.axes[i]), u.values, i)
    return spec.grid.coords(), u.values, v, w


def evaluate_functional(spec: ProblemSpec, u: Field) -> float:
    """J[u]: evaluate F nodewise on the operator blocks and integrate."""
    check_admissible(spec, u)
    t, uu, v, w = _blocks(spec, u)
    fvals = np.broadcast_to(np.asarray(spec.lagrangian.eval_fn(t, uu, v, w),
                                       dtype=float), spec.grid.shape)
    return volume_integral(Field(spec.grid, fvals[np.newaxis]))


def el_residual(spec: ProblemSpec, u: Field) -> Field:
    """Euler-Lagrange residual of the fully fractional problem,

        dF/du - sum_i A_{P1_i*} dF/dv[.][i] + sum_i K_{P2_i*} dF/dw[.][i],

    oriented as the first-variation density (delta J = <eta, el> for
    admissible eta).  Near-zero in the interior means u is an extremal;
    boundary nodes are flagged, not asserted."""
    check_admissible(spec, u)
    t, uu, v, w = _blocks(spec, u)
    lag = spec.lagrangian
    res = np.array(np.broadcast_to(lag.d_u(t, uu, v, w),
                                   (lag.N,) + spec.grid.shape), dtype=float)
    dv = lag.d_v(t, uu, v, w)
    dw = lag.d_w(t, uu, v, w)
    for i, (bp, kdp) in enumerate(zip(spec.b_plans(), spec.k_dual_plans())):
        res -= adjoint_apply(bp, Field(spec.grid, dv[:, i]), negate=True).values
        res += apply_op_nd(kdp, Field(spec.grid, dw[:, i])).values
    return Field(spec.grid, res, flagged_boundary=True)


def el_residual_mixed(spec: ProblemSpec, u: Field) -> Field:
    """Euler-Lagrange residual when the third Lagrangian block is the
    classical gradient,

        dF/du - sum_i A_{P1_i*} dF/dv[.][i] - sum_i d/dt_i dF/dw[.][i],

    with the same first-variation orientation as el_residual."""
    check_admissible(spec, u)
    t, uu, v, w = _blocks_mixed(spec, u)
    lag = spec.lagrangian
    res = np.array(np.broadcast_to(lag.d_u(t, uu, v, w),
                                   (lag.N,) + spec.grid.shape), dtype=float)
    dv = lag.d_v(t, uu, v, w)
    dw = lag.d_w(t, uu, v, w)
    for i, bp in enumerate(spec.b_plans()):
        res -= adjoint_apply(bp, Field(spec.grid, dv[:, i]), negate=True).values
        res -= apply_matrix_along_axis(d_matrix(spec.grid.axes[i]), dw[:, i], i)
    return Field(spec.grid, res, flagged_boundary=True)


def _second_diff_along_axis(values: np.ndarray, grid: Grid1D, axis: int) -> np.ndarray:
    """Compact 3-point second derivative along one axis of a value tensor
    (component axis 0 excluded); second-order one-sided end rows.

    Interior nodes are differenced twice, so data whose first differences
    along the axis are all the equal floating-point value (constants, exactly
    representable linear profiles) map to exact zeros."""
    h2 = grid.h ** 2
    out = np.empty_like(values)
    f = np.moveaxis(values, axis + 1, 0)
    o = np.moveaxis(out, axis + 1, 0)
    o[1:-1] = np.diff(f, 2, axis=0) / h2
    o[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
    o[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
    return out


def wave_residual(u: Field, rho: float, stiffness: float,
                  time_op: tuple[ParamSet, float, KernelSpec],
                  space_ops: Optional[Sequence[tuple[ParamSet, float, KernelSpec]]] = None
                  ) -> Field:
    """Residual of the generalized wave equations on a (time x space) grid,
    time along axis 0.

    Classical space (space_ops is None):
        rho . A_{Pt*}^a B_{Pt}^a u - stiffness . laplace u
    Fractional space:
        rho . A_{Pt*}^a B_{Pt}^a u - sum_i A_{P*_xi}^{b_i}(stiffness . B_{P_xi}^{b_i} u)

    The starred operators are built directly on the dual p-sets.  Only
    interior nodes are meaningful (boundary flagged)."""
    if rho <= 0.0 or stiffness <= 0.0:
        raise DomainError(f"rho and stiffness must be positive, got {rho}, {stiffness}")
    grid = u.grid
    if grid.ndim > 3:
        raise DomainError("wave grids have one time axis plus up to 2 space axes")
    pset_t, alpha_t, kernel_t = time_op
    bp_t = make_plan(OpKind.B, alpha_t, pset_t, kernel_t, grid.axes[0], axis=0)
    ap_t = make_plan(OpKind.A, alpha_t, dual(pset_t), kernel_t, grid.axes[0], axis=0)
    out = rho * apply_op_nd(ap_t, apply_op_nd(bp_t, u)).values
    if space_ops is None:
        for i in range(1, grid.ndim):
            out -= stiffness * _second_diff_along_axis(u.values, grid.axes[i], i)
    else:
        if len(space_ops) != grid.ndim - 1:
            raise LengthMismatch(
                f"need {grid.ndim - 1} space operator triples, got {len(space_ops)}")
        for i, (pset_x, beta_x, kernel_x) in enumerate(space_ops, start=1):
            bp_x = make_plan(OpKind.B, beta_x, pset_x, kernel_x, grid.axes[i], axis=i)
            ap_x = make_plan(OpKind.A, beta_x, dual(pset_x), kernel_x, grid.axes[i], axis=i)
            flux = Field(grid, stiffness * apply_op_nd(bp_x, u).values)
            out -= apply_op_nd(ap_x, flux).values
    return Field(grid, out, flagged_boundary=True)


# ---------------------------------------------------------------------------
# Built-in Lagrangians


def dirichlet_energy_lagrangian(n: int, N: int = 1) -> Lagrangian:
    """F = |v|^2: the generalized Dirichlet integrand."""
    return Lagrangian.define(
        n, N,
        eval_fn=lambda t, u, v, w: np.sum(v * v, axis=(0, 1)),
        d_u=lambda t, u, v, w: np.zeros_like(u),
        d_v=lambda t, u, v, w: 2.0 * v,
        d_w=lambda t, u, v, w: np.zeros_like(w),
        name="dirichlet_energy")


def wave_lagrangian(n: int, rho: float = 1.0, stiffness: float = 1.0) -> Lagrangian:
    """F = rho v_t^2 - stiffness |grad u|^2 with the classical gradient in
    the w block (use with el_residual_mixed); time along axis 0."""
    def d_v(t, u, v, w):
        out = np.zeros_like(v)
        out[0, 0] = 2.0 * rho * v[0, 0]
        return out

    def d_w(t, u, v, w):
        out = -2.0 * stiffness * w.copy()
        out[0, 0] = 0.0
        return out

    return Lagrangian.define(
        n, 1,
        eval_fn=lambda t, u, v, w: (rho * v[0, 0] ** 2
                                    - stiffness * np.sum(w[0, 1:] ** 2, axis=0)),
        d_u=lambda t, u, v, w: np.zeros_like(u),
        d_v=d_v, d_w=d_w,
        name="wave")


def frac_wave_lagrangian(n: int, rho: float = 1.0, stiffness: float = 1.0) -> Lagrangian:
    """F = rho v_t^2 - stiffness sum_i v_xi^2: fully fractional wave."""
    def d_v(t, u, v, w):
        out = -2.0 * stiffness * v.copy()
        out[0, 0] = 2.0 * rho * v[0, 0]
        return out

    return Lagrangian.define(
        n, 1,
        eval_fn=lambda t, u, v, w: (rho * v[0, 0] ** 2
                                    - stiffness * np.sum(v[0, 1:] ** 2, axis=0)),
        d_u=lambda t, u, v, w: np.zeros_like(u),
        d_v=d_v,
        d_w=lambda t, u, v, w: np.zeros_like(w),
        name="frac_wave")


def integral_coupling_lagrangian(n: int, N: int = 1) -> Lagrangian:
    """F = sum_k u_k sum_i w[k][i]: couples the field to its K block."""
    def d_u(t, u, v, w):
        return np.sum(w, axis=1)

    def d_w(t, u, v, w):
        return np.broadcast_to(u[:, np.newaxis], w.shape).copy()

    return Lagrangian.define(
        n, N,
        eval_fn=lambda t, u, v, w: np.sum(u[:, np.newaxis] * w, axis=(0, 1)),
        d_u=d_u,
        d_v=lambda t, u, v, w: np.zeros_like(v),
        d_w=d_w,
        name="integral_coupling")


BUILTIN_LAGRANGIANS: dict[str, Callable[..., Lagrangian]] = {
    "dirichlet_energy": dirichlet_energy_lagrangian,
    "wave": wave_lagrangian,
    "frac_wave": frac_wave_lagrangian,
    "integral_coupling": integral_coupling_lagrangian,
}
