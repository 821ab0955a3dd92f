"""Discrete generalized fractional operators K, A, B.

K_P^alpha f(t) = p * int_a^t k_alpha(t-tau) f(tau) dtau
              + q * int_t^b k_alpha(tau-t) f(tau) dtau

A_P^alpha = d/dt after K_P^(1-alpha)   (Riemann-Liouville type)
B_P^alpha = K_P^(1-alpha) after d/dt   (Caputo type)

Discretization
--------------
K uses product integration: the non-kernel factor is interpolated
piecewise-linearly on each cell and the kernel's cell moments are computed
in closed form (power kernels) or by 8-point Gauss quadrature (tabulated
kernels).  B integrates the kernel exactly against the piecewise-constant
cell slopes of f (the classical L1 construction, accuracy O(h^(2-alpha))
for power kernels).  A composes a second-order finite-difference derivative
with the K^(1-alpha) samples.

Partial operators on multidimensional grids act along one axis with every
other coordinate frozen, line by line.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (AxisError, DomainError, GridMismatch, LengthMismatch,
                     OrderError, RangeError)
from .model import (Field, Grid1D, GridND, KernelFamily, KernelSpec, ParamSet,
                    dual)

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)
_GAUSS01_X = 0.5 * (_GAUSS_X + 1.0)   # nodes on (0, 1)
_GAUSS01_W = 0.5 * _GAUSS_W


class OpKind(enum.Enum):
    K = "K"
    A = "A"
    B = "B"


def d_matrix(grid: Grid1D) -> np.ndarray:
    """Second-order derivative matrix: central interior rows, one-sided ends."""
    n, h = grid.n, grid.h
    D = np.zeros((n + 1, n + 1))
    rows = np.arange(1, n)
    D[rows, rows - 1] = -0.5 / h
    D[rows, rows + 1] = 0.5 / h
    D[0, 0:3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
    D[n, n - 2:n + 1] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    return D


def _check_tabulated_resolution(kernel: KernelSpec, grid: Grid1D) -> None:
    smp = kernel.samples
    h = grid.h
    span = grid.b - grid.a
    if smp[-1, 0] < span:
        raise RangeError(
            f"tabulated kernel covers s <= {smp[-1, 0]}, but the grid needs "
            f"s up to {span}")
    if smp[0, 0] > 0.5 * h or np.max(np.diff(smp[:, 0])) > 0.5 * h:
        raise DomainError(
            "tabulated kernel must be sampled at least at the h/2 scale of "
            f"the target grid (h = {h})")


def _cell_moments(kernel: KernelSpec, grid: Grid1D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel moments over the cells ((d-1)h, dh), d = 1..n.

    Returns (m0, u, v) with
      m0(d) = int k(s) ds                      over the cell,
      u(d)  = int k(s) (s-(d-1)h)/h ds         (hat rising across the cell),
      v(d)  = int k(s) (dh-s)/h ds             (hat falling across the cell),
    so u + v = m0.  Arrays are indexed d-1 = 0..n-1.
    """
    n, h = grid.n, grid.h
    d = np.arange(1, n + 1, dtype=float)
    if kernel.family is KernelFamily.RIEMANN_LIOUVILLE:
        mu = kernel.order
        lo = (d - 1.0) * h
        hi = d * h
        m0 = (hi ** mu - lo ** mu) / math.gamma(mu + 1.0)
        s1 = (hi ** (mu + 1.0) - lo ** (mu + 1.0)) / ((mu + 1.0) * math.gamma(mu))
        u = (s1 - lo * m0) / h
        v = (hi * m0 - s1) / h
    elif kernel.family is KernelFamily.CONSTANT:
        m0 = np.full(n, h)
        u = np.full(n, 0.5 * h)
        v = np.full(n, 0.5 * h)
    else:
        _check_tabulated_resolution(kernel, grid)
        smp = kernel.samples
        # Gauss nodes per cell; np.interp extends by the end values, which only
        # matters inside the first half-cell (resolution check above).
        s = (d[:, None] - 1.0) * h + h * _GAUSS01_X[None, :]
        k = np.interp(s, smp[:, 0], smp[:, 1])
        m0 = h * k @ _GAUSS01_W
        u = h * (k * _GAUSS01_X[None, :]) @ _GAUSS01_W
        v = m0 - u
    return m0, u, v


def k_weight_parts(kernel: KernelSpec, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Left (lower-triangular) and right (upper-triangular) product-integration
    weight matrices for the K operator, before p/q scaling."""
    n = grid.n
    _, u, v = _cell_moments(kernel, grid)
    # w(d) = u(d) + v(d+1) is the weight of an interior node at distance d.
    w = u.copy()
    w[:-1] += v[1:]
    idx = np.arange(n + 1)
    dist = np.subtract.outer(idx, idx)          # j - i
    L = np.zeros((n + 1, n + 1))
    inner = dist >= 1
    L[inner] = w[dist[inner] - 1]
    L[idx[1:], idx[1:]] = v[0]
    L[idx[1:], 0] = u[idx[1:] - 1]
    L[0, :] = 0.0
    R = L[::-1, ::-1].copy()
    return L, R


def b_weight_parts(kernel: KernelSpec, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Left/right weight matrices for the B operator (L1 construction),
    before p/q scaling.  Rows sum to zero: B annihilates constants exactly."""
    n, h = grid.n, grid.h
    m0, _, _ = _cell_moments(kernel, grid)
    idx = np.arange(n + 1)
    dist = np.subtract.outer(idx, idx)          # j - i
    BL = np.zeros((n + 1, n + 1))
    inner = (dist >= 1) & (np.arange(n + 1)[None, :] >= 1)
    m0e = np.concatenate([m0, [0.0]])           # m0e[d-1] = m0(d); pad unused
    BL[inner] = (m0e[dist[inner]] - m0e[dist[inner] - 1]) / h
    BL[idx[1:], idx[1:]] = m0[0] / h
    BL[idx[1:], 0] = -m0[idx[1:] - 1] / h
    BL[0, :] = 0.0
    BR = -BL[::-1, ::-1].copy()
    return BL, BR


@dataclass(frozen=True)
class FracOpPlan:
    """A compiled partial operator: kind, order, p-set, kernel, axis, and the
    precomputed quadrature weight matrices (left part lower-triangular, right
    part upper-triangular; for A these are the inner K^(1-alpha) parts and the
    derivative matrix is folded into ``matrix``)."""

    kind: OpKind
    order: float
    pset: ParamSet
    kernel: KernelSpec
    axis: int
    grid: Grid1D
    left_weights: np.ndarray
    right_weights: np.ndarray
    matrix: np.ndarray

    def __post_init__(self) -> None:
        for name in ("left_weights", "right_weights", "matrix"):
            arr = getattr(self, name)
            arr = np.asarray(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def make_plan(kind: OpKind, order: float, pset: ParamSet, kernel: KernelSpec,
              grid: Grid1D, axis: int = 0) -> FracOpPlan:
    """Compile a partial operator along one axis of a grid.

    The kernel's subscript is the *effective* order: alpha for K, 1-alpha
    for A and B.  A KernelSpec with order=None is resolved automatically; a
    mismatching explicit order raises OrderError.
    """
    if kind is OpKind.K:
        if not (0.0 < order <= 1.0):
            raise OrderError(f"K requires order in (0, 1], got {order}")
        eff = order
    else:
        if not (0.0 < order < 1.0):
            raise OrderError(f"{kind.value} requires order in (0, 1), got {order}")
        eff = 1.0 - order
    if kernel.family is KernelFamily.RIEMANN_LIOUVILLE:
        if kernel.order is not None and abs(kernel.order - eff) > 1e-12:
            raise OrderError(
                f"kernel subscript {kernel.order} does not match the effective "
                f"order {eff} of a {kind.value}-op of order {order}")
        kernel = kernel.with_order(eff)
    if pset.a != grid.a or pset.b != grid.b:
        raise GridMismatch(
            f"p-set interval ({pset.a}, {pset.b}) does not match grid "
            f"interval ({grid.a}, {grid.b})")
    if axis < 0:
        raise AxisError(f"axis must be nonnegative, got {axis}")

    if kind is OpKind.B:
        left, right = b_weight_parts(kernel, grid)
        matrix = pset.p * left + pset.q * right
    else:
        left, right = k_weight_parts(kernel, grid)
        matrix = pset.p * left + pset.q * right
        if kind is OpKind.A:
            matrix = d_matrix(grid) @ matrix
    return FracOpPlan(kind, order, pset, kernel, axis, grid, left, right, matrix)


def apply_matrix_along_axis(M: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    """Apply M to every line of values (component axis 0 excluded) along axis."""
    out = np.tensordot(M, values, axes=([1], [axis + 1]))
    return np.moveaxis(out, 0, axis + 1)


def _check_plan_grid(plan: FracOpPlan, f: Field) -> None:
    if plan.axis >= f.grid.ndim:
        raise AxisError(
            f"plan acts along axis {plan.axis} but the grid has "
            f"{f.grid.ndim} axes")
    ax = f.grid.axes[plan.axis]
    if (ax.a, ax.b, ax.n) != (plan.grid.a, plan.grid.b, plan.grid.n):
        raise GridMismatch(
            f"plan grid ({plan.grid.a}, {plan.grid.b}, n={plan.grid.n}) does "
            f"not match field axis {plan.axis}")


def apply_op_nd(plan: FracOpPlan, f: Field) -> Field:
    """Apply the partial operator along plan.axis, every other coordinate
    frozen (line-by-line reduction to the 1D operator).

    B subtracts the line's first value before the weighted sum: the operator
    annihilates constants analytically, and centering makes that exact in
    floating point.  A applies the inner K^(1-alpha) weights first and the
    derivative second, so its samples coincide bitwise with the derivative of
    the K^(1-alpha) samples; plan.matrix keeps the composed product for
    transposition."""
    _check_plan_grid(plan, f)
    vals = f.values
    if plan.kind is OpKind.B:
        vals = vals - np.take(vals, [0], axis=plan.axis + 1)
        out = apply_matrix_along_axis(plan.matrix, vals, plan.axis)
    elif plan.kind is OpKind.A:
        inner = plan.pset.p * plan.left_weights + plan.pset.q * plan.right_weights
        out = apply_matrix_along_axis(inner, vals, plan.axis)
        out = apply_matrix_along_axis(d_matrix(plan.grid), out, plan.axis)
    else:
        out = apply_matrix_along_axis(plan.matrix, vals, plan.axis)
    flagged = (plan.kind is OpKind.A
               and plan.kernel.family is KernelFamily.RIEMANN_LIOUVILLE)
    return Field(f.grid, out, flagged_boundary=flagged)


def apply_op_1d(plan: FracOpPlan, f: Field) -> Field:
    """Apply a 1D operator; the field must live on a single-axis grid."""
    if f.grid.ndim != 1:
        raise GridMismatch("apply_op_1d requires a 1D grid")
    if plan.axis != 0:
        raise AxisError("a 1D plan must act along axis 0")
    return apply_op_nd(plan, f)


def frac_gradient(f: Field, kind: OpKind, psets, orders, kernels) -> list[Field]:
    """Generalized fractional gradient: entry i holds the axis-i partial
    operator applied to every component of f."""
    d = f.grid.ndim
    if not (len(psets) == len(orders) == len(kernels) == d):
        raise LengthMismatch(
            f"need {d} p-sets/orders/kernels, got "
            f"{len(psets)}/{len(orders)}/{len(kernels)}")
    out = []
    for i in range(d):
        plan = make_plan(kind, orders[i], psets[i], kernels[i],
                         f.grid.axes[i], axis=i)
        out.append(apply_op_nd(plan, f))
    return out


def adjoint_apply(plan: FracOpPlan, f: Field, negate: bool) -> Field:
    """Apply the exact transpose of plan.matrix in the trapezoid inner
    product along plan.axis: g -> (+/-) w^-1 M^T (w g).

    With a B-plan and negate=True this realizes A_{P*}^alpha:  the discrete
    counterpart of  int f . B_P eta = -int eta . A_{P*} f  (+ boundary), with
    the boundary term absorbed so the identity is exact in floating point.
    With a K-plan and negate=False it realizes K_{P*}^alpha likewise.
    """
    _check_plan_grid(plan, f)
    w = plan.grid.trapezoid_weights()
    shape = [1] * f.values.ndim
    shape[plan.axis + 1] = w.size
    wb = w.reshape(shape)
    out = apply_matrix_along_axis(plan.matrix.T, f.values * wb, plan.axis) / wb
    if negate:
        out = -out
    return Field(f.grid, out, flagged_boundary=f.flagged_boundary)


def dual_plan(plan: FracOpPlan) -> FracOpPlan:
    """The same operator built on the dual p-set (p and q swapped)."""
    return make_plan(plan.kind, plan.order, dual(plan.pset), plan.kernel,
                     plan.grid, plan.axis)
