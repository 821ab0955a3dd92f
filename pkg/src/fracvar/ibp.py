"""Numerical verification of the integration-by-parts identities.

Two identities are checked on rectangular grids, both with operators acting
along a single axis:

  duality of K:   int f . K_P eta  =  int eta . K_{P*} f
  full IBP:       int f . B_P eta  =  int_boundary eta . K_{P*}^(1-alpha) f . nu
                                      - int eta . A_{P*} f

Both sides are discretized independently (the adjoint side uses operators
built on the dual p-set, not matrix transposes), so the reported residual
measures genuine quadrature error and must shrink under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisError, DomainError
from .model import (Field, GridND, KernelFamily, KernelSpec, ParamSet, dual,
                    same_grid)
from .operators import OpKind, apply_op_nd, make_plan


@dataclass(frozen=True)
class IbpReport:
    """Outcome of one identity check.

    ``residual`` is |lhs - rhs|; ``residual_rel`` divides by
    max(|lhs|, |rhs|, 1e-14) for cases with near-zero sides.
    ``unverified_hypotheses`` is set when the kernel's integrability /
    smoothness hypotheses cannot be certified (tabulated kernels).
    """

    lhs: float
    rhs: float
    boundary_term: float
    residual: float
    residual_rel: float
    grid_n: int
    unverified_hypotheses: bool = False


def _make_report(lhs: float, rhs: float, boundary_term: float, grid_n: int,
                 unverified: bool) -> IbpReport:
    residual = abs(lhs - rhs)
    rel = residual / max(abs(lhs), abs(rhs), 1e-14)
    return IbpReport(lhs, rhs, boundary_term, residual, rel, grid_n, unverified)


def volume_integral(f: Field) -> float:
    """Tensor-product trapezoidal rule over the whole rectangle."""
    return float(np.sum(f.grid.trapezoid_weight_tensor() * f.data))


def boundary_integral(g: Field, axis: int) -> float:
    """int_boundary g . nu^axis: the trapezoid integral of g over the face
    t_axis = b minus the one over t_axis = a (the two faces with nonzero
    component of the outward normal along ``axis``).  For a 1D grid this is
    g(b) - g(a)."""
    grid = g.grid
    if not (0 <= axis < grid.ndim):
        raise AxisError(f"axis {axis} out of range for a {grid.ndim}D grid")
    vals = g.data
    sl_hi = [slice(None)] * grid.ndim
    sl_hi[axis] = -1
    sl_lo = [slice(None)] * grid.ndim
    sl_lo[axis] = 0
    hi = vals[tuple(sl_hi)]
    lo = vals[tuple(sl_lo)]
    if grid.ndim == 1:
        return float(hi - lo)
    w = None
    for i, ax in enumerate(grid.axes):
        if i == axis:
            continue
        wi = ax.trapezoid_weights()
        w = wi if w is None else np.multiply.outer(w, wi)
    return float(np.sum(w * hi) - np.sum(w * lo))


def _common_checks(f: Field, eta: Field) -> None:
    same_grid(f.grid, eta.grid)
    if f.ncomp != 1 or eta.ncomp != 1:
        raise DomainError("identity checks take single-component fields")


def check_K_duality(f: Field, eta: Field, pset: ParamSet, order: float,
                    kernel: KernelSpec, axis: int) -> IbpReport:
    """Check  int f . K_P eta = int eta . K_{P*} f  along one axis."""
    _common_checks(f, eta)
    grid = f.grid.axes[axis] if axis < f.grid.ndim else None
    if grid is None:
        raise AxisError(f"axis {axis} out of range for a {f.grid.ndim}D grid")
    plan = make_plan(OpKind.K, order, pset, kernel, grid, axis)
    plan_dual = make_plan(OpKind.K, order, dual(pset), kernel, grid, axis)
    lhs = volume_integral(Field(f.grid, f.data * apply_op_nd(plan, eta).data))
    rhs = volume_integral(Field(f.grid, eta.data * apply_op_nd(plan_dual, f).data))
    unverified = kernel.family is KernelFamily.TABULATED
    return _make_report(lhs, rhs, 0.0, grid.n, unverified)


def check_ibp(f: Field, eta: Field, pset: ParamSet, order: float,
              kernel: KernelSpec, axis: int) -> IbpReport:
    """Check the full identity
    int f . B_P eta = int_boundary eta . K_{P*}^(1-alpha) f . nu - int eta . A_{P*} f
    along one axis; the boundary term is reported separately."""
    _common_checks(f, eta)
    if not (0 <= axis < f.grid.ndim):
        raise AxisError(f"axis {axis} out of range for a {f.grid.ndim}D grid")
    grid = f.grid.axes[axis]
    b_plan = make_plan(OpKind.B, order, pset, kernel, grid, axis)
    k_dual = make_plan(OpKind.K, 1.0 - order, dual(pset), kernel, grid, axis)
    a_dual = make_plan(OpKind.A, order, dual(pset), kernel, grid, axis)
    lhs = volume_integral(Field(f.grid, f.data * apply_op_nd(b_plan, eta).data))
    bterm = boundary_integral(
        Field(f.grid, eta.data * apply_op_nd(k_dual, f).data), axis)
    rhs = bterm - volume_integral(
        Field(f.grid, eta.data * apply_op_nd(a_dual, f).data))
    unverified = kernel.family is KernelFamily.TABULATED
    return _make_report(lhs, rhs, bterm, grid.n, unverified)
