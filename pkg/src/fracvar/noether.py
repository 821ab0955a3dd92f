"""Invariance testing and the generalized fractional Noether identity.

For a one-parameter family u + eps xi(t, u) + o(eps), the necessary
condition of invariance of J is the pointwise vanishing of

    sum_k [ dF/du_k . xi_k
            + sum_i ( dF/dv[k][i] . B_{P1_i} xi_k
                      + dF/dw[k][i] . K_{P2_i} xi_k ) ],

and the Noether combination built from the bilinear brackets

    D[f, g] = f . A_{P*} g + g . B_P f
    I[f, g] = -f . K_{P*} g + g . K_P f

vanishes along extremals.  Substituting the Euler-Lagrange equations into
the invariance condition yields the unconditional chain identity

    noether_residual = invariance_residual - sum_k xi_k . el_residual_k

which holds nodewise for any field, extremal or not; the operator
realizations here match el_residual exactly so the identity closes to
floating-point accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, GridMismatch
from .model import Field, KernelSpec, ParamSet, dual, same_grid
from .operators import OpKind, adjoint_apply, apply_op_nd, make_plan
from .variational import ProblemSpec, _blocks, check_admissible, el_residual


@dataclass(frozen=True)
class SymmetryGenerator:
    """The linearized transformation direction xi(t, u) -> R^N.

    ``xi`` receives the list of coordinate arrays and the field values
    (N, *shape) and returns the generator samples (N, *shape).  Sampled
    generators are screened by a finite-difference smoothness heuristic
    (second differences bounded as for a C^1 function).
    """

    xi: Callable
    description: str = ""

    def sample(self, spec: ProblemSpec, u: Field) -> Field:
        vals = np.asarray(self.xi(spec.grid.coords(), u.values), dtype=float)
        target = (u.ncomp,) + spec.grid.shape
        vals = np.ascontiguousarray(np.broadcast_to(vals, target))
        field = Field(spec.grid, vals)
        _smoothness_screen(field, self.description)
        return field


def _smoothness_screen(f: Field, label: str) -> None:
    """Reject generators whose samples have the second-difference signature
    of a kink: for C^1 data |delta^2| decays faster than h^1.5; a corner
    keeps |delta^2| ~ h."""
    for axis, ax in enumerate(f.grid.axes):
        vals = np.moveaxis(f.values, axis + 1, -1)
        d1 = np.abs(np.diff(vals, axis=-1)).max()
        d2 = np.abs(np.diff(vals, 2, axis=-1)).max()
        h = ax.h
        bound = 10.0 * np.sqrt(h) * max(d1, h * max(1.0, np.abs(vals).max()))
        if d2 > bound:
            raise DomainError(
                f"symmetry generator {label!r} fails the smoothness "
                f"heuristic along axis {axis}: max second difference "
                f"{d2:.3e} exceeds {bound:.3e}")


def invariance_residual(spec: ProblemSpec, u: Field, gen: SymmetryGenerator) -> Field:
    """Nodewise necessary condition of invariance; near-zero everywhere
    certifies invariance of the functional under the generator."""
    check_admissible(spec, u)
    xi = gen.sample(spec, u)
    t, uu, v, w = _blocks(spec, u)
    lag = spec.lagrangian
    du = np.broadcast_to(lag.d_u(t, uu, v, w), (lag.N,) + spec.grid.shape)
    dv = lag.d_v(t, uu, v, w)
    dw = lag.d_w(t, uu, v, w)
    res = np.sum(du * xi.values, axis=0)
    for i, (bp, kp) in enumerate(zip(spec.b_plans(), spec.k_plans())):
        bxi = apply_op_nd(bp, xi).values
        kxi = apply_op_nd(kp, xi).values
        res += np.sum(dv[:, i] * bxi + dw[:, i] * kxi, axis=0)
    return Field(spec.grid, res[np.newaxis], flagged_boundary=True)


def bracket_D(f: Field, g: Field, pset: ParamSet, order: float,
              kernel: KernelSpec, axis: int) -> Field:
    """D[f, g] = f . A_{P*} g + g . B_P f along one axis (A_{P*} realized
    as the exact transpose of the B_P matrix)."""
    same_grid(f.grid, g.grid)
    if f.ncomp != g.ncomp:
        raise GridMismatch("bracket arguments need matching components")
    bp = make_plan(OpKind.B, order, pset, kernel, f.grid.axes[axis], axis=axis)
    ag = adjoint_apply(bp, g, negate=True).values
    bf = apply_op_nd(bp, f).values
    return Field(f.grid, f.values * ag + g.values * bf, flagged_boundary=True)


def bracket_I(f: Field, g: Field, pset: ParamSet, order: float,
              kernel: KernelSpec, axis: int) -> Field:
    """I[f, g] = -f . K_{P*} g + g . K_P f along one axis (K_{P*} built
    directly on the dual p-set, so I[f,g,P] = -I[g,f,P*] exactly)."""
    same_grid(f.grid, g.grid)
    if f.ncomp != g.ncomp:
        raise GridMismatch("bracket arguments need matching components")
    kp = make_plan(OpKind.K, order, pset, kernel, f.grid.axes[axis], axis=axis)
    kp_dual = make_plan(OpKind.K, order, dual(pset), kernel, f.grid.axes[axis],
                        axis=axis)
    kg = apply_op_nd(kp_dual, g).values
    kf = apply_op_nd(kp, f).values
    return Field(f.grid, -f.values * kg + g.values * kf)


def noether_residual(spec: ProblemSpec, u: Field, gen: SymmetryGenerator) -> Field:
    """sum_k sum_i ( D[xi_k, dF/dv[k][i]] + I[xi_k, dF/dw[k][i]] );
    near-zero on extremals of an invariant functional is the Noether
    identity."""
    check_admissible(spec, u)
    xi = gen.sample(spec, u)
    t, uu, v, w = _blocks(spec, u)
    lag = spec.lagrangian
    dv = lag.d_v(t, uu, v, w)
    dw = lag.d_w(t, uu, v, w)
    res = np.zeros(spec.grid.shape)
    for k in range(lag.N):
        xi_k = Field(spec.grid, xi.values[k][np.newaxis])
        for i in range(spec.grid.ndim):
            bd = bracket_D(xi_k, Field(spec.grid, dv[k, i][np.newaxis]),
                           spec.psets1[i], spec.alphas[i],
                           spec.kernels_alpha[i], i)
            bi = bracket_I(xi_k, Field(spec.grid, dw[k, i][np.newaxis]),
                           spec.psets2[i], spec.betas[i],
                           spec.kernels_beta[i], i)
            res += bd.data + bi.data
    return Field(spec.grid, res[np.newaxis], flagged_boundary=True)


def chain_identity_residual(spec: ProblemSpec, u: Field,
                            gen: SymmetryGenerator) -> float:
    """Max-node defect of the unconditional identity
    noether = invariance - sum_k xi_k . el_k; floating-point small for any
    u because all three terms share the same operator realizations."""
    xi = gen.sample(spec, u)
    noe = noether_residual(spec, u, gen).data
    inv = invariance_residual(spec, u, gen).data
    el = el_residual(spec, u).values
    return float(np.max(np.abs(noe - inv + np.sum(xi.values * el, axis=0))))
