"""Shared data model: parameter sets, kernels, grids, and sampled fields.

A generalized fractional operator is parametrized by a *parameter set*
(p-set) weighting its left and right kernel integrals, and by a difference
kernel k_alpha(s).  All operators and solvers in this package act on fields
sampled on uniform rectangular grids.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, GridMismatch, RangeError

#: Hard cap on cells per axis; weight matrices are dense (n+1)^2.
MAX_CELLS_PER_AXIS = 4096


@dataclass(frozen=True)
class ParamSet:
    """Parameter set <a, t, b, p, q> for a generalized fractional operator.

    ``p`` weights the integral over (a, t) and ``q`` the integral over
    (t, b).  The evaluation variable t ranges over the grid and is supplied
    by the operator, so only (a, b, p, q) are stored.
    """

    a: float
    b: float
    p: float
    q: float

    def __post_init__(self) -> None:
        if not (self.a < self.b):
            raise DomainError(f"ParamSet requires a < b, got a={self.a}, b={self.b}")


def dual(P: ParamSet) -> ParamSet:
    """The dual p-set: left and right weights swapped, endpoints unchanged."""
    return ParamSet(P.a, P.b, P.q, P.p)


class KernelFamily(enum.Enum):
    RIEMANN_LIOUVILLE = "riemann_liouville"
    CONSTANT = "constant"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class KernelSpec:
    """A difference kernel k_alpha(s), s > 0.

    * RIEMANN_LIOUVILLE: k_alpha(s) = s^(alpha-1) / Gamma(alpha).
    * CONSTANT: k(s) = 1 (the plain running integral).
    * TABULATED: linear interpolation of user samples (s_i, k_i), strictly
      increasing in s with s_i > 0; queries outside the sampled range raise
      RangeError.

    ``order`` is the subscript of k_alpha.  It may be left None, in which
    case operator construction resolves it to the effective order the
    operator needs (alpha for a K-op, 1-alpha for A/B-ops).  If set, it must
    match that effective order.
    """

    family: KernelFamily
    order: Optional[float] = None
    samples: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.family is KernelFamily.RIEMANN_LIOUVILLE:
            if self.order is not None and not (0.0 < self.order <= 1.0):
                raise DomainError(
                    f"Riemann-Liouville kernel order must lie in (0, 1], got {self.order}")
            if self.samples is not None:
                raise DomainError("samples are only valid for the TABULATED family")
        elif self.family is KernelFamily.CONSTANT:
            if self.samples is not None:
                raise DomainError("samples are only valid for the TABULATED family")
        elif self.family is KernelFamily.TABULATED:
            if self.samples is None:
                raise DomainError("TABULATED kernel requires samples")
            arr = np.asarray(self.samples, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
                raise DomainError("samples must be an (m, 2) array of (s, value) pairs, m >= 2")
            s = arr[:, 0]
            if s[0] <= 0.0:
                raise DomainError("tabulated kernel samples require s > 0")
            if not np.all(np.diff(s) > 0.0):
                raise DomainError("tabulated kernel samples must be strictly increasing in s")
            if not np.all(np.isfinite(arr)):
                raise DomainError("tabulated kernel samples must be finite")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, "samples", arr)

    def with_order(self, order: float) -> "KernelSpec":
        return KernelSpec(self.family, order, self.samples)


def rl_kernel(order: Optional[float] = None) -> KernelSpec:
    """Riemann-Liouville power kernel; order None defers to the operator."""
    return KernelSpec(KernelFamily.RIEMANN_LIOUVILLE, order)


def constant_kernel() -> KernelSpec:
    """The kernel k(s) = 1, turning K into the plain running integral."""
    return KernelSpec(KernelFamily.CONSTANT)


def tabulated_kernel(samples: np.ndarray, order: Optional[float] = None) -> KernelSpec:
    return KernelSpec(KernelFamily.TABULATED, order, np.asarray(samples, dtype=float))


def kernel_eval(k: KernelSpec, s) -> float | np.ndarray:
    """Evaluate k(s).

    RL kernels require s > 0 (DomainError otherwise); tabulated kernels
    raise RangeError outside their sample range.  Accepts scalars or arrays.
    """
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    if k.family is KernelFamily.RIEMANN_LIOUVILLE:
        if k.order is None:
            raise DomainError("RL kernel_eval requires a resolved order")
        if np.any(s_arr <= 0.0):
            raise DomainError("RL kernel is singular at s <= 0")
        out = s_arr ** (k.order - 1.0) / math.gamma(k.order)
    elif k.family is KernelFamily.CONSTANT:
        if np.any(s_arr < 0.0):
            raise DomainError("kernel arguments must satisfy s >= 0")
        out = np.ones_like(s_arr)
    else:
        smp = k.samples
        if np.any(s_arr < smp[0, 0]) or np.any(s_arr > smp[-1, 0]):
            raise RangeError(
                f"tabulated kernel queried outside sample range "
                f"[{smp[0, 0]}, {smp[-1, 0]}]")
        out = np.interp(s_arr, smp[:, 0], smp[:, 1])
    return float(out) if scalar else out


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with n cells on [a, b]; n+1 nodes, endpoints exact."""

    a: float
    b: float
    n: int
    nodes: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (self.a < self.b):
            raise DomainError(f"grid requires a < b, got a={self.a}, b={self.b}")
        if self.n < 2:
            raise DomainError(f"grid requires n >= 2 cells, got n={self.n}")
        if self.n > MAX_CELLS_PER_AXIS:
            raise DomainError(
                f"grid cap is {MAX_CELLS_PER_AXIS} cells per axis, got n={self.n}")
        nodes = np.linspace(self.a, self.b, self.n + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


def make_uniform_grid(a: float, b: float, n: int) -> Grid1D:
    """Uniform 1D grid; raises DomainError for a >= b or n < 2."""
    return Grid1D(a, b, n)


@dataclass(frozen=True)
class GridND:
    """Cartesian product of 1D grids: the rectangle (a_1,b_1) x ... x (a_d,b_d)."""

    axes: tuple[Grid1D, ...]

    def __post_init__(self) -> None:
        axes = tuple(self.axes)
        if len(axes) < 1:
            raise DomainError("GridND requires at least one axis")
        object.__setattr__(self, "axes", axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.n + 1 for ax in self.axes)

    def coords(self) -> list[np.ndarray]:
        """Node coordinate arrays in 'ij' meshgrid layout (broadcast views)."""
        return list(np.meshgrid(*(ax.nodes for ax in self.axes),
                                indexing="ij", sparse=True))

    def trapezoid_weight_tensor(self) -> np.ndarray:
        """Tensor-product trapezoid weights over all nodes."""
        w = self.axes[0].trapezoid_weights()
        out = w
        for ax in self.axes[1:]:
            out = np.multiply.outer(out, ax.trapezoid_weights())
        return out

    def interior_mask(self) -> np.ndarray:
        """Boolean mask, True at interior nodes (all coordinates strictly inside)."""
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.ndim):
            sl = [slice(None)] * self.ndim
            sl[axis] = 0
            mask[tuple(sl)] = False
            sl[axis] = -1
            mask[tuple(sl)] = False
        return mask


def grid_1d(a: float, b: float, n: int) -> GridND:
    """Convenience: a GridND with a single axis."""
    return GridND((make_uniform_grid(a, b, n),))


@dataclass(frozen=True)
class Field:
    """N-component function sampled on every node of a GridND.

    ``values`` has shape (N, m_1+1, ..., m_d+1).  ``flagged_boundary`` marks
    fields whose boundary nodes hold continuous-extension values of a
    formula that is genuinely singular there; accuracy claims exclude them.
    """

    grid: GridND
    values: np.ndarray
    flagged_boundary: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        expected = self.grid.shape
        if vals.ndim == len(expected):
            vals = vals[np.newaxis, ...]
        if vals.ndim != len(expected) + 1 or vals.shape[1:] != expected:
            raise GridMismatch(
                f"field values of shape {np.shape(self.values)} do not fit grid "
                f"node shape {expected}")
        if vals.shape[0] < 1:
            raise DomainError("field requires N >= 1 components")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @property
    def data(self) -> np.ndarray:
        """The single component of a scalar field."""
        if self.ncomp != 1:
            raise DomainError(f"field has {self.ncomp} components, expected 1")
        return self.values[0]

    @staticmethod
    def from_function(grid: GridND, fn: Callable, ncomp: int = 1) -> "Field":
        """Sample fn(t_1, ..., t_d) on the grid; fn may return a scalar per node
        (ncomp=1) or a length-N sequence."""
        mesh = np.meshgrid(*(ax.nodes for ax in grid.axes), indexing="ij")
        raw = fn(*mesh)
        if ncomp == 1 and not (isinstance(raw, (list, tuple))):
            arr = np.broadcast_to(np.asarray(raw, dtype=float), grid.shape)
            return Field(grid, arr[np.newaxis, ...])
        comps = [np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in raw]
        return Field(grid, np.stack(comps, axis=0))

    @staticmethod
    def constant(grid: GridND, value: float, ncomp: int = 1) -> "Field":
        return Field(grid, np.full((ncomp,) + grid.shape, float(value)))


def same_grid(x: GridND, y: GridND) -> None:
    """Raise GridMismatch unless two grids are identical."""
    if x.ndim != y.ndim or any(
            (ax.a != bx.a or ax.b != bx.b or ax.n != bx.n)
            for ax, bx in zip(x.axes, y.axes)):
        raise GridMismatch("fields live on different grids")


def interior_max_abs(f: Field) -> float:
    """Max |value| over interior nodes, all components."""
    mask = f.grid.interior_mask()
    return float(np.max(np.abs(f.values[:, mask])))
