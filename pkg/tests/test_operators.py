"""Discrete K/A/B operators: closed-form accuracy, structure, adjoints."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar import (Field, GridND, OpKind, ParamSet, adjoint_apply,
                     apply_op_1d, apply_op_nd, constant_kernel, dual,
                     dual_plan, frac_gradient, grid_1d, interior_max_abs,
                     make_plan, make_uniform_grid, rl_kernel,
                     tabulated_kernel)
from fracvar.errors import (AxisError, DomainError, GridMismatch,
                            LengthMismatch, OrderError, RangeError)
from fracvar.ibp import volume_integral
from fracvar.operators import d_matrix

LEFT = ParamSet(0.0, 1.0, 1.0, 0.0)
RIGHT = ParamSet(0.0, 1.0, 0.0, 1.0)
GAMMA_15_INV = 1.1283791670955126      # 1/Gamma(1.5) = 2/sqrt(pi)


def scalar_field(grid, fn):
    return Field.from_function(grid, fn)


def max_err(f: Field, exact: np.ndarray) -> float:
    return interior_max_abs(Field(f.grid, f.values[0] - exact))


class TestPlanConstruction:
    def test_order_ranges(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        make_plan(OpKind.K, 1.0, LEFT, rl_kernel(), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.K, 0.0, LEFT, rl_kernel(), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.K, 1.2, LEFT, rl_kernel(), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.B, 1.0, LEFT, rl_kernel(), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.A, 0.0, LEFT, rl_kernel(), g)

    def test_kernel_order_resolution(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        # Deferred order resolves to alpha for K, 1-alpha for A/B.
        assert make_plan(OpKind.K, 0.4, LEFT, rl_kernel(), g).kernel.order == 0.4
        assert make_plan(OpKind.B, 0.4, LEFT, rl_kernel(), g).kernel.order == 0.6
        assert make_plan(OpKind.A, 0.4, LEFT, rl_kernel(), g).kernel.order == 0.6
        # A matching explicit order is accepted, a mismatch rejected.
        make_plan(OpKind.B, 0.4, LEFT, rl_kernel(0.6), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.B, 0.4, LEFT, rl_kernel(0.4), g)
        with pytest.raises(OrderError):
            make_plan(OpKind.K, 0.4, LEFT, rl_kernel(0.6), g)

    def test_interval_must_match_grid(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        with pytest.raises(GridMismatch):
            make_plan(OpKind.K, 0.5, ParamSet(0.0, 2.0, 1.0, 0.0),
                      rl_kernel(), g)

    def test_axis_validation(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        with pytest.raises(AxisError):
            make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), g, axis=-1)
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), g, axis=1)
        f = Field(grid_1d(0.0, 1.0, 8), np.zeros(9))
        with pytest.raises(AxisError):
            apply_op_nd(plan, f)

    def test_triangular_structure(self):
        g = make_uniform_grid(0.0, 1.0, 16)
        for kind in (OpKind.K, OpKind.B):
            plan = make_plan(kind, 0.5, ParamSet(0.0, 1.0, 0.3, 0.7),
                             rl_kernel(), g)
            assert np.all(np.triu(plan.left_weights, 1) == 0.0)
            assert np.all(np.tril(plan.right_weights, -1) == 0.0)

    def test_plan_matrices_read_only(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), g)
        with pytest.raises(ValueError):
            plan.matrix[0, 0] = 1.0

    def test_dual_plan_is_involution(self):
        g = make_uniform_grid(0.0, 1.0, 8)
        plan = make_plan(OpKind.K, 0.5, ParamSet(0.0, 1.0, 0.3, 0.7),
                         rl_kernel(), g)
        back = dual_plan(dual_plan(plan))
        assert back.pset == plan.pset
        assert np.array_equal(back.matrix, plan.matrix)


class TestClosedForms:
    def test_K_of_constant_is_exact(self):
        # Product integration integrates the kernel exactly, so the image of
        # f = 1 is the cumulative kernel integral t^a/Gamma(1+a) to rounding.
        grid = grid_1d(0.0, 1.0, 64)
        t = grid.axes[0].nodes
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field.constant(grid, 1.0))
        exact = GAMMA_15_INV * np.sqrt(t)
        assert np.max(np.abs(out.values[0] - exact)) < 1e-13

    def test_K_right_mirrors_left(self):
        grid = grid_1d(0.0, 1.0, 64)
        t = grid.axes[0].nodes
        plan = make_plan(OpKind.K, 0.5, RIGHT, rl_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field.constant(grid, 1.0))
        exact = GAMMA_15_INV * np.sqrt(1.0 - t)
        assert np.max(np.abs(out.values[0] - exact)) < 1e-13

    def test_K_order_one_is_running_integral(self):
        grid = grid_1d(0.0, 1.0, 32)
        t = grid.axes[0].nodes
        plan = make_plan(OpKind.K, 1.0, LEFT, rl_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field(grid, t))
        assert np.max(np.abs(out.values[0] - 0.5 * t * t)) < 1e-14

    def test_constant_kernel_is_running_integral(self):
        grid = grid_1d(0.0, 1.0, 32)
        t = grid.axes[0].nodes
        plan = make_plan(OpKind.K, 1.0, LEFT, constant_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field.constant(grid, 1.0))
        assert np.max(np.abs(out.values[0] - t)) < 1e-14

    def test_B_of_linear(self):
        # B^0.5 (left) of t is t^0.5/Gamma(1.5); the L1 construction is exact
        # for piecewise-linear data up to kernel-moment rounding.
        grid = grid_1d(0.0, 1.0, 64)
        t = grid.axes[0].nodes
        plan = make_plan(OpKind.B, 0.5, LEFT, rl_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field(grid, t))
        exact = GAMMA_15_INV * np.sqrt(t)
        assert np.max(np.abs(out.values[0] - exact)) < 1e-12

    def test_B_of_constant_is_exactly_zero(self):
        grid = grid_1d(0.0, 1.0, 40)
        plan = make_plan(OpKind.B, 0.3, ParamSet(0.0, 1.0, 0.6, 0.4),
                         rl_kernel(), grid.axes[0])
        out = apply_op_nd(plan, Field.constant(grid, 7.3))
        assert np.all(out.values == 0.0)

    def test_A_matches_derivative_of_K_samples_bitwise(self):
        grid = grid_1d(0.0, 1.0, 48)
        t = grid.axes[0].nodes
        f = Field(grid, np.sin(2.0 * t))
        pset = ParamSet(0.0, 1.0, 0.4, 0.6)
        a_plan = make_plan(OpKind.A, 0.3, pset, rl_kernel(), grid.axes[0])
        k_plan = make_plan(OpKind.K, 0.7, pset, rl_kernel(), grid.axes[0])
        via_a = apply_op_nd(a_plan, f).values[0]
        via_k = d_matrix(grid.axes[0]) @ apply_op_nd(k_plan, f).values[0]
        assert np.array_equal(via_a, via_k)

    def test_K_quadratic_convergence_order(self):
        errs = {}
        for n in (64, 256):
            grid = grid_1d(0.0, 1.0, n)
            t = grid.axes[0].nodes
            plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), grid.axes[0])
            out = apply_op_nd(plan, Field(grid, t * t))
            exact = 2.0 * t ** 2.5 / math.gamma(3.5)
            errs[n] = max_err(out, exact)
        order = math.log(errs[64] / errs[256]) / math.log(4.0)
        assert 1.7 <= order <= 2.2

    def test_B_quadratic_convergence_order(self):
        errs = {}
        for n in (64, 256):
            grid = grid_1d(0.0, 1.0, n)
            t = grid.axes[0].nodes
            plan = make_plan(OpKind.B, 0.5, LEFT, rl_kernel(), grid.axes[0])
            out = apply_op_nd(plan, Field(grid, t * t))
            exact = 2.0 * t ** 1.5 / math.gamma(2.5)
            errs[n] = max_err(out, exact)
        order = math.log(errs[64] / errs[256]) / math.log(4.0)
        assert 1.3 <= order <= 1.6


class TestPartialOperators:
    def test_acts_along_one_axis_only(self):
        grid = GridND((make_uniform_grid(0.0, 1.0, 16),
                       make_uniform_grid(0.0, 1.0, 12)))
        f = Field.from_function(grid, lambda t1, t2: np.sin(t2) + 0.0 * t1)
        # B along axis 0 of a field constant in t1 vanishes identically.
        plan = make_plan(OpKind.B, 0.5, LEFT, rl_kernel(), grid.axes[0], axis=0)
        assert np.all(apply_op_nd(plan, f).values == 0.0)

    def test_axis1_matches_line_by_line(self):
        grid = GridND((make_uniform_grid(0.0, 1.0, 8),
                       make_uniform_grid(0.0, 1.0, 20)))
        f = Field.from_function(grid, lambda t1, t2: np.exp(t1) * t2 * t2)
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), grid.axes[1], axis=1)
        out = apply_op_nd(plan, f)
        line_grid = grid_1d(0.0, 1.0, 20)
        line_plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(),
                              line_grid.axes[0])
        for i in (0, 3, 8):
            line = Field(line_grid, f.values[0, i])
            expect = apply_op_nd(line_plan, line).values[0]
            # Same weights, different contraction order: equal to rounding.
            np.testing.assert_allclose(out.values[0, i], expect,
                                       rtol=0.0, atol=1e-14)

    def test_apply_op_1d_guards(self):
        grid2 = GridND((make_uniform_grid(0.0, 1.0, 8),
                        make_uniform_grid(0.0, 1.0, 8)))
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), grid2.axes[0])
        with pytest.raises(GridMismatch):
            apply_op_1d(plan, Field.constant(grid2, 1.0))

    def test_grid_mismatch_detected(self):
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(),
                         make_uniform_grid(0.0, 1.0, 8))
        with pytest.raises(GridMismatch):
            apply_op_nd(plan, Field.constant(grid_1d(0.0, 1.0, 16), 1.0))

    def test_frac_gradient(self):
        grid = GridND((make_uniform_grid(0.0, 1.0, 10),
                       make_uniform_grid(0.0, 1.0, 14)))
        f = Field.from_function(grid, lambda t1, t2: t1 * t1 + t2)
        psets = [LEFT, ParamSet(0.0, 1.0, 0.5, 0.5)]
        grads = frac_gradient(f, OpKind.K, psets, [0.5, 0.7],
                              [rl_kernel(), rl_kernel()])
        assert len(grads) == 2
        for i, g in enumerate(grads):
            plan = make_plan(OpKind.K, [0.5, 0.7][i], psets[i], rl_kernel(),
                             grid.axes[i], axis=i)
            np.testing.assert_array_equal(g.values, apply_op_nd(plan, f).values)
        with pytest.raises(LengthMismatch):
            frac_gradient(f, OpKind.K, psets, [0.5], [rl_kernel()] * 2)


class TestTabulatedKernels:
    def rl_samples(self, order, smax, m, s0=1e-5):
        s = np.linspace(s0, smax, m)
        return np.column_stack([s, s ** (order - 1.0) / math.gamma(order)])

    def test_tracks_rl_kernel(self):
        grid = grid_1d(0.0, 1.0, 64)
        t = grid.axes[0].nodes
        kern = tabulated_kernel(self.rl_samples(0.5, 1.0, 100000))
        plan = make_plan(OpKind.K, 0.5, LEFT, kern, grid.axes[0])
        out = apply_op_nd(plan, Field(grid, t))
        exact = t ** 1.5 / math.gamma(2.5)
        # The tabulation misses the singular burst below its first sample
        # (about 2 sqrt(s_0)/sqrt(pi) of kernel mass); modest bound.
        assert max_err(out, exact) < 1e-2

    def test_resolution_too_coarse(self):
        grid = grid_1d(0.0, 1.0, 64)
        kern = tabulated_kernel(self.rl_samples(0.5, 1.0, 12))
        with pytest.raises(DomainError):
            make_plan(OpKind.K, 0.5, LEFT, kern, grid.axes[0])

    def test_range_shorter_than_span(self):
        grid = grid_1d(0.0, 1.0, 64)
        kern = tabulated_kernel(self.rl_samples(0.5, 0.5, 20000))
        with pytest.raises(RangeError):
            make_plan(OpKind.K, 0.5, LEFT, kern, grid.axes[0])


class TestAdjoint:
    def test_transpose_identity_in_weighted_product(self):
        grid = grid_1d(0.0, 1.0, 48)
        t = grid.axes[0].nodes
        f = Field(grid, np.sin(3.0 * t))
        g = Field(grid, np.exp(-t))
        pset = ParamSet(0.0, 1.0, 0.7, 0.3)
        plan = make_plan(OpKind.B, 0.4, pset, rl_kernel(), grid.axes[0])
        lhs = volume_integral(Field(grid, g.data * apply_op_nd(plan, f).data))
        rhs = -volume_integral(
            Field(grid, f.data * adjoint_apply(plan, g, negate=True).data))
        assert lhs == pytest.approx(rhs, abs=1e-13)

    def test_negate_flag(self):
        grid = grid_1d(0.0, 1.0, 16)
        f = Field(grid, np.linspace(0.0, 1.0, 17) ** 2)
        plan = make_plan(OpKind.K, 0.5, LEFT, rl_kernel(), grid.axes[0])
        plus = adjoint_apply(plan, f, negate=False).values
        minus = adjoint_apply(plan, f, negate=True).values
        np.testing.assert_array_equal(plus, -minus)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1),
       kind=st.sampled_from([OpKind.K, OpKind.A, OpKind.B]),
       order=st.floats(0.1, 0.9),
       p=st.floats(0.0, 1.0), q=st.floats(0.0, 1.0))
def test_operator_linearity(seed, kind, order, p, q):
    rng = np.random.default_rng(seed)
    grid = grid_1d(0.0, 1.0, 24)
    plan = make_plan(kind, order, ParamSet(0.0, 1.0, p, q), rl_kernel(),
                     grid.axes[0])
    f = Field(grid, rng.standard_normal(25))
    g = Field(grid, rng.standard_normal(25))
    c1, c2 = rng.uniform(-2.0, 2.0, size=2)
    combo = Field(grid, c1 * f.values + c2 * g.values)
    lhs = apply_op_nd(plan, combo).values
    rhs = (c1 * apply_op_nd(plan, f).values
           + c2 * apply_op_nd(plan, g).values)
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1),
       order=st.floats(0.1, 0.9),
       p=st.floats(-1.5, 1.5), q=st.floats(-1.5, 1.5))
def test_combined_integral_l1_bound(seed, order, p, q):
    # Young's inequality: ||K f||_1 <= (|p| + |q|) ||k||_1 ||f||_1, where
    # the power kernel has ||k||_{L1(0, b-a)} = (b-a)^order / Gamma(1+order).
    rng = np.random.default_rng(seed)
    grid = grid_1d(0.0, 1.0, 48)
    plan = make_plan(OpKind.K, order, ParamSet(0.0, 1.0, p, q), rl_kernel(),
                     grid.axes[0])
    f = Field(grid, rng.standard_normal(49))
    w = grid.axes[0].trapezoid_weights()
    norm_in = float(w @ np.abs(np.ravel(f.values)))
    norm_out = float(w @ np.abs(np.ravel(apply_op_nd(plan, f).values)))
    kernel_mass = 1.0 / math.gamma(1.0 + order)
    excess = norm_out - (abs(p) + abs(q)) * kernel_mass * norm_in
    assert excess <= 1e-10 * max(1.0, norm_in)
