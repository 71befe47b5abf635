import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnkop import (
    Box,
    DensityKernel,
    DomainError,
    DurrmeyerKernel,
    EmptyIndexRangeError,
    OperatorConfig,
    StepFunction,
    durrmeyer_eval_1d,
    index_set,
    kantorovich_apply,
    kantorovich_eval,
    mean_value_grid,
)
from nnkop.operators import kantorovich_denominator

import oracles


class TestIndexSet:
    def test_examples(self):
        assert index_set(Box.of((0, 2)), 1).ranges() == [range(0, 2)]
        assert index_set(Box.of((0, 1)), 5).ranges() == [range(0, 5)]

    def test_empty_range(self):
        with pytest.raises(EmptyIndexRangeError):
            index_set(Box.of((0.3, 0.9)), 2)

    def test_decimal_endpoints(self):
        # 0.1 * 10 must count as exactly 1
        assert index_set(Box.of((0.1, 0.7)), 10).lo == (1,)
        assert index_set(Box.of((0.1, 0.7)), 10).hi == (6,)

    def test_shape_and_size(self):
        idx = index_set(Box.of((0, 2), (0, 3)), 4)
        assert idx.shape == (8, 12)
        assert idx.size == 96

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_bad_n(self, n):
        with pytest.raises(ValueError):
            index_set(Box.unit(1), n)

    def test_bad_box(self):
        with pytest.raises(ValueError):
            Box.of((1, 1))
        with pytest.raises(ValueError):
            Box(())


class TestMeanValueGrid:
    def test_pixels_at_unit_rate(self):
        f = StepFunction.uniform([[10, 20], [30, 40]], Box.of((0, 2), (0, 2)))
        g = mean_value_grid(f, None, 1)
        np.testing.assert_array_equal(g.values, [[10, 20], [30, 40]])

    def test_replication(self):
        f = StepFunction.uniform([[10, 20], [30, 40]], Box.of((0, 2), (0, 2)))
        g = mean_value_grid(f, None, 2)
        np.testing.assert_array_equal(g.values, np.kron([[10, 20], [30, 40]], np.ones((2, 2))))

    def test_linear_callable(self):
        g = mean_value_grid(lambda x: x, Box.unit(1), 2)
        np.testing.assert_allclose(g.values, [0.25, 0.75], rtol=0, atol=1e-15)

    def test_straddling_cells_against_quadrature(self, rng):
        # 16 steps on [0, 1] against cells of width 1/10
        v = rng.uniform(-3, 3, 16)
        f = StepFunction.uniform(v)
        g = mean_value_grid(f, None, 10)
        lo, ref = oracles.cell_means_1d(lambda t: float(f(t)), 0.0, 1.0, 10)
        np.testing.assert_allclose(g.values, ref, atol=1e-12)

    def test_2d_straddling_exact(self, rng):
        v = rng.uniform(0, 1, (3, 5))
        f = StepFunction.uniform(v)
        g = mean_value_grid(f, None, 4)
        # each cell mean by direct overlap area
        for k in range(4):
            for l in range(4):
                tot = 0.0
                for i in range(3):
                    ox = max(0.0, min((k + 1) / 4, (i + 1) / 3) - max(k / 4, i / 3))
                    for j in range(5):
                        oy = max(0.0, min((l + 1) / 4, (j + 1) / 5) - max(l / 4, j / 5))
                        tot += v[i, j] * ox * oy
                assert g.values[k, l] == pytest.approx(16 * tot, abs=1e-13)

    def test_values_within_range(self, rng):
        f = StepFunction.uniform(rng.uniform(-1, 4, (7, 9)))
        g = mean_value_grid(f, None, 13)
        assert g.values.min() >= f.values.min() - 1e-12
        assert g.values.max() <= f.values.max() + 1e-12

    def test_readonly(self):
        g = mean_value_grid(StepFunction.uniform([1.0, 2.0]), None, 3)
        with pytest.raises(ValueError):
            g.values[0] = 5.0

    def test_box_outside_domain(self):
        with pytest.raises(DomainError):
            mean_value_grid(StepFunction.uniform([1.0, 2.0]), Box.of((0, 2)), 3)

    def test_propagates_empty_range(self):
        with pytest.raises(EmptyIndexRangeError):
            mean_value_grid(lambda x: x, Box.of((0.3, 0.9)), 2)


class TestKantorovichEval:
    def test_constant(self, kernel):
        cfg = OperatorConfig(7, kernel)
        g = mean_value_grid(StepFunction.uniform(np.full((3, 4), 42.5)), None, 7)
        for x in [(0, 0), (0.5, 0.25), (1, 1), (0.123, 0.987)]:
            assert kantorovich_eval(cfg, g, x) == pytest.approx(42.5, rel=1e-15)

    def test_linear_example(self, kernel):
        g = mean_value_grid(lambda x: x, Box.unit(1), 2)
        val = kantorovich_eval(OperatorConfig(2, kernel), g, 0.5)
        phi0, phi1 = 0.3807971, 0.2410069
        assert val == pytest.approx((0.25 * phi1 + 0.75 * phi0) / (phi1 + phi0), abs=1e-7)
        assert val == pytest.approx(0.5562, abs=5e-5)

    def test_against_brute_force_1d(self, kernel, rng):
        f = StepFunction.uniform(rng.uniform(0, 1, 11))
        n = 9
        g = mean_value_grid(f, None, n)
        lo, means = oracles.cell_means_1d(lambda t: float(f(t)), 0.0, 1.0, n)
        for x in rng.uniform(0, 1, 20):
            ref = oracles.kantorovich_1d(means, lo, n, x)
            assert kantorovich_eval(OperatorConfig(n, kernel), g, x) == pytest.approx(ref, abs=1e-9)

    def test_mirror_symmetry(self, kernel, rng):
        # reflecting the grid maps node k to lo + hi - k, so the matching
        # point reflects n x about (lo + hi) / 2
        v = rng.uniform(0, 1, 12)
        n = 5
        g = mean_value_grid(StepFunction.uniform(v), None, n)
        gm = mean_value_grid(StepFunction.uniform(v[::-1]), None, n)
        np.testing.assert_allclose(gm.values, g.values[::-1], atol=1e-15)
        cfg = OperatorConfig(n, kernel)
        centre = (g.indices.lo[0] + g.indices.hi[0]) / n
        for x in rng.uniform(0, centre, 10):
            assert kantorovich_eval(cfg, g, x) == pytest.approx(kantorovich_eval(cfg, gm, centre - x), abs=1e-13)

    def test_outside_box(self, kernel):
        g = mean_value_grid(lambda x: x, Box.unit(1), 4)
        with pytest.raises(DomainError):
            kantorovich_eval(OperatorConfig(4, kernel), g, 1.2)

    def test_mismatched_n(self, kernel):
        g = mean_value_grid(lambda x: x, Box.unit(1), 4)
        with pytest.raises(ValueError):
            kantorovich_eval(OperatorConfig(5, kernel), g, 0.5)

    def test_three_dimensions(self, kernel, rng):
        v = rng.uniform(0, 1, (2, 3, 2))
        g = mean_value_grid(StepFunction.uniform(v), None, 3)
        val = kantorovich_eval(OperatorConfig(3, kernel), g, (0.2, 0.5, 0.9))
        assert v.min() <= val <= v.max()

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=8),
        st.integers(1, 12),
        st.floats(0, 1),
    )
    def test_convexity(self, vals, n, x):
        f = StepFunction.uniform(np.array(vals))
        g = mean_value_grid(f, None, n)
        out = kantorovich_eval(OperatorConfig(n), g, x)
        lo, hi = g.values.min(), g.values.max()
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        assert lo - tol <= out <= hi + tol


class TestKantorovichApply:
    def test_constant(self, kernel):
        g = mean_value_grid(StepFunction.uniform(np.full((4, 4), 3.0)), None, 6)
        out = kantorovich_apply(OperatorConfig(6, kernel), g, [np.linspace(0, 1, 9), np.linspace(0, 1, 5)])
        assert out.shape == (9, 5)
        np.testing.assert_allclose(out, 3.0, rtol=1e-15, atol=0)

    def test_pointwise_consistency(self, kernel, rng):
        f = StepFunction.uniform(rng.uniform(0, 255, (8, 8)))
        g = mean_value_grid(f, None, 8)
        xs, ys = np.linspace(0, 1, 16), rng.uniform(0, 1, 16)
        cfg = OperatorConfig(8, kernel)
        out = kantorovich_apply(cfg, g, [xs, ys])
        loop = np.array([[kantorovich_eval(cfg, g, (x, y)) for y in ys] for x in xs])
        assert np.array_equal(out, loop)

    def test_pointwise_consistency_1d(self, kernel, rng):
        g = mean_value_grid(StepFunction.uniform(rng.uniform(-1, 1, 10)), None, 7)
        xs = rng.uniform(0, 1, 40)
        cfg = OperatorConfig(7, kernel)
        out = kantorovich_apply(cfg, g, [xs])
        assert np.array_equal(out, [kantorovich_eval(cfg, g, x) for x in xs])

    def test_against_brute_force_2d(self, kernel, rng):
        img = rng.integers(0, 256, (3, 4)).astype(float)
        f = StepFunction.uniform(img, Box.of((0, 3), (0, 4)))
        n = 4
        g = mean_value_grid(f, None, n)
        means = oracles.image_means(img, n)
        xs, ys = np.array([0.0, 0.7, 1.5, 3.0]), np.array([0.2, 2.0, 3.9])
        out = kantorovich_apply(OperatorConfig(n, kernel), g, [xs, ys])
        # truncation drops tails below 1e-10 per axis; scaled by 255 and the
        # denominator bound this stays well under 1e-6
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                assert out[i, j] == pytest.approx(oracles.kantorovich_2d(means, (0, 0), n, x, y), abs=1e-6)

    def test_outside_box(self, kernel):
        g = mean_value_grid(StepFunction.uniform(np.ones((2, 2))), None, 2)
        with pytest.raises(DomainError):
            kantorovich_apply(OperatorConfig(2, kernel), g, [np.array([0.5]), np.array([-0.1])])

    def test_shape_for_refined_lattice(self, kernel):
        img = np.arange(6.0).reshape(2, 3)
        g = mean_value_grid(StepFunction.uniform(img, Box.of((0, 2), (0, 3))), None, 3)
        S = 3
        axes = [(np.arange(1, 2 * S + 1) - 0.5) / S, (np.arange(1, 3 * S + 1) - 0.5) / S]
        assert kantorovich_apply(OperatorConfig(3, kernel), g, axes).shape == (6, 9)


class TestDenominator:
    @pytest.mark.parametrize("n", [5, 15, 30])
    def test_lower_bound(self, kernel, rng, n):
        box = Box.unit(2)
        bound = kernel.phi(2.0) ** 2
        for x in rng.uniform(0, 1, (200, 2)):
            assert kantorovich_denominator(kernel, box, n, x) >= bound - 1e-12

    def test_truncated_close_to_full(self, kernel):
        box = Box.unit(1)
        full = kantorovich_denominator(kernel, box, 40, 0.37)
        trunc = kantorovich_denominator(kernel, box, 40, 0.37, truncate=True)
        assert abs(full - trunc) < 1e-9


class TestDurrmeyer:
    def test_kernel_constants(self):
        assert DurrmeyerKernel("box01").normalization == 1.0
        assert DurrmeyerKernel("hat").normalization == 0.5
        with pytest.raises(ValueError):
            DurrmeyerKernel("gauss")

    @pytest.mark.parametrize("kind", ["box01", "hat"])
    def test_constant(self, kind):
        val = durrmeyer_eval_1d(OperatorConfig(6), lambda t: np.full_like(t, 2.5), DurrmeyerKernel(kind), 0.4, Box.unit(1))
        assert val == pytest.approx(2.5, abs=1e-14)

    def test_box01_equals_kantorovich(self, kernel, rng):
        f = StepFunction.uniform(rng.uniform(-2, 2, 23))
        n = 16
        cfg = OperatorConfig(n, kernel)
        g = mean_value_grid(f, None, n)
        for x in rng.uniform(0, 1, 25):
            d = durrmeyer_eval_1d(cfg, f, DurrmeyerKernel("box01"), x)
            assert d == pytest.approx(kantorovich_eval(cfg, g, x), abs=1e-12)

    def test_hat_against_quadrature(self):
        # reference from scipy.integrate.quad over every k with the closed-form density
        val = durrmeyer_eval_1d(OperatorConfig(8), lambda t: t, DurrmeyerKernel("hat"), 0.5, Box.unit(1))
        assert val == pytest.approx(0.4997212668976608, abs=1e-8)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            durrmeyer_eval_1d(OperatorConfig(8), lambda t: t, DurrmeyerKernel("hat"), 1.5, Box.unit(1))

    def test_hat_step_function(self, rng):
        f = StepFunction.uniform(rng.uniform(0, 1, 5))
        val = durrmeyer_eval_1d(OperatorConfig(10), f, DurrmeyerKernel("hat"), 0.0)
        assert f.values.min() <= val <= f.values.max()
