import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nnkop import DensityKernel, SigmoidFamily, density_eval, density_multi_eval, sigma_eval, truncation_radius

from oracles import phi_tanh

finite = st.floats(min_value=-60, max_value=60, allow_nan=False)


class TestSigma:
    def test_values(self):
        assert sigma_eval("tanh", 0.0) == 0.5
        assert sigma_eval("tanh", 1.0) == pytest.approx(0.8807971, abs=1e-7)
        assert sigma_eval("tanh", -1.0) == pytest.approx(1 - sigma_eval("tanh", 1.0), abs=1e-15)

    def test_matches_tanh_form(self, rng):
        x = rng.uniform(-20, 20, 2000)
        np.testing.assert_allclose(sigma_eval("tanh", x), (np.tanh(x) + 1) / 2, rtol=0, atol=5e-16)

    def test_limits(self):
        assert sigma_eval("tanh", -50.0) < 1e-10
        assert sigma_eval("tanh", 50.0) > 1 - 1e-10

    @pytest.mark.parametrize("family", list(SigmoidFamily))
    def test_class_conditions(self, family):
        x = np.linspace(-30, 30, 6001)
        s = sigma_eval(family, x)
        assert np.all(np.diff(s) >= 0)
        np.testing.assert_allclose(sigma_eval(family, -x), 1 - s, atol=1e-15)

    @pytest.mark.parametrize("family", ["tanh", "logistic"])
    def test_below_one_at_one(self, family):
        assert sigma_eval(family, 1.0) < 1

    def test_ramp_saturates_at_one(self):
        # the ramp is outside the smooth class: it reaches 1 at x = 1/2
        assert sigma_eval("ramp", 1.0) == 1.0

    def test_scalar_and_array_agree(self, rng):
        x = rng.uniform(-10, 10, 200)
        arr = sigma_eval("logistic", x)
        assert np.allclose([sigma_eval("logistic", float(v)) for v in x], arr, atol=1e-16)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            sigma_eval("relu", 0.0)

    def test_ramp_pieces(self):
        assert sigma_eval("ramp", -0.7) == 0.0
        assert sigma_eval("ramp", 0.2) == pytest.approx(0.7)
        assert sigma_eval("ramp", 3.0) == 1.0


class TestDensity:
    def test_values(self, kernel):
        assert density_eval(kernel, 0.0) == pytest.approx(0.3807971, abs=1e-7)
        assert density_eval(kernel, 2.0) == pytest.approx(0.0583651, abs=1e-7)
        assert density_eval(kernel, -2.0) == density_eval(kernel, 2.0)

    def test_closed_form(self, kernel, rng):
        x = rng.uniform(-8, 8, 500)
        np.testing.assert_allclose(kernel.phi(x), [phi_tanh(v) for v in x], rtol=1e-13, atol=1e-16)

    def test_tail_has_relative_precision(self, kernel):
        # where the difference of sigmoids would cancel, the density keeps full precision
        x = 20.0
        expected = 0.5 * math.exp(-2 * x) * (math.exp(2) - math.exp(-2))
        assert kernel.phi(x) == pytest.approx(expected, rel=1e-12)

    @given(finite)
    def test_even(self, x):
        k = DensityKernel()
        assert k.phi_scalar(x) == k.phi_scalar(-x)

    def test_nonincreasing_on_halfline(self, kernel):
        v = kernel.phi(np.linspace(0, 40, 4001))
        assert np.all(v >= 0)
        assert np.all(np.diff(v) <= 0)
        assert kernel.phi(2.0) > 0

    def test_array_matches_scalar(self, kernel, rng):
        x = rng.uniform(-15, 15, 300)
        np.testing.assert_allclose(kernel.phi(x), [kernel.phi_scalar(v) for v in x], rtol=1e-15, atol=0)

    def test_unit_mass(self, kernel):
        mass, _ = quad(kernel.phi_scalar, -kernel.radius - 5, kernel.radius + 5, limit=200)
        assert mass == pytest.approx(1.0, abs=1e-6)


class TestMultiDensity:
    def test_values(self, kernel):
        assert density_multi_eval(kernel, (0.0, 0.0)) == pytest.approx(0.1450064, abs=1e-7)
        assert density_multi_eval(kernel, (2.0, 0.0)) == pytest.approx(0.0222252, abs=1e-7)

    def test_empty_vector(self, kernel):
        with pytest.raises(ValueError):
            density_multi_eval(kernel, [])

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=4))
    def test_permutation_symmetry(self, xs):
        k = DensityKernel()
        assert k.psi(xs) == pytest.approx(k.psi(list(reversed(xs))), rel=1e-15)

    def test_partition_of_unity_lattice(self, kernel):
        ks = np.arange(-30, 31)
        w1 = kernel.phi(0.3 - ks)
        w2 = kernel.phi(0.7 - ks)
        assert abs(np.sum(np.outer(w1, w2)) - 1.0) < 1e-12


class TestTruncationRadius:
    def test_default(self, kernel):
        assert kernel.radius == pytest.approx(12.2, abs=0.06)
        # bracket: below tol just outside, above tol 0.01 inside
        assert kernel.phi(kernel.radius) < 1e-10
        assert kernel.phi(kernel.radius - 0.011) >= 1e-10

    def test_large_tolerance(self):
        assert truncation_radius("tanh", 1.0) == 0.0

    def test_monotone(self):
        radii = [truncation_radius("tanh", t) for t in (1e-3, 1e-6, 1e-9, 1e-12)]
        assert radii == sorted(radii)
        assert truncation_radius("tanh", 1e-12) > truncation_radius("tanh", 1e-6)

    def test_ramp_is_compact(self):
        assert truncation_radius("ramp", 1e-12) == pytest.approx(1.5, abs=0.011)

    def test_invalid_kernel_tolerance(self):
        with pytest.raises(ValueError):
            DensityKernel(tol=0.0)
        with pytest.raises(ValueError):
            DensityKernel(tol=1.5)

    def test_decay_class(self):
        assert all(f.decay_class == "exponential" for f in SigmoidFamily)
