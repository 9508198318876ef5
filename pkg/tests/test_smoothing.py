import math

import numpy as np
import pytest

from entdim.measures import (
    BernoulliConvolution,
    LipschitzPushforward,
    interval_mass,
    sine_perturbed_map,
    support_bounds,
    two_point,
)
from entdim.smoothing import (
    BoxKernel,
    CustomGridKernel,
    GaussianKernel,
    SmoothedDensity,
    kernel_from_name,
)
from entdim.measures import uniform_grid

SQRT_2PI = math.sqrt(2.0 * math.pi)


class TestKernels:
    def test_selector(self, tmp_path):
        assert isinstance(kernel_from_name("gauss"), GaussianKernel)
        assert kernel_from_name("box").support() == (-0.5, 0.5)
        assert kernel_from_name("box01").support() == (0.0, 1.0)
        from entdim.specio import dump_measure

        dump_measure(uniform_grid(-1.0, 1.0, step=0.05), tmp_path / "k.json")
        k = kernel_from_name(f"file:{tmp_path / 'k.json'}")
        assert isinstance(k, CustomGridKernel)
        # oracle: direct quadrature of p log p over the stored ramped density
        x = np.linspace(-1.1, 1.1, 200001)
        p = k.pdf(x)
        oracle = float(np.trapezoid(np.where(p > 0, p * np.log(np.maximum(p, 1e-300)), 0.0), x))
        assert k.entropy() == pytest.approx(oracle, abs=1e-3)

    def test_entropies(self):
        assert GaussianKernel().entropy() == pytest.approx(-1.4189385332046727)
        assert BoxKernel().entropy() == 0.0
        assert BoxKernel(0.0, 2.0).entropy() == pytest.approx(-math.log(2.0))

    def test_invalid_name(self):
        with pytest.raises(ValueError):
            kernel_from_name("triangle")


class TestDensity:
    def test_dirac_gaussian_closed_form(self, dirac0):
        sd = SmoothedDensity(dirac0, GaussianKernel(), 1.0)
        assert sd.density(np.array([0.0]))[0] == pytest.approx(1.0 / SQRT_2PI)

    def test_dirac_box_height(self, dirac0):
        sd = SmoothedDensity(dirac0, BoxKernel(), 0.2)
        assert sd.density(np.array([0.0]))[0] == pytest.approx(5.0)

    def test_uniform_box_interior(self, uniform01):
        # exact CDF oracle: the grid uniform has interior density 1/(1+step),
        # so the smoothed value sits within the ramp tolerance of 1
        sd = SmoothedDensity(uniform01, BoxKernel(), 0.1)
        val = sd.density(np.array([0.5]))[0]
        assert val == pytest.approx(1.0, abs=2e-3)

    def test_rejects_nonpositive_t(self, dirac0):
        with pytest.raises(ValueError):
            SmoothedDensity(dirac0, GaussianKernel(), 0.0)

    def test_box_density_is_interval_mass(self, cantor3):
        t, kernel = 0.05, BoxKernel()
        sd = SmoothedDensity(cantor3, kernel, t)
        x = np.linspace(-1.6, 1.6, 101)
        dens = sd.density(x)
        for xi, d in zip(x, dens):
            mass = interval_mass(cantor3, xi - t * kernel.b, xi - t * kernel.a)
            assert d == mass / (t * (kernel.b - kernel.a))

    def test_total_mass_all_backends(self, dirac0, uniform01, cantor4,
                                     dirac_uniform_mix):
        push = LipschitzPushforward(uniform01, sine_perturbed_map(2.0))
        for mu in (dirac0, uniform01, cantor4, dirac_uniform_mix, push):
            for kernel in (GaussianKernel(), BoxKernel()):
                for t in (0.1, 0.01):
                    sd = SmoothedDensity(mu, kernel, t, seed=3, n_samples=100_000)
                    assert sd.total_mass() == pytest.approx(1.0, abs=1e-4)

    def test_exact_backends_mass_tight(self, dirac0, gauss_grid):
        for mu, kernel in ((dirac0, GaussianKernel()), (dirac0, BoxKernel()),
                           (gauss_grid, GaussianKernel())):
            sd = SmoothedDensity(mu, kernel, 0.05)
            assert sd.total_mass() == pytest.approx(1.0, abs=1e-6)


class TestScore:
    def test_standard_normal_score(self, dirac0):
        sd = SmoothedDensity(dirac0, GaussianKernel(), 1.0)
        assert sd.score(np.array([0.7]))[0] == pytest.approx(-0.7)

    def test_score_scales_with_variance(self, dirac0):
        sd = SmoothedDensity(dirac0, GaussianKernel(), 2.0)
        assert sd.score(np.array([1.0]))[0] == pytest.approx(-0.25)

    def test_symmetric_two_atoms_zero_at_center(self):
        sd = SmoothedDensity(two_point(-1.0, 1.0), GaussianKernel(), 1.0)
        assert sd.score(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-14)

    def test_box_kernel_has_no_score(self, dirac0):
        sd = SmoothedDensity(dirac0, BoxKernel(), 0.1)
        with pytest.raises(ValueError):
            sd.score(np.array([0.0]))

    def test_matches_finite_difference(self, cantor4, gauss_grid, rng):
        for mu, t in ((gauss_grid, 0.3), (cantor4, 0.05)):
            sd = SmoothedDensity(mu, GaussianKernel(), t, seed=5)
            lo, hi = support_bounds(mu)
            x = rng.uniform(lo * 0.5, hi * 0.5, size=50)
            h = 1e-4 * t
            fd = (np.log(sd.density(x + h)) - np.log(sd.density(x - h))) / (2 * h)
            sc = sd.score(x)
            scale = np.max(np.abs(sc))
            assert np.max(np.abs(fd - sc)) <= 1e-3 * max(scale, 1.0)

    def test_out_of_support_signal(self, dirac0):
        sd = SmoothedDensity(dirac0, GaussianKernel(), 0.01)
        assert np.isnan(sd.score(np.array([50.0]))[0])


class TestMonteCarloBackend:
    def test_deterministic_given_seed(self, cantor4):
        a = SmoothedDensity(cantor4, GaussianKernel(), 0.05, seed=1)
        b = SmoothedDensity(cantor4, GaussianKernel(), 0.05, seed=1)
        x = np.linspace(-1.5, 1.5, 301)
        assert np.array_equal(a.density(x), b.density(x))

    def test_se_field_positive_and_small(self, cantor4):
        sd = SmoothedDensity(cantor4, GaussianKernel(), 0.05, seed=1)
        x = np.linspace(-1.2, 1.2, 51)
        se = sd.density_se(x)
        p = sd.density(x)
        assert np.all(se >= 0)
        bulk = p > 0.1
        assert np.all(se[bulk] < 0.2 * p[bulk])
        assert sd.trusted_fraction() > 0.99

    def test_nodes_weights_are_probability(self, cantor4, dirac_uniform_mix):
        for mu in (cantor4, dirac_uniform_mix):
            sd = SmoothedDensity(mu, GaussianKernel(), 0.1, seed=2, n_samples=50_000)
            x, w = sd.nodes_weights()
            assert w.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(w >= 0)
            # first moment of the smoothed measure equals that of mu (centered kernel)
            from entdim.measures import measure_expectation

            mean_mu, _ = measure_expectation(mu, lambda v: v, seed=4)
            assert (x * w).sum() == pytest.approx(mean_mu, abs=0.02)
