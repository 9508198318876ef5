import numpy as np
import pytest

from entdim.dimension import (
    affinity_report,
    delta_c_entropy,
    delta_c_fractal,
    kernel_independence_report,
    lipschitz_invariance_report,
)
from entdim.measures import (
    BernoulliConvolution,
    LipschitzPushforward,
    Mixture,
    affine_map,
    dirac,
    sine_perturbed_map,
    translated,
    uniform_grid,
)
from entdim.numerics import geometric_grid
from entdim.smoothing import BoxKernel, GaussianKernel

from helpers import scaling_exponent_oracle

GRID = geometric_grid(1e-1, 1e-3, 13)


class TestEntropyRoute:
    def test_atom_dimension_zero(self, dirac0):
        est = delta_c_entropy(dirac0, GaussianKernel(), GRID)
        assert est.value == pytest.approx(0.0, abs=0.05)

    def test_uniform_dimension_one(self, uniform01):
        est = delta_c_entropy(uniform01, GaussianKernel(), GRID)
        assert est.value == pytest.approx(1.0, abs=0.05)
        assert not est.flagged  # flat curves must not be flagged via r^2

    def test_cantor_dimension_matches_oracle(self, cantor4):
        oracle = scaling_exponent_oracle(cantor4.lam)
        est = delta_c_entropy(cantor4, BoxKernel(), GRID)
        assert est.value == pytest.approx(oracle, abs=0.05)

    def test_estimate_serializes(self, dirac0):
        doc = delta_c_entropy(dirac0, GaussianKernel(), GRID).to_dict()
        assert set(doc) >= {"value", "confidence", "method", "curve"}
        assert len(doc["curve"]) == len(GRID)


class TestFractalRoute:
    def test_atom_is_exactly_zero(self, dirac0):
        est = delta_c_fractal(dirac0, GRID, n_samples=2000, seed=1)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_uniform(self, uniform01):
        est = delta_c_fractal(uniform01, GRID, n_samples=20_000, seed=1)
        assert est.value == pytest.approx(1.0, abs=0.05)

    def test_cantor_third_matches_oracle(self, cantor3):
        oracle = scaling_exponent_oracle(cantor3.lam)
        assert oracle == pytest.approx(np.log(2) / np.log(3), abs=0.02)
        est = delta_c_fractal(cantor3, geometric_grid(1e-1, 1e-4, 16),
                              n_samples=30_000, seed=1)
        assert est.value == pytest.approx(oracle, abs=0.05)

    def test_routes_agree(self, cantor4):
        e = delta_c_entropy(cantor4, GaussianKernel(), GRID)
        f = delta_c_fractal(cantor4, GRID, n_samples=20_000, seed=2)
        assert abs(e.value - f.value) <= e.confidence + f.confidence


class TestInvarianceReports:
    def test_kernel_independence(self, cantor4):
        rep = kernel_independence_report(cantor4, [GaussianKernel(), BoxKernel()],
                                         GRID, n_samples=100_000)
        assert rep.max_difference <= 0.05
        assert rep.consistent

    def test_affinity_mixture(self, dirac0, uniform01):
        rep = affinity_report([(0.5, dirac0), (0.5, uniform01)], GaussianKernel(),
                              GRID, n_samples=100_000)
        assert rep.lhs == pytest.approx(0.5, abs=0.07)
        assert abs(rep.lhs - rep.rhs) <= rep.combined_confidence

    def test_lipschitz_invariance(self, cantor4):
        rep = lipschitz_invariance_report(cantor4, sine_perturbed_map(2.0),
                                          GaussianKernel(), GRID, n_samples=100_000)
        assert abs(rep.estimate.value - rep.pushforward_estimate.value) <= 0.07

    def test_translation_and_dilation_invariance(self, cantor4):
        base = delta_c_fractal(cantor4, GRID, n_samples=20_000, seed=3)
        shifted = delta_c_fractal(translated(cantor4, 2.0), GRID,
                                  n_samples=20_000, seed=4)
        doubled = delta_c_fractal(LipschitzPushforward(cantor4, affine_map(2.0)),
                                  GRID, n_samples=20_000, seed=5)
        assert abs(base.value - shifted.value) <= base.confidence + shifted.confidence
        assert abs(base.value - doubled.value) <= base.confidence + doubled.confidence

    def test_mixture_weight_monotonicity(self, dirac0, uniform01):
        vals = []
        for w in (0.2, 0.5, 0.8):
            mix = Mixture(((w, dirac0), (1.0 - w, uniform01)))
            vals.append(delta_c_fractal(mix, GRID, n_samples=20_000, seed=6).value)
        assert vals[0] > vals[1] > vals[2]

    def test_estimates_in_band(self, dirac0, uniform01, cantor4):
        for mu in (dirac0, uniform01, cantor4):
            e = delta_c_entropy(mu, GaussianKernel(), GRID)
            f = delta_c_fractal(mu, GRID, n_samples=10_000, seed=7)
            for est in (e, f):
                assert -0.05 <= est.value <= 1.05
