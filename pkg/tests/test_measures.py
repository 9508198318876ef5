import math

import numpy as np
import pytest

from entdim.measures import (
    Atomic,
    BernoulliConvolution,
    GridDensity,
    LipschitzPushforward,
    MeasureError,
    Mixture,
    affine_map,
    dirac,
    interval_mass,
    interval_mass_bounds,
    measure_expectation,
    sample,
    sampling_metadata,
    sine_perturbed_map,
    support_bounds,
    translated,
    uniform_grid,
)

from helpers import sign_enumeration_mass, sign_enumeration_points


class TestConstruction:
    def test_atomic_weights_must_sum_to_one(self):
        with pytest.raises(MeasureError):
            Atomic(np.array([0.0, 1.0]), np.array([0.5, 0.6]))

    def test_atomic_negative_weight_rejected(self):
        with pytest.raises(MeasureError):
            Atomic(np.array([0.0, 1.0]), np.array([1.5, -0.5]))

    def test_bernoulli_parameter_range(self):
        for lam in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(MeasureError):
                BernoulliConvolution(lam)

    def test_grid_normalization_conventions(self):
        g = GridDensity(0.0, 0.1, np.array([1.0, 2.0, 1.0]))
        # after zero padding, step * sum(values) and the trapezoid mass agree
        assert g.step * g.values.sum() == pytest.approx(1.0, abs=1e-12)
        lo, hi = support_bounds(g)
        assert interval_mass(g, lo, hi) == pytest.approx(1.0, abs=1e-9)

    def test_mixture_weights_validated(self):
        with pytest.raises(MeasureError):
            Mixture(((0.5, dirac(0.0)), (0.6, dirac(1.0))))

    def test_bilipschitz_certification_rejects_bad_constants(self):
        from entdim.measures import MapSpec

        lying = MapSpec(fn=lambda x: 3.0 * x, inverse=lambda y: y / 3.0,
                        m=1.0, M=2.0, increasing=True)
        with pytest.raises(MeasureError):
            LipschitzPushforward(uniform_grid(0.0, 1.0), lying)


class TestIntervalMass:
    def test_dirac_full_mass(self, dirac0):
        assert interval_mass(dirac0, -1.0, 1.0) == 1.0

    def test_bernoulli_half_line_symmetry(self, cantor3):
        # the law is symmetric and atom-free, so each closed half-line
        # (queried slightly past the support edge) carries exactly 1/2
        assert interval_mass(cantor3, 0.0, 2.0) == pytest.approx(0.5, abs=1e-10)
        assert interval_mass(cantor3, -2.0, 0.0) == pytest.approx(0.5, abs=1e-10)

    def test_bernoulli_ball_masses_match_enumeration(self, cantor4):
        lam = cantor4.lam
        points, tail = sign_enumeration_points(lam, depth=16)
        center = float(np.sum(lam ** np.arange(16)))
        for k in (1, 3, 5, 8):
            r = lam**k
            got = interval_mass(cantor4, center - r, center + r)
            inner, outer = sign_enumeration_mass(points, tail, center - r, center + r)
            assert inner - 2.0**-16 <= got <= outer + 2.0**-16
            # ball of radius lam**k around a support point: one surviving branch
            assert got == pytest.approx(2.0**-k, rel=0.55)

    def test_bernoulli_random_intervals_against_oracle(self, cantor4, rng):
        points, tail = sign_enumeration_points(cantor4.lam, depth=16)
        for _ in range(100):
            a = rng.uniform(-1.5, 1.4)
            b = a + rng.uniform(0.005, 1.0)
            got = interval_mass(cantor4, a, b)
            inner, outer = sign_enumeration_mass(points, tail, a, b)
            assert inner - 2.0**-16 <= got <= outer + 2.0**-16

    def test_monotone_and_additive(self, cantor4, uniform01, rng):
        for mu in (cantor4, uniform01):
            for _ in range(50):
                pts = np.sort(rng.uniform(-1.6, 1.6, size=4))
                inner = interval_mass(mu, pts[1], pts[2])
                outer = interval_mass(mu, pts[0], pts[3])
                assert inner <= outer + 1e-12
                cuts = np.sort(rng.uniform(pts[0], pts[3], size=3))
                parts = sum(interval_mass(mu, a, b)
                            for a, b in zip([pts[0], *cuts], [*cuts, pts[3]]))
                assert parts == pytest.approx(outer, abs=1e-9)

    def test_support_bounds_carry_full_mass(self, dirac0, uniform01, cantor3,
                                            dirac_uniform_mix):
        for mu in (dirac0, uniform01, cantor3, dirac_uniform_mix):
            lo, hi = support_bounds(mu)
            pad = 1e-9 * (1.0 + abs(lo) + abs(hi))
            assert interval_mass(mu, lo - pad, hi + pad) == pytest.approx(1.0, abs=1e-9)

    def test_pushforward_mass_identity(self, cantor4, rng):
        f = sine_perturbed_map(2.0)
        push = LipschitzPushforward(cantor4, f)
        for _ in range(25):
            a = rng.uniform(-3.5, 2.5)
            b = a + rng.uniform(0.05, 1.5)
            ia = float(f.invert(np.array([a]))[0])
            ib = float(f.invert(np.array([b]))[0])
            assert interval_mass(push, a, b) == interval_mass(cantor4, ia, ib)

    def test_depth_cap_returns_bracket(self):
        shallow = BernoulliConvolution(0.25, depth_cap=4)
        edge = shallow.radius  # all-plus support point; cylinders nest here
        out = interval_mass(shallow, edge - 1e-6, edge + 1e-6)
        assert isinstance(out, tuple) and 0.0 <= out[0] < out[1]
        deep = BernoulliConvolution(0.25)
        exact = interval_mass(deep, edge - 1e-6, edge + 1e-6)
        assert out[0] <= exact <= out[1]


class TestSupportBounds:
    def test_examples(self, dirac0, cantor3, uniform01):
        assert support_bounds(dirac0) == (0.0, 0.0)
        lo, hi = support_bounds(cantor3)
        assert (lo, hi) == pytest.approx((-1.5, 1.5), abs=1e-12)
        mix = Mixture(((0.5, dirac0), (0.5, uniform01)))
        lo, hi = support_bounds(mix)
        # grid densities pad one zero sample per side, widening the certified
        # interval by one step
        assert lo == pytest.approx(0.0, abs=2e-3) and hi == pytest.approx(1.0, abs=2e-3)


class TestSampling:
    def test_atomic_deterministic_values(self, dirac0):
        rng = np.random.default_rng(5)
        assert np.all(sample(dirac0, 5, rng) == 0.0)
        single = Mixture(((1.0, dirac(3.0)),))
        assert np.all(sample(single, 3, np.random.default_rng(0)) == 3.0)

    def test_reproducible_given_seed(self, cantor4, uniform01):
        for mu in (cantor4, uniform01):
            a = sample(mu, 1000, np.random.default_rng(11))
            b = sample(mu, 1000, np.random.default_rng(11))
            assert np.array_equal(a, b)

    def test_bernoulli_moments(self):
        mu = BernoulliConvolution(0.25)
        x = sample(mu, 100_000, np.random.default_rng(3))
        std = math.sqrt(mu.variance)
        assert abs(x.mean()) <= 3.0 * std / math.sqrt(len(x))
        assert x.var() == pytest.approx(mu.variance, rel=0.05)

    def test_bernoulli_truncation_metadata(self, cantor4):
        meta = sampling_metadata(cantor4)
        assert meta["truncation_error"] < 1e-12
        lam, k = cantor4.lam, meta["truncation_depth"]
        assert lam ** (k + 1) / (1 - lam) == pytest.approx(meta["truncation_error"])

    def test_grid_sampling_matches_cdf(self, uniform01):
        x = sample(uniform01, 200_000, np.random.default_rng(7))
        for q in (0.1, 0.5, 0.9):
            assert np.mean(x <= q) == pytest.approx(q, abs=5e-3)

    def test_mixture_sampling_weights(self, dirac_uniform_mix):
        x = sample(dirac_uniform_mix, 100_000, np.random.default_rng(9))
        assert np.mean(x == 0.0) == pytest.approx(0.5, abs=0.01)


class TestHelpers:
    def test_translated_shifts_mass(self, uniform01):
        shifted = translated(uniform01, 2.5)
        assert interval_mass(shifted, 2.5, 3.0) == pytest.approx(
            interval_mass(uniform01, 0.0, 0.5), abs=1e-12)

    def test_measure_expectation_exact_branches(self, dirac0, uniform01):
        val, err = measure_expectation(dirac0, lambda x: x**2 + 1.0)
        assert (val, err) == (1.0, 0.0)
        val, err = measure_expectation(uniform01, lambda x: x)
        assert val == pytest.approx(0.5, abs=1e-6)

    def test_affine_map_roundtrip(self):
        f = affine_map(-2.0, 1.0)
        x = np.linspace(-3, 3, 11)
        assert np.allclose(f.invert(f.apply(x)), x, atol=1e-12)
        assert not f.increasing

    def test_sine_map_inverse_accuracy(self, rng):
        f = sine_perturbed_map(2.0)
        y = rng.uniform(-20, 20, size=500)
        x = f.invert(y)
        assert np.max(np.abs(f.apply(x) - y)) < 1e-9
