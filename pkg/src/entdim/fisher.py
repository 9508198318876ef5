"""Fisher information of Gaussian-smoothed measures and the dimension
estimate built from its scale integral.

With P_s mu = mu * N(0, s), the heat-flow identity
    d/ds H(P_s mu) = -F(P_s mu) / 2
links entropy dissipation to the Fisher information
    F = integral of (d/dx log p)^2 p dx,
and 1 - slope of s -> integral_t^1 F(P_s mu) ds against |log t| recovers the
entropy dimension.  The variational form
    F = 2 sup_f { E[f''] - E[(f')^2] / 2 }
is evaluated over a finite basis of twice-differentiable functions, giving a
certified lower bound b' A^+ b with b_i = E[phi_i''], A_ij = E[phi_i' phi_j'].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite_e

from .measures import support_bounds
from .numerics import (
    DENSITY_FLOOR,
    derived_rng,
    fit_scaling,
    geometric_grid,
    psd_quadratic_max,
)
from .entropy import ScalingCurve, entropy
from .dimension import CONFIDENCE_FLOOR, DimensionEstimate, _poor_fit
from .smoothing import heat_smoothed, DEFAULT_MC_SAMPLES

__all__ = [
    "BoundViolation",
    "TestFunctionBasis",
    "default_basis",
    "quadratic_basis",
    "FisherResult",
    "fisher_direct",
    "fisher_variational",
    "de_bruijn_check",
    "delta_c_fisher",
    "default_s_grid",
    "dudley_diagnostic",
]

FISHER_BOUND_SLACK = 1.05  # F(P_s mu) <= 1/s; abort beyond slack * 1/s
PINV_CUTOFF = 1e-10


class BoundViolation(RuntimeError):
    """A computed quantity violated a proven bound beyond tolerance."""


@dataclass(frozen=True, eq=False)
class TestFunctionBasis:
    """Finite family of twice-differentiable test functions.

    Each entry is a triple of vectorized callables (phi, phi', phi'').
    The default family is probabilists' Hermite polynomials times a Gaussian
    window, affinely rescaled to the target support:

        phi_k(x) = He_k(u) W(u),  u = (x - c)/w,  W(u) = exp(-u^2/2),

    whose derivatives stay in the family: phi_k' = -He_{k+1} W / w and
    phi_k'' = He_{k+2} W / w^2.
    """

    triples: tuple
    label: str = "basis"

    @property
    def size(self):
        return len(self.triples)

    def head(self, k):
        return TestFunctionBasis(self.triples[:k], f"{self.label}[:{k}]")

    def eval_first(self, x):
        return np.stack([t[1](x) for t in self.triples]) if self.triples else np.empty((0, len(x)))

    def eval_second(self, x):
        return np.stack([t[2](x) for t in self.triples]) if self.triples else np.empty((0, len(x)))


def _hermite_triple(k, center, width):
    ek = np.zeros(k + 1)
    ek[k] = 1.0
    e1 = np.zeros(k + 2)
    e1[k + 1] = 1.0
    e2 = np.zeros(k + 3)
    e2[k + 2] = 1.0

    def phi(x, _c=center, _w=width, _e=ek):
        u = (np.asarray(x, dtype=float) - _c) / _w
        return hermite_e.hermeval(u, _e) * np.exp(-0.5 * u * u)

    def dphi(x, _c=center, _w=width, _e=e1):
        u = (np.asarray(x, dtype=float) - _c) / _w
        return -hermite_e.hermeval(u, _e) * np.exp(-0.5 * u * u) / _w

    def ddphi(x, _c=center, _w=width, _e=e2):
        u = (np.asarray(x, dtype=float) - _c) / _w
        return hermite_e.hermeval(u, _e) * np.exp(-0.5 * u * u) / _w**2

    return (phi, dphi, ddphi)


def default_basis(mu, variance, m=8):
    """Windowed Hermite family scaled to the support of mu padded by the
    Gaussian smoothing reach; window standard deviation is a quarter of the
    padded width."""
    t = math.sqrt(variance)
    lo, hi = support_bounds(mu)
    lo, hi = lo - 8.0 * t, hi + 8.0 * t
    center = 0.5 * (lo + hi)
    width = (hi - lo) / 4.0
    return TestFunctionBasis(tuple(_hermite_triple(k, center, width) for k in range(m)),
                             label=f"hermite{m}")


def quadratic_basis():
    """Single test function x^2/2 (f'' = 1); handy for closed-form checks."""
    return TestFunctionBasis((
        (lambda x: 0.5 * np.asarray(x, float) ** 2,
         lambda x: np.asarray(x, float),
         lambda x: np.ones_like(np.asarray(x, float))),
    ), label="quadratic")


def _moment_arrays(sd, basis, weight_fn=None):
    """b_i = E[g phi_i''], A_ij = E[phi_i' phi_j'], C_ij = E[phi_i'' phi_j'']
    against the smoothed measure, from its normalized node/weight proxy."""
    x, w = sd.nodes_weights()
    d1 = basis.eval_first(x)
    d2 = basis.eval_second(x)
    g = np.ones_like(x) if weight_fn is None else np.asarray(weight_fn(x), dtype=float)
    b = d2 @ (w * g)
    A = (d1 * w) @ d1.T
    C = (d2 * w) @ d2.T
    return b, A, C


@dataclass
class FisherResult:
    value: float
    error: float
    method: str
    coverage: float = 1.0
    info: dict = field(default_factory=dict)


def fisher_direct(mu, s, *, seed=42, n_samples=DEFAULT_MC_SAMPLES, check_bound=True,
                  cross_check_points=2000):
    """F(P_s mu) by quadrature of score^2 * density on the evaluation grid.

    Monte-Carlo-backed measures use the binned kernel-density grid and are
    cross-checked against the sample average of score(Z)^2 over draws
    Z ~ P_s mu; low-confidence density regions are excluded and the retained
    mass fraction is reported as coverage.
    """
    t = math.sqrt(s)
    sd = heat_smoothed(mu, s, seed=seed, n_samples=n_samples)
    if sd.method in ("quadrature", "monte-carlo"):
        gx, p, dp, se = sd._grid_eval()
    else:
        segs = sd.quad_segments()
        xs = [sd._segment_nodes(seg) for seg in segs]
        gx = np.concatenate(xs)
        p = sd.density(gx)
        dp = sd.derivative(gx)
        se = np.zeros_like(p)
    good = p > DENSITY_FLOOR
    if sd.method == "monte-carlo":
        good &= se <= sd.se_ceiling * np.maximum(p, DENSITY_FLOOR)
    integrand = np.zeros_like(p)
    integrand[good] = dp[good] ** 2 / p[good]
    value = float(np.trapezoid(integrand, gx))
    coverage = float(np.trapezoid(np.where(good, p, 0.0), gx) / max(np.trapezoid(p, gx), 1e-300))
    info = {"s": float(s), "t": t}
    err = abs(value - float(np.trapezoid(integrand[::2], gx[::2]))) / 3.0
    if sd.method == "monte-carlo" and cross_check_points:
        rng = derived_rng(seed, 0xFC)
        z = sd.smoothed_sample(cross_check_points, rng)
        sc = sd.score(z)
        sc = sc[np.isfinite(sc)]
        mc = float(np.mean(sc**2))
        mc_se = float(np.std(sc**2, ddof=1) / math.sqrt(len(sc)))
        info.update({"mc_value": mc, "mc_se": mc_se})
        err = max(err, abs(value - mc) / 3.0)
    if check_bound and value > FISHER_BOUND_SLACK / s:
        raise BoundViolation(
            f"F(P_s mu) = {value:.6g} exceeds {FISHER_BOUND_SLACK}/s = {FISHER_BOUND_SLACK / s:.6g} at s = {s:.3g}")
    return FisherResult(max(value, 0.0), err, sd.method, coverage, info)


def fisher_variational(mu, s, basis, *, seed=42, n_samples=DEFAULT_MC_SAMPLES):
    """Lower bound on F(P_s mu): the quadratic program over span(basis).

    The optimum of 2 b.c - c.A.c is b' A^+ b (pseudo-inverse with relative
    cutoff), non-decreasing under basis nesting and never above the true F.
    """
    sd = heat_smoothed(mu, s, seed=seed, n_samples=n_samples)
    b, A, _ = _moment_arrays(sd, basis)
    value = psd_quadratic_max(b, A, cutoff=PINV_CUTOFF)
    flagged = value < 0
    return FisherResult(max(value, 0.0), 0.0, "variational",
                        info={"basis": basis.label, "m": basis.size, "flagged": flagged})


def de_bruijn_check(mu, s, h, *, seed=42, n_samples=DEFAULT_MC_SAMPLES):
    """Finite-difference check of d/ds H(P_s mu) = -F(P_s mu)/2.

    Both entropies share the smoothing seed, so Monte-Carlo-backed measures
    use identical sample clouds at s-h and s+h and the difference quotient
    stays smooth.
    """
    if not 0 < h < s:
        raise ValueError("need 0 < h < s")
    sd_hi = heat_smoothed(mu, s + h, seed=seed, n_samples=n_samples)
    sd_lo = heat_smoothed(mu, s - h, seed=seed, n_samples=n_samples)
    h_hi = entropy(sd_hi, cross_check=False).value
    h_lo = entropy(sd_lo, cross_check=False).value
    lhs = (h_hi - h_lo) / (2.0 * h)
    f = fisher_direct(mu, s, seed=seed, n_samples=n_samples)
    rhs = -0.5 * f.value
    return lhs, rhs


def default_s_grid(points=30, smax=1.0, smin=1e-4):
    return geometric_grid(smax, smin, points)


def fisher_curve(mu, s_grid=None, *, seed=42, n_samples=DEFAULT_MC_SAMPLES):
    """(s descending, F(P_s mu), errors); raises BoundViolation if any value
    exceeds the 1/s bound beyond slack."""
    if s_grid is None:
        s_grid = default_s_grid()
    s_grid = np.asarray(s_grid, dtype=float)
    F = np.empty(len(s_grid))
    err = np.empty(len(s_grid))
    for i, s in enumerate(s_grid):
        res = fisher_direct(mu, s, seed=int(derived_rng(seed, 0xF1, i).integers(2**62)),
                            n_samples=n_samples)
        F[i] = res.value
        err[i] = res.error
    return s_grid, F, err


def delta_c_fisher(mu, s_grid=None, *, seed=42, n_samples=DEFAULT_MC_SAMPLES,
                   drop_head=None):
    """Dimension from the scale integral of the Fisher information.

    I(t) = integral_t^1 F(P_s mu) ds grows like (1 - dim) |log t|; the
    integral is accumulated by trapezoid in log s (the integrand s F is O(1)
    by the 1/s bound), and the estimate is 1 - fitted slope.  The fit drops
    the upper half of the grid by default: the target is a small-scale limit
    and absolutely continuous measures carry a sqrt(s) boundary-layer
    transient that decays only slowly.
    """
    s_grid, F, err = fisher_curve(mu, s_grid, seed=seed, n_samples=n_samples)
    if drop_head is None:
        drop_head = len(s_grid) // 2
    s_asc = s_grid[::-1]
    sF_asc = (s_grid * F)[::-1]
    cells = 0.5 * (sF_asc[1:] + sF_asc[:-1]) * np.diff(np.log(s_asc))
    # tail[k] = integral of F ds from s_asc[k] up to the largest scale
    tail = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))
    curve = ScalingCurve(s_grid, tail[::-1], err, np.zeros(len(s_grid), dtype=bool))
    curve.refit(drop_head=drop_head)
    value = 1.0 - curve.fit.slope
    conf = max(2.0 * curve.fit.stderr, 2.0 * CONFIDENCE_FLOOR)
    return DimensionEstimate(value, "fisher-route", curve, conf,
                             flagged=_poor_fit(curve.fit),
                             info={"F": F.tolist(), "s": s_grid.tolist()})


def dudley_diagnostic(mu, t, *, seed=42, n_centers=21, n_samples=100_000):
    """Diagnostic only (no assertion anywhere): compares an empirical lower
    bound on the Dudley distance d(P_t mu, mu) over the 1-Lipschitz family
    f_c(x) = |x - c| with the heuristic scale sqrt((1 - dim) t)."""
    from .measures import sample as msample

    rng = derived_rng(seed, 0xD0)
    x = msample(mu, n_samples, rng)
    z = x + math.sqrt(t) * rng.standard_normal(n_samples)
    lo, hi = support_bounds(mu)
    centers = np.linspace(lo, hi, n_centers)
    diffs = [abs(float(np.mean(np.abs(z - c)) - np.mean(np.abs(x - c)))) for c in centers]
    return {"t": t, "dudley_lower": max(diffs), "heuristic_scale": math.sqrt(t)}
