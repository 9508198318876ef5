"""Measure-dependent curvature-dimension scans.

A measure smoothed to variance eps satisfies the inequality

    E[(f'')^2] >= (1/n) (E[f''])^2 - K(eps, n) E[(f')^2]

for every smooth f once K is large enough (on the line the carre du champ
operators reduce to (f')^2 and (f'')^2).  optimal_K computes the smallest
admissible K restricted to a finite test basis, as the largest generalized
eigenvalue of ((1/n) b b' - C) c = lam A c on the range of A.  The scan-based
dimension is

    1 - inf_n (Kbar(n) + 1) n,   Kbar(n) = growth rate of
                                 integral_eps^1 K(y, n) dy against |log eps|.

The Fisher-derived family K(eps, n) = (1-n)/n * F(P_eps mu) is admissible for
every smooth f (Cauchy-Schwarz on the score), and the scan uses it as the
operative candidate: a basis-restricted eigenvalue K is only a lower witness
and cannot certify the inequality off the span, so each cell takes the larger
of the two (the eigenvalue entry can exceed the family only through
quadrature noise; the CSV reports which source won per cell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import measure_expectation
from .numerics import derived_rng, fit_scaling, generalized_rayleigh_max, geometric_grid
from .dimension import CONFIDENCE_FLOOR, DimensionEstimate
from .entropy import ScalingCurve
from .fisher import (
    PINV_CUTOFF,
    _moment_arrays,
    default_s_grid,
    fisher_direct,
    psd_quadratic_max,
)
from .smoothing import heat_smoothed, DEFAULT_MC_SAMPLES

__all__ = [
    "optimal_K",
    "BochnerScan",
    "delta_square",
    "default_n_grid",
    "localized_fisher",
    "localized_lower_bound",
    "LocalizedBound",
    "smooth_plateau",
]

# generalized eigenvalues below this relative threshold count as zero: for
# n >= 1 the inequality holds with K = 0 identically and only rounding can
# produce a positive value
_K_ZERO_REL = 1e-9


def default_n_grid(points=20, nmax=1.0, nmin=0.01):
    return geometric_grid(nmax, nmin, points)


def _k_floor(scale):
    return _K_ZERO_REL * max(1.0, scale)


def optimal_K(mu, eps, n, basis, *, seed=42, n_samples=DEFAULT_MC_SAMPLES,
              moments=None):
    """Smallest K making the curvature-dimension inequality hold on
    span(basis) for the measure smoothed to variance eps, clamped at zero.

    Returns (K, info); info["degenerate"] marks a basis whose first
    derivatives all vanish on the measure (A numerically zero).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if moments is None:
        sd = heat_smoothed(mu, eps, seed=seed, n_samples=n_samples)
        b, A, C = _moment_arrays(sd, basis)
    else:
        b, A, C = moments
    if basis.size == 0:
        return 0.0, {"degenerate": True}
    N = np.outer(b, b) / n - C
    lam = generalized_rayleigh_max(N, A, cutoff=PINV_CUTOFF)
    if lam is None:
        return 0.0, {"degenerate": True}
    scale = float(np.max(np.abs(C))) / max(float(np.max(np.abs(A))), 1e-300)
    k = lam if lam > _k_floor(scale) else 0.0
    return max(k, 0.0), {"degenerate": False, "raw": lam}


@dataclass
class BochnerScan:
    eps_grid: np.ndarray          # decreasing
    n_grid: np.ndarray            # decreasing
    K: np.ndarray                 # shape (len(eps), len(n)); operative values
    K_eig: np.ndarray
    K_family: np.ndarray
    source: np.ndarray            # "eig" | "fisher-family" per cell
    Kbar: np.ndarray              # per-n fitted growth rate, clamped at 0
    fisher: np.ndarray            # F(P_eps mu) per eps

    def rows(self):
        for i, eps in enumerate(self.eps_grid):
            for j, n in enumerate(self.n_grid):
                yield eps, n, self.K[i, j], self.source[i, j]


def _scan(mu, eps_grid, n_grid, basis, seed, n_samples):
    eps_grid = np.asarray(eps_grid, dtype=float)
    n_grid = np.asarray(n_grid, dtype=float)
    K_eig = np.zeros((len(eps_grid), len(n_grid)))
    K_fam = np.zeros_like(K_eig)
    fisher_vals = np.zeros(len(eps_grid))
    for i, eps in enumerate(eps_grid):
        cell_seed = int(derived_rng(seed, 0xB0, i).integers(2**62))
        sd = heat_smoothed(mu, eps, seed=cell_seed, n_samples=n_samples)
        moments = _moment_arrays(sd, basis)
        fisher_vals[i] = fisher_direct(mu, eps, seed=cell_seed,
                                       n_samples=n_samples).value
        for j, n in enumerate(n_grid):
            K_eig[i, j], _ = optimal_K(mu, eps, n, basis, moments=moments)
            K_fam[i, j] = max((1.0 - n) / n, 0.0) * fisher_vals[i]
    K = np.maximum(K_eig, K_fam)
    source = np.where(K_eig >= K_fam, "eig", "fisher-family")
    return eps_grid, n_grid, K, K_eig, K_fam, source, fisher_vals


def delta_square(mu, eps_grid=None, n_grid=None, basis=None, *, seed=42,
                 n_samples=DEFAULT_MC_SAMPLES, drop_head=None):
    """Dimension from the curvature-dimension scan: 1 - min over the n grid
    of (Kbar(n) + 1) n, with the integral of K accumulated by trapezoid in
    the variance variable and Kbar its fitted growth rate against |log eps|.
    """
    if eps_grid is None:
        eps_grid = default_s_grid()
    if n_grid is None:
        n_grid = default_n_grid()
    if basis is None:
        from .fisher import default_basis

        basis = default_basis(mu, float(np.min(np.asarray(eps_grid))))
    eps_grid, n_grid, K, K_eig, K_fam, source, fvals = _scan(
        mu, eps_grid, n_grid, basis, seed, n_samples)
    if drop_head is None:
        drop_head = len(eps_grid) // 2
    eps_asc = eps_grid[::-1]
    abs_log = np.abs(np.log(eps_grid))
    Kbar = np.zeros(len(n_grid))
    stderrs = np.zeros(len(n_grid))
    J_by_n = []
    for j in range(len(n_grid)):
        k_asc = K[::-1, j]
        cells = 0.5 * (k_asc[1:] + k_asc[:-1]) * np.diff(eps_asc)
        tail = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))
        J = tail[::-1]  # integral from eps down the grid, in descending order
        J_by_n.append(J)
        fit = fit_scaling(abs_log, J, drop_head=drop_head)
        Kbar[j] = max(fit.slope, 0.0)
        stderrs[j] = fit.stderr
    objective = (Kbar + 1.0) * n_grid
    j_star = int(np.argmin(objective))
    value = 1.0 - float(objective[j_star])
    curve = ScalingCurve(eps_grid, J_by_n[j_star],
                         np.zeros(len(eps_grid)), np.zeros(len(eps_grid), dtype=bool))
    curve.refit(drop_head=drop_head)
    conf = max(2.0 * stderrs[j_star] * float(n_grid[j_star]), 2.0 * CONFIDENCE_FLOOR)
    scan = BochnerScan(eps_grid, n_grid, K, K_eig, K_fam, source, Kbar, fvals)
    est = DimensionEstimate(value, "bochner-route", curve, conf,
                            info={"n_star": float(n_grid[j_star]),
                                  "objective": objective.tolist()})
    est.info["scan"] = scan
    return est


def localized_fisher(mu, eps, g, basis, *, seed=42, n_samples=DEFAULT_MC_SAMPLES):
    """Weighted variational Fisher information
        F_g = 2 sup_f { E[g f''] - E[(f')^2]/2 }
    over span(basis), against the measure smoothed to variance eps."""
    sd = heat_smoothed(mu, eps, seed=seed, n_samples=n_samples)
    b, A, _ = _moment_arrays(sd, basis, weight_fn=g)
    return max(psd_quadratic_max(b, A, cutoff=PINV_CUTOFF), 0.0)


@dataclass
class LocalizedBound:
    bound: float
    slope: float
    qualifies: bool
    curve: ScalingCurve = None
    info: dict = field(default_factory=dict)


def localized_lower_bound(mu, h, eps_grid=None, basis=None, *, seed=42,
                          n_samples=DEFAULT_MC_SAMPLES, slope_tol=0.05,
                          drop_head=None):
    """Localization lower bound: dimension >= 1 - E_mu[(1-h)^2] whenever the
    weighted Fisher information F_h(P_eps mu) integrates sublogarithmically.

    The report carries the bound together with the diagnostic growth rate of
    integral_eps^1 F_h dy against |log eps|; the bound is asserted only when
    that slope is at most slope_tol (h then numerically qualifies).
    """
    if eps_grid is None:
        eps_grid = default_s_grid()
    eps_grid = np.asarray(eps_grid, dtype=float)
    if basis is None:
        from .fisher import default_basis

        basis = default_basis(mu, float(np.min(eps_grid)))
    if drop_head is None:
        drop_head = len(eps_grid) // 2
    mean_sq, err = measure_expectation(mu, lambda x: (1.0 - np.asarray(h(x), float)) ** 2,
                                       seed=seed)
    bound = 1.0 - mean_sq
    fh = np.array([
        localized_fisher(mu, eps, h, basis,
                         seed=int(derived_rng(seed, 0x1F, i).integers(2**62)),
                         n_samples=n_samples)
        for i, eps in enumerate(eps_grid)
    ])
    eps_asc = eps_grid[::-1]
    fh_asc = fh[::-1]
    cells = 0.5 * (fh_asc[1:] + fh_asc[:-1]) * np.diff(eps_asc)
    tail = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))
    curve = ScalingCurve(eps_grid, tail[::-1], np.zeros(len(eps_grid)),
                         np.zeros(len(eps_grid), dtype=bool))
    curve.refit(drop_head=drop_head)
    slope = curve.fit.slope
    return LocalizedBound(bound, slope, qualifies=slope <= slope_tol, curve=curve,
                          info={"mean_sq": mean_sq, "mean_sq_err": err,
                                "F_h": fh.tolist()})


def smooth_plateau(a, b, taper):
    """C1 weight equal to 1 on [a + taper, b - taper], 0 outside [a, b], with
    cosine-squared ramps; bounded with |h| <= 1."""
    if not (taper > 0 and b - a > 2 * taper):
        raise ValueError("need b - a > 2 * taper > 0")

    def h(x):
        x = np.asarray(x, dtype=float)
        up = np.clip((x - a) / taper, 0.0, 1.0)
        down = np.clip((b - x) / taper, 0.0, 1.0)
        return np.sin(0.5 * math.pi * up) ** 2 * np.sin(0.5 * math.pi * down) ** 2

    return h
