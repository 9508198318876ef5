"""Small shared numerical helpers: seeded generators, geometric grids,
log-scale regression fits, p*log(p) integrals, and dense PSD reductions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

DENSITY_FLOOR = 1e-300


def derived_rng(seed, *keys):
    """Generator determined by (seed, keys); independent of call order."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def geometric_grid(hi, lo, points):
    """Geometric grid from hi down to lo (decreasing), both endpoints included."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if points < 2:
        raise ValueError("need at least two grid points")
    return np.geomspace(float(hi), float(lo), int(points))


def plogp(p):
    """x*log(x) with the 0*log(0) = 0 convention; sub-floor densities count as 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > DENSITY_FLOOR
    out[mask] = p[mask] * np.log(p[mask])
    return out


def entropy_trapezoid(x, p):
    return float(np.trapezoid(plogp(p), x))


@dataclass
class ScalingFit:
    """Least-squares fit of curve values against |log t|."""

    slope: float
    intercept: float
    r2: float
    stderr: float
    window: tuple
    used: np.ndarray

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "stderr": self.stderr,
            "window": list(self.window),
        }


def fit_scaling(abs_log_t, values, good=None, drop_head=5):
    """OLS of values against |log t|.

    The first `drop_head` points (largest scales, transient regime) and any
    points with good=False are excluded.  drop_head shrinks automatically so
    at least four points remain whenever possible.
    """
    abs_log_t = np.asarray(abs_log_t, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(abs_log_t)
    if good is None:
        good = np.ones(n, dtype=bool)
    good = np.asarray(good, dtype=bool) & np.isfinite(values)
    start = min(int(drop_head), max(0, n - 4))
    idx = np.nonzero(good & (np.arange(n) >= start))[0]
    if idx.size < 2:
        idx = np.nonzero(good)[0]
    if idx.size < 2:
        raise ValueError("not enough usable points for a scaling fit")
    res = stats.linregress(abs_log_t[idx], values[idx])
    stderr = float(res.stderr) if idx.size > 2 and np.isfinite(res.stderr) else 0.0
    r2 = float(res.rvalue**2) if np.isfinite(res.rvalue) else 1.0
    return ScalingFit(float(res.slope), float(res.intercept), r2, stderr, (start, n), idx)


def linear_bin(x, x0, h, nbins, weights=None):
    """Cloud-in-cell mass assignment of points onto a uniform grid.

    Splitting each point's weight linearly between the two neighbouring nodes
    keeps the total mass exact and makes the binning error second order in h.
    """
    pos = (np.asarray(x, dtype=float) - x0) / h
    pos = np.clip(pos, 0.0, nbins - 1.000001)
    i = pos.astype(np.int64)
    frac = pos - i
    if weights is None:
        w = np.full(pos.shape, 1.0 / len(pos))
    else:
        w = np.asarray(weights, dtype=float)
    out = np.bincount(i, weights=w * (1.0 - frac), minlength=nbins)
    out += np.bincount(i + 1, weights=w * frac, minlength=nbins + 1)[:nbins]
    return out[:nbins]


def psd_quadratic_max(b, A, cutoff=1e-10):
    """max_c 2 b.c - c.A.c over the range of the PSD matrix A (= b' A^+ b)."""
    b = np.asarray(b, dtype=float).ravel()
    if b.size == 0:
        return 0.0
    A = np.asarray(A, dtype=float)
    s, V = np.linalg.eigh((A + A.T) / 2.0)
    smax = max(float(s[-1]), 0.0)
    keep = s > cutoff * smax if smax > 0 else np.zeros_like(s, dtype=bool)
    if not keep.any():
        return 0.0
    proj = V[:, keep].T @ b
    return float(np.sum(proj**2 / s[keep]))


def generalized_rayleigh_max(N, A, cutoff=1e-10):
    """Largest generalized eigenvalue of N c = lam A c restricted to range(A).

    A must be PSD; N symmetric.  Returns None when A is numerically zero
    (degenerate basis: every test direction has vanishing A-energy).
    """
    A = np.asarray(A, dtype=float)
    N = np.asarray(N, dtype=float)
    s, V = np.linalg.eigh((A + A.T) / 2.0)
    smax = max(float(s[-1]), 0.0)
    keep = s > cutoff * smax if smax > 0 else np.zeros_like(s, dtype=bool)
    if not keep.any():
        return None
    B = V[:, keep] / np.sqrt(s[keep])
    M = B.T @ ((N + N.T) / 2.0) @ B
    M = (M + M.T) / 2.0
    return float(np.linalg.eigvalsh(M)[-1])


def merge_intervals(intervals):
    """Union of closed intervals, returned sorted and disjoint."""
    ivs = sorted((float(a), float(b)) for a, b in intervals if b >= a)
    if not ivs:
        return []
    out = [list(ivs[0])]
    for a, b in ivs[1:]:
        if a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(iv) for iv in out]


_LOG1P_ABS_GAUSS = None


def gaussian_log1p_abs_moment():
    """E[log(1+|Z|)] for a standard normal Z, cached quadrature value."""
    global _LOG1P_ABS_GAUSS
    if _LOG1P_ABS_GAUSS is None:
        z = np.linspace(0.0, 12.0, 48001)
        phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        _LOG1P_ABS_GAUSS = float(2.0 * np.trapezoid(np.log1p(z) * phi, z))
    return _LOG1P_ABS_GAUSS
