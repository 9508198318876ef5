"""Independent oracles used to freeze expected values before testing the
library paths they check."""

import numpy as np


def sign_enumeration_points(lam, depth=16):
    """All 2**depth partial sums sum_k eps_k lam**k with eps = +-1, plus the
    tail radius of the discarded remainder."""
    scales = lam ** np.arange(depth)
    signs = (((np.arange(2**depth)[:, None] >> np.arange(depth)) & 1) * 2 - 1)
    points = signs @ scales
    tail = lam**depth / (1.0 - lam)
    return points, tail


def sign_enumeration_mass(points, tail, a, b):
    """(inner, outer) bracket of the interval mass from the truncated cloud:
    every true support point lies within `tail` of a cloud point."""
    outer = float(np.mean((points >= a - tail) & (points <= b + tail)))
    inner = float(np.mean((points >= a + tail) & (points <= b - tail)))
    return inner, outer


def scaling_exponent_oracle(lam, depth=16, levels=(4, 6, 8, 10)):
    """Estimate the local mass-scaling exponent of the Bernoulli convolution
    by direct enumeration: balls of radius lam**k around a support point
    carry mass ~ 2**-k, so the exponent is log 2 / log(1/lam)."""
    points, tail = sign_enumeration_points(lam, depth)
    center = float(np.sum(lam ** np.arange(depth)))  # all-plus support point
    ks, masses = [], []
    for k in levels:
        r = lam**k
        inner, outer = sign_enumeration_mass(points, tail, center - r, center + r)
        ks.append(k)
        masses.append(0.5 * (inner + outer))
    ks = np.asarray(ks, dtype=float)
    logs = np.log(np.asarray(masses))
    slope = np.polyfit(ks * np.log(1.0 / lam), -logs, 1)[0]
    return slope
