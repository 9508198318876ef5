"""Mollifier kernels and the smoothed density p_t of mu convolved with the
kernel dilated by t.

Evaluation strategy is chosen per (measure, kernel) pair:

* box kernel, any measure: p_t(x) = mu([x - t*b, x - t*a]) / (t (b - a)),
  reusing the exact interval-mass machinery;
* Gaussian / custom kernel on an atomic measure: exact finite bump sum;
* on a grid density: discrete convolution on a fine grid aligned with the
  measure's own grid, then linear interpolation;
* on sampling-only measures (Bernoulli convolutions, push-forwards): binned
  kernel density estimate over a deterministic seeded sample cloud, with a
  per-point standard-error field; antithetic (sign-flipped) pairing is used
  for the Bernoulli family, whose law is symmetric;
* mixtures: weighted combination of per-component evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .measures import (
    Atomic,
    BernoulliConvolution,
    GridDensity,
    LipschitzPushforward,
    Mixture,
    interval_mass_bounds,
    sample,
    support_bounds,
)
from .numerics import DENSITY_FLOOR, derived_rng, linear_bin, merge_intervals

__all__ = [
    "GaussianKernel",
    "BoxKernel",
    "CustomGridKernel",
    "kernel_from_name",
    "SmoothedDensity",
    "heat_smoothed",
    "DEFAULT_MC_SAMPLES",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
DEFAULT_MC_SAMPLES = 200_000
_EXACT_EVAL_MAX = 256


@dataclass(frozen=True, eq=False)
class GaussianKernel:
    """Standard normal mollifier; the dilation by t has variance t**2."""

    name = "gauss"

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(-0.5 * z * z) / _SQRT_2PI

    def dpdf(self, z):
        z = np.asarray(z, dtype=float)
        return -z * np.exp(-0.5 * z * z) / _SQRT_2PI

    def cdf(self, z):
        return ndtr(np.asarray(z, dtype=float))

    def entropy(self):
        # integral of phi log phi (negative of the differential entropy)
        return -0.5 * math.log(2.0 * math.pi * math.e)

    def support(self):
        # effective: mass beyond 8 sigma is < 1.3e-15
        return (-8.0, 8.0)

    def smooth(self):
        return True

    def sample(self, rng, n):
        return rng.standard_normal(int(n))


@dataclass(frozen=True, eq=False)
class BoxKernel:
    """Uniform density on [a, b]."""

    a: float = -0.5
    b: float = 0.5

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("box kernel needs a < b")

    @property
    def name(self):
        if (self.a, self.b) == (-0.5, 0.5):
            return "box"
        if (self.a, self.b) == (0.0, 1.0):
            return "box01"
        return f"box[{self.a},{self.b}]"

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        return np.where((z >= self.a) & (z <= self.b), 1.0 / (self.b - self.a), 0.0)

    def entropy(self):
        return -math.log(self.b - self.a)

    def support(self):
        return (self.a, self.b)

    def smooth(self):
        return False

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, int(n))


@dataclass(frozen=True, eq=False)
class CustomGridKernel:
    """Kernel given by a piecewise-linear density on a grid (finite entropy)."""

    grid: GridDensity

    name = "custom"

    def pdf(self, z):
        return self.grid.pdf(z)

    def entropy(self):
        # dense refinement: p log p has unbounded slope where ramps reach 0
        k = 64
        h = self.grid.step / k
        x = self.grid.origin + h * np.arange((len(self.grid.values) - 1) * k + 1)
        p = self.grid.pdf(x)
        mask = p > DENSITY_FLOOR
        out = np.zeros_like(p)
        out[mask] = p[mask] * np.log(p[mask])
        return float(np.trapezoid(out, x))

    def support(self):
        lo, hi = support_bounds(self.grid)
        return (lo, hi)

    def smooth(self):
        return True

    def sample(self, rng, n):
        return sample(self.grid, n, rng)


def kernel_from_name(name):
    """CLI kernel selector: gauss | box | box01 | file:PATH."""
    if name == "gauss":
        return GaussianKernel()
    if name == "box":
        return BoxKernel(-0.5, 0.5)
    if name == "box01":
        return BoxKernel(0.0, 1.0)
    if name.startswith("file:"):
        from .specio import load_measure

        grid = load_measure(name[5:])
        if not isinstance(grid, GridDensity):
            raise ValueError("file kernel must be a grid-density measure spec")
        return CustomGridKernel(grid)
    raise ValueError(f"unknown kernel {name!r} (expected gauss|box|box01|file:PATH)")


def _is_mc_backed(mu):
    if isinstance(mu, (BernoulliConvolution, LipschitzPushforward)):
        return True
    if isinstance(mu, Mixture):
        return any(_is_mc_backed(m) for _, m in mu.components)
    return False


class SmoothedDensity:
    """Evaluator for the density of mu * D_t(kernel).

    Pure given (mu, kernel, t, n_samples, seed): sample clouds and grids are
    derived deterministically, so evaluation order and parallel scheduling
    cannot change any value.
    """

    def __init__(self, mu, kernel, t, *, n_samples=DEFAULT_MC_SAMPLES, seed=0,
                 step_factor=20.0, max_nodes=4_000_000, se_ceiling=0.5):
        if not t > 0:
            raise ValueError("t must be positive")
        self.mu = mu
        self.kernel = kernel
        self.t = float(t)
        self.n_samples = int(n_samples)
        self.seed = int(seed)
        self.step_factor = float(step_factor)
        self.max_nodes = int(max_nodes)
        self.se_ceiling = float(se_ceiling)
        self.method = self._resolve_method()
        self._cache = {}
        if self.method == "mixture":
            self._children = [
                SmoothedDensity(m, kernel, t, n_samples=n_samples,
                                seed=int(derived_rng(seed, 0x317, j).integers(2**62)),
                                step_factor=step_factor, max_nodes=max_nodes,
                                se_ceiling=se_ceiling)
                for j, (_, m) in enumerate(mu.components)
            ]

    # -- classification ----------------------------------------------------

    def _resolve_method(self):
        if isinstance(self.kernel, BoxKernel):
            return "exact-box"
        if isinstance(self.mu, Atomic):
            return "closed-form-atomic"
        if isinstance(self.mu, GridDensity):
            return "quadrature"
        if isinstance(self.mu, Mixture):
            return "mixture"
        return "monte-carlo"

    # -- grids --------------------------------------------------------------

    def kernel_halfwidths(self):
        """(left, right) reach of the dilated kernel around a source point."""
        ka, kb = self.kernel.support()
        return (-self.t * ka, self.t * kb)

    def padded_support(self):
        lo, hi = support_bounds(self.mu)
        ka, kb = self.kernel.support()
        return (lo + self.t * ka, hi + self.t * kb)

    def quad_segments(self):
        """Disjoint intervals jointly covering where p_t is non-negligible."""
        ka, kb = self.kernel.support()
        left, right = self.t * ka, self.t * kb
        if isinstance(self.mu, Atomic):
            ivs = [(p + left, p + right) for p in self.mu.positions]
            return merge_intervals(ivs)
        if isinstance(self.mu, Mixture) and self.method == "mixture":
            ivs = []
            for child in self._children:
                ivs.extend(child.quad_segments())
            return merge_intervals(ivs)
        lo, hi = support_bounds(self.mu)
        return [(lo + left, hi + right)]

    def _segment_nodes(self, seg):
        lo, hi = seg
        # box-smoothed densities are only Hoelder continuous, so their
        # quadrature needs denser nodes than Gaussian-smoothed ones
        factor = self.step_factor if self.kernel.smooth() else 4.0 * self.step_factor
        h = self.t / factor
        n = int(math.ceil((hi - lo) / h)) + 1
        if n > self.max_nodes:
            n = self.max_nodes
        return np.linspace(lo, hi, max(n, 9))

    # -- evaluation backends -------------------------------------------------

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.method == "exact-box":
            lo, hi = interval_mass_bounds(self.mu, x - self.t * self.kernel.b,
                                          x - self.t * self.kernel.a)
            return 0.5 * (lo + hi) / (self.t * (self.kernel.b - self.kernel.a))
        if self.method == "closed-form-atomic":
            z = (x[..., None] - self.mu.positions) / self.t
            return (self.kernel.pdf(z) @ self.mu.weights) / self.t
        if self.method == "mixture":
            out = np.zeros_like(x, dtype=float)
            for (w, _), child in zip(self.mu.components, self._children):
                out += w * child.density(x)
            return out
        if x.size <= _EXACT_EVAL_MAX:
            return self._mixture_sum(x, derivative=False)
        gx, p, _, _ = self._grid_eval()
        return np.interp(x, gx, p, left=0.0, right=0.0)

    def derivative(self, x):
        """d/dx of the density; requires a differentiable kernel."""
        if not hasattr(self.kernel, "dpdf"):
            raise ValueError("density derivative needs a smooth kernel (Gaussian)")
        x = np.asarray(x, dtype=float)
        if self.method == "closed-form-atomic":
            z = (x[..., None] - self.mu.positions) / self.t
            return (self.kernel.dpdf(z) @ self.mu.weights) / self.t**2
        if self.method == "mixture":
            out = np.zeros_like(x, dtype=float)
            for (w, _), child in zip(self.mu.components, self._children):
                out += w * child.derivative(x)
            return out
        if x.size <= _EXACT_EVAL_MAX:
            return self._mixture_sum(x, derivative=True)
        gx, _, dp, _ = self._grid_eval()
        return np.interp(x, gx, dp, left=0.0, right=0.0)

    def _mixture_sum(self, x, derivative):
        """Exact discrete-mixture evaluation over the backend's node masses.

        Small query batches bypass grid interpolation: the lattice masses
        (resampled density or binned sample cloud) define a smooth function
        of x, and evaluating it directly keeps scores consistent with finite
        differences of the density at steps below the lattice spacing.
        """
        gx, p, dp, _ = self._grid_eval()
        x0, h, masses = self._cache["lattice"]
        nz = np.nonzero(masses)[0]
        if nz.size * max(np.size(x), 1) > 5e7:
            src = dp if derivative else p
            return np.interp(x, gx, src, left=0.0, right=0.0)
        nodes = x0 + h * nz
        w = masses[nz]
        z = (np.atleast_1d(x)[:, None] - nodes) / self.t
        if derivative:
            vals = (self.kernel.dpdf(z) @ w) / self.t**2
        else:
            vals = (self.kernel.pdf(z) @ w) / self.t
        return vals.reshape(np.shape(x))

    def score(self, x):
        """d/dx log p_t; NaN marks points where the density underflows
        (out-of-support signal, callers must exclude them)."""
        p = self.density(x)
        d = self.derivative(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > DENSITY_FLOOR, d / np.maximum(p, DENSITY_FLOOR), np.nan)

    def density_se(self, x):
        """Pointwise standard error (zero for exact/quadrature backends)."""
        x = np.asarray(x, dtype=float)
        if self.method == "mixture":
            out = np.zeros_like(x, dtype=float)
            for (w, _), child in zip(self.mu.components, self._children):
                out += w * child.density_se(x)
            return out
        if self.method != "monte-carlo":
            return np.zeros_like(x, dtype=float)
        gx, _, _, se = self._grid_eval()
        return np.interp(x, gx, se, left=0.0, right=0.0)

    # -- precomputed grids ---------------------------------------------------

    def _grid_eval(self):
        """(x, p, dp, se) on the backend's natural fine grid."""
        if "grid" not in self._cache:
            if self.method == "quadrature":
                self._cache["grid"] = self._conv_grid()
            elif self.method == "monte-carlo":
                self._cache["grid"] = self._kde_grid()
            else:
                raise RuntimeError("no precomputed grid for this backend")
        return self._cache["grid"]

    def _kernel_taps(self, h):
        """Kernel samples on the lattice {l*h}, plus the offset of tap 0."""
        ka, kb = self.kernel.support()
        l_lo = int(math.floor(ka * self.t / h)) - 1
        l_hi = int(math.ceil(kb * self.t / h)) + 1
        offs = np.arange(l_lo, l_hi + 1)
        taps = self.kernel.pdf(offs * h / self.t) / self.t
        dtaps = (self.kernel.dpdf(offs * h / self.t) / self.t**2
                 if hasattr(self.kernel, "dpdf") else None)
        return taps, dtaps, l_lo

    def _conv_grid(self):
        mu = self.mu
        desired = self.t / self.step_factor
        k = max(1, int(math.ceil(mu.step / desired)))
        h = mu.step / k
        n_nodes = (len(mu.values) - 1) * k + 1
        taps, dtaps, l_lo = self._kernel_taps(h)
        while (n_nodes + len(taps)) > self.max_nodes and k > 1:
            k = max(1, k // 2)
            h = mu.step / k
            n_nodes = (len(mu.values) - 1) * k + 1
            taps, dtaps, l_lo = self._kernel_taps(h)
        xs = mu.origin + h * np.arange(n_nodes)
        masses = mu.pdf(xs) * h
        self._cache["lattice"] = (mu.origin, h, masses)
        p = np.convolve(masses, taps)
        out_idx = np.arange(l_lo, l_lo + p.size)
        gx = mu.origin + h * out_idx
        dp = np.convolve(masses, dtaps) if dtaps is not None else np.zeros_like(p)
        se = np.zeros_like(p)
        return gx, p, dp, se

    def _mc_samples(self):
        if "samples" not in self._cache:
            rng = derived_rng(self.seed, 0x5A)
            if isinstance(self.mu, BernoulliConvolution):
                half = max(self.n_samples // 2, 1)
                s = sample(self.mu, half, rng)
                xs = np.concatenate((s, -s))
            else:
                xs = sample(self.mu, self.n_samples, rng)
            self._cache["samples"] = xs
        return self._cache["samples"]

    def _kde_grid(self):
        xs = self._mc_samples()
        lo, hi = support_bounds(self.mu)
        ka, kb = self.kernel.support()
        h = self.t / self.step_factor
        x0 = lo + ka * self.t - 4 * h
        x1 = hi + kb * self.t + 4 * h
        nb = int(math.ceil((x1 - x0) / h)) + 1
        if nb > self.max_nodes:
            nb = self.max_nodes
            h = (x1 - x0) / (nb - 1)
        masses = linear_bin(xs, x0, h, nb)
        self._cache["lattice"] = (x0, h, masses)
        taps, dtaps, l_lo = self._kernel_taps(h)
        p_full = np.convolve(masses, taps)
        out_idx = np.arange(l_lo, l_lo + p_full.size)
        gx = x0 + h * out_idx
        dp = np.convolve(masses, dtaps) if dtaps is not None else np.zeros_like(p_full)
        second = np.convolve(masses, taps**2)
        n = len(xs)
        var = np.maximum(second - p_full**2, 0.0) / n
        se = np.sqrt(var)
        return gx, p_full, dp, se

    # -- derived quantities --------------------------------------------------

    def _box_breakpoints(self):
        """Discontinuity locations of a box-smoothed density (atom edges)."""
        from .freedim import atom_profile

        prof = atom_profile(self.mu)
        if not prof.atoms:
            return np.array([])
        pos = np.array([p for p, _ in prof.atoms])
        return np.unique(np.concatenate((pos + self.t * self.kernel.a,
                                         pos + self.t * self.kernel.b)))

    def quad_pieces(self):
        """List of (x, p) arrays jointly covering the density for quadrature;
        box-smoothed atomic parts are split at their jump locations so each
        piece is continuous."""
        if self.method in ("quadrature", "monte-carlo"):
            gx, p, _, _ = self._grid_eval()
            return [(gx, p)]
        pieces = []
        cuts = self._box_breakpoints() if self.method == "exact-box" else np.array([])
        for lo, hi in self.quad_segments():
            inner = cuts[(cuts > lo) & (cuts < hi)]
            edges = np.concatenate(([lo], inner, [hi]))
            for a, b in zip(edges[:-1], edges[1:]):
                nudge = 1e-12 * (1.0 + abs(a) + abs(b))
                x = self._segment_nodes((a + nudge, b - nudge))
                pieces.append((x, self.density(x)))
        return pieces

    def trusted_fraction(self):
        """Mass fraction where the Monte Carlo standard error stays below the
        configured ceiling (1.0 for exact backends)."""
        if self.method != "monte-carlo":
            return 1.0
        gx, p, _, se = self._grid_eval()
        good = se <= self.se_ceiling * np.maximum(p, DENSITY_FLOOR)
        tot = float(np.trapezoid(p, gx))
        return float(np.trapezoid(np.where(good, p, 0.0), gx) / tot) if tot > 0 else 0.0

    def total_mass(self):
        if self.method == "exact-box" and isinstance(self.mu, Atomic):
            edges, heights = self.box_atomic_pieces()
            return float(np.sum(np.diff(edges) * heights))
        return float(sum(np.trapezoid(p, x) for x, p in self.quad_pieces()))

    def box_atomic_pieces(self):
        """Exact step-function representation for an atomic measure under a
        box kernel: (edges, per-piece constant heights)."""
        if not (self.method == "exact-box" and isinstance(self.mu, Atomic)):
            raise RuntimeError("piecewise representation only for atomic + box")
        a, b = self.kernel.a, self.kernel.b
        edges = np.unique(np.concatenate((self.mu.positions + self.t * a,
                                          self.mu.positions + self.t * b)))
        mids = 0.5 * (edges[:-1] + edges[1:])
        return edges, self.density(mids)

    def smoothed_sample(self, n, rng):
        """Draws from mu * D_t(kernel) itself."""
        return sample(self.mu, n, rng) + self.t * self.kernel.sample(rng, int(n))

    def nodes_weights(self):
        """Discrete proxy (x_i, w_i), sum w = 1, for integrals against the
        smoothed measure.  Normalized quadrature weights for density-backed
        variants; an equal-weight smoothed sample cloud otherwise."""
        if self.method == "monte-carlo":
            xs = self._mc_samples()
            rng = derived_rng(self.seed, 0x77)
            z = xs + self.t * self.kernel.sample(rng, len(xs))
            return z, np.full(len(z), 1.0 / len(z))
        if self.method == "mixture" and _is_mc_backed(self.mu):
            parts_x, parts_w = [], []
            for (w, _), child in zip(self.mu.components, self._children):
                cx, cw = child.nodes_weights()
                parts_x.append(cx)
                parts_w.append(w * cw)
            x = np.concatenate(parts_x)
            w = np.concatenate(parts_w)
            return x, w / w.sum()
        xs, ws = [], []
        for x, p in self.quad_pieces():
            w = np.empty_like(x)
            dx = np.diff(x)
            w[0] = dx[0] / 2
            w[-1] = dx[-1] / 2
            w[1:-1] = (dx[:-1] + dx[1:]) / 2
            xs.append(x)
            ws.append(w * p)
        x = np.concatenate(xs)
        w = np.concatenate(ws)
        total = w.sum()
        if total <= 0:
            raise RuntimeError("degenerate quadrature weights")
        return x, w / total


def heat_smoothed(mu, variance, **kwargs):
    """mu convolved with a centered Gaussian of the given variance."""
    return SmoothedDensity(mu, GaussianKernel(), math.sqrt(variance), **kwargs)
