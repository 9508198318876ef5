"""Named property checks behind `entdim verify`.

Each check exercises one documented invariant of a module at reduced desk
scale and returns (ok, one-line detail).  Suites: measure, smoothing,
entropy, dimension, fisher, bochner, freedim, cli.
"""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from .measures import (
    Atomic,
    BernoulliConvolution,
    LipschitzPushforward,
    Mixture,
    affine_map,
    dirac,
    gaussian_grid,
    interval_mass,
    interval_mass_bounds,
    sample,
    sine_perturbed_map,
    support_bounds,
    translated,
    two_point,
    uniform_grid,
)
from .numerics import derived_rng, geometric_grid
from .smoothing import BoxKernel, GaussianKernel, SmoothedDensity
from .entropy import entropy, entropy_curve, entropy_lower_bound, epi_check
from .dimension import delta_c_entropy, delta_c_fractal
from .fisher import (
    de_bruijn_check,
    default_basis,
    delta_c_fisher,
    fisher_direct,
    fisher_variational,
)
from .bochner import delta_square, optimal_K
from .freedim import free_dimension_single

SUITES = ["measure", "smoothing", "entropy", "dimension", "fisher", "bochner",
          "freedim", "cli"]

_CHECKS = []


def check(name):
    def wrap(fn):
        _CHECKS.append((name, fn))
        return fn
    return wrap


def _scale(quick):
    """(curve points, mc samples, fractal samples) for normal/quick modes."""
    return (9, 20_000, 8_000) if quick else (13, 60_000, 20_000)


def _matrix():
    return [
        ("dirac", dirac(0.0)),
        ("uniform", uniform_grid(0.0, 1.0)),
        ("cantor4", BernoulliConvolution(0.25)),
    ]


# ---------------------------------------------------------------------- measure


@check("measure.monotone-additive")
def _measure_monotone(seed, quick):
    rng = derived_rng(seed, 1)
    worst = 0.0
    for name, mu in _matrix():
        lo, hi = support_bounds(mu)
        for _ in range(20 if quick else 50):
            pts = np.sort(rng.uniform(lo - 0.5, hi + 0.5, size=4))
            inner = interval_mass(mu, pts[1], pts[2])
            outer = interval_mass(mu, pts[0], pts[3])
            if isinstance(inner, tuple) or isinstance(outer, tuple):
                return False, f"{name}: unexpected bracket result"
            if inner > outer + 1e-12:
                return False, f"{name}: monotonicity violated"
            cuts = np.sort(rng.uniform(pts[0], pts[3], size=3))
            parts = [interval_mass(mu, a, b) for a, b in
                     zip([pts[0], *cuts], [*cuts, pts[3]])]
            gap = abs(sum(parts) - outer)
            worst = max(worst, gap)
    # partition pieces share endpoints; continuous parts make the overlap null
    return worst <= 1e-9 + 1e-9, f"max additivity gap {worst:.2e}"


@check("measure.support-mass")
def _measure_support(seed, quick):
    worst = 0.0
    for name, mu in _matrix() + [("mixture", Mixture(((0.5, dirac(0.0)), (0.5, uniform_grid(0, 1)))))]:
        lo, hi = support_bounds(mu)
        pad = 1e-9 * (1 + abs(lo) + abs(hi))
        m = interval_mass(mu, lo - pad, hi + pad)
        worst = max(worst, abs(m - 1.0))
    return worst <= 1e-9, f"max |mass - 1| = {worst:.2e}"


@check("measure.bernoulli-oracle")
def _measure_oracle(seed, quick):
    lam, depth = 0.25, 16
    mu = BernoulliConvolution(lam)
    scales = lam ** np.arange(depth)
    signs = (((np.arange(2**depth)[:, None] >> np.arange(depth)) & 1) * 2 - 1)
    points = signs @ scales
    tail = lam**depth / (1 - lam)
    rng = derived_rng(seed, 2)
    worst = 0.0
    n_iv = 40 if quick else 100
    for _ in range(n_iv):
        a = rng.uniform(-1.6, 1.5)
        b = a + rng.uniform(0.01, 1.0)
        est = interval_mass(mu, a, b)
        if isinstance(est, tuple):
            est = 0.5 * (est[0] + est[1])
        oracle = float(np.mean((points >= a - tail) & (points <= b + tail)))
        oracle_lo = float(np.mean((points >= a + tail) & (points <= b - tail)))
        gap = max(est - oracle, oracle_lo - est, 0.0)
        worst = max(worst, gap)
    return worst <= 2.0**-depth, f"max oracle gap {worst:.2e} (tol {2.0**-depth:.2e})"


@check("measure.pushforward-mass")
def _measure_push(seed, quick):
    mu = BernoulliConvolution(0.25)
    f = sine_perturbed_map(2.0)
    push = LipschitzPushforward(mu, f)
    rng = derived_rng(seed, 3)
    worst = 0.0
    for _ in range(10 if quick else 25):
        a = rng.uniform(-3.5, 3.0)
        b = a + rng.uniform(0.1, 2.0)
        lhs = interval_mass(push, a, b)
        ia, ib = float(f.invert(np.array([a]))[0]), float(f.invert(np.array([b]))[0])
        rhs = interval_mass(mu, ia, ib)
        if isinstance(lhs, tuple) or isinstance(rhs, tuple):
            continue
        worst = max(worst, abs(lhs - rhs))
    return worst == 0.0, f"max identity gap {worst:.2e}"


# -------------------------------------------------------------------- smoothing


@check("smoothing.total-mass")
def _smoothing_mass(seed, quick):
    worst_name, worst = "", 0.0
    for name, mu in _matrix():
        for kernel in (GaussianKernel(), BoxKernel()):
            for t in (0.1, 0.01):
                sd = SmoothedDensity(mu, kernel, t, seed=seed, n_samples=60_000)
                gap = abs(sd.total_mass() - 1.0)
                if gap > worst:
                    worst_name, worst = f"{name}/{kernel.name}/t={t}", gap
    return worst <= 1e-4, f"max |mass-1| = {worst:.2e} ({worst_name})"


@check("smoothing.score-fd")
def _smoothing_score(seed, quick):
    rng = derived_rng(seed, 4)
    worst = 0.0
    cases = [(dirac(0.0), 0.5), (gaussian_grid(step=2e-3), 0.3),
             (two_point(-1.0, 1.0), 0.7)]
    for mu, t in cases:
        sd = SmoothedDensity(mu, GaussianKernel(), t, seed=seed)
        lo, hi = support_bounds(mu)
        x = rng.uniform(lo - t, hi + t, size=50)
        h = 1e-4 * t
        fd = (np.log(sd.density(x + h)) - np.log(sd.density(x - h))) / (2 * h)
        sc = sd.score(x)
        ok = np.isfinite(fd) & np.isfinite(sc) & (np.abs(sc) > 1e-6)
        rel = np.max(np.abs(fd[ok] - sc[ok]) / np.maximum(np.abs(sc[ok]), 1e-12))
        worst = max(worst, float(rel))
    return worst <= 1e-3, f"max relative FD gap {worst:.2e}"


@check("smoothing.box-identity")
def _smoothing_box(seed, quick):
    mu = BernoulliConvolution(1 / 3)
    t = 0.05
    kernel = BoxKernel()
    sd = SmoothedDensity(mu, kernel, t, seed=seed)
    rng = derived_rng(seed, 5)
    x = rng.uniform(-1.6, 1.6, size=200)
    dens = sd.density(x)
    lo, hi = interval_mass_bounds(mu, x - t * kernel.b, x - t * kernel.a)
    same = np.array_equal(dens, 0.5 * (lo + hi) / (t * (kernel.b - kernel.a)))
    return same, "density*t*(b-a) reproduces interval masses bit-for-bit"


# ---------------------------------------------------------------------- entropy


@check("entropy.mc-agreement")
def _entropy_mc(seed, quick):
    bad = []
    for name, mu in _matrix():
        for kernel in (GaussianKernel(), BoxKernel()):
            sd = SmoothedDensity(mu, kernel, 0.02, seed=seed, n_samples=60_000)
            res = entropy(sd, mc_samples=4000)
            if res.flagged:
                bad.append(f"{name}/{kernel.name}")
    return not bad, "flagged: " + (",".join(bad) if bad else "none")


@check("entropy.upper-bound")
def _entropy_upper(seed, quick):
    points, mc, _ = _scale(quick)
    worst = -math.inf
    for name, mu in _matrix():
        for kernel in (GaussianKernel(), BoxKernel()):
            grid = geometric_grid(1e-1, 1e-3, points)
            curve = entropy_curve(mu, kernel, grid, seed=seed, n_samples=mc,
                                  cross_check=False)
            slack = curve.values - (kernel.entropy() - np.log(curve.abscissa))
            worst = max(worst, float(slack.max()))
    return worst <= 1e-6, f"max H(mu_t) - (H(nu) - log t) = {worst:.2e}"


@check("entropy.lower-bound")
def _entropy_lower(seed, quick):
    points, mc, _ = _scale(quick)
    worst = math.inf
    for name, mu in _matrix():
        for kernel in (GaussianKernel(), BoxKernel()):
            bound, err = entropy_lower_bound(mu, kernel, seed=seed)
            grid = geometric_grid(1e-1, 1e-3, points)
            curve = entropy_curve(mu, kernel, grid, seed=seed, n_samples=mc,
                                  cross_check=False)
            worst = min(worst, float((curve.values - (bound - err - 1e-6)).min()))
    return worst >= 0.0, f"min H(mu_t) - lower bound = {worst:.3f}"


@check("entropy.shift-invariance")
def _entropy_shift(seed, quick):
    worst = 0.0
    for mu in (dirac(0.25), uniform_grid(0, 1)):
        for t in (0.05, 0.005):
            sd = SmoothedDensity(mu, GaussianKernel(), t, seed=seed)
            sd_shift = SmoothedDensity(translated(mu, 3.5), GaussianKernel(), t, seed=seed)
            a = entropy(sd, cross_check=False).value
            b = entropy(sd_shift, cross_check=False).value
            worst = max(worst, abs(a - b))
    return worst <= 1e-9, f"max shift gap {worst:.2e}"


@check("entropy.slope-range")
def _entropy_slope(seed, quick):
    points, mc, _ = _scale(quick)
    eps = 0.05
    bad = []
    for name, mu in _matrix():
        curve = entropy_curve(mu, GaussianKernel(), geometric_grid(1e-1, 1e-3, points),
                              seed=seed, n_samples=mc)
        if not (-eps <= curve.fit.slope <= 1 + eps):
            bad.append(f"{name}:{curve.fit.slope:.3f}")
    return not bad, "out-of-range slopes: " + (",".join(bad) if bad else "none")


# -------------------------------------------------------------------- dimension


@check("dimension.route-agreement")
def _dim_routes(seed, quick):
    points, mc, frac = _scale(quick)
    bad = []
    for name, mu in _matrix():
        e = delta_c_entropy(mu, GaussianKernel(), geometric_grid(1e-1, 1e-3, points),
                            seed=seed, n_samples=mc)
        f = delta_c_fractal(mu, geometric_grid(1e-1, 1e-3, points), n_samples=frac,
                            seed=seed)
        if abs(e.value - f.value) > e.confidence + f.confidence:
            bad.append(f"{name}:{e.value:.3f}vs{f.value:.3f}")
    return not bad, "disagreements: " + (",".join(bad) if bad else "none")


@check("dimension.translation-dilation")
def _dim_invariance(seed, quick):
    points, mc, frac = _scale(quick)
    mu = BernoulliConvolution(0.25)
    grid = geometric_grid(1e-1, 1e-3, points)
    base = delta_c_fractal(mu, grid, n_samples=frac, seed=seed)
    shifted = delta_c_fractal(translated(mu, 2.0), grid, n_samples=frac, seed=seed + 1)
    dilated = delta_c_fractal(LipschitzPushforward(mu, affine_map(2.0)), grid,
                              n_samples=frac, seed=seed + 2)
    gap = max(abs(base.value - shifted.value), abs(base.value - dilated.value))
    tol = base.confidence + max(shifted.confidence, dilated.confidence)
    return gap <= tol, f"max invariance gap {gap:.3f} (tol {tol:.3f})"


@check("dimension.mixture-monotone")
def _dim_mixture(seed, quick):
    points, mc, frac = _scale(quick)
    grid = geometric_grid(1e-1, 1e-3, points)
    vals = []
    for w in (0.2, 0.5, 0.8):
        mix = Mixture(((w, dirac(0.0)), (1 - w, uniform_grid(0, 1))))
        vals.append(delta_c_fractal(mix, grid, n_samples=frac, seed=seed).value)
    ok = vals[0] > vals[1] > vals[2]
    return ok, f"weights (.2,.5,.8) -> {', '.join(f'{v:.3f}' for v in vals)}"


@check("dimension.range")
def _dim_range(seed, quick):
    points, mc, frac = _scale(quick)
    bad = []
    for name, mu in _matrix():
        e = delta_c_entropy(mu, GaussianKernel(), geometric_grid(1e-1, 1e-3, points),
                            seed=seed, n_samples=mc)
        f = delta_c_fractal(mu, geometric_grid(1e-1, 1e-3, points), n_samples=frac,
                            seed=seed)
        for est in (e, f):
            if not (-0.05 <= est.value <= 1.05):
                bad.append(f"{name}/{est.method}:{est.value:.3f}")
    return not bad, "out of [-0.05,1.05]: " + (",".join(bad) if bad else "none")


# ----------------------------------------------------------------------- fisher


@check("fisher.bound")
def _fisher_bound(seed, quick):
    worst = -math.inf
    for name, mu in _matrix():
        for s in (1e-3, 1e-2, 1e-1, 1.0):
            res = fisher_direct(mu, s, seed=seed, n_samples=40_000)
            worst = max(worst, res.value * s - 1.0)
            if res.value < 0:
                return False, f"{name}: negative F"
    return worst <= 0.05, f"max sF - 1 = {worst:.3f}"


@check("fisher.variational")
def _fisher_var(seed, quick):
    s = 0.05
    for name, mu in _matrix():
        direct = fisher_direct(mu, s, seed=seed, n_samples=40_000)
        basis = default_basis(mu, s)
        prev = -1.0
        for m in (2, 4, 8):
            val = fisher_variational(mu, s, basis.head(m), seed=seed,
                                     n_samples=40_000).value
            if val < prev - 1e-9:
                return False, f"{name}: not monotone under nesting"
            prev = val
        tol = 3 * max(direct.error, 1e-3) + 0.05 * direct.value
        if prev > direct.value + tol:
            return False, f"{name}: variational {prev:.3f} > direct {direct.value:.3f}"
    return True, "variational <= direct, monotone under nesting"


@check("fisher.de-bruijn")
def _fisher_db(seed, quick):
    worst = 0.0
    for mu in (dirac(0.0), gaussian_grid(), uniform_grid(0, 1)):
        for s in (0.01, 0.1, 0.5):
            lhs, rhs = de_bruijn_check(mu, s, 0.01 * s, seed=seed)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 0.05, f"max de Bruijn residual {worst:.2%}"


@check("fisher.route-agreement")
def _fisher_routes(seed, quick):
    points, mc, _ = _scale(quick)
    bad = []
    for name, mu in _matrix():
        e = delta_c_entropy(mu, GaussianKernel(), geometric_grid(1e-1, 1e-3, points),
                            seed=seed, n_samples=mc)
        fi = delta_c_fisher(mu, geometric_grid(1.0, 1e-4, 16), seed=seed, n_samples=mc)
        if abs(e.value - fi.value) > 0.1:
            bad.append(f"{name}:{e.value:.3f}vs{fi.value:.3f}")
    return not bad, "disagreements: " + (",".join(bad) if bad else "none")


# ---------------------------------------------------------------------- bochner


@check("bochner.k-monotone")
def _bochner_monotone(seed, quick):
    mu = uniform_grid(0, 1)
    eps = 0.01
    basis = default_basis(mu, eps)
    prev = math.inf
    for n in (0.05, 0.1, 0.5, 1.0):
        k, _ = optimal_K(mu, eps, n, basis, seed=seed, n_samples=30_000)
        if k > prev + 1e-9:
            return False, f"K not nonincreasing in n at n={n}"
        prev = k
    k_small, _ = optimal_K(mu, eps, 0.05, basis.head(3), seed=seed, n_samples=30_000)
    k_full, _ = optimal_K(mu, eps, 0.05, basis, seed=seed, n_samples=30_000)
    ok = k_full >= k_small - 1e-9
    return ok, "nonincreasing in n; nondecreasing under basis nesting"


@check("bochner.k-zero")
def _bochner_zero(seed, quick):
    for name, mu in _matrix():
        basis = default_basis(mu, 0.01)
        for n in (1.0, 1.5, 3.0):
            for eps in (0.01, 0.1):
                k, _ = optimal_K(mu, eps, n, basis, seed=seed, n_samples=30_000)
                if k != 0.0:
                    return False, f"{name}: K={k} at n={n}"
    return True, "K == 0 for every n >= 1 cell"


@check("bochner.route-agreement")
def _bochner_routes(seed, quick):
    points, mc, _ = _scale(quick)
    bad = []
    for name, mu in _matrix():
        e = delta_c_entropy(mu, GaussianKernel(), geometric_grid(1e-1, 1e-3, points),
                            seed=seed, n_samples=mc)
        b = delta_square(mu, geometric_grid(1.0, 1e-4, 14),
                         geometric_grid(1.0, 0.01, 10), seed=seed, n_samples=mc)
        if abs(e.value - b.value) > 0.1:
            bad.append(f"{name}:{e.value:.3f}vs{b.value:.3f}")
    return not bad, "disagreements: " + (",".join(bad) if bad else "none")


@check("bochner.family-limit")
def _bochner_family(seed, quick):
    mu = BernoulliConvolution(0.25)
    est = delta_square(mu, geometric_grid(1.0, 1e-4, 14), geometric_grid(1.0, 0.01, 10),
                       seed=seed, n_samples=30_000)
    fi = delta_c_fisher(mu, geometric_grid(1.0, 1e-4, 14), seed=seed, n_samples=30_000)
    gap = abs(est.value - fi.value)
    objective = np.asarray(est.info["objective"])
    ok = gap <= 0.1 and float(objective.min()) <= float(objective[-1]) + 1e-12
    return ok, f"|bochner - fisher| = {gap:.3f}; scan min <= family members"


# ---------------------------------------------------------------------- freedim


@check("freedim.superaffine")
def _freedim_superaffine(seed, quick):
    rng = derived_rng(seed, 6)
    for _ in range(50):
        k = int(rng.integers(1, 5))
        comps, weights = [], rng.dirichlet(np.ones(int(rng.integers(2, 4))))
        for _w in weights:
            pos = rng.integers(0, 4, size=k)
            w = rng.dirichlet(np.ones(k))
            comps.append(Atomic(pos.astype(float) + 0.0, w))
        mix = Mixture(tuple((float(w), c) for w, c in zip(weights, comps)))
        lhs = free_dimension_single(mix)
        rhs = sum(float(w) * free_dimension_single(c) for w, c in zip(weights, comps))
        if lhs < rhs - 1e-12:
            return False, f"superaffinity violated: {lhs} < {rhs}"
    return True, "delta(mix) >= weighted delta on random atomic mixtures"


@check("freedim.range")
def _freedim_range(seed, quick):
    rng = derived_rng(seed, 7)
    for _ in range(100):
        k = int(rng.integers(1, 8))
        mu = Atomic(np.arange(k, dtype=float), rng.dirichlet(np.ones(k)))
        v = free_dimension_single(mu)
        if not (0.0 <= v <= 1.0):
            return False, f"value {v} out of [0,1]"
    return True, "values within [0, 1] on random atomic measures"


@check("freedim.equal-atoms")
def _freedim_equal(seed, quick):
    for k in range(1, 11):
        mu = Atomic(np.arange(k, dtype=float), np.full(k, 1.0 / k))
        if abs(free_dimension_single(mu) - (1.0 - 1.0 / k)) > 1e-12:
            return False, f"k={k} mismatch"
    return True, "k equal atoms -> 1 - 1/k for k = 1..10"


# -------------------------------------------------------------------------- cli


@check("cli.determinism")
def _cli_determinism(seed, quick):
    from .cli import main as cli_main
    from .specio import dump_measure

    with tempfile.TemporaryDirectory() as tmp:
        spec = os.path.join(tmp, "m.json")
        dump_measure(two_point(0.0, 1.0), spec)
        outs = []
        for j in range(2):
            out = os.path.join(tmp, f"o{j}.csv")
            rc = cli_main(["entropy-curve", "--measure", spec, "--kernel", "gauss",
                           "--tmin", "1e-2", "--tmax", "1e-1", "--points", "5",
                           "--seed", str(seed), "--out", out])
            if rc != 0:
                return False, f"exit code {rc}"
            with open(out, "rb") as fh:
                outs.append(fh.read())
    return outs[0] == outs[1], "repeated runs byte-identical"


@check("cli.coverage")
def _cli_coverage(seed, quick):
    names = {name for name, _ in _CHECKS}
    missing = [s for s in SUITES if not any(n.startswith(s + ".") for n in names)]
    return not missing, "every suite has named checks" if not missing else f"missing {missing}"


def run_suites(suites, seed=42, quick=False):
    results = []
    for name, fn in _CHECKS:
        if name.split(".", 1)[0] not in suites:
            continue
        try:
            ok, detail = fn(seed, quick)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"exception: {exc!r}"
        results.append((name, bool(ok), detail))
    return results
