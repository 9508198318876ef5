"""Command-line front door.

Subcommands: entropy-curve, dimension, fisher, bochner, freedim, verify.
Measure specs are JSON files (see specio / docs/measure_schema.json); all
randomness flows from --seed via per-task derivation, so identical
invocations produce byte-identical CSV/JSON output.

Exit codes: 0 success, 1 failed verification or bound violation,
2 usage or spec errors.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import verify as verify_mod
from .dimension import delta_c_entropy, delta_c_fractal, default_fractal_grid
from .entropy import entropy_curve
from .fisher import (
    BoundViolation,
    default_basis,
    default_s_grid,
    delta_c_fisher,
    fisher_direct,
    fisher_variational,
)
from .bochner import delta_square, default_n_grid
from .freedim import free_dimension_single
from .measures import MeasureError
from .numerics import geometric_grid
from .smoothing import kernel_from_name, DEFAULT_MC_SAMPLES
from .specio import load_measure

DEFAULT_SEED = 42


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_out(path, text):
    if path == "-" or path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(rows, header):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _t_grid(args):
    if not (0 < args.tmin < args.tmax <= 1):
        raise MeasureError("grids need 0 < tmin < tmax <= 1")
    if args.points < 4:
        raise MeasureError("points must be at least 4")
    return geometric_grid(args.tmax, args.tmin, args.points)


def _add_common(p, grid=True):
    p.add_argument("--measure", required=True, help="measure spec JSON path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES,
                   help="Monte Carlo samples per evaluation")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    if grid:
        p.add_argument("--tmin", type=float, default=1e-4)
        p.add_argument("--tmax", type=float, default=1e-1)
        p.add_argument("--points", type=int, default=25)


def build_parser():
    ap = argparse.ArgumentParser(prog="entdim",
                                 description="entropy-dimension estimation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy-curve", help="H(mu_t) on a geometric t grid")
    _add_common(p)
    p.add_argument("--kernel", default="gauss")
    p.set_defaults(fn=cmd_entropy_curve)

    p = sub.add_parser("dimension", help="entropy-slope / fractal-average estimates")
    _add_common(p)
    p.add_argument("--kernel", default="gauss")
    p.add_argument("--method", choices=("entropy", "fractal", "both"), default="entropy")
    p.set_defaults(fn=cmd_dimension)

    p = sub.add_parser("fisher", help="Fisher information over an s grid")
    _add_common(p, grid=False)
    p.add_argument("--smin", type=float, default=1e-4)
    p.add_argument("--smax", type=float, default=1.0)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--basis-size", type=int, default=8)
    p.set_defaults(fn=cmd_fisher)

    p = sub.add_parser("bochner", help="curvature-dimension scan")
    _add_common(p, grid=False)
    p.add_argument("--smin", type=float, default=1e-4)
    p.add_argument("--smax", type=float, default=1.0)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--nmin", type=float, default=0.01)
    p.add_argument("--npoints", type=int, default=20)
    p.set_defaults(fn=cmd_bochner)

    p = sub.add_parser("freedim", help="free entropy dimension (atom profile)")
    p.add_argument("--measure", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_freedim)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", default="all",
                   help="all or comma list of: " + ",".join(verify_mod.SUITES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--quick", action="store_true",
                   help="smaller grids and sample counts")
    p.set_defaults(fn=cmd_verify)
    return ap


def cmd_entropy_curve(args):
    mu = load_measure(args.measure)
    kernel = kernel_from_name(args.kernel)
    curve = entropy_curve(mu, kernel, _t_grid(args), seed=args.seed,
                          n_samples=args.samples)
    text = _csv(curve.rows(), ["t", "H", "H_err", "flagged"])
    _write_out(args.out, text)
    return 0


def cmd_dimension(args):
    mu = load_measure(args.measure)
    kernel = kernel_from_name(args.kernel)
    out = {}
    if args.method in ("entropy", "both"):
        grid = _t_grid(args)
        out["entropy"] = delta_c_entropy(mu, kernel, grid, seed=args.seed,
                                         n_samples=args.samples).to_dict()
    if args.method in ("fractal", "both"):
        grid = geometric_grid(args.tmax, args.tmin, min(args.points, 20))
        out["fractal"] = delta_c_fractal(mu, grid, seed=args.seed).to_dict()
    doc = out[args.method] if args.method != "both" else out
    _write_out(args.out, _json_text(doc))
    return 0


def cmd_fisher(args):
    mu = load_measure(args.measure)
    if not (0 < args.smin < args.smax <= 1):
        raise MeasureError("grids need 0 < smin < smax <= 1")
    s_grid = geometric_grid(args.smax, args.smin, args.points)
    basis = default_basis(mu, float(s_grid[-1]), m=args.basis_size)
    rows = []
    for i, s in enumerate(s_grid):
        direct = fisher_direct(mu, s, seed=args.seed + i, n_samples=args.samples)
        var = fisher_variational(mu, s, basis, seed=args.seed + i,
                                 n_samples=args.samples)
        rows.append((s, direct.value, var.value, direct.error, s * direct.value))
    _write_out(args.out, _csv(rows, ["s", "F_direct", "F_var", "F_err", "sF"]))
    return 0


def cmd_bochner(args):
    mu = load_measure(args.measure)
    eps_grid = geometric_grid(args.smax, args.smin, args.points)
    n_grid = default_n_grid(args.npoints, nmin=args.nmin)
    est = delta_square(mu, eps_grid, n_grid, seed=args.seed, n_samples=args.samples)
    scan = est.info["scan"]
    _write_out(args.out, _csv(scan.rows(), ["eps", "n", "K", "source"]))
    return 0


def cmd_freedim(args):
    mu = load_measure(args.measure)
    _write_out(args.out, _json_text({"value": free_dimension_single(mu)}))
    return 0


def cmd_verify(args):
    suites = verify_mod.SUITES if args.suite == "all" else [
        s.strip() for s in args.suite.split(",") if s.strip()]
    unknown = [s for s in suites if s not in verify_mod.SUITES]
    if unknown:
        raise MeasureError(f"unknown suite(s) {unknown}; choose from {verify_mod.SUITES}")
    results = verify_mod.run_suites(suites, seed=args.seed, quick=args.quick)
    width = max(len(name) for name, _, _ in results) + 2
    failures = 0
    for name, ok, detail in results:
        tag = "PASS" if ok else "FAIL"
        failures += not ok
        print(f"{tag}  {name:<{width}} {detail}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except MeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
