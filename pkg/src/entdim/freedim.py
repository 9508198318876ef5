"""Free entropy dimension of a single self-adjoint variable, identified with
its spectral measure on the line: 1 - sum of squared atom masses."""

from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .measures import (
    Atomic,
    BernoulliConvolution,
    GridDensity,
    LipschitzPushforward,
    Mixture,
)

__all__ = ["AtomProfile", "atom_profile", "free_dimension_single"]

MERGE_TOL = 1e-12


@dataclass(frozen=True)
class AtomProfile:
    """Exact atomic part of a measure: merged (position, mass) pairs plus the
    remaining continuous mass."""

    atoms: tuple
    continuous_mass: float


def _merge(pairs):
    """Sum masses of positions within MERGE_TOL of each other (representation
    exactness, not numerics: coincident atoms across mixture components)."""
    if not pairs:
        return ()
    pairs = sorted(pairs)
    merged = [list(pairs[0])]
    for pos, mass in pairs[1:]:
        if pos - merged[-1][0] <= MERGE_TOL:
            merged[-1][1] += mass
        else:
            merged.append([pos, mass])
    return tuple((p, m) for p, m in merged)


@singledispatch
def _raw_atoms(mu):
    raise TypeError(f"unsupported measure type {type(mu).__name__}")


@_raw_atoms.register
def _(mu: Atomic):
    return [(float(p), float(w)) for p, w in zip(mu.positions, mu.weights)]


@_raw_atoms.register
def _(mu: GridDensity):
    return []


@_raw_atoms.register
def _(mu: BernoulliConvolution):
    # purely singular continuous for every admissible parameter: no atoms
    return []


@_raw_atoms.register
def _(mu: Mixture):
    out = []
    for w, comp in mu.components:
        out.extend((p, w * m) for p, m in _raw_atoms(comp))
    return out


@_raw_atoms.register
def _(mu: LipschitzPushforward):
    # an injective map carries atoms to atoms with unchanged masses
    base = _raw_atoms(mu.base)
    if not base:
        return []
    pos = mu.map.apply(np.array([p for p, _ in base]))
    return [(float(q), m) for q, (_, m) in zip(pos, base)]


def atom_profile(mu):
    atoms = _merge(_raw_atoms(mu))
    total = sum(m for _, m in atoms)
    return AtomProfile(atoms, max(1.0 - total, 0.0))


def free_dimension_single(mu):
    """1 - sum over atoms of mass^2; quadratic in the measure, hence
    superaffine on mixtures, with values in [0, 1]."""
    profile = atom_profile(mu)
    return 1.0 - sum(m * m for _, m in profile.atoms)
