"""Exact degree-m Hessian calculus on piecewise-linear radial profiles.

For a profile ``g`` in the coordinate ``tau_m`` the degree-``m`` Hessian
measure of the associated radial function is purely atomic: one atom per
breakpoint ``tau_k`` carrying mass ``c_{n,m} * (sigma_k^m - sigma_{k-1}^m)``,
so the total mass is ``c_{n,m} * sigma_K^m``.  Mixed measures of an
``m``-tuple of profiles are obtained from pure powers by polarization.

The dimensional constant ``c_{n,m}`` equals ``(2*pi)**n`` exactly when
``m = n``; for ``m < n`` it is measured once by the finite-difference grid
oracle and cached (JSON file, override path with the ``HESSMETRIC_CACHE``
environment variable).
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .profiles import HessianParams, RadialProfile, combine, zero_profile

__all__ = [
    "AtomicMeasure",
    "hessian_constant",
    "hessian_measure",
    "mixed_measure",
    "integrate",
    "e1_energy",
    "measure_to_dict",
    "measure_from_dict",
]

#: relative threshold below which negative polarization round-off is clamped
NEGATIVE_MASS_SLACK = 1e-12


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite atomic measure on ``(-inf, 0]``: locations ``taus``, weights ``masses``."""

    taus: tuple
    masses: tuple

    def __post_init__(self) -> None:
        if len(self.taus) != len(self.masses):
            raise ValueError("taus and masses must have equal length")
        if any(t2 <= t1 for t1, t2 in zip(self.taus, self.taus[1:])):
            raise ValueError("atom locations must be strictly increasing")

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    def __len__(self) -> int:
        return len(self.taus)


def measure_to_dict(mu: AtomicMeasure) -> list:
    return [{"tau": t, "mass": m} for t, m in zip(mu.taus, mu.masses)]


def measure_from_dict(rows: list) -> AtomicMeasure:
    rows = sorted(rows, key=lambda r: r["tau"])
    return AtomicMeasure(
        tuple(float(r["tau"]) for r in rows), tuple(float(r["mass"]) for r in rows)
    )


# ---------------------------------------------------------------------------
# dimensional constant

_constant_memory: dict = {}


def _cache_path() -> Path:
    env = os.environ.get("HESSMETRIC_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hessmetric" / "constants.json"


def hessian_constant(params: HessianParams) -> float:
    """Total-mass constant ``c_{n,m}``; exact for ``m = n``, measured otherwise."""
    n, m = params.n, params.m
    if m == n:
        return (2.0 * math.pi) ** n
    key = f"{n},{m}"
    if key in _constant_memory:
        return _constant_memory[key]
    path = _cache_path()
    if path.exists():
        try:
            stored = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            stored = {}
        if key in stored:
            _constant_memory[key] = float(stored[key])
            return _constant_memory[key]
    from . import oracle  # deferred: the oracle builds on the profile layer only

    value = oracle.measure_hessian_constant(n, m)
    _constant_memory[key] = value
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        stored = {}
        if path.exists():
            try:
                stored = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                stored = {}
        stored[key] = value
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(stored, indent=2))
        tmp.replace(path)
    except OSError:
        pass  # caching is best-effort; the measured value is still returned
    return value


# ---------------------------------------------------------------------------
# measures


def _check_energy_profile(g: RadialProfile, params: HessianParams) -> None:
    if g.n != params.n:
        raise ValueError(f"profile dimension n={g.n} does not match params n={params.n}")
    if g.q != params.m:
        raise ValueError(
            f"profile coordinate q={g.q} incompatible with degree m={params.m}; "
            "reparameterize first"
        )
    if not g.bounded:
        raise ValueError("left-tail slope must vanish (finite energy required)")


def hessian_measure(g: RadialProfile, params: HessianParams) -> AtomicMeasure:
    """Atomic Hessian measure ``H_m(g)``: one atom per slope jump."""
    _check_energy_profile(g, params)
    c = hessian_constant(params)
    sl = np.asarray(g.slopes, dtype=float)
    jumps = c * (sl[1:] ** params.m - sl[:-1] ** params.m)
    taus, masses = [], []
    for t, mass in zip(g.breakpoints, jumps):
        if mass != 0.0:
            taus.append(t)
            masses.append(float(mass))
    return AtomicMeasure(tuple(taus), tuple(masses))


def mixed_measure(factors, params: HessianParams) -> AtomicMeasure:
    """Mixed Hessian measure of ``m`` profiles, by polarization.

    ``(1/m!) * sum over nonempty subsets S of (-1)^(m-|S|) H_m(sum_S g_i)``.
    Small negative round-off masses (below ``1e-12`` of the total scale) are
    clamped to zero; larger negative masses abort.
    """
    m = params.m
    factors = list(factors)
    if len(factors) != m:
        raise ValueError(f"need exactly m={m} profile factors, got {len(factors)}")
    for g in factors:
        _check_energy_profile(g, params)
    zero = zero_profile(params.n, params.m)
    acc: dict = {}
    scale = 0.0
    fact_m = math.factorial(m)
    for r in range(1, m + 1):
        sign = (-1) ** (m - r)
        for subset in itertools.combinations(range(m), r):
            total = zero
            for i in subset:
                total = combine(1.0, total, 1.0, factors[i])
            mu = hessian_measure(total, params)
            scale = max(scale, mu.total_mass)
            for t, mass in zip(mu.taus, mu.masses):
                acc[t] = acc.get(t, 0.0) + sign * mass / fact_m
    floor = NEGATIVE_MASS_SLACK * max(scale, 1e-300)
    taus, masses = [], []
    for t in sorted(acc):
        mass = acc[t]
        if mass < -floor:
            raise ArithmeticError(
                f"mixed measure produced negative mass {mass:.3e} at tau={t!r} "
                f"(threshold {-floor:.3e}); inputs are inconsistent"
            )
        mass = max(mass, 0.0)
        if mass != 0.0:
            taus.append(t)
            masses.append(mass)
    return AtomicMeasure(tuple(taus), tuple(masses))


def integrate(u: RadialProfile, w: RadialProfile, mu: AtomicMeasure) -> float:
    """Exact ``integral of (u - w)`` against an atomic measure."""
    u.require_same_coordinate(w)
    if not mu.taus:
        return 0.0
    taus = np.asarray(mu.taus)
    diff = np.asarray(u.value(taus)) - np.asarray(w.value(taus))
    return float(np.dot(diff, np.asarray(mu.masses)))


def e1_energy(g: RadialProfile, params: HessianParams) -> float:
    """Energy ``e_{1,m}(g) = integral of (-g) against H_m(g)`` (nonnegative)."""
    mu = hessian_measure(g, params)
    if not mu.taus:
        return 0.0
    vals = np.asarray(g.value(np.asarray(mu.taus)))
    return float(-np.dot(vals, np.asarray(mu.masses)))
