"""Segment geodesics by linear interpolation of Legendre conjugates.

For ``m = n`` the interpolation runs in the coordinate ``tau_n = ln s``; a
segment ``t -> phi_t`` is obtained by inverting ``(1-t) g0* + t g1*``.  For
``m < n`` the endpoints must be supplied in the coordinate ``tau_{m+1}``
(the construction requires one degree of subharmonicity more than the
energy class); evaluation for energy and metric purposes transports the
slices back to the coordinate ``tau_m``.

Audits quantify how closely the construction realizes a metric geodesic:
energy linearity in ``t``, the geodesic equation
``d(phi_s, phi_t) = |t - s| d(phi_0, phi_1)``, the sup lower bound
``phi_t >= max(u0 - t ||u1||_inf, u1 - (1-t) ||u1||_inf)``, and endpoint
capacity continuity.  For ``m = n`` the audits hold to round-off; for
``m < n`` the construction is a lower envelope whose audit deviations are
reported rather than assumed small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import capacity_convergence_check, e1_energy, energy_Ew, metric_d
from .profiles import (
    DualProfile,
    HessianParams,
    RadialProfile,
    dual_affine_combination,
    legendre,
    legendre_inverse,
    reparameterize,
)

__all__ = [
    "interpolation_coordinate",
    "Geodesic",
    "weak_geodesic",
    "geodesic_eval",
    "geodesic_energy_profile",
    "GeodesicAudit",
    "geodesic_audit",
    "geodesic_contraction_check",
    "monotone_geodesic_limit",
    "MonotoneLimitReport",
]


def interpolation_coordinate(params: HessianParams) -> int:
    """Coordinate in which segment endpoints are interpolated."""
    return params.n if params.m == params.n else params.m + 1


@dataclass(frozen=True)
class Geodesic:
    u0: RadialProfile
    u1: RadialProfile
    params: HessianParams
    d0: DualProfile
    d1: DualProfile
    resolution: int = 2048


def weak_geodesic(
    u0: RadialProfile, u1: RadialProfile, params: HessianParams, resolution: int = 2048
) -> Geodesic:
    """Segment between two bounded profiles given in the interpolation coordinate."""
    q = interpolation_coordinate(params)
    u0.require_same_coordinate(u1)
    if u0.n != params.n or u0.q != q:
        raise ValueError(
            f"geodesic endpoints must carry coordinate q={q} for (n={params.n}, m={params.m})"
        )
    if not (u0.bounded and u1.bounded):
        raise ValueError("geodesic endpoints must be bounded profiles")
    if params.m < params.n:
        # endpoints must also lie in the energy class: transport must stay convex
        reparameterize(u0, params.m, resolution)
        reparameterize(u1, params.m, resolution)
    return Geodesic(u0, u1, params, legendre(u0), legendre(u1), resolution)


def geodesic_eval(g: Geodesic, t: float) -> RadialProfile:
    """Slice ``phi_t`` in the interpolation coordinate (endpoints exact)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return g.u0
    if t == 1.0:
        return g.u1
    return legendre_inverse(dual_affine_combination(g.d0, g.d1, t))


def geodesic_energy_profile(g: Geodesic, t: float, resolution: int | None = None) -> RadialProfile:
    """Slice ``phi_t`` transported to the energy coordinate ``q = m``."""
    phi = geodesic_eval(g, t)
    if g.params.m == g.params.n:
        return phi
    return reparameterize(phi, g.params.m, resolution or g.resolution)


@dataclass(frozen=True)
class GeodesicAudit:
    t: tuple
    energies: tuple
    d01: float
    linearity_dev: float  # max relative deviation of E from the affine law
    metric_dev: float  # max relative deviation of d(phi_s, phi_t) from |t-s| d01
    lower_bound_gap: float  # min over grid of phi_t - sup lower bound (>= -tol)
    endpoint_capacity: tuple  # capacity bounds of {|phi_t - endpoint| > eps} as t -> 0, 1


def geodesic_audit(
    g: Geodesic,
    w: RadialProfile | None = None,
    t_samples=None,
    resolution: int | None = None,
    capacity_eps: float = 0.05,
) -> GeodesicAudit:
    params = g.params
    if t_samples is None:
        t_samples = np.linspace(0.0, 1.0, 9)
    t_samples = np.asarray(t_samples, dtype=float)
    slices = [geodesic_eval(g, t) for t in t_samples]
    energy_slices = [
        geodesic_energy_profile(g, t, resolution) for t in t_samples
    ]
    if w is None:
        energies = [-e1_energy(p, params) / (params.m + 1) for p in energy_slices]
    else:
        energies = [energy_Ew(p, w, params).value for p in energy_slices]
    e0, e1 = energies[0], energies[-1]
    d01 = metric_d(energy_slices[0], energy_slices[-1], params, w)
    span = max(abs(e1 - e0), d01, 1e-300)
    linearity_dev = max(
        abs(e - ((1.0 - t) * e0 + t * e1)) / span for t, e in zip(t_samples, energies)
    )
    metric_dev = 0.0
    for i, s in enumerate(t_samples):
        for k in range(i + 1, len(t_samples)):
            dst = metric_d(energy_slices[i], energy_slices[k], params, w)
            metric_dev = max(metric_dev, abs(dst - (t_samples[k] - s) * d01) / max(d01, 1e-300))
    # sup lower bound, checked in the interpolation coordinate
    sup0 = g.u0.sup_norm
    sup1 = g.u1.sup_norm
    lows = [b for b in g.u0.breakpoints + g.u1.breakpoints] or [-1.0]
    probe = np.linspace(min(lows) - 1.0, 0.0, 1024)
    f0 = np.asarray(g.u0.value(probe))
    f1 = np.asarray(g.u1.value(probe))
    gap = math.inf
    for t, phi in zip(t_samples, slices):
        # each term is an admissible subsolution matching the boundary data
        bound = np.maximum(f0 - t * sup1, f1 - (1.0 - t) * sup0)
        gap = min(gap, float(np.min(np.asarray(phi.value(probe)) - bound)))
    # endpoint capacity continuity: deviation sets shrink to zero capacity
    t_small = [0.25, 0.1, 0.04, 0.01]
    cap0 = capacity_convergence_check(
        [geodesic_energy_profile(g, t, resolution) for t in t_small],
        energy_slices[0], params, capacity_eps * max(sup1, 1.0),
    )
    cap1 = capacity_convergence_check(
        [geodesic_energy_profile(g, 1.0 - t, resolution) for t in t_small],
        energy_slices[-1], params, capacity_eps * max(sup1, 1.0),
    )
    return GeodesicAudit(
        tuple(t_samples), tuple(energies), d01, linearity_dev, metric_dev, gap,
        (tuple(r.cap_bound for r in cap0), tuple(r.cap_bound for r in cap1)),
    )


def geodesic_contraction_check(ga: Geodesic, gb: Geodesic, t_samples=None):
    """Rows ``(t, d(phi_t, psi_t), (1-t) d(u0,v0) + t d(u1,v1))`` for two segments."""
    if t_samples is None:
        t_samples = np.linspace(0.0, 1.0, 9)
    params = ga.params
    d_start = metric_d(
        geodesic_energy_profile(ga, 0.0), geodesic_energy_profile(gb, 0.0), params
    )
    d_end = metric_d(
        geodesic_energy_profile(ga, 1.0), geodesic_energy_profile(gb, 1.0), params
    )
    rows = []
    for t in np.asarray(t_samples, dtype=float):
        dt = metric_d(
            geodesic_energy_profile(ga, t), geodesic_energy_profile(gb, t), params
        )
        rows.append((float(t), dt, (1.0 - t) * d_start + t * d_end))
    return rows


@dataclass(frozen=True)
class MonotoneLimitReport:
    monotone: bool  # slices decrease with the endpoint sequences
    sup_gaps: tuple  # sup |phi^j_t - phi^limit_t| per sequence index
    t: tuple


def monotone_geodesic_limit(
    endpoint_pairs, limit_pair, params: HessianParams, t_samples=None, resolution: int = 2048
) -> MonotoneLimitReport:
    """Stability of segments under decreasing endpoint approximation.

    ``endpoint_pairs`` is a sequence of ``(u0_j, u1_j)`` decreasing to
    ``limit_pair``; the slices of the approximating segments must decrease
    pointwise to the slices of the limit segment.
    """
    if t_samples is None:
        t_samples = np.linspace(0.0, 1.0, 5)
    t_samples = np.asarray(t_samples, dtype=float)
    geos = [weak_geodesic(u0, u1, params, resolution) for u0, u1 in endpoint_pairs]
    glim = weak_geodesic(limit_pair[0], limit_pair[1], params, resolution)
    lows = [b for g in (glim.u0, glim.u1) for b in g.breakpoints] or [-1.0]
    probe = np.linspace(min(lows) - 2.0, 0.0, 1024)
    monotone = True
    sup_gaps = []
    prev = None
    for g in geos:
        stack = np.stack([np.asarray(geodesic_eval(g, t).value(probe)) for t in t_samples])
        ref = np.stack([np.asarray(geodesic_eval(glim, t).value(probe)) for t in t_samples])
        sup_gaps.append(float(np.max(np.abs(stack - ref))))
        if prev is not None and float(np.max(stack - prev)) > 1e-10:
            monotone = False
        prev = stack
    return MonotoneLimitReport(monotone, tuple(sup_gaps), tuple(t_samples))
