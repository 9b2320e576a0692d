"""Weighted energies, the Aubin functional, rooftop envelopes and the metric.

The weighted energy of a profile ``u`` relative to a weight profile ``w``
(both bounded, coordinate ``q = m``) is

    E_w(u) = 1/(m+1) * sum_{j=0..m} integral (u - w) d(mixed_j)

where ``mixed_j`` pairs ``j`` Hessian factors of ``u`` with ``m - j``
factors of ``w``.  The metric is

    d(u, v) = E_w(u) + E_w(v) - 2 E_w(P(u, v))

with ``P`` the rooftop envelope (greatest convex nondecreasing minorant of
the pointwise minimum); the value does not depend on the weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hessian import AtomicMeasure, e1_energy, hessian_constant, hessian_measure, integrate, mixed_measure
from .profiles import (
    HessianParams,
    RadialProfile,
    combine,
    make_profile,
    merged_nodes,
    radius_of_tau,
    tau_of_radius,
    zero_profile,
)

__all__ = [
    "EnergyReport",
    "energy_Ew",
    "aubin_I",
    "rooftop_P",
    "metric_d",
    "NormReport",
    "norm_energy_difference",
    "capacity_ball",
    "capacity_convergence_check",
    "CapacityRow",
    "cauchy_limit",
    "CauchyReport",
    "segment_report",
    "SegmentReport",
    "rooftop_contact_report",
    "ContactAtom",
    "deviation_intervals",
]


@dataclass(frozen=True)
class EnergyReport:
    """Weighted energy with its per-degree mixed terms (unscaled)."""

    value: float
    terms: tuple  # terms[j] = integral (u - w) d[(H u)^j (H w)^(m-j)]
    params: HessianParams


def energy_Ew(u: RadialProfile, w: RadialProfile, params: HessianParams) -> EnergyReport:
    """Weighted energy ``E_w(u)``; ``value`` equals ``sum(terms) / (m + 1)``."""
    u.require_same_coordinate(w)
    m = params.m
    terms = []
    for j in range(m + 1):
        mu = mixed_measure([u] * j + [w] * (m - j), params)
        terms.append(integrate(u, w, mu))
    return EnergyReport(float(sum(terms)) / (m + 1), tuple(terms), params)


def aubin_I(u: RadialProfile, v: RadialProfile, params: HessianParams) -> float:
    """Aubin functional ``I(u, v) = integral (u - v) (H_m(v) - H_m(u)) >= 0``."""
    mu_u = hessian_measure(u, params)
    mu_v = hessian_measure(v, params)
    return integrate(u, v, mu_v) - integrate(u, v, mu_u)


def rooftop_P(*profiles: RadialProfile) -> RadialProfile:
    """Rooftop envelope: greatest convex nondecreasing minorant of the minimum."""
    if not profiles:
        raise ValueError("need at least one profile")
    first = profiles[0]
    for g in profiles[1:]:
        first.require_same_coordinate(g)
    if any(not g.bounded for g in profiles):
        raise ValueError("rooftop envelope requires bounded profiles")
    if len(profiles) == 1:
        return first
    # candidate contact nodes: every breakpoint and every pairwise crossing
    nodes: set = set()
    for i, gi in enumerate(profiles):
        nodes.update(gi.breakpoints)
        for gj in profiles[i + 1 :]:
            nodes.update(merged_nodes(gi, gj))
    nodes = sorted(t for t in nodes if t < 0.0)
    tail = min(g.min_value for g in profiles)
    if not nodes:
        return zero_profile(first.n, first.q)
    pts_x = [nodes[0]] + nodes + [0.0]
    arr = np.asarray(nodes)
    mins = np.min([np.asarray(g.value(arr)) for g in profiles], axis=0)
    pts_y = [tail] + list(mins) + [0.0]
    # lower convex hull, monotone-chain; the first point carries the deep-end
    # constant so hull slopes are automatically nonnegative
    hx, hy = [], []
    for x, y in zip(pts_x, pts_y):
        if hx and x <= hx[-1]:
            if y >= hy[-1]:
                continue
            hx.pop(), hy.pop()
        while len(hx) >= 2 and (hy[-1] - hy[-2]) * (x - hx[-1]) >= (y - hy[-1]) * (
            hx[-1] - hx[-2]
        ):
            hx.pop()
            hy.pop()
        hx.append(x)
        hy.append(y)
    slopes = [0.0] + [
        (y2 - y1) / (x2 - x1) for (x1, y1), (x2, y2) in zip(zip(hx, hy), zip(hx[1:], hy[1:]))
    ]
    slopes = np.maximum(np.maximum.accumulate(np.asarray(slopes)), 0.0)
    return make_profile(first.n, first.q, hx[:-1], slopes)


def metric_d(
    u: RadialProfile,
    v: RadialProfile,
    params: HessianParams,
    w: RadialProfile | None = None,
) -> float:
    """Energy metric ``d(u, v)``; independent of the weight ``w``.

    With the default zero weight the three energies reduce to plain
    ``e_{1,m}`` energies, which is substantially faster.
    """
    # canonical argument order makes symmetry exact, not just approximate,
    # and identical data make the distance exactly zero
    if (u.breakpoints, u.slopes) == (v.breakpoints, v.slopes):
        return 0.0
    if (v.breakpoints, v.slopes) < (u.breakpoints, u.slopes):
        u, v = v, u
    p = rooftop_P(u, v)
    if w is None:
        val = (
            2.0 * e1_energy(p, params)
            - e1_energy(u, params)
            - e1_energy(v, params)
        ) / (params.m + 1)
    else:
        val = (
            energy_Ew(u, w, params).value
            + energy_Ew(v, w, params).value
            - 2.0 * energy_Ew(p, w, params).value
        )
    return max(val, 0.0) if val > -1e-12 else val


@dataclass(frozen=True)
class NormReport:
    """Energy seminorm of a difference via the canonical decomposition."""

    energy: float  # e_{1,m}(u + v), an upper-bound witness for u - v
    norm: float  # energy ** (1 / (m + 1))


def norm_energy_difference(u: RadialProfile, v: RadialProfile, params: HessianParams) -> NormReport:
    energy = e1_energy(combine(1.0, u, 1.0, v), params)
    return NormReport(energy, energy ** (1.0 / (params.m + 1)))


def capacity_ball(r: float, params: HessianParams) -> float:
    """Capacity of the closed ball of radius ``r < 1`` (extremal kink profile)."""
    if not (0.0 < r < 1.0):
        raise ValueError("radius must lie in (0, 1)")
    tau = tau_of_radius(r, params.n, params.m)
    return hessian_constant(params) / (-tau) ** params.m


def deviation_intervals(u: RadialProfile, v: RadialProfile, eps: float) -> list:
    """Closed tau-intervals where ``|u - v| > eps`` (exact, from PL data)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    nodes = [t for t in merged_nodes(u, v) if t < 0.0]
    xs = [(nodes[0] - 1.0 if nodes else -1.0)] + nodes + [0.0]
    h = [u.value(t) - v.value(t) for t in xs]
    out = []
    if abs(h[0]) > eps:
        out.append((-math.inf, xs[0]))  # h is constant on the deep tail
    for (x1, h1), (x2, h2) in zip(zip(xs, h), zip(xs[1:], h[1:])):
        # split the linear segment at the crossings of the levels +-eps
        cuts = [x1, x2]
        for level in (eps, -eps):
            if (h1 - level) * (h2 - level) < 0.0:
                cuts.append(x1 + (x2 - x1) * (level - h1) / (h2 - h1))
        cuts = sorted(cuts)
        for a, b in zip(cuts, cuts[1:]):
            mid = 0.5 * (a + b)
            hm = h1 + (h2 - h1) * (mid - x1) / (x2 - x1)
            if abs(hm) > eps:
                out.append((a, b))
    merged = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1] + 1e-15:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


@dataclass(frozen=True)
class CapacityRow:
    index: int
    intervals: tuple
    cap_bound: float


def capacity_convergence_check(
    seq,
    limit: RadialProfile,
    params: HessianParams,
    eps: float,
    compact_radius: float = 0.5,
):
    """Capacity bound of ``{|u_j - limit| > eps}`` inside ``{s <= compact_radius}``.

    Returns one row per sequence element with the exact deviation intervals
    and an upper capacity bound (ball capacity at the outer radius of the
    deviation set, clipped to the compact set).
    """
    rows = []
    tau_cap = tau_of_radius(compact_radius, params.n, params.m)
    for idx, u in enumerate(seq):
        intervals = [
            (lo, min(hi, tau_cap))
            for lo, hi in deviation_intervals(u, limit, eps)
            if lo < tau_cap
        ]
        if intervals:
            outer = max(hi for _, hi in intervals)
            r_out = min(radius_of_tau(outer, params.n, params.m), compact_radius)
            bound = capacity_ball(r_out, params)
        else:
            bound = 0.0
        rows.append(CapacityRow(idx, tuple(intervals), bound))
    return rows


@dataclass(frozen=True)
class CauchyReport:
    candidate: RadialProfile
    envelope_tail: tuple  # increasing envelope profiles v_j
    distances: tuple  # d(u_j, candidate)
    stabilized: bool


def _sup_diff(u: RadialProfile, v: RadialProfile, taus: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(u.value(taus)) - np.asarray(v.value(taus)))))


def cauchy_limit(seq, params: HessianParams, slack: float = 1e-9) -> CauchyReport:
    """Limit construction for a fast Cauchy sequence.

    Requires ``d(u_j, u_{j+1}) <= 2^-j`` (up to ``slack``); builds the tail
    rooftop envelopes ``v_j = P(u_j, ..., u_k)``, detecting stabilization of
    the piecewise-linear data in ``k``, and returns the last envelope as the
    candidate limit together with the distances ``d(u_j, candidate)``.
    """
    seq = list(seq)
    if len(seq) < 2:
        raise ValueError("need at least two profiles")
    for j in range(len(seq) - 1):
        dj = metric_d(seq[j], seq[j + 1], params)
        if dj > 2.0 ** (-j) + slack:
            raise ValueError(
                f"sequence is not fast Cauchy: d(u_{j}, u_{j+1}) = {dj:.3e} > 2^-{j}"
            )
    probe = np.linspace(
        min(b for g in seq for b in g.breakpoints or (-1.0,)) - 1.0, 0.0, 512
    )
    envelopes = []
    flags = []
    for j in range(len(seq)):
        env = seq[j]
        stab = j == len(seq) - 1  # nothing left to absorb for the last element
        for k in range(j + 1, len(seq)):
            nxt = rooftop_P(env, seq[k])
            if _sup_diff(env, nxt, probe) < 1e-10:
                stab = True
                env = nxt
                break
            env = nxt
        envelopes.append(env)
        flags.append(stab)
    stab = all(flags)
    candidate = envelopes[-1]
    distances = tuple(metric_d(u, candidate, params) for u in seq)
    # envelope tail must increase towards the candidate
    increasing = all(
        float(np.min(np.asarray(b.value(probe)) - np.asarray(a.value(probe)))) > -1e-10
        for a, b in zip(envelopes, envelopes[1:])
    )
    return CauchyReport(candidate, tuple(envelopes), distances, stab and increasing)


@dataclass(frozen=True)
class SegmentReport:
    """Energy along the affine segment ``t -> E_w((1-t) u + t v)``."""

    t: tuple
    values: tuple
    fprime: tuple  # closed form, integral (v - u) H_m(u_t)
    fsecond: tuple  # closed form, m * d/dslot of the mixed integral
    fd_prime: tuple  # centered differences of values
    fd_second: tuple  # centered second differences of values


def segment_report(
    u: RadialProfile,
    v: RadialProfile,
    w: RadialProfile,
    params: HessianParams,
    t_grid=None,
    fd_step: float = 1e-4,
) -> SegmentReport:
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.0, 21)
    t_grid = np.asarray(t_grid, dtype=float)
    m = params.m

    def f(t: float) -> float:
        return energy_Ew(combine(1.0 - t, u, t, v), w, params).value

    values, fprime, fsecond, fd_prime, fd_second = [], [], [], [], []
    for t in t_grid:
        ut = combine(1.0 - t, u, t, v)
        values.append(f(t))
        fprime.append(integrate(v, u, hessian_measure(ut, params)))
        if m == 1:
            mu_v = hessian_measure(v, params)
            mu_u = hessian_measure(u, params)
            fsecond.append(integrate(v, u, mu_v) - integrate(v, u, mu_u))
        else:
            mu_v = mixed_measure([v] + [ut] * (m - 1), params)
            mu_u = mixed_measure([u] + [ut] * (m - 1), params)
            fsecond.append(m * (integrate(v, u, mu_v) - integrate(v, u, mu_u)))
        h = fd_step
        f0 = values[-1]
        if t - h >= 0.0 and t + h <= 1.0:
            fl, fr = f(t - h), f(t + h)
            fd_prime.append((fr - fl) / (2.0 * h))
            fd_second.append((fr - 2.0 * f0 + fl) / h**2)
        else:
            sgn = 1.0 if t - h < 0.0 else -1.0
            f1, f2 = f(t + sgn * h), f(t + 2.0 * sgn * h)
            fd_prime.append(sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
            fd_second.append(math.nan)
    return SegmentReport(
        tuple(t_grid), tuple(values), tuple(fprime), tuple(fsecond),
        tuple(fd_prime), tuple(fd_second),
    )


@dataclass(frozen=True)
class ContactAtom:
    tau: float
    mass: float
    touches_u: bool
    touches_v: bool
    bound: float  # admissible mass from the touched profiles


def rooftop_contact_report(
    u: RadialProfile, v: RadialProfile, params: HessianParams, rel_tol: float = 1e-10
):
    """Per-atom minimum-principle check for ``H_m(P(u, v))``.

    Every atom of the envelope's Hessian measure must sit on a contact set
    and carry at most the mass the touched profiles carry there; ties are
    attributed to both profiles.
    """
    p = rooftop_P(u, v)
    mu_p = hessian_measure(p, params)
    scale = max(u.sup_norm, v.sup_norm, 1e-300)
    c = hessian_constant(params)
    rows = []
    for tau, mass in zip(mu_p.taus, mu_p.masses):
        pu = abs(p.value(tau) - u.value(tau)) <= rel_tol * scale
        pv = abs(p.value(tau) - v.value(tau)) <= rel_tol * scale
        bound = 0.0
        for g, touch in ((u, pu), (v, pv)):
            if touch:
                idx = [k for k, b in enumerate(g.breakpoints) if abs(b - tau) <= 1e-12]
                for k in idx:
                    bound += c * (g.slopes[k + 1] ** params.m - g.slopes[k] ** params.m)
        rows.append(ContactAtom(tau, mass, pu, pv, bound))
    return rows
