"""Radial profiles: piecewise-linear convex model functions on the unit ball.

A radial model function on the unit ball is represented by its profile
``g`` in a radial coordinate ``tau_q``:

* ``q = n``:   ``tau = ln s``
* ``q < n``:   ``tau = 1 - s**(2 - 2n/q)``

Both coordinates are strictly increasing in the radius ``s`` with
``tau(1) = 0`` and ``tau -> -inf`` as ``s -> 0``.  A profile is a convex,
nondecreasing, piecewise-linear function ``g(tau)`` on ``(-inf, 0]``
anchored at ``g(0) = 0``.  It is stored as breakpoints
``tau_1 < ... < tau_K <= 0`` and slopes ``sigma_0 <= ... <= sigma_K``
where ``sigma_i`` is the slope on ``(tau_i, tau_{i+1})`` (``sigma_0`` on
the unbounded left tail, ``sigma_K`` on ``(tau_K, 0]``).

``sigma_0 = 0`` makes the profile bounded; a positive left-tail slope
corresponds to a function unbounded at the origin and is rejected unless
explicitly allowed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CoordinateError",
    "ConvexityError",
    "HessianParams",
    "RadialProfile",
    "DualProfile",
    "tau_of_radius",
    "radius_of_tau",
    "make_profile",
    "zero_profile",
    "combine",
    "scale",
    "max_profiles",
    "merged_nodes",
    "legendre",
    "legendre_inverse",
    "dual_affine_combination",
    "reparameterize",
    "profile_to_dict",
    "profile_from_dict",
    "profile_to_json",
    "profile_from_json",
]


class CoordinateError(ValueError):
    """Mixing of incompatible radial coordinates, or an invalid coordinate."""


class ConvexityError(ValueError):
    """Input data does not describe a convex nondecreasing profile."""


@dataclass(frozen=True)
class HessianParams:
    """Dimension pair for the degree-``m`` Hessian calculus in ``C^n``."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise ValueError("n and m must be integers")
        if not (1 <= self.m <= self.n):
            raise ValueError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")


def _check_coordinate(n: int, q: int) -> None:
    if not (isinstance(n, (int, np.integer)) and isinstance(q, (int, np.integer))):
        raise CoordinateError("coordinate indices must be integers")
    if not (1 <= q <= n):
        raise CoordinateError(f"need 1 <= q <= n, got n={n}, q={q}")


def tau_of_radius(s, n: int, q: int):
    """Radial coordinate ``tau_q(s)`` for radius ``s`` in ``(0, 1]``."""
    _check_coordinate(n, q)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0) or np.any(s > 1.0):
        raise ValueError("radius must lie in (0, 1]")
    if q == n:
        out = np.log(s)
    else:
        out = 1.0 - s ** (2.0 - 2.0 * n / q)
    return out if out.ndim else float(out)


def radius_of_tau(tau, n: int, q: int):
    """Inverse of :func:`tau_of_radius` on ``(-inf, 0]``."""
    _check_coordinate(n, q)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau > 0.0):
        raise ValueError("tau must lie in (-inf, 0]")
    if q == n:
        out = np.exp(tau)
    else:
        out = (1.0 - tau) ** (1.0 / (2.0 - 2.0 * n / q))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-linear convex nondecreasing profile ``g(tau)`` with ``g(0) = 0``."""

    n: int
    q: int
    breakpoints: tuple
    slopes: tuple

    @cached_property
    def values(self) -> np.ndarray:
        """Values ``g(tau_k)`` at the breakpoints (derived from ``g(0) = 0``)."""
        bp = np.asarray(self.breakpoints, dtype=float)
        sl = np.asarray(self.slopes, dtype=float)
        if bp.size == 0:
            return np.zeros(0)
        # accumulate from the anchor at tau = 0 leftwards
        vals = np.empty(bp.size)
        acc = 0.0
        for k in range(bp.size - 1, -1, -1):
            right = 0.0 if k == bp.size - 1 else bp[k + 1]
            acc -= sl[k + 1] * (right - bp[k])
            vals[k] = acc
        return vals

    @property
    def bounded(self) -> bool:
        return self.slopes[0] == 0.0

    @property
    def min_value(self) -> float:
        """``g(-inf)`` (``-inf`` if the left tail has positive slope)."""
        if not self.bounded:
            return -math.inf
        return float(self.values[0]) if self.breakpoints else 0.0

    @property
    def sup_norm(self) -> float:
        """Sup norm of the model function (profiles are <= 0)."""
        return -self.min_value

    def value(self, tau):
        """Evaluate ``g`` at ``tau`` (scalar or array), ``tau <= 0``."""
        tau = np.asarray(tau, dtype=float)
        if np.any(tau > 1e-12):
            raise ValueError("profile domain is (-inf, 0]")
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.size == 0:
            out = self.slopes[0] * np.minimum(tau, 0.0)
        else:
            x = np.append(bp, 0.0)
            y = np.append(self.values, 0.0)
            out = np.interp(np.minimum(tau, 0.0), x, y)
            left = tau < bp[0]
            if np.any(left):
                out = np.where(left, self.values[0] + self.slopes[0] * (tau - bp[0]), out)
        return out if out.ndim else float(out)

    def slope_at(self, tau: float) -> float:
        """Right slope of ``g`` at ``tau``."""
        idx = int(np.searchsorted(np.asarray(self.breakpoints), tau, side="right"))
        return float(self.slopes[idx])

    def same_coordinate(self, other: "RadialProfile") -> bool:
        return self.n == other.n and self.q == other.q

    def require_same_coordinate(self, other: "RadialProfile") -> None:
        if not self.same_coordinate(other):
            raise CoordinateError(
                f"coordinate mismatch: (n={self.n}, q={self.q}) vs (n={other.n}, q={other.q})"
            )


def make_profile(
    n: int,
    q: int,
    breakpoints: Sequence[float],
    slopes: Sequence[float],
    *,
    allow_unbounded: bool = False,
) -> RadialProfile:
    """Validate and canonicalize profile data.

    Rejects non-monotone breakpoints, breakpoints above 0, decreasing or
    negative slopes, a slope count different from ``len(breakpoints) + 1``,
    and a positive left-tail slope unless ``allow_unbounded`` is set.
    Breakpoints with zero slope jump are dropped.
    """
    _check_coordinate(n, q)
    bp = [float(b) for b in breakpoints]
    sl = [float(s) for s in slopes]
    if len(sl) != len(bp) + 1:
        raise ConvexityError("need exactly len(breakpoints) + 1 slopes")
    if any(not math.isfinite(v) for v in bp + sl):
        raise ConvexityError("breakpoints and slopes must be finite")
    if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
        raise ConvexityError("breakpoints must be strictly increasing")
    if any(b > 0.0 for b in bp):
        raise ConvexityError("breakpoints must be <= 0")
    if any(s2 < s1 for s1, s2 in zip(sl, sl[1:])):
        raise ConvexityError("slopes must be nondecreasing (profile not convex)")
    if sl[0] < 0.0:
        raise ConvexityError("slopes must be nonnegative (profile not nondecreasing)")
    if sl[0] > 0.0 and not allow_unbounded:
        raise ConvexityError(
            "positive left-tail slope gives infinite energy; pass allow_unbounded=True"
        )
    # canonical form: drop breakpoints without an actual slope jump, and a
    # breakpoint sitting exactly on the domain boundary tau = 0
    if bp and bp[-1] == 0.0:
        bp = bp[:-1]
        sl = sl[:-1]
    keep_bp, keep_sl = [], [sl[0]]
    for k, b in enumerate(bp):
        if sl[k + 1] != keep_sl[-1]:
            keep_bp.append(b)
            keep_sl.append(sl[k + 1])
    return RadialProfile(int(n), int(q), tuple(keep_bp), tuple(keep_sl))


def zero_profile(n: int, q: int) -> RadialProfile:
    return RadialProfile(int(n), int(q), (), (0.0,))


def combine(a: float, u: RadialProfile, b: float, v: RadialProfile) -> RadialProfile:
    """Conic combination ``a*u + b*v`` with ``a, b >= 0``."""
    if a < 0.0 or b < 0.0:
        raise ValueError("combination coefficients must be nonnegative")
    u.require_same_coordinate(v)
    bp = sorted(set(u.breakpoints) | set(v.breakpoints))
    sl = [a * u.slopes[0] + b * v.slopes[0]]
    for t in bp:
        sl.append(a * u.slope_at(t) + b * v.slope_at(t))
    return make_profile(u.n, u.q, bp, sl, allow_unbounded=True)


def scale(t: float, u: RadialProfile) -> RadialProfile:
    return combine(t, u, 0.0, zero_profile(u.n, u.q))


def merged_nodes(u: RadialProfile, v: RadialProfile) -> list:
    """Breakpoints of both profiles plus graph crossing points, sorted."""
    u.require_same_coordinate(v)
    knots = sorted(set(u.breakpoints) | set(v.breakpoints))
    nodes = list(knots)
    segs = list(zip([None] + knots, knots + [0.0]))
    for left, right in segs:
        if left is None:
            continue  # difference is linear on the tail; crossings there have
            # the same sign pattern as at the first knot (flat tails)
        du_l = u.value(left) - v.value(left)
        du_r = u.value(right) - v.value(right)
        if du_l * du_r < 0.0:
            t = left + (right - left) * du_l / (du_l - du_r)
            nodes.append(t)
    return sorted(set(nodes))


def max_profiles(u: RadialProfile, v: RadialProfile) -> RadialProfile:
    """Pointwise maximum of two profiles (convex, piecewise linear)."""
    u.require_same_coordinate(v)
    nodes = [t for t in merged_nodes(u, v) if t < 0.0]
    vals = [max(u.value(t), v.value(t)) for t in nodes]
    sl0 = max(u.slopes[0], v.slopes[0]) if not nodes else (
        u.slopes[0] if u.value(nodes[0]) >= v.value(nodes[0]) else v.slopes[0]
    )
    slopes = [sl0]
    prev_t, prev_v = None, None
    for t, w in zip(nodes, vals):
        if prev_t is not None:
            slopes.append((w - prev_v) / (t - prev_t))
        prev_t, prev_v = t, w
    if nodes:
        slopes.append((0.0 - vals[-1]) / (0.0 - nodes[-1]))
    # roundoff can leave micro-violations of monotonicity at crossing nodes
    slopes = np.maximum.accumulate(np.asarray(slopes))
    return make_profile(u.n, u.q, nodes, slopes, allow_unbounded=True)


@dataclass(frozen=True)
class DualProfile:
    """Legendre conjugate ``g*(p) = sup_{tau<=0} (p*tau - g(tau))``.

    Piecewise linear on the slope interval ``[p_min, p_max]``; ``knots`` are
    increasing, ``vals`` are the conjugate values at the knots, and the
    chord slopes (which equal breakpoints of ``g``) are nonpositive and
    nondecreasing.
    """

    n: int
    q: int
    knots: tuple
    vals: tuple

    @property
    def p_max(self) -> float:
        return self.knots[-1]

    def value(self, p):
        p = np.asarray(p, dtype=float)
        out = np.interp(p, np.asarray(self.knots), np.asarray(self.vals))
        return out if out.ndim else float(out)

    def extended(self, p_max: float) -> "DualProfile":
        """Extend by the exact tail ``g* = 0`` on ``[self.p_max, p_max]``."""
        if p_max < self.p_max:
            raise ValueError("can only extend the domain")
        if p_max == self.p_max:
            return self
        return DualProfile(self.n, self.q, self.knots + (float(p_max),), self.vals + (0.0,))


def legendre(g: RadialProfile) -> DualProfile:
    """Legendre conjugate of a profile, on its slope interval."""
    bp = list(g.breakpoints)
    sl = list(g.slopes)
    vals = list(g.values)
    if not bp:
        return DualProfile(g.n, g.q, (sl[0],), (0.0,))
    knots = [sl[0]]
    kvals = [sl[0] * bp[0] - vals[0]]
    for j in range(1, len(sl)):
        knots.append(sl[j])
        kvals.append(sl[j] * bp[j - 1] - vals[j - 1])
    return DualProfile(g.n, g.q, tuple(knots), tuple(kvals))


def legendre_inverse(h: DualProfile) -> RadialProfile:
    """Inverse transform ``g(tau) = sup_p (p*tau - g*(p))``.

    Exact involution on profiles: ``legendre_inverse(legendre(g)) == g``.
    """
    knots = list(h.knots)
    vals = list(h.vals)
    if len(knots) == 1:
        if abs(vals[0]) > 0.0:
            raise ConvexityError("dual of a breakpoint-free profile must vanish")
        return make_profile(h.n, h.q, (), (knots[0],), allow_unbounded=knots[0] > 0)
    chords = [
        (v2 - v1) / (p2 - p1)
        for (p1, v1), (p2, v2) in zip(zip(knots, vals), zip(knots[1:], vals[1:]))
    ]
    if any(c > 1e-12 for c in chords):
        raise ConvexityError("dual profile must be nonincreasing")
    if any(c2 + 1e-12 < c1 for c1, c2 in zip(chords, chords[1:])):
        raise ConvexityError("dual profile must be convex")
    if abs(vals[-1]) > 1e-12 * max(1.0, max(abs(v) for v in vals)):
        raise ConvexityError("dual must vanish at its right endpoint (anchor g(0)=0)")
    breakpoints = [min(c, 0.0) for c in chords]
    slopes = knots  # slope between dual knots j-1, j is active on tau in (chord_{j-1}, chord_j)
    # dedupe coincident chords (kinks of g* with no planar piece in between)
    bp_out, sl_out = [], [slopes[0]]
    for c, p in zip(breakpoints, slopes[1:]):
        if bp_out and c <= bp_out[-1] + 1e-15:
            sl_out[-1] = p
            continue
        if c >= 0.0:
            # supporting slope reached only at the anchor; later knots are inactive
            break
        bp_out.append(c)
        sl_out.append(p)
    return make_profile(h.n, h.q, bp_out, sl_out, allow_unbounded=sl_out[0] > 0)


def dual_affine_combination(d0: DualProfile, d1: DualProfile, t: float) -> DualProfile:
    """``(1-t) d0 + t d1`` on the union of knots, after zero-tail extension."""
    if d0.n != d1.n or d0.q != d1.q:
        raise CoordinateError("dual profiles from different coordinates")
    if d0.knots[0] != 0.0 or d1.knots[0] != 0.0:
        raise ConvexityError("dual interpolation requires bounded profiles")
    p_max = max(d0.p_max, d1.p_max)
    e0, e1 = d0.extended(p_max), d1.extended(p_max)
    knots = sorted(set(e0.knots) | set(e1.knots))
    vals = [(1.0 - t) * e0.value(p) + t * e1.value(p) for p in knots]
    return DualProfile(d0.n, d0.q, tuple(knots), tuple(vals))


def reparameterize(
    g: RadialProfile, q_to: int, resolution: int = 2048
) -> RadialProfile:
    """Transport a profile to another radial coordinate of the same ``n``.

    The underlying model function on the ball is unchanged; the result is a
    piecewise-linear refit (chords at ``resolution`` log-spaced radii plus
    the images of the original breakpoints).  Raises :class:`ConvexityError`
    when the transported function is not convex in the target coordinate,
    i.e. the function does not belong to the target class.  Convexity
    violations below ``1e-9`` (relative) are treated as roundoff and
    repaired.
    """
    _check_coordinate(g.n, q_to)
    if q_to == g.q:
        return g
    if resolution < 8:
        raise ValueError("resolution too small")
    if not g.breakpoints:
        if g.slopes[0] == 0.0:
            return zero_profile(g.n, q_to)
        raise ConvexityError("cannot transport an unbounded pure-slope profile exactly")
    if not g.bounded:
        raise ConvexityError("reparameterize requires a bounded profile")
    s_bp = radius_of_tau(np.asarray(g.breakpoints), g.n, g.q)
    s_lo = float(s_bp[0])
    s_nodes = np.unique(
        np.concatenate([np.geomspace(s_lo, 1.0, resolution), np.atleast_1d(s_bp)])
    )
    tau_new = tau_of_radius(s_nodes, g.n, q_to)
    tau_old = tau_of_radius(s_nodes, g.n, g.q)
    vals = np.asarray(g.value(tau_old), dtype=float)
    # drop nodes that collapse in the target coordinate
    keep = np.concatenate([[True], np.diff(tau_new) > 1e-13])
    tau_new, vals = tau_new[keep], vals[keep]
    slopes = np.diff(vals) / np.diff(tau_new)
    slopes = np.concatenate([[0.0], slopes])  # flat left tail below first breakpoint
    fixed = np.maximum.accumulate(slopes)
    scale_ = max(1.0, float(np.max(np.abs(slopes))))
    if np.max(fixed - slopes) > 1e-9 * scale_:
        raise ConvexityError(
            f"function is not convex in coordinate q={q_to} (not {q_to}-subharmonic)"
        )
    return make_profile(g.n, q_to, tau_new[:-1], fixed)


# ---------------------------------------------------------------------------
# serialization


def profile_to_dict(g: RadialProfile) -> dict:
    return {
        "coordinate": {"n": g.n, "q": g.q},
        "breakpoints": list(g.breakpoints),
        "slopes": list(g.slopes),
    }


def profile_from_dict(d: dict) -> RadialProfile:
    try:
        coord = d["coordinate"]
        return make_profile(
            int(coord["n"]),
            int(coord["q"]),
            d["breakpoints"],
            d["slopes"],
            allow_unbounded=bool(d.get("allow_unbounded", False)),
        )
    except KeyError as exc:
        raise ValueError(f"missing profile field: {exc}") from exc


def profile_to_json(g: RadialProfile) -> str:
    return json.dumps(profile_to_dict(g))


def profile_from_json(text: str) -> RadialProfile:
    return profile_from_dict(json.loads(text))
