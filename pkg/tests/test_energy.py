import math

import numpy as np
import pytest

from hessmetric.energy import (
    aubin_I,
    capacity_ball,
    capacity_convergence_check,
    cauchy_limit,
    deviation_intervals,
    energy_Ew,
    metric_d,
    norm_energy_difference,
    rooftop_P,
    rooftop_contact_report,
    segment_report,
)
from hessmetric.hessian import e1_energy, hessian_constant, hessian_measure
from hessmetric.profiles import (
    HessianParams,
    combine,
    make_profile,
    max_profiles,
    scale,
    zero_profile,
)

from conftest import random_profile


def test_energy_zero_weight_identity(rng, params22):
    for _ in range(20):
        g = random_profile(rng, 2, 2)
        zero = zero_profile(2, 2)
        assert math.isclose(
            energy_Ew(g, zero, params22).value,
            -e1_energy(g, params22) / 3.0,
            rel_tol=1e-12,
        )


def test_energy_antisymmetry(rng, params22):
    u = random_profile(rng, 2, 2)
    w = random_profile(rng, 2, 2)
    assert math.isclose(
        energy_Ew(u, w, params22).value, -energy_Ew(w, u, params22).value, rel_tol=1e-10
    )
    assert energy_Ew(w, w, params22).value == 0.0


def test_energy_difference_formula(rng, params22):
    # E_w(u) - E_w(v) is weight independent and equals the mixed-term sum
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    w1, w2 = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    d1 = energy_Ew(u, w1, params22).value - energy_Ew(v, w1, params22).value
    d2 = energy_Ew(u, w2, params22).value - energy_Ew(v, w2, params22).value
    assert math.isclose(d1, d2, rel_tol=1e-10)


def test_aubin_I_nonnegative_and_symmetric(rng, params22):
    for _ in range(20):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        val = aubin_I(u, v, params22)
        assert val >= -1e-12
        assert math.isclose(val, aubin_I(v, u, params22), rel_tol=1e-10)
    assert abs(aubin_I(u, u, params22)) < 1e-12


def test_rooftop_is_convex_minorant_of_min(rng):
    for _ in range(30):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        p = rooftop_P(u, v)
        xs = np.linspace(-5.0, 0.0, 500)
        vals = np.asarray(p.value(xs))
        m = np.minimum(np.asarray(u.value(xs)), np.asarray(v.value(xs)))
        assert np.all(vals <= m + 1e-12)
        assert all(s2 >= s1 - 1e-12 for s1, s2 in zip(p.slopes, p.slopes[1:]))


def test_rooftop_of_ordered_pair_is_lower(rng):
    u = random_profile(rng, 2, 2)
    v = max_profiles(u, random_profile(rng, 2, 2))  # v >= u
    p = rooftop_P(u, v)
    xs = np.linspace(-5.0, 0.0, 300)
    assert np.allclose(np.asarray(p.value(xs)), np.asarray(u.value(xs)), atol=1e-12)


def test_metric_symmetry_exact(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    assert metric_d(u, v, params22) == metric_d(v, u, params22)


def test_metric_identity_of_indiscernibles(rng, params22):
    u = random_profile(rng, 2, 2)
    assert metric_d(u, u, params22) == 0.0
    v = random_profile(rng, 2, 2)
    if (u.breakpoints, u.slopes) != (v.breakpoints, v.slopes):
        assert metric_d(u, v, params22) > 0.0


def test_metric_triangle_inequality(rng, params22):
    for _ in range(50):
        u, v, w = (random_profile(rng, 2, 2) for _ in range(3))
        duv = metric_d(u, v, params22)
        dvw = metric_d(v, w, params22)
        duw = metric_d(u, w, params22)
        assert duw <= duv + dvw + 1e-9 * max(1.0, duv, dvw, duw)


def test_metric_pythagoras(rng, params22):
    for _ in range(20):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        p = rooftop_P(u, v)
        lhs = metric_d(u, v, params22)
        rhs = metric_d(u, p, params22) + metric_d(v, p, params22)
        assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-12)


def test_metric_sandwich(rng, params22):
    # u <= psi <= v  =>  d(u, v) = d(u, psi) + d(psi, v)
    for _ in range(20):
        a, b = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        u = rooftop_P(a, b)
        psi = a
        v = max_profiles(a, b)
        lhs = metric_d(u, v, params22)
        rhs = metric_d(u, psi, params22) + metric_d(psi, v, params22)
        assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-12)


def test_metric_distance_to_zero(rng, params22):
    # d(u, 0) = e1(u) / (m + 1)
    u = random_profile(rng, 2, 2)
    assert math.isclose(
        metric_d(u, zero_profile(2, 2), params22),
        e1_energy(u, params22) / 3.0,
        rel_tol=1e-12,
    )


def test_metric_energy_lower_bound(rng, params22):
    # -E_w(u) <= d(u, w)
    u, w = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    assert -energy_Ew(u, w, params22).value <= metric_d(u, w, params22) + 1e-12


def test_metric_weight_independence(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    w1, w2 = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    d0 = metric_d(u, v, params22)
    d1 = metric_d(u, v, params22, w1)
    d2 = metric_d(u, v, params22, w2)
    assert math.isclose(d0, d1, rel_tol=1e-9)
    assert math.isclose(d1, d2, rel_tol=1e-9)


def test_rooftop_contraction(rng, params22):
    # d(P(u, psi), P(v, psi)) <= d(u, v)
    for _ in range(20):
        u, v, psi = (random_profile(rng, 2, 2) for _ in range(3))
        lhs = metric_d(rooftop_P(u, psi), rooftop_P(v, psi), params22)
        assert lhs <= metric_d(u, v, params22) + 1e-10


def test_max_rooftop_inequality(rng, params22):
    # d(max(u, v), u) >= d(v, P(u, v))
    for _ in range(20):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        lhs = metric_d(max_profiles(u, v), u, params22)
        rhs = metric_d(v, rooftop_P(u, v), params22)
        assert lhs >= rhs - 1e-10


def test_norm_energy_difference(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    report = norm_energy_difference(u, v, params22)
    assert math.isclose(report.energy, e1_energy(combine(1.0, u, 1.0, v), params22))
    assert math.isclose(report.norm, report.energy ** (1.0 / 3.0))


def test_segment_concavity_and_derivatives(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    w = random_profile(rng, 2, 2)
    report = segment_report(u, v, w, params22)
    scale_f = max(1.0, max(abs(x) for x in report.values))
    for f2 in report.fsecond:
        assert f2 <= 1e-8 * scale_f
    for fp, fd in zip(report.fprime, report.fd_prime):
        assert math.isclose(fp, fd, rel_tol=1e-4, abs_tol=1e-6 * scale_f)
    # endpoint consistency: f(1) - f(0) = E_w(v) - E_w(u)
    assert math.isclose(
        report.values[-1] - report.values[0],
        energy_Ew(v, w, params22).value - energy_Ew(u, w, params22).value,
        rel_tol=1e-9,
        abs_tol=1e-12,
    )


def test_capacity_ball_monotone(params22):
    caps = [capacity_ball(r, params22) for r in (0.2, 0.4, 0.6, 0.8)]
    assert all(c2 > c1 for c1, c2 in zip(caps, caps[1:]))
    with pytest.raises(ValueError):
        capacity_ball(1.5, params22)


def test_capacity_ball_extremal_profile(params22):
    # the capacity of a ball is the total Hessian mass of its extremal kink
    r = 0.3
    from hessmetric.profiles import tau_of_radius

    tau = tau_of_radius(r, 2, 2)
    g = make_profile(2, 2, [tau], [0.0, 1.0 / (-tau)])
    assert math.isclose(
        capacity_ball(r, params22), sum(hessian_measure(g, params22).masses), rel_tol=1e-12
    )


def test_deviation_intervals():
    u = make_profile(2, 2, [-2.0], [0.0, 1.0])
    v = zero_profile(2, 2)
    ivs = deviation_intervals(u, v, 0.5)
    # |u| > 0.5 exactly on tau < -0.5
    assert len(ivs) == 1
    lo, hi = ivs[0]
    assert lo == -math.inf and math.isclose(hi, -0.5)
    assert deviation_intervals(u, v, 3.0) == []


def test_capacity_convergence_rows(params22):
    seq = [make_profile(2, 2, [-1.0 / j], [0.0, 1.0]) for j in range(1, 6)]
    rows = capacity_convergence_check(seq, zero_profile(2, 2), params22, eps=0.05)
    caps = [r.cap_bound for r in rows]
    assert all(c2 <= c1 + 1e-12 for c1, c2 in zip(caps, caps[1:]))


def test_cauchy_limit_of_geometric_sequence(params22):
    # u_j = max(tau, -1 - 2^-j): d(u_j, u_{j+1}) ~ 2^-j, limit max(tau, -1)
    seq = [make_profile(2, 2, [-1.0 - 2.0**-j], [0.0, 0.2]) for j in range(1, 12)]
    report = cauchy_limit(seq, params22)
    assert report.stabilized
    limit = make_profile(2, 2, [-1.0], [0.0, 0.2])
    xs = np.linspace(-3.0, 0.0, 200)
    assert np.allclose(
        np.asarray(report.candidate.value(xs)), np.asarray(limit.value(xs)), atol=1e-2
    )
    assert report.distances[-1] < report.distances[0]


def test_minimum_principle_atoms(rng, params22):
    for _ in range(20):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        for atom in rooftop_contact_report(u, v, params22):
            assert atom.touches_u or atom.touches_v
            assert atom.mass <= atom.bound + 1e-9 * max(u.sup_norm, v.sup_norm, 1.0)


def test_hessian_constant_consistency(params22):
    assert hessian_constant(params22) == (2.0 * math.pi) ** 2
