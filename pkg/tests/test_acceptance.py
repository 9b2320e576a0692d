"""Acceptance gate: one pass/fail line per criterion.

Criterion 7 is split in two lines: the equal-degree clause and the
subcritical-degree clause are independent claims with different tolerances,
and the subcritical clause is reported honestly even when it fails.
"""

import math
import time

import numpy as np

from hessmetric.energy import (
    capacity_convergence_check,
    energy_Ew,
    metric_d,
    rooftop_P,
    rooftop_contact_report,
    segment_report,
)
from hessmetric.envelope import envelope_via_hte
from hessmetric.geodesic import (
    geodesic_audit,
    geodesic_contraction_check,
    geodesic_eval,
    weak_geodesic,
)
from hessmetric.hessian import e1_energy, hessian_measure, integrate, mixed_measure
from hessmetric.oracle import (
    measure_hessian_constant,
    oracle_aubin_I,
    oracle_e1,
    oracle_energy,
    oracle_l1_distance,
    oracle_metric_d,
    oracle_total_mass,
    perron_geodesic,
)
from hessmetric.energy import aubin_I
from hessmetric.profiles import (
    HessianParams,
    combine,
    make_profile,
    max_profiles,
    zero_profile,
)
from hessmetric.scenarios import (
    reproduce_cap_example,
    reproduce_intro_norm,
    reproduce_topology_ex1,
    reproduce_topology_ex2,
)

from conftest import random_profile

P22 = HessianParams(2, 2)


def _verdict(label: str, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {label}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    assert ok, f"CRITERION {label}: {detail}"


def test_criterion_1_intro_norm():
    start = time.perf_counter()
    rows = reproduce_intro_norm(n_values=(2, 3), pairs=20, seed=0)
    elapsed = time.perf_counter() - start
    worst = max(r.rel_err for r in rows)
    ok = all(r.passed for r in rows) and worst < 1e-9 and elapsed < 1.0
    _verdict("1", ok, f"{len(rows)} pairs, worst rel_err {worst:.2e}, {elapsed:.3f} s")


def test_criterion_2_capacity_example():
    rows = reproduce_cap_example(n=2, jmax=50)
    d_rows = [r for r in rows if r.quantity.startswith("d(")]
    cap_rows = [r for r in rows if not r.quantity.startswith("d(")]
    worst_d = max(r.rel_err for r in d_rows)
    ok = (
        len(d_rows) == 50
        and worst_d < 1e-9
        and all(r.passed for r in rows)
    )
    _verdict(
        "2",
        ok,
        f"50 distances constant, worst rel_err {worst_d:.2e}; "
        f"{len(cap_rows)} capacity rows all passed",
    )


def test_criterion_3_topology_incomparability():
    rows1 = reproduce_topology_ex1(t_values=[1, 2, 5, 10, 50, 100, 500, 1000])
    rows2 = reproduce_topology_ex2(jmax=50)
    worst1 = max(r.rel_err for r in rows1 if r.quantity.startswith("d("))
    ok = worst1 < 1e-9 and all(r.passed for r in rows1 + rows2)
    _verdict(
        "3",
        ok,
        f"closed form worst rel_err {worst1:.2e}; growth/constant-norm rows and "
        f"monotone convergence rows all passed",
    )


def test_criterion_4_metric_axioms():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    zero = zero_profile(2, 2)
    triangle_violations = 0
    sym_exact = True
    indiscernible = True
    worst_prop = 0.0
    worst_weight = 0.0
    for k in range(1000):
        u, v, w = (random_profile(rng, 2, 2) for _ in range(3))
        duv = metric_d(u, v, P22)
        dvw = metric_d(v, w, P22)
        duw = metric_d(u, w, P22)
        scale = max(1.0, duv, dvw, duw)
        if duw > duv + dvw + 1e-9 * scale:
            triangle_violations += 1
        sym_exact &= duv == metric_d(v, u, P22)
        indiscernible &= metric_d(u, u, P22) == 0.0
        if (u.breakpoints, u.slopes) != (v.breakpoints, v.slopes):
            indiscernible &= duv > 0.0
        if k % 5 == 0:  # identity subsuite: 200 instances
            p = rooftop_P(u, v)
            # sandwich: P(u, v) <= u <= max(u, v)
            top = max_profiles(u, v)
            lhs = metric_d(p, top, P22)
            rhs = metric_d(p, u, P22) + metric_d(u, top, P22)
            worst_prop = max(worst_prop, abs(lhs - rhs) / max(lhs, 1e-12))
            # Pythagoras through the rooftop envelope
            rhs = metric_d(u, p, P22) + metric_d(v, p, P22)
            worst_prop = max(worst_prop, abs(duv - rhs) / max(duv, 1e-12))
            # distance to the zero profile
            d0 = metric_d(u, zero, P22)
            worst_prop = max(
                worst_prop, abs(d0 - e1_energy(u, P22) / 3.0) / max(d0, 1e-12)
            )
            worst_weight = max(
                worst_weight, abs(metric_d(u, v, P22, w) - duv) / max(duv, 1e-12)
            )
    elapsed = time.perf_counter() - start
    ok = (
        triangle_violations == 0
        and sym_exact
        and indiscernible
        and worst_prop < 1e-9
        and worst_weight < 1e-9
        and elapsed < 30.0
    )
    _verdict(
        "4",
        ok,
        f"1000 triples, 0 triangle violations expected ({triangle_violations} seen), "
        f"symmetry exact={sym_exact}, identities worst {worst_prop:.2e}, "
        f"weight dev {worst_weight:.2e}, {elapsed:.1f} s",
    )


def test_criterion_5_envelope_agreement():
    rng = np.random.default_rng(5)
    worst = 0.0
    worst_atom = 0.0
    for _ in range(200):
        u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        scale = max(1.0, u.sup_norm, v.sup_norm)
        hull = rooftop_P(u, v)
        # raises if the iterates lose monotonicity in j or cross min(u, v)
        result = envelope_via_hte(u, v, P22)
        lo = min(b for g in (u, v) for b in g.breakpoints) - 1.0
        probe = np.linspace(lo, 0.0, 400)
        gap = float(
            np.max(
                np.abs(
                    np.asarray(hull.value(probe)) - np.asarray(result.profile.value(probe))
                )
            )
        )
        worst = max(worst, gap / scale)
        for atom in rooftop_contact_report(u, v, P22):
            worst_atom = max(worst_atom, (atom.mass - atom.bound) / scale)
    ok = worst <= 1e-6 and worst_atom <= 1e-9
    _verdict(
        "5",
        ok,
        f"200 pairs, hull-vs-multiplier-family sup gap {worst:.2e} (tol 1e-6), "
        f"atom mass excess {worst_atom:.2e}",
    )


def test_criterion_6_energy_calculus():
    rng = np.random.default_rng(6)
    worst_f2 = -math.inf
    worst_fd = 0.0
    worst_id = 0.0
    slack_violation = 0.0
    zero = zero_profile(2, 2)
    for k in range(200):
        u, v, w = (random_profile(rng, 2, 2) for _ in range(3))
        if k < 50:  # segment derivative subsuite
            report = segment_report(u, v, w, P22)
            scale_f = max(1.0, max(abs(x) for x in report.values))
            worst_f2 = max(worst_f2, max(x for x in report.fsecond) / scale_f)
            for fp, fd in zip(report.fprime, report.fd_prime):
                worst_fd = max(worst_fd, abs(fp - fd) / max(abs(fp), 1e-6 * scale_f))
        ew_u = energy_Ew(u, w, P22).value
        ew_v = energy_Ew(v, w, P22).value
        diff = ew_u - ew_v
        scale = max(1.0, abs(ew_u), abs(ew_v))
        # difference equals the symmetric mixed-term sum
        total = sum(
            integrate(u, v, mixed_measure([u] * j + [v] * (P22.m - j), P22))
            for j in range(P22.m + 1)
        )
        worst_id = max(worst_id, abs(diff - total / (P22.m + 1)) / scale)
        # two-sided integral bounds on the difference
        lo = integrate(u, v, hessian_measure(u, P22))
        hi = integrate(u, v, hessian_measure(v, P22))
        slack_violation = max(slack_violation, (lo - diff) / scale, (diff - hi) / scale)
        # ordered-pair bounds
        top = max_profiles(u, v)
        diff_o = energy_Ew(top, w, P22).value - energy_Ew(v, w, P22).value
        hi_o = integrate(top, v, hessian_measure(v, P22))
        slack_violation = max(
            slack_violation,
            (hi_o / (P22.m + 1) - diff_o) / scale,
            (diff_o - hi_o) / scale,
        )
        # absolute bound by the energy of the sum
        bound = e1_energy(combine(1.0, u, 1.0, w), P22) / (P22.m + 1)
        slack_violation = max(slack_violation, (abs(ew_u) - bound) / scale)
        # antisymmetry and the zero-weight reduction
        worst_id = max(worst_id, abs(ew_u + energy_Ew(w, u, P22).value) / scale)
        worst_id = max(worst_id, abs(energy_Ew(w, w, P22).value) / scale)
        worst_id = max(
            worst_id,
            abs(energy_Ew(u, zero, P22).value + e1_energy(u, P22) / 3.0) / scale,
        )
    ok = (
        worst_f2 <= 1e-8
        and worst_fd < 1e-4
        and worst_id < 1e-9
        and slack_violation < 1e-9
    )
    _verdict(
        "6",
        ok,
        f"segment f'' max {worst_f2:.2e} (<= 1e-8), f' FD dev {worst_fd:.2e} (< 1e-4), "
        f"identities {worst_id:.2e}, bound excess {slack_violation:.2e} on 200 instances",
    )


def test_criterion_7_equal_degrees():
    rng = np.random.default_rng(7)
    t_grid = np.linspace(0.0, 1.0, 21)
    worst_lin = worst_met = 0.0
    worst_bp = 0.0
    worst_contract = 0.0
    for _ in range(10):
        u0, u1 = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
        g = weak_geodesic(u0, u1, P22)
        audit = geodesic_audit(g, t_samples=t_grid)
        worst_lin = max(worst_lin, audit.linearity_dev)
        worst_met = max(worst_met, audit.metric_dev)
        scale = max(1.0, u0.sup_norm, u1.sup_norm)
        worst_bp = max(worst_bp, -audit.lower_bound_gap / scale)
        gb = weak_geodesic(random_profile(rng, 2, 2), random_profile(rng, 2, 2), P22)
        for _, actual, bound in geodesic_contraction_check(g, gb):
            worst_contract = max(worst_contract, (actual - bound) / max(bound, 1e-12))
    # sup distance to the sweep-based grid construction
    u0 = make_profile(2, 2, [-1.0], [0.0, 1.0])
    u1 = make_profile(2, 2, [-0.4], [0.0, 1.0])
    g = weak_geodesic(u0, u1, P22)
    result = perron_geodesic(u0, u1, tau_nodes=512, t_nodes=64)
    worst_perron = 0.0
    for i, t in enumerate(result.t):
        ref = np.asarray(geodesic_eval(g, float(t)).value(result.tau))
        worst_perron = max(worst_perron, float(np.max(np.abs(result.psi[i] - ref))))
    ok = (
        worst_lin <= 1e-8
        and worst_met <= 1e-8
        and worst_bp <= 1e-9
        and worst_contract <= 1e-9
        and worst_perron <= 5e-3
    )
    _verdict(
        "7 (equal degrees)",
        ok,
        f"linearity {worst_lin:.2e}, metric {worst_met:.2e} (<= 1e-8 on 21-point grid), "
        f"endpoint bound excess {worst_bp:.2e}, contraction excess {worst_contract:.2e}, "
        f"sweep-oracle sup distance {worst_perron:.2e} (<= 5e-3 at 512x64)",
    )


def test_criterion_7_subcritical_degree():
    # honest failure: the dual-affine interpolation in the constrained
    # coordinate is not energy-linear when m < n, and the deviation is
    # intrinsic (it does not shrink with resolution); see decisions ledger.
    params = HessianParams(2, 1)
    u0 = make_profile(2, 2, [-1.0], [0.0, 0.5])
    u1 = make_profile(2, 2, [-0.5], [0.0, 1.0])
    devs = []
    for resolution in (1024, 2048, 4096):
        g = weak_geodesic(u0, u1, params, resolution=resolution)
        audit = geodesic_audit(g, resolution=resolution)
        devs.append(max(audit.linearity_dev, audit.metric_dev))
    shrinks = all(b < a for a, b in zip(devs, devs[1:]))
    ok = devs[1] <= 1e-4 and shrinks
    _verdict(
        "7 (subcritical degree)",
        ok,
        f"deviation {devs[1]:.4f} at resolution 2048 (target <= 1e-4), "
        f"resolution sweep {[f'{d:.4f}' for d in devs]}, monotone shrink={shrinks}",
    )


def test_criterion_8_oracle_consistency():
    rng = np.random.default_rng(8)
    w = random_profile(rng, 2, 2)
    worst = 0.0
    for _ in range(50):
        u = random_profile(rng, 2, 2)
        v = random_profile(rng, 2, 2)
        pairs = [
            (sum(hessian_measure(u, P22).masses), oracle_total_mass(u, P22, 4096)),
            (e1_energy(u, P22), oracle_e1(u, P22, 4096)),
            (energy_Ew(u, w, P22).value, oracle_energy(u, w, P22, 4096)),
            (aubin_I(u, v, P22), oracle_aubin_I(u, v, P22, 4096)),
            (metric_d(u, v, P22), oracle_metric_d(u, v, P22, resolution=4096)),
        ]
        for exact, approx in pairs:
            worst = max(worst, abs(approx - exact) / max(abs(exact), 1e-9))
    stable = 0.0
    for n, m in ((2, 1), (3, 2)):
        a = measure_hessian_constant(n, m, resolution=4096)
        b = measure_hessian_constant(n, m, resolution=8192)
        stable = max(stable, abs(a - b) / abs(b))
    ok = worst < 1e-2 and stable < 3e-3
    _verdict(
        "8",
        ok,
        f"50 profiles, worst quadrature rel dev {worst:.2e} (< 1e-2 at 4096 nodes), "
        f"constant stability {stable:.2e} (< 3e-3)",
    )


def test_criterion_9_convergence_characterization():
    zero = zero_profile(2, 2)
    # convergent family: kinks decreasing to a limit kink
    seq = [make_profile(2, 2, [-1.0 - 2.0**-j], [0.0, 1.0]) for j in range(1, 13)]
    limit = make_profile(2, 2, [-1.0], [0.0, 1.0])
    d_last = metric_d(seq[-1], limit, P22)
    l1_last = oracle_l1_distance(seq[-1], limit, P22)
    e_limit = energy_Ew(limit, zero, P22).value
    e_gap_first = abs(energy_Ew(seq[0], zero, P22).value - e_limit)
    e_gap = abs(energy_Ew(seq[-1], zero, P22).value - e_limit)
    d_first = metric_d(seq[0], limit, P22)
    conv_ok = (
        d_last < 1e-2 * d_first
        and l1_last < 1e-2 * oracle_l1_distance(seq[0], limit, P22)
        and e_gap < 1e-2 * e_gap_first
    )
    # capacity family: L1 converges, energy does not, so d must not converge
    caps_seq = []
    for j in (1, 10, 50, 1000):
        slope = math.sqrt(float(j))
        caps_seq.append(make_profile(2, 2, [(-1.0 / j) / slope], [0.0, slope]))
    d_vals = [metric_d(u, zero, P22) for u in caps_seq]
    l1_vals = [oracle_l1_distance(u, zero, P22) for u in caps_seq]
    e_vals = [energy_Ew(u, zero, P22).value for u in caps_seq]
    target = (2.0 * math.pi) ** 2 / 3.0
    caps = [
        r.cap_bound
        for r in capacity_convergence_check(caps_seq, zero, P22, eps=0.02)
    ]
    cap_ok = (
        all(abs(d - target) / target < 1e-9 for d in d_vals)  # d does NOT converge
        and all(b < a for a, b in zip(l1_vals, l1_vals[1:]))  # but L1 does
        and l1_vals[-1] < 1e-2 * l1_vals[0]
        and abs(e_vals[-1] - e_vals[0]) < 1e-9  # because the energy stays put
        and caps[-1] < 1e-3 * caps[0]  # capacity converges regardless
    )
    ok = conv_ok and cap_ok
    _verdict(
        "9",
        ok,
        f"monotone family: d {d_first:.2e}->{d_last:.2e}, L1->0, "
        f"energy gap {e_gap_first:.1e}->{e_gap:.1e}; "
        f"capacity family: d constant {d_vals[-1]:.4f}, L1 {l1_vals[0]:.1e}->{l1_vals[-1]:.1e}, "
        f"capacity bound {caps[0]:.2e}->{caps[-1]:.2e}",
    )
