import math

import numpy as np
import pytest

from hessmetric.energy import energy_Ew, metric_d
from hessmetric.hessian import e1_energy, hessian_constant, hessian_measure
from hessmetric.oracle import (
    hessian_density_fd,
    make_grid,
    measure_hessian_constant,
    oracle_aubin_I,
    oracle_e1,
    oracle_energy,
    oracle_l1_distance,
    oracle_metric_d,
    oracle_total_mass,
    sample_profile,
)
from hessmetric.energy import aubin_I
from hessmetric.profiles import HessianParams, make_profile, zero_profile

from conftest import random_profile

RESOLUTION = 4096


def test_total_mass_matches_atoms(rng, params22):
    for _ in range(10):
        g = random_profile(rng, 2, 2)
        exact = sum(hessian_measure(g, params22).masses)
        approx = oracle_total_mass(g, params22, RESOLUTION)
        assert abs(approx - exact) / exact < 1e-2


def test_oracle_e1(rng, params22):
    for _ in range(5):
        g = random_profile(rng, 2, 2)
        exact = e1_energy(g, params22)
        approx = oracle_e1(g, params22, RESOLUTION)
        assert abs(approx - exact) / exact < 1e-2


def test_oracle_energy_weighted(rng, params22):
    u = random_profile(rng, 2, 2)
    w = random_profile(rng, 2, 2)
    exact = energy_Ew(u, w, params22).value
    approx = oracle_energy(u, w, params22, RESOLUTION)
    assert abs(approx - exact) / max(abs(exact), 1e-12) < 1e-2


def test_oracle_aubin(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    exact = aubin_I(u, v, params22)
    approx = oracle_aubin_I(u, v, params22, RESOLUTION)
    assert abs(approx - exact) / max(exact, 1e-12) < 1e-2


def test_oracle_metric(rng, params22):
    u, v = random_profile(rng, 2, 2), random_profile(rng, 2, 2)
    exact = metric_d(u, v, params22)
    approx = oracle_metric_d(u, v, params22, resolution=RESOLUTION)
    assert abs(approx - exact) / max(exact, 1e-12) < 1e-2


def test_constant_measurement_matches_exact_case():
    # the oracle's measurement pipeline reproduces the exact m = n constant
    measured = measure_hessian_constant(2, 2, resolution=4096)
    exact = (2.0 * math.pi) ** 2
    assert abs(measured - exact) / exact < 3e-3


def test_constant_measurement_stability():
    for n, m in ((2, 1), (3, 2)):
        a = measure_hessian_constant(n, m, resolution=4096)
        b = measure_hessian_constant(n, m, resolution=8192)
        assert abs(a - b) / abs(b) < 3e-3


def test_density_flags_nonconvex_input(params22):
    grid = make_grid(2, 1024)
    # concave-in-x sample: not a valid profile, density must be flagged
    f = -np.abs(grid.x + 2.0)
    with pytest.raises(ArithmeticError, match="admissible"):
        hessian_density_fd(f, grid, params22)


def test_l1_distance_of_equal_profiles(rng, params22):
    g = random_profile(rng, 2, 2)
    assert oracle_l1_distance(g, g, params22, RESOLUTION) == 0.0
    h = make_profile(2, 2, [-1.0], [0.0, 1.0])
    assert oracle_l1_distance(g, h, params22, RESOLUTION) >= 0.0


def test_l1_distance_scales_with_gap(params22):
    base = make_profile(2, 2, [-1.0], [0.0, 1.0])
    near = make_profile(2, 2, [-1.01], [0.0, 1.0])
    far = make_profile(2, 2, [-2.0], [0.0, 1.0])
    d_near = oracle_l1_distance(base, near, params22, RESOLUTION)
    d_far = oracle_l1_distance(base, far, params22, RESOLUTION)
    assert 0.0 < d_near < d_far


def test_sample_profile_matches_values(params22):
    g = make_profile(2, 2, [-1.0], [0.0, 1.0])
    grid = make_grid(2, 512)
    f = sample_profile(g, grid)
    assert np.allclose(f, np.maximum(grid.x, -1.0))
