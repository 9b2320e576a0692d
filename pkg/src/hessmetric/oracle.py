"""Finite-difference grid oracle for radial Hessian quantities.

Everything in this module recomputes quantities from dense radial samples,
independently of the exact atomic calculus, so the two implementations can
cross-validate each other.

For a radial function ``u(z) = f(s)``, ``s = |z|``, the complex Hessian has
the tangential eigenvalue ``mu_t = f'(s) / (2 s)`` with multiplicity
``n - 1`` and the radial eigenvalue ``mu_r = (f''(s) + f'(s)/s) / 4``.  The
degree-``m`` Hessian density is proportional to

    binom(n-1, m) mu_t^m + binom(n-1, m-1) mu_t^(m-1) mu_r

times ``m! (n-m)! / n!``; the remaining dimensional factor is calibrated
once per ``n`` against the exact total mass ``(2 pi)^n`` of the unit kink
``max(ln s, a)`` at degree ``m = n``.  Profile kinks are mollified with a
C^2 bump over a fixed number of grid cells before differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .profiles import (
    RadialProfile,
    HessianParams,
    legendre,
    dual_affine_combination,
    legendre_inverse,
    tau_of_radius,
)

__all__ = [
    "RadialGrid",
    "make_grid",
    "sample_profile",
    "hessian_density_fd",
    "oracle_total_mass",
    "oracle_e1",
    "oracle_energy",
    "oracle_aubin_I",
    "oracle_metric_d",
    "oracle_l1_distance",
    "measure_hessian_constant",
    "perron_geodesic",
    "PerronResult",
]

GRID_FLOOR = 1e-6
DEFAULT_RESOLUTION = 4096
MOLLIFY_CELLS = 8


@dataclass(frozen=True)
class RadialGrid:
    """Log-spaced radius grid on ``[floor, 1]`` for dimension ``n``."""

    n: int
    s: np.ndarray
    x: np.ndarray  # ln s, uniform

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])


def make_grid(n: int, resolution: int = DEFAULT_RESOLUTION, floor: float = GRID_FLOOR) -> RadialGrid:
    if resolution < 64:
        raise ValueError("grid resolution too small")
    x = np.linspace(math.log(floor), 0.0, resolution)
    return RadialGrid(n, np.exp(x), x)


def sample_profile(g: RadialProfile, grid: RadialGrid) -> np.ndarray:
    """Dense samples ``f_i = g(tau_q(s_i))`` of the model function."""
    if g.n != grid.n:
        raise ValueError("profile dimension does not match grid")
    tau = tau_of_radius(grid.s, g.n, g.q)
    return np.asarray(g.value(tau), dtype=float)


def _bump_kernel(cells: int) -> np.ndarray:
    r = np.arange(-cells, cells + 1, dtype=float) / (cells + 0.5)
    k = (1.0 - r**2) ** 3
    return k / k.sum()


def mollify(values: np.ndarray, cells: int = MOLLIFY_CELLS) -> np.ndarray:
    """C^2 bump mollification in index space, linear extrapolation at edges."""
    if cells <= 0:
        return values.copy()
    k = _bump_kernel(cells)
    pad_l = values[0] + (values[0] - values[1]) * np.arange(cells, 0, -1)
    pad_r = values[-1] + (values[-1] - values[-2]) * np.arange(1, cells + 1)
    padded = np.concatenate([pad_l, values, pad_r])
    return np.convolve(padded, k, mode="valid")


def _derivatives(f: np.ndarray, grid: RadialGrid, cells: int):
    fm = mollify(f, cells)
    fx = np.gradient(fm, grid.dx)
    fxx = np.gradient(fx, grid.dx)
    return fx, fxx


@lru_cache(maxsize=None)
def _calibration(n: int, resolution: int, cells: int) -> float:
    """Dimensional factor fixed by the ``m = n`` unit-kink anchor ``(2 pi)^n``."""
    grid = make_grid(n, resolution)
    f = np.maximum(grid.x, -1.0)
    raw = _raw_mass_integral(f, grid, HessianParams(n, n), cells)
    return (2.0 * math.pi) ** n / raw


def _density_from_derivatives(fx, fxx, grid: RadialGrid, params: HessianParams) -> np.ndarray:
    """Unnormalized degree-m density integrand against ``dx`` (without calibration)."""
    n, m = params.n, params.m
    s2 = grid.s**2
    mu_t = fx / (2.0 * s2)
    mu_r = fxx / (4.0 * s2)
    dens = math.comb(n - 1, m) * mu_t**m
    dens = dens + math.comb(n - 1, m - 1) * mu_t ** (m - 1) * mu_r
    # measure element: density * s^(2n-1) ds = density * s^(2n) dx
    return dens * grid.s ** (2 * n)


def _raw_mass_integral(f: np.ndarray, grid: RadialGrid, params: HessianParams, cells: int) -> float:
    fx, fxx = _derivatives(f, grid, cells)
    integrand = _density_from_derivatives(fx, fxx, grid, params)
    return float(np.trapezoid(integrand, dx=grid.dx))


def hessian_density_fd(
    f: np.ndarray,
    grid: RadialGrid,
    params: HessianParams,
    cells: int = MOLLIFY_CELLS,
    negative_floor: float = 1e-8,
) -> np.ndarray:
    """Calibrated Hessian mass density against ``dx`` (``mass = trapz(out, dx)``).

    Raises if the density is negative beyond round-off floor, which signals
    an input outside the admissible (m-subharmonic) class.
    """
    fx, fxx = _derivatives(f, grid, cells)
    scale_coef = _calibration(grid.n, grid.s.size, cells) * _symmetry_factor(params)
    dens = scale_coef * _density_from_derivatives(fx, fxx, grid, params)
    total = float(np.trapezoid(np.abs(dens), dx=grid.dx))
    if dens.min() < -negative_floor * max(total, 1e-300):
        raise ArithmeticError(
            f"negative Hessian density ({dens.min():.3e}); input is not in the "
            "admissible class for this coordinate/degree"
        )
    return dens


def _symmetry_factor(params: HessianParams) -> float:
    n, m = params.n, params.m
    return math.factorial(m) * math.factorial(n - m) / math.factorial(n)


def _richardson_cells(quadrature, cells: int) -> float:
    """Cancel the error term linear in the mollifier width (see
    :func:`measure_hessian_constant`): ``2 A(cells) - A(2 cells)``."""
    return 2.0 * quadrature(cells) - quadrature(2 * cells)


def _richardson_resolution(quadrature, resolution: int) -> float:
    """Cancel the remaining error term linear in the cell size."""
    return 2.0 * quadrature(resolution) - quadrature(resolution // 2)


def oracle_total_mass(
    g: RadialProfile, params: HessianParams, resolution: int = DEFAULT_RESOLUTION,
    cells: int = MOLLIFY_CELLS,
) -> float:
    grid = make_grid(params.n, resolution)
    f = sample_profile(g, grid)

    def at_cells(c: int) -> float:
        scale_coef = _calibration(grid.n, resolution, c) * _symmetry_factor(params)
        return scale_coef * _raw_mass_integral(f, grid, params, c)

    return _richardson_cells(at_cells, cells)


def measure_hessian_constant(
    n: int, m: int, resolution: int = 8192, cells: int = MOLLIFY_CELLS
) -> float:
    """Measure ``c_{n,m}``: total mass of the unit-slope kink ``max(tau_m, -1)``.

    The leading discretization error of the mollified-kink quadrature is
    linear in the mollifier width and in the cell size, so the measurement
    is Richardson-extrapolated in both (width ``cells`` vs ``2*cells``,
    resolution ``resolution/2`` vs ``resolution``).
    """
    params = HessianParams(n, m)

    def at_resolution(res: int) -> float:
        grid = make_grid(n, res)
        tau = tau_of_radius(grid.s, n, m)
        f = np.maximum(tau, -1.0)

        def at_cells(c: int) -> float:
            scale_coef = _calibration(n, res, c) * _symmetry_factor(params)
            return scale_coef * _raw_mass_integral(f, grid, params, c)

        return 2.0 * at_cells(cells) - at_cells(2 * cells)

    return 2.0 * at_resolution(resolution) - at_resolution(resolution // 2)


# ---------------------------------------------------------------------------
# mixed densities by polarization of grid samples


def _mixed_density(
    derivs, counts, grid: RadialGrid, params: HessianParams, cells: int
) -> np.ndarray:
    """Density of the mixed measure with ``counts[i]`` copies of input ``i``.

    ``derivs`` is a list of ``(fx, fxx)`` pairs; mollification and
    differentiation are linear, so linear combinations are formed on the
    derivative arrays directly.
    """
    m = params.m
    if sum(counts) != m:
        raise ValueError("factor multiplicities must add up to m")
    scale_coef = _calibration(grid.n, grid.s.size, cells) * _symmetry_factor(params)
    acc = np.zeros_like(grid.s)
    for mults in product(*(range(c + 1) for c in counts)):
        r = sum(mults)
        if r == 0:
            continue
        coef = (-1) ** (m - r)
        for c, a in zip(counts, mults):
            coef *= math.comb(c, a)
        fx = sum(a * d[0] for a, d in zip(mults, derivs))
        fxx = sum(a * d[1] for a, d in zip(mults, derivs))
        acc = acc + coef * _density_from_derivatives(fx, fxx, grid, params)
    return scale_coef * acc / math.factorial(m)


def oracle_energy(
    u: RadialProfile,
    w: RadialProfile,
    params: HessianParams,
    resolution: int = DEFAULT_RESOLUTION,
    cells: int = MOLLIFY_CELLS,
) -> float:
    """Grid quadrature of the weighted energy functional E_w(u)."""

    def at_resolution(res: int) -> float:
        grid = make_grid(params.n, res)
        fu = sample_profile(u, grid)
        fw = sample_profile(w, grid)
        diff = fu - fw

        def at_cells(c: int) -> float:
            du = _derivatives(fu, grid, c)
            dw = _derivatives(fw, grid, c)
            total = 0.0
            for j in range(params.m + 1):
                dens = _mixed_density([du, dw], (j, params.m - j), grid, params, c)
                total += float(np.trapezoid(diff * dens, dx=grid.dx))
            return total / (params.m + 1)

        return _richardson_cells(at_cells, cells)

    return _richardson_resolution(at_resolution, resolution)


def oracle_e1(
    g: RadialProfile, params: HessianParams, resolution: int = DEFAULT_RESOLUTION,
    cells: int = MOLLIFY_CELLS,
) -> float:
    def at_resolution(res: int) -> float:
        grid = make_grid(params.n, res)
        f = sample_profile(g, grid)

        def at_cells(c: int) -> float:
            dens = hessian_density_fd(f, grid, params, c)
            return float(np.trapezoid(-f * dens, dx=grid.dx))

        return _richardson_cells(at_cells, cells)

    return _richardson_resolution(at_resolution, resolution)


def oracle_aubin_I(
    u: RadialProfile, v: RadialProfile, params: HessianParams,
    resolution: int = DEFAULT_RESOLUTION, cells: int = MOLLIFY_CELLS,
) -> float:
    def at_resolution(res: int) -> float:
        grid = make_grid(params.n, res)
        fu = sample_profile(u, grid)
        fv = sample_profile(v, grid)

        def at_cells(c: int) -> float:
            du = hessian_density_fd(fu, grid, params, c)
            dv = hessian_density_fd(fv, grid, params, c)
            return float(np.trapezoid((fu - fv) * (dv - du), dx=grid.dx))

        return _richardson_cells(at_cells, cells)

    return _richardson_resolution(at_resolution, resolution)


def _convex_minorant_samples(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Greatest convex minorant of samples ``(x, y)``, evaluated at ``x``."""
    hull_x = [x[0]]
    hull_y = [y[0]]
    for xi, yi in zip(x[1:], y[1:]):
        while len(hull_x) >= 2:
            s1 = (hull_y[-1] - hull_y[-2]) / (hull_x[-1] - hull_x[-2])
            s2 = (yi - hull_y[-1]) / (xi - hull_x[-1])
            if s2 < s1:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(xi)
        hull_y.append(yi)
    return np.interp(x, hull_x, hull_y)


def oracle_metric_d(
    u: RadialProfile,
    v: RadialProfile,
    params: HessianParams,
    w: RadialProfile | None = None,
    resolution: int = DEFAULT_RESOLUTION,
    cells: int = MOLLIFY_CELLS,
) -> float:
    """Grid counterpart of the energy metric, with a grid rooftop envelope."""
    from .profiles import zero_profile

    if w is None:
        w = zero_profile(params.n, params.m)

    def at_resolution(res: int) -> float:
        grid = make_grid(params.n, res)
        tau = tau_of_radius(grid.s, params.n, params.m)
        fu = sample_profile(u, grid)
        fv = sample_profile(v, grid)
        fp = _convex_minorant_samples(tau, np.minimum(fu, fv))
        fw = sample_profile(w, grid)

        def at_cells(c: int) -> float:
            dw = _derivatives(fw, grid, c)
            out = 0.0
            for f, coef in ((fu, 1.0), (fv, 1.0), (fp, -2.0)):
                df = _derivatives(f, grid, c)
                term = 0.0
                for j in range(params.m + 1):
                    dens = _mixed_density([df, dw], (j, params.m - j), grid, params, c)
                    term += float(np.trapezoid((f - fw) * dens, dx=grid.dx))
                out += coef * term / (params.m + 1)
            return out

        return _richardson_cells(at_cells, cells)

    return _richardson_resolution(at_resolution, resolution)


def oracle_l1_distance(
    u: RadialProfile, v: RadialProfile, params: HessianParams,
    resolution: int = DEFAULT_RESOLUTION,
) -> float:
    """L1 distance of the model functions over the ball (2n-volume element)."""
    grid = make_grid(params.n, resolution)
    fu = sample_profile(u, grid)
    fv = sample_profile(v, grid)
    area = 2.0 * math.pi ** params.n / math.factorial(params.n - 1)
    integrand = np.abs(fu - fv) * grid.s ** (2 * params.n)  # extra s from ds = s dx
    return area * float(np.trapezoid(integrand, dx=grid.dx))


# ---------------------------------------------------------------------------
# Perron-style geodesic oracle


@dataclass
class PerronResult:
    tau: np.ndarray
    t: np.ndarray
    psi: np.ndarray  # shape (len(t), len(tau))
    sweeps: int
    final_change: float

    def slice(self, i: int) -> np.ndarray:
        return self.psi[i]


_line_index_cache: dict = {}


def _grid_lines(shape: tuple, dtau: int, dt: int) -> list:
    """Index arrays for every grid line with direction (dtau, dt), cached."""
    key = (shape, dtau, dt)
    if key in _line_index_cache:
        return _line_index_cache[key]
    nt, nx = shape
    lines = []
    # a cell starts a line when stepping backwards would leave the grid
    for i0 in range(nt):
        for j0 in range(nx):
            if 0 <= i0 - dt < nt and 0 <= j0 - dtau < nx:
                continue
            idx_i, idx_j = [], []
            i, j = i0, j0
            while 0 <= i < nt and 0 <= j < nx:
                idx_i.append(i)
                idx_j.append(j)
                i += dt
                j += dtau
            if len(idx_i) >= 3:
                lines.append((np.array(idx_i), np.array(idx_j)))
    _line_index_cache[key] = lines
    return lines


def _convexify_lines(psi: np.ndarray, dtau: int, dt: int) -> None:
    """In-place 1D convexification of every grid line with direction (dtau, dt)."""
    nt, nx = psi.shape
    if dt == 0:
        for i in range(nt):
            psi[i, :] = _convex_minorant_samples(np.arange(nx, dtype=float), psi[i, :])
        return
    if dtau == 0:
        for j in range(nx):
            psi[:, j] = _convex_minorant_samples(np.arange(nt, dtype=float), psi[:, j])
        return
    for idx_i, idx_j in _grid_lines(psi.shape, dtau, dt):
        line = psi[idx_i, idx_j]
        psi[idx_i, idx_j] = _convex_minorant_samples(
            np.arange(idx_i.size, dtype=float), line
        )


def perron_geodesic(
    u0: RadialProfile,
    u1: RadialProfile,
    tau_nodes: int = 512,
    t_nodes: int = 64,
    tol: float = 1e-7,
    max_sweeps: int = 2000,
) -> PerronResult:
    """Upper-envelope sweep for the segment between two profiles.

    Starting from the largest admissible initial guess, alternately enforces
    the boundary data and convexity along grid lines (rows, columns and a
    fan of diagonals) on the ``(tau, t)`` plane until the sup-change per
    sweep drops below ``tol``.
    """
    u0.require_same_coordinate(u1)
    if not (u0.bounded and u1.bounded):
        raise ValueError("perron_geodesic requires bounded profiles")
    lo = min([b for b in u0.breakpoints + u1.breakpoints] or [-1.0]) - 1.0
    tau = np.linspace(lo, 0.0, tau_nodes)
    t = np.linspace(0.0, 1.0, t_nodes)
    g0 = np.asarray(u0.value(tau))
    g1 = np.asarray(u1.value(tau))
    psi = np.zeros((t_nodes, tau_nodes))
    psi[0, :] = g0
    psi[-1, :] = g1
    # deep-end column: both profiles are flat there, the segment is linear
    psi[:, 0] = (1.0 - t) * g0[0] + t * g1[0]
    psi[1:-1, 1:] = 0.0
    directions = [(1, 0), (0, 1)]
    # dense fan of rational slopes: kink lines travel at arbitrary speeds in
    # the (tau, t) plane, so coarse fans leave wedges of slack
    for q in range(1, 9):
        for p in range(1, 9):
            if math.gcd(p, q) == 1:
                directions += [(p, q), (-p, q)]
    for k in (16, 32):
        directions += [(k, 1), (-k, 1)]
    change = math.inf
    sweeps = 0
    while change > tol and sweeps < max_sweeps:
        prev = psi.copy()
        for dtau, dt in directions:
            _convexify_lines(psi, dtau, dt)
            psi[0, :] = g0
            psi[-1, :] = g1
            psi[:, 0] = (1.0 - t) * g0[0] + t * g1[0]
            psi[:, -1] = 0.0
        change = float(np.max(np.abs(psi - prev)))
        sweeps += 1
    return PerronResult(tau, t, psi, sweeps, change)
