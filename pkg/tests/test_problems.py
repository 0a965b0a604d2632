import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from lowmach.core import GridSpec, ModelParams
from lowmach.problems import (
    StationaryVortexParams, TravelingVortexParams, exact_traveling_vortex, init_stationary_vortex,
    init_traveling_vortex, init_well_prepared, k_profile, make_initial_state, swirl_integral,
    swirl_speed, well_prepared_fields,
)

K_PI = -2.0 + 0.125 + 0.75 * math.pi**2


def test_k_profile_values():
    assert k_profile(0.0) == 2.125
    assert k_profile(math.pi) == pytest.approx(5.5272033, abs=1e-7)
    assert k_profile(math.pi) == pytest.approx(K_PI, rel=1e-15)


def test_k_profile_derivative(rng):
    r = rng.uniform(0.1, 3.0, 20)
    h = 1e-5
    fd = (k_profile(r + h) - k_profile(r - h)) / (2 * h)
    assert np.allclose(fd, r * (1 + np.cos(r)) ** 2, rtol=1e-8, atol=1e-9)


def test_traveling_vortex_support_and_center():
    g = GridSpec.square(41)
    p = TravelingVortexParams(eta=0.3)
    s = init_traveling_vortex(g, p)
    x, y = g.centers()
    outside = 4 * math.pi * np.hypot(x - 0.5, y - 0.5) > math.pi
    assert np.all(s.rho[outside] == 1.0)
    assert np.allclose(s.q[outside], [0.6, 0.0])
    c = (20, 20)  # cell centre at (0.5, 0.5)
    assert np.allclose(s.q[c] / s.rho[c], [0.6, 0.0])
    assert s.drho[c] == pytest.approx((1.5 * 0.3 / (4 * math.pi)) ** 2 * (2.125 - K_PI), rel=1e-14)


def test_eta_relations():
    assert TravelingVortexParams.for_epsilon(0.1).eta == pytest.approx(0.1 / math.sqrt(2))
    assert TravelingVortexParams.for_epsilon(0.1, "paper").eta == pytest.approx(0.1 * math.sqrt(110) / 0.6)
    with pytest.raises(ValueError):
        TravelingVortexParams.for_epsilon(0.1, "other")
    with pytest.raises(ValueError):
        TravelingVortexParams(Gamma=-1.0)


def test_exact_solution_shift_and_period():
    g = GridSpec.square(50)
    p = TravelingVortexParams(eta=0.5)
    s0 = init_traveling_vortex(g, p)
    assert np.array_equal(exact_traveling_vortex(0.0, g, p).q, s0.q)
    assert np.allclose(exact_traveling_vortex(1 / 0.6, g, p).q, s0.q, atol=1e-13)
    # 0.6 * 0.1 = 0.06 = 3 cells on a 50-cell grid.
    s = exact_traveling_vortex(0.1, g, p)
    assert np.allclose(s.q, np.roll(s0.q, 3, axis=0), atol=1e-13)


def test_traveling_vortex_radial_balance_converges():
    # Co-moving steadiness for gamma = 2 and eta = eps/sqrt(2):
    # grad(p)/eps^2 = rho * u_theta^2 / r in the radial direction.
    eps = 0.1
    p = TravelingVortexParams.for_epsilon(eps)
    res = []
    for n in (40, 80, 160):
        g = GridSpec.square(n)
        s = init_traveling_vortex(g, p)
        x, y = g.centers()
        dx, dy = x - 0.5, y - 0.5
        r = np.hypot(dx, dy)
        press = s.rho**2
        gp = [(np.roll(press, -1, m) - np.roll(press, 1, m)) / (2 * g.dx[m] * eps**2) for m in range(2)]
        u = s.q / s.rho[..., None]
        ut2 = (u[..., 0] - 0.6) ** 2 + u[..., 1] ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            cent = np.where(r > 0, s.rho * ut2 / r, 0.0)
            er = [np.where(r > 0, dx / r, 0.0), np.where(r > 0, dy / r, 0.0)]
        resid = np.hypot(gp[0] - cent * er[0], gp[1] - cent * er[1])
        res.append(math.sqrt(np.sum(resid**2) * g.cell_volume))
    rates = np.log2(np.array(res[:-1]) / res[1:])
    assert np.all(rates > 1.8)


def test_stationary_vortex_params():
    p = StationaryVortexParams()
    assert p.a1 == pytest.approx(0.5) and p.a2 == pytest.approx(0.2) and p.a3 == pytest.approx(-0.5)
    assert p.a2 + p.a3 * p.r2 == pytest.approx(0.0, abs=1e-16)
    assert float(swirl_speed(p.r1)) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        StationaryVortexParams(r1=0.5, r2=0.4)


@pytest.mark.parametrize("r", [0.05, 0.2, 0.3, 0.4, 0.7])
def test_swirl_integral_quadrature(r):
    p = StationaryVortexParams()
    ref, _ = quad(lambda s: float(swirl_speed(s, p)) ** 2 / s, 0.0, r, points=[0.2, 0.4],
                  epsabs=1e-14, epsrel=1e-12, limit=200)
    assert float(swirl_integral(r, p)) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_stationary_vortex_fields():
    g = GridSpec.square(64)
    model = ModelParams(0.1)
    s = init_stationary_vortex(g, model)
    x, y = g.centers()
    r = np.hypot(x - 0.5, y - 0.5)
    out = r >= 0.4
    assert np.all(s.q[out] == 0.0)
    assert np.ptp(s.drho[out]) == 0.0
    assert s.drho[out][0] == pytest.approx(0.5 * 0.01 * float(swirl_integral(0.4)), rel=1e-14)
    assert np.all(np.isfinite(s.q))


def test_stationary_vortex_warns_off_gamma_two():
    with pytest.warns(UserWarning):
        init_stationary_vortex(GridSpec.square(8), ModelParams(0.1, 1.4))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        init_stationary_vortex(GridSpec.square(8), ModelParams(0.1, 2.0))


def test_well_prepared_structure():
    g = GridSpec.square(32)
    x, y = g.centers()
    drho, u = well_prepared_fields(x, y, 0.0)
    assert np.all(drho == 0.0)
    s1 = init_well_prepared(g, ModelParams(1e-3))
    s2 = init_well_prepared(g, ModelParams(1e-1))
    assert np.ptp(s1.drho) == pytest.approx(1e-4 * np.ptp(s2.drho), rel=1e-12)
    with pytest.raises(ValueError):
        init_well_prepared(GridSpec((8,)), ModelParams(0.1))
    with pytest.raises(ValueError):
        init_well_prepared(g, ModelParams(0.1), mode="shear")


def test_well_prepared_leading_velocity_divergence_free():
    for n in (32, 64):
        g = GridSpec.square(n)
        x, y = g.centers()
        _, u0 = well_prepared_fields(x, y, 0.0)
        div = sum((np.roll(u0[m], -1, m) - np.roll(u0[m], 1, m)) / (2 * g.dx[m]) for m in range(2))
        assert np.max(np.abs(div)) <= 10 * g.dx[0] ** 2
    # Analytic divergence by central differences with a tiny step.
    h = 1e-6
    xs, ys = np.random.default_rng(3).uniform(0, 1, (2, 50))
    fx = lambda a, b: well_prepared_fields(a, b, 0.0)[1][0]
    fy = lambda a, b: well_prepared_fields(a, b, 0.0)[1][1]
    d = (fx(xs + h, ys) - fx(xs - h, ys) + fy(xs, ys + h) - fy(xs, ys - h)) / (2 * h)
    assert np.max(np.abs(d)) < 1e-8


@given(st.sampled_from(["traveling_vortex", "stationary_vortex", "well_prepared"]))
def test_initial_fields_periodic(problem):
    # Cell values at x and x + 1 coincide: evaluate on a grid shifted by one period.
    g = GridSpec.square(16)
    g1 = GridSpec((16, 16), origin=(1.0, 1.0))
    s = make_initial_state(problem, g, ModelParams(0.1))
    if problem == "well_prepared":
        s1 = make_initial_state(problem, g1, ModelParams(0.1))
        assert np.allclose(s.q, s1.q, atol=1e-12) and np.allclose(s.drho, s1.drho, atol=1e-15)
    else:
        # Compactly supported: the boundary ring is at the background state.
        assert np.ptp(s.drho[0]) == 0.0 and np.ptp(s.drho[:, 0]) == 0.0


def test_mass_independent_of_eps_at_fixed_eta():
    g = GridSpec.square(32)
    p = TravelingVortexParams(eta=0.2)
    m = [init_traveling_vortex(g, p, ModelParams(e)).rho.sum() for e in (1e-1, 1e-4)]
    assert m[0] == m[1]


def test_unknown_problem():
    with pytest.raises(ValueError):
        make_initial_state("sod", GridSpec.square(8), ModelParams(0.1))
