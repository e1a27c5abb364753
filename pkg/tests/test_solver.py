from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from dgdiff.basis import gauss_legendre, legendre_vandermonde
from dgdiff.fourier import RKScheme, max_dtau_scan
from dgdiff.schemes import SchemeConfig, assemble_stencil
from dgdiff.solver import (
    RK4,
    SSP_RK3,
    BlowUpError,
    DGField,
    GridSpec,
    burgers_rhs_array,
    convection_rhs_array,
    field_energy,
    get_tableau,
    heat_rhs_array,
    integrate,
    l2_project,
    rk_step_array,
    rusanov_flux,
    sample_continuous,
    time_step,
)


def test_grid_validation():
    g = GridSpec(0.0, 2.0, 8)
    assert g.h == 0.25 and g.length == 2.0
    np.testing.assert_allclose(g.centers[[0, -1]], [0.125, 1.875])
    with pytest.raises(ValueError):
        GridSpec(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        GridSpec(1.0, 1.0, 4)


def test_field_shape_check():
    with pytest.raises(ValueError):
        DGField(np.zeros((3, 2)), GridSpec(0, 1, 4))


def test_tableau_lookup():
    assert get_tableau("SSP-RK3") is SSP_RK3
    assert get_tableau(RKScheme(4)) is RK4
    assert get_tableau(2).stages == 2
    with pytest.raises(ValueError):
        get_tableau("RK9")


def test_rk_step_zero_rhs_and_bad_dt():
    u = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(rk_step_array(u, np.zeros_like, 0.1, RK4), u)
    with pytest.raises(ValueError):
        rk_step_array(u, np.zeros_like, 0.0, RK4)


def test_rk4_scalar_polynomial():
    lam, dt = -1.3, 0.2
    z = lam * dt
    got = rk_step_array(np.array([2.0]), lambda u: lam * u, dt, RK4)[0]
    assert got == pytest.approx(2.0 * (1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24), rel=1e-14)


def test_linear_step_equals_stability_polynomial():
    cfg = SchemeConfig("SIPG_BR2", 2, 1.0)
    op = assemble_stencil(cfg)
    rng = np.random.default_rng(3)
    u = rng.standard_normal((10, 3))
    h, gamma, dt = 0.1, 1.0, 2e-4

    def rhs(v):
        return heat_rhs_array(v, op, gamma, h)

    # sum of z^m/m! applied through repeated rhs calls
    term, expected = u, u.copy()
    for m in range(1, 4):
        term = dt * rhs(term) / m
        expected = expected + term
    got = rk_step_array(u, rhs, dt, SSP_RK3)
    np.testing.assert_allclose(got, expected, rtol=1e-13, atol=1e-13 * np.abs(u).max())


def test_blowup_reports_stage():
    with pytest.raises(BlowUpError) as info:
        rk_step_array(np.array([1.0]), lambda u: 1e12 * u, 1.0, RK4)
    assert info.value.stage >= 1


def test_field_energy_examples():
    grid = GridSpec(0.0, 1.0, 16)
    one = l2_project(lambda x: np.ones_like(x), grid, 2)
    assert field_energy(one) == pytest.approx(1.0, abs=1e-14)
    sine = l2_project(lambda x: np.sin(2 * np.pi * x), GridSpec(0, 1, 40), 4)
    assert abs(field_energy(sine) - 1 / math.sqrt(2)) < 1e-6
    grid = GridSpec(0, 1, 6)
    cos = l2_project(lambda x: np.cos(2 * np.pi * 3 * x), grid, 2)
    sin = l2_project(lambda x: np.sin(2 * np.pi * 3 * x), grid, 2)
    assert math.hypot(field_energy(cos), field_energy(sin)) == pytest.approx(0.9962, abs=5e-5)


def test_heat_rhs_constant_and_linearity():
    op = assemble_stencil(SchemeConfig("LDG", 3, 0.0))
    const = np.zeros((8, 4))
    const[:, 0] = -1.5
    assert np.abs(heat_rhs_array(const, op, 0.1, 0.2)).max() < 1e-10
    grid = GridSpec(0, 1, 8)
    f = l2_project(lambda x: np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x), grid, 3)
    rhs = lambda u: heat_rhs_array(u, op, 0.01, grid.h)  # noqa: E731
    a = integrate(f, rhs, SSP_RK3, 1e-3, 0.05).coeffs
    b = integrate(f.with_coeffs(2.5 * f.coeffs), rhs, SSP_RK3, 1e-3, 0.05).coeffs
    np.testing.assert_allclose(b, 2.5 * a, rtol=1e-12, atol=1e-14)


def test_integrate_lands_on_end_time_and_callbacks():
    grid = GridSpec(0, 1, 5)
    f = l2_project(lambda x: np.sin(2 * np.pi * x), grid, 1)
    steps = []
    out = integrate(f, np.zeros_like, SSP_RK3, 0.03, 0.1, callback=lambda s, g: steps.append((s, g.time)))
    assert out.time == 0.1
    assert [s for s, _ in steps] == [1, 2, 3, 4]
    assert steps[-1][1] == 0.1
    out = integrate(f, np.zeros_like, SSP_RK3, 0.03, 0.1, exact_end=False)
    assert out.time == pytest.approx(0.09)


def test_time_step_resolution():
    grid = GridSpec(0, 1, 10)
    assert time_step(grid, 0.5, dtau=0.02) == pytest.approx(0.02 * 0.01 / 0.5)
    assert time_step(grid, 0.5, dt=1e-3) == 1e-3
    with pytest.raises(ValueError):
        time_step(grid, 0.5)
    with pytest.raises(ValueError):
        time_step(grid, 0.5, dt=1e-3, dtau=0.1)


@pytest.mark.parametrize("form,eta", [("SIPG_BR2", 1.0), ("BR1", 0.0), ("LDG", 0.0)])
def test_heat_mean_conservation(form, eta):
    rng = np.random.default_rng(7)
    grid = GridSpec(0, 1, 12)
    op = assemble_stencil(SchemeConfig(form, 2, eta))
    u0 = rng.standard_normal((12, 3))
    f = integrate(DGField(u0, grid), lambda u: heat_rhs_array(u, op, 1.0, grid.h), SSP_RK3,
                  0.01 * grid.h**2, 500 * 0.01 * grid.h**2)
    assert abs(f.coeffs[:, 0].sum() - u0[:, 0].sum()) < 1e-11 * np.abs(u0[:, 0]).sum()


@pytest.mark.parametrize("p", [1, 2, 3])
def test_heat_convergence_br2(p):
    gamma, t_end = 1e-2, 0.1
    errs = []
    for ne in (8, 16, 32):
        grid = GridSpec(0.0, 1.0, ne)
        cfg = SchemeConfig("SIPG_BR2", p, 1.0)
        op = assemble_stencil(cfg)
        f = l2_project(lambda x: np.sin(2 * np.pi * x), grid, p)
        dt = 0.25 * max_dtau_scan(cfg, "RK4") * grid.h**2 / gamma
        f = integrate(f, lambda u: heat_rhs_array(u, op, gamma, grid.h), RK4, dt, t_end)
        errs.append(_l2_error(f, lambda x: math.exp(-gamma * 4 * math.pi**2 * t_end) * np.sin(2 * np.pi * x)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= p + 0.7


def _l2_error(field, exact):
    rule = gauss_legendre(field.p + 4)
    phi = legendre_vandermonde(field.p, rule.nodes)
    x = field.grid.centers[:, None] + 0.5 * field.grid.h * rule.nodes
    diff = field.coeffs @ phi.T - exact(x)
    return math.sqrt(0.5 * field.grid.h * np.sum(diff**2 * rule.weights))


def test_heat_blowup_threshold_table_value():
    # BR2p2-eta1 with RK3: stable just below the tabulated 0.0418, unstable just above
    cfg = SchemeConfig("SIPG_BR2", 2, 1.0)
    op = assemble_stencil(cfg)
    dmax = max_dtau_scan(cfg, "RK3")
    assert dmax == pytest.approx(0.0418, rel=0.01)
    grid = GridSpec(0, 1, 30)
    rng = np.random.default_rng(0)
    u0 = DGField(rng.standard_normal((30, 3)), grid)
    rhs = lambda u: heat_rhs_array(u, op, 1.0, grid.h)  # noqa: E731
    with pytest.raises(BlowUpError):
        integrate(u0, rhs, SSP_RK3, 1.03 * dmax * grid.h**2, 1e4 * 1.03 * dmax * grid.h**2)
    f = integrate(u0, rhs, SSP_RK3, 0.97 * dmax * grid.h**2, 1e4 * 0.97 * dmax * grid.h**2)
    assert np.abs(f.coeffs).max() <= np.abs(u0.coeffs).max() * 10


def test_decay_rate_resolved_mode():
    # K = pi/4 on N_e = 8, p = 3: log G / tau_p close to -K^2
    p, ne, gamma = 3, 8, 1.0
    grid = GridSpec(0.0, 1.0, ne)
    k = 2 * math.pi * 4
    op = assemble_stencil(SchemeConfig("LDG", p, 0.0))
    f0 = l2_project(lambda x: np.sin(k * x), grid, p)
    tau_p = 1.0
    t = tau_p * grid.h**2 / ((p + 1) ** 2 * gamma)
    f = integrate(f0, lambda u: heat_rhs_array(u, op, gamma, grid.h), RK4, 0.005 * grid.h**2, t)
    K = k * grid.h / (p + 1)
    rate = math.log(field_energy(f) / field_energy(f0)) / tau_p
    assert rate == pytest.approx(-K * K, rel=0.01)


def test_rusanov_flux_consistency():
    u = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(rusanov_flux(u, u), 0.5 * u * u)


def test_convection_constant_and_conservation():
    const = np.zeros((6, 3))
    const[:, 0] = 1.7
    assert np.abs(convection_rhs_array(const, 0.2)).max() < 1e-14
    rng = np.random.default_rng(2)
    u = rng.standard_normal((9, 3))
    du = convection_rhs_array(u, 0.1)
    assert abs(du[:, 0].sum()) < 1e-12 * np.abs(du).max()


def test_burgers_rhs_includes_viscous_part():
    op = assemble_stencil(SchemeConfig("SIPG_BR2", 2, 1.0))
    rng = np.random.default_rng(5)
    u = rng.standard_normal((7, 3))
    np.testing.assert_allclose(burgers_rhs_array(u, op, 0.0, 0.3), convection_rhs_array(u, 0.3))
    np.testing.assert_allclose(burgers_rhs_array(u, op, 0.2, 0.3) - convection_rhs_array(u, 0.3),
                               heat_rhs_array(u, op, 0.2, 0.3), atol=1e-12)


def _characteristics(x, t, u0):
    # u = u0(x - u t) solved per point with a bracketing root finder
    out = np.empty_like(x)
    for i, xi in np.ndenumerate(x):
        out[i] = brentq(lambda v: v - u0(xi - v * t), -3, 3, xtol=1e-15)
    return out


def test_inviscid_burgers_matches_characteristics():
    def u0(x):
        return 0.5 + np.sin(x)
    t_end = 0.3  # well before the shock at t = 1
    errs = []
    for ne in (20, 40):
        grid = GridSpec(0, 2 * math.pi, ne)
        f = l2_project(u0, grid, 2)
        dt = 0.05 * grid.h
        f = integrate(f, lambda u: convection_rhs_array(u, grid.h), SSP_RK3, dt, t_end)
        errs.append(_l2_error(f, lambda x: _characteristics(x, t_end, u0)))
    assert errs[1] < 2e-4
    assert math.log2(errs[0] / errs[1]) > 2.5


def test_sample_continuous_interface_average():
    grid = GridSpec(0.0, 2.0, 2)
    coeffs = np.array([[0.0, 0.0], [1.0, 0.0]])
    x, u = sample_continuous(DGField(coeffs, grid), q=4)
    assert x.size == u.size == 8
    assert u[4] == 0.5  # shared endpoint between the elements
    assert u[0] == 0.5  # periodic wrap
    with pytest.raises(ValueError):
        sample_continuous(DGField(coeffs, grid), q=1)


def test_sample_continuous_smooth_field():
    grid = GridSpec(0.0, 1.0, 20)
    f = l2_project(lambda x: np.cos(2 * np.pi * x), grid, 4)
    x, u = sample_continuous(f, q=10)
    np.testing.assert_allclose(np.diff(x), grid.h / 10, rtol=1e-12)
    assert np.abs(u - np.cos(2 * np.pi * x)).max() < 1e-6
