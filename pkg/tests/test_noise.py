import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wvamp.analytics import amplified_mean_x, postselected_second_moment_x
from wvamp.meter import MeterConfig
from wvamp.noise import (DegenerateVariance, ImaginaryWvaReport, NoiseConfig, NoiseKind,
                         find_optimal_jp, imaginary_wva_snr, p0_gamma_quadrature,
                         p_basis_p0_moments, p_basis_quadrature_moments, p_basis_x0_moments,
                         standard_snr, x_basis_x0_moments, x_basis_x0_quadrature_moments)
from wvamp.quantum import plus_state, state_from_angles

PI = math.pi


@pytest.fixture
def fig5():
    return plus_state(), state_from_angles(1.49 * PI, PI / 4)


def test_noise_config_validation():
    assert NoiseConfig("x0", 1.0).kind is NoiseKind.X0
    with pytest.raises(ValueError):
        NoiseConfig(NoiseKind.P0, -1.0)
    with pytest.raises(ValueError):
        NoiseConfig(NoiseKind.NONE, 0.5)
    with pytest.raises(ValueError):
        NoiseConfig("q0", 1.0)


@pytest.mark.parametrize("sigma, expected", [(10, 0.1), (20, 0.05), (100, 0.01)])
def test_standard_snr_references(sigma, expected):
    assert standard_snr(MeterConfig(1.0, sigma)) == expected


def test_standard_snr_limits():
    m = MeterConfig(1.0, 10.0)
    assert standard_snr(m, 10.0) == pytest.approx(1 / (10 * math.sqrt(2)))
    assert standard_snr(m, 1e12) < 1e-11


def test_x_basis_x0_reduction_and_mean_invariance():
    i, f = plus_state(), state_from_angles(1.3 * PI)
    m = MeterConfig.from_strength(0.05)
    mean0, second0 = x_basis_x0_moments(i, f, m, 0.0)
    assert mean0 == amplified_mean_x(i, f, m)
    assert second0 == postselected_second_moment_x(i, f, m)
    for J in (0.5, 3.0, 40.0):
        mean, second = x_basis_x0_moments(i, f, m, J)
        assert mean == mean0
        assert second == pytest.approx(second0 + J * J, rel=1e-15)


def test_x_basis_x0_nested_quadrature():
    i, f = plus_state(), state_from_angles(1.3 * PI)
    m = MeterConfig.from_strength(0.05)
    mean, second = x_basis_x0_moments(i, f, m, 2 * m.sigma)
    q = x_basis_x0_quadrature_moments(i, f, m, 2 * m.sigma)
    assert mean == pytest.approx(q["mean"], rel=1e-7)
    assert second == pytest.approx(q["second_moment"], rel=1e-7)


def test_p_basis_real_weak_value_has_no_shift(plus):
    rep = p_basis_x0_moments(plus, state_from_angles(1.3 * PI, 0.0), MeterConfig(1.0, 2.0))
    assert rep.mean_p == pytest.approx(0.0, abs=1e-15)
    assert rep.snr == pytest.approx(0.0, abs=1e-15)


def test_p_basis_fig5_intercept(fig5):
    rep = p_basis_x0_moments(*fig5, MeterConfig(1.0, 10.0))
    assert rep.snr == pytest.approx(0.0928, abs=1e-4)
    assert rep.sigma_j_eff is None


@pytest.mark.parametrize("sigma, d", [(10.0, 1.0), (2.0, 1.0), (1.0, 0.7)])
def test_p_basis_closed_form_vs_quadrature(fig5, sigma, d):
    m = MeterConfig(d, sigma)
    rep = p_basis_x0_moments(*fig5, m)
    q = p_basis_quadrature_moments(*fig5, m)
    assert rep.gamma == pytest.approx(q["gamma"], rel=1e-8)
    assert rep.mean_p == pytest.approx(q["mean"], rel=1e-8)
    assert rep.second_moment_p == pytest.approx(q["second_moment"], rel=1e-8)


def test_p_basis_x0_invariance(fig5):
    m = MeterConfig(1.0, 10.0)
    runs = [p_basis_quadrature_moments(*fig5, m, NoiseConfig(NoiseKind.X0, J) if J else NoiseConfig())
            for J in (0.0, m.sigma, 5 * m.sigma)]
    for key in ("gamma", "mean", "second_moment"):
        vals = [r[key] for r in runs]
        assert max(vals) - min(vals) <= 1e-9 * abs(vals[0])


def test_p0_zero_width_reduces(fig5):
    m = MeterConfig(1.0, 20.0)
    a, b = p_basis_x0_moments(*fig5, m), p_basis_p0_moments(*fig5, m, 0.0)
    for field in ("mean_p", "second_moment_p", "var_p", "gamma", "snr", "m_k", "k_factor"):
        assert getattr(b, field) == pytest.approx(getattr(a, field), rel=1e-12, abs=1e-300)
    assert b.sigma_j_eff == pytest.approx(2 * m.sigma)


@pytest.mark.slow
def test_p0_moments_nested_quadrature(fig5):
    m = MeterConfig(1.0, 10.0)
    rep = p_basis_p0_moments(*fig5, m, 0.3)
    q = p_basis_quadrature_moments(*fig5, m, NoiseConfig(NoiseKind.P0, 0.3))
    assert rep.gamma == pytest.approx(q["gamma"], rel=1e-7)
    assert rep.mean_p == pytest.approx(q["mean"], rel=1e-7)
    assert rep.second_moment_p == pytest.approx(q["second_moment"], rel=1e-7)


def test_p0_gamma_quadrature_option(fig5):
    m = MeterConfig(1.0, 5.0)
    closed = p_basis_p0_moments(*fig5, m, 0.0)
    quad = p_basis_p0_moments(*fig5, m, 0.0, gamma_method="quadrature")
    assert quad.gamma == pytest.approx(closed.gamma, rel=1e-9)
    assert p0_gamma_quadrature(*fig5, m, 0.0) == pytest.approx(closed.gamma, rel=1e-9)
    with pytest.raises(ValueError):
        p_basis_p0_moments(*fig5, m, 0.1, gamma_method="bogus")
    with pytest.raises(ValueError):
        p_basis_p0_moments(*fig5, m, -0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 2 * PI - 0.05), st.floats(-PI, PI), st.floats(0.1, 3.0),
       st.floats(0.2, 50.0), st.floats(0.0, 2.0))
def test_report_invariants(theta, phi, d, sigma, jp):
    i, f = plus_state(), state_from_angles(theta, phi)
    if abs(i.a1 * f.a1.conjugate() + i.a2 * f.a2.conjugate()) ** 2 < 1e-6:
        return
    rep = p_basis_p0_moments(i, f, MeterConfig(d, sigma), jp)
    assert rep.var_p > 0
    assert rep.var_p == pytest.approx(rep.second_moment_p - rep.mean_p**2, rel=1e-12)
    assert rep.snr**2 * rep.var_p == pytest.approx(rep.gamma * rep.mean_p**2, rel=1e-12, abs=1e-300)
    assert 0 < rep.gamma <= 1 + 1e-12


def test_degenerate_variance_raises():
    bad = ImaginaryWvaReport(0.1, 0.0, 0.0, 0.5, math.nan, 1.0, 0.0)
    with pytest.raises(DegenerateVariance):
        imaginary_wva_snr(bad)


def test_fig5_crossing_at_modest_noise(fig5):
    m = MeterConfig(1.0, 10.0)
    w = abs(p_basis_x0_moments(*fig5, m).snr)
    assert standard_snr(m, 0.0) > w
    Js = np.linspace(0, 50, 501)
    cross = Js[np.argmax([standard_snr(m, J) < w for J in Js])]
    # d / sqrt(sigma^2 + J^2) = w  =>  J = sqrt((d/w)^2 - sigma^2)
    assert cross == pytest.approx(math.sqrt((1 / w) ** 2 - 100), abs=0.1)
    assert 0 < cross < m.sigma


@pytest.mark.parametrize("sigma", [10.0, 20.0, 100.0])
def test_turnover(fig5, sigma):
    m = MeterConfig(1.0, sigma)
    snr = lambda jp: abs(p_basis_p0_moments(*fig5, m, jp).snr)
    assert snr(1e-3) > snr(0.0)
    assert snr(5.0) < snr(4.9)


@pytest.mark.parametrize("sigma", [10.0, 20.0, 100.0])
def test_gamma_nondecreasing_in_jp(fig5, sigma):
    m = MeterConfig(1.0, sigma)
    g = np.array([p_basis_p0_moments(*fig5, m, jp).gamma for jp in np.linspace(0, 1.5, 301)])
    assert np.all(np.diff(g) >= -1e-10)


def test_find_optimal_jp_sigma100(fig5):
    opt = find_optimal_jp(*fig5, MeterConfig(1.0, 100.0))
    assert opt.unimodal
    assert opt.snr_star == pytest.approx(0.45, rel=0.1)
    assert opt.gain == pytest.approx(45, rel=0.15)
    # a stationary point: nudging jp either way does not improve
    m = MeterConfig(1.0, 100.0)
    for h in (-1e-3, 1e-3):
        assert abs(p_basis_p0_moments(*fig5, m, opt.jp_star + h).snr) <= opt.snr_star + 1e-12


def test_find_optimal_jp_shifts_with_sigma(fig5):
    opts = {s: find_optimal_jp(*fig5, MeterConfig(1.0, s)) for s in (10.0, 20.0, 100.0)}
    assert opts[10.0].snr_star > 0.093
    stars = [opts[s].jp_star for s in (10.0, 20.0, 100.0)]
    assert len(set(round(s, 6) for s in stars)) == 3


def test_find_optimal_jp_edge_and_errors(fig5):
    m = MeterConfig(1.0, 100.0)
    edge = find_optimal_jp(*fig5, m, (1e-4, 0.05))
    assert not edge.unimodal
    assert edge.jp_star == pytest.approx(0.05)
    with pytest.raises(ValueError):
        find_optimal_jp(*fig5, m, (1.0, 1.0))
    with pytest.raises(ValueError):
        find_optimal_jp(*fig5, m, (-1.0, 1.0))
