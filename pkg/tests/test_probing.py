"""Eigenpairs, probe spectra, pointwise probe traces and seminorms on the disk."""

import math
import warnings

import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from dsmkit.boundary import BoundaryTrace, SobolevParams, dft, sobolev_pair, sobolev_seminorm, uniform_angles
from dsmkit.probing import (
    E1,
    E2,
    BackgroundMedium,
    Direction,
    ProbePoint,
    TruncationWarning,
    UnsupportedBackgroundError,
    eigenfunction,
    eigenvalue,
    eta_pointwise,
    grad_eigenfunction,
    modal_values,
    probe_coeffs,
    radial_table,
    seminorm_closed_v0,
    seminorm_table,
    truncation_modes,
    zeta_pointwise,
)
from dsmkit.special import DomainError

BG10 = BackgroundMedium(1.0, 10.0, 1.0)
BG0 = BackgroundMedium(1.0, 0.0, 1.0)
K = math.sqrt(10.0)


def series_i(n, z, terms=60):
    return sum((z / 2) ** (2 * m + n) / (math.factorial(m) * math.factorial(m + n)) for m in range(terms))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------
def test_background_wavenumber():
    bg = BackgroundMedium(2.0, 10.0, 1.0)
    assert bg.ksq == 5.0
    assert bg.k == pytest.approx(math.sqrt(5.0))


def test_background_validation():
    with pytest.raises(ValueError):
        BackgroundMedium(0.0, 1.0)
    with pytest.raises(UnsupportedBackgroundError):
        BackgroundMedium(1.0, -1.0)


def test_background_coerces_integers_to_float():
    bg = BackgroundMedium(1, 10, 1)
    assert isinstance(bg.v0, float) and isinstance(bg.sigma0, float)


def test_direction_unit_vector():
    for a in np.linspace(-4, 4, 17):
        assert np.linalg.norm(Direction(a).vector) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(E1.vector, [1, 0], atol=1e-16)
    assert np.allclose(E2.vector, [0, 1], atol=1e-16)


def test_direction_from_vector_round_trip():
    d = Direction.from_vector((0.6, -0.8))
    assert np.allclose(d.vector, [0.6, -0.8], atol=1e-15)
    with pytest.raises(ValueError):
        Direction.from_vector((0.0, 0.0))


def test_probe_point_cartesian():
    p = ProbePoint.from_xy(0.3, -0.4)
    assert p.r == pytest.approx(0.5)
    assert p.xy == pytest.approx((0.3, -0.4))
    with pytest.raises(DomainError):
        ProbePoint(1.0, 0.0).check_inside(BG10)


# ---------------------------------------------------------------------------
# eigenpairs
# ---------------------------------------------------------------------------
def test_eigenfunction_zero_mode_k0():
    for x in (ProbePoint(0.0), ProbePoint(0.7, 1.2)):
        assert eigenfunction(0, x, BG0) == 1.0


def test_eigenfunction_vanishes_at_origin():
    assert eigenfunction(2, ProbePoint(0.0), BG10) == 0.0


def test_eigenfunction_against_power_series():
    got = eigenfunction(5, ProbePoint(0.5, 0.0), BG10)
    ref = series_i(5, K * 0.5) / series_i(5, K)
    assert got.real == pytest.approx(ref, rel=1e-12)
    assert abs(got.imag) == 0.0


def test_eigenfunction_angle_and_negative_modes():
    x = ProbePoint(0.6, 0.9)
    assert eigenfunction(-3, x, BG10) == pytest.approx(np.conj(eigenfunction(3, x, BG10)), rel=1e-14)


def test_eigenvalue_k0():
    assert eigenvalue(4, BG0) == 0.25
    with pytest.raises(DomainError):
        eigenvalue(0, BG0)


def test_eigenvalue_against_scipy_and_asymptote():
    n = np.arange(1, 61)
    lam = np.array([eigenvalue(int(m), BG10) for m in n])
    ref = sps.iv(n, K) / (K * sps.ivp(n, K))
    assert np.allclose(lam, ref, rtol=1e-12)
    assert np.all(lam > 0)
    gap = np.abs(n * lam - 1.0)
    assert np.all(np.diff(gap) < 0)
    assert gap[-1] < 2e-3
    assert eigenvalue(0, BG10) == pytest.approx(sps.iv(0, K) / (K * sps.iv(1, K)), rel=1e-12)


def test_eigenvalue_even_in_mode():
    for m in (1, 7, 30):
        assert eigenvalue(m, BG10) == eigenvalue(-m, BG10)


def test_grad_eigenfunction_simple_cases():
    assert np.allclose(grad_eigenfunction(0, ProbePoint(0.4, 0.3), BG0), 0.0)
    for x in (ProbePoint(0.0), ProbePoint(0.5, 2.0)):
        g = grad_eigenfunction(1, x, BG0)
        assert np.allclose(g, [1.0, 1j], atol=1e-15)


@pytest.mark.parametrize("n", [-4, -1, 0, 1, 2, 7])
def test_grad_eigenfunction_finite_differences(n):
    x = ProbePoint(0.45, 1.1)
    h = 1e-5
    x0, y0 = x.xy
    fd = []
    for dx, dy in ((h, 0.0), (0.0, h)):
        fp = eigenfunction(n, ProbePoint.from_xy(x0 + dx, y0 + dy), BG10)
        fm = eigenfunction(n, ProbePoint.from_xy(x0 - dx, y0 - dy), BG10)
        fd.append((fp - fm) / (2 * h))
    g = grad_eigenfunction(n, x, BG10)
    scale = max(np.max(np.abs(fd)), 1e-300)
    assert np.max(np.abs(g - np.array(fd))) <= 1e-6 * scale + 1e-12


def test_radial_table_against_scipy():
    r = np.array([0.0, 0.2, 0.55, 0.9])
    t = radial_table(r, BG10, 30)
    m = np.arange(31)
    rho = sps.iv(m[None], K * r[:, None]) / sps.iv(m[None], K)
    A = K * sps.ivp(m[None], K * r[:, None]) / sps.iv(m[None], K)
    assert np.allclose(t.rho, rho, rtol=1e-12, atol=1e-300)
    assert np.allclose(t.A, A, rtol=1e-11, atol=1e-300)
    # B_1(0) is the limit of I_1(k r)/(r I_1(k))
    assert t.B[0, 1] == pytest.approx(K / 2 / sps.iv(1, K), rel=1e-12)


def test_truncation_modes():
    assert truncation_modes(0.0) == (2, False)
    n, capped = truncation_modes(0.5)
    assert not capped and 0.5**n < 1e-16
    assert truncation_modes(0.9999)[1]


# ---------------------------------------------------------------------------
# probe spectra
# ---------------------------------------------------------------------------
def test_monopole_at_origin_has_only_zero_mode():
    spec = probe_coeffs("monopole", ProbePoint(0.0), None, BG10, 20)
    c = spec.coeffs
    assert abs(c[0]) > 0
    assert np.max(np.abs(np.delete(c.coeffs, c.max_mode))) == 0.0


def test_monopole_green_pairing_closed_form_k0():
    for r1, r2 in ((0.3, 0.5), (0.5, 0.5), (0.7, 0.2)):
        x, z = ProbePoint(r1, 0.4), ProbePoint(r2, 0.4)
        val = probe_coeffs("monopole", x, None, BG0, 80).pair(probe_coeffs("green", z, None, BG0, 80).coeffs)
        w = r1 * r2
        assert val.real == pytest.approx(w / (math.pi * (1 - w) ** 2), rel=1e-12)
        assert abs(val.imag) <= 1e-14


def test_grad_green_is_derivative_of_green():
    z = ProbePoint(0.5, 0.7)
    d = Direction(0.3)
    h = 1e-6
    zx, zy = z.xy
    dv = d.vector
    gp = probe_coeffs("green", ProbePoint.from_xy(zx + h * dv[0], zy + h * dv[1]), None, BG10, 40).coeffs.coeffs
    gm = probe_coeffs("green", ProbePoint.from_xy(zx - h * dv[0], zy - h * dv[1]), None, BG10, 40).coeffs.coeffs
    # coefficients carry conj(.), and d is real, so differentiation commutes with it
    fd = (gp - gm) / (2 * h)
    got = probe_coeffs("grad_green", z, d, BG10, 40).coeffs.coeffs
    assert np.max(np.abs(got - fd)) <= 1e-6 * np.max(np.abs(got))


def test_dipole_needs_direction():
    with pytest.raises(ValueError):
        probe_coeffs("dipole", ProbePoint(0.3), None, BG10, 10)
    with pytest.raises(ValueError):
        modal_values("wrong", [0.1], [0.0], BG10, 3)


def test_truncation_warning_when_band_too_small():
    with pytest.warns(TruncationWarning):
        probe_coeffs("monopole", ProbePoint(0.9), None, BG10, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        probe_coeffs("monopole", ProbePoint(0.3), None, BG10, 60)


def test_pair_with_data_matches_modal_formula():
    # <zeta_x, G_z> = sum n^2/(2 pi R) conj(phi_n(x)) lambda_n phi_n(z)  (R = 1)
    x, z = ProbePoint(0.3, 0.0), ProbePoint(0.5, 0.0)
    M = 60
    val = probe_coeffs("monopole", x, None, BG10, M).pair(probe_coeffs("green", z, None, BG10, M).coeffs)
    n = np.arange(-M, M + 1)
    m = np.abs(n)
    rho = lambda r: sps.iv(m, K * r) / sps.iv(m, K)
    lam = sps.iv(m, K) / (K * sps.ivp(m, K))
    ref = np.sum(n**2 / (2 * math.pi) * rho(0.3) * lam * rho(0.5))
    assert val.real == pytest.approx(ref, rel=1e-10)


@given(
    st.floats(min_value=0.0, max_value=0.85),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-math.pi, max_value=math.pi),
)
@settings(max_examples=40, deadline=None)
def test_rotation_equivariance(r, theta, alpha, beta):
    x, d = ProbePoint(r, theta), Direction(alpha)
    M = 40
    for kind in ("monopole", "dipole", "green", "grad_green"):
        dd = d if kind in ("dipole", "grad_green") else None
        a = probe_coeffs(kind, x, dd, BG10, M)
        b = probe_coeffs(kind, x.rotated(beta), dd.rotated(beta) if dd else None, BG10, M)
        n = a.coeffs.modes
        expect = a.coeffs.coeffs * np.exp(-1j * n * beta)
        scale = max(np.max(np.abs(expect)), 1e-300)
        assert np.max(np.abs(b.coeffs.coeffs - expect)) <= 1e-10 * scale
        assert b.seminorm() == pytest.approx(a.seminorm(), rel=1e-10, abs=1e-300)


# ---------------------------------------------------------------------------
# pointwise traces
# ---------------------------------------------------------------------------
def test_zeta_at_origin_is_constant():
    y = uniform_angles(16)
    vals = zeta_pointwise(ProbePoint(0.0), y, BG10)
    assert np.allclose(vals, 1.0 / (2 * math.pi * sps.iv(0, K)), rtol=1e-13, atol=0)


def test_zeta_pointwise_matches_coefficients():
    x = ProbePoint.from_xy(0.4, 0.7)
    y = uniform_angles(256)
    fc = dft(BoundaryTrace(1.0, zeta_pointwise(x, y, BG10, 60)), 60)
    ref = probe_coeffs("monopole", x, None, BG10, 60).coeffs
    assert np.max(np.abs(fc.coeffs - ref.coeffs)) <= 1e-10


def test_zeta_real_when_theta_zero():
    vals = zeta_pointwise(ProbePoint(0.6, 0.0), uniform_angles(64), BG10)
    assert np.max(np.abs(vals.imag)) <= 1e-14 * np.max(np.abs(vals))


@pytest.mark.parametrize("basis,d", [("e1", E1), ("e2", E2), (Direction(0.8), Direction(0.8))])
def test_eta_pointwise_matches_coefficients(basis, d):
    x = ProbePoint.from_xy(0.5, 0.3)
    y = uniform_angles(256)
    fc = dft(BoundaryTrace(1.0, eta_pointwise(x, basis, y, BG10, 60)), 60)
    ref = probe_coeffs("dipole", x, d, BG10, 60).coeffs
    assert np.max(np.abs(fc.coeffs - ref.coeffs)) <= 1e-10 * np.max(np.abs(ref.coeffs))


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=30)
def test_eta_linearity(a, b):
    x = ProbePoint(0.55, 2.2)
    y = uniform_angles(32)
    lhs = eta_pointwise(x, (a, b), y, BG10, 40)
    rhs = a * eta_pointwise(x, "e1", y, BG10, 40) + b * eta_pointwise(x, "e2", y, BG10, 40)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(rhs)))


def test_eta_e1_at_theta_zero_is_radial_series():
    r = 0.45
    y = uniform_angles(32)
    n = np.arange(-40, 41)
    m = np.abs(n)
    coeffs = K * sps.ivp(m, K * r) / sps.iv(m, K)
    ref = np.exp(1j * np.outer(y, n)) @ coeffs / (2 * math.pi)
    assert np.allclose(eta_pointwise(ProbePoint(r, 0.0), "e1", y, BG10, 40), ref, rtol=1e-12, atol=1e-14)


def test_eta_at_origin_is_limit():
    y = uniform_angles(16)
    at0 = eta_pointwise(ProbePoint(0.0), "e2", y, BG10)
    near = eta_pointwise(ProbePoint(1e-7, 0.0), "e2", y, BG10)
    assert np.allclose(at0, near, atol=1e-6)


def test_pointwise_needs_positive_ksq():
    with pytest.raises(UnsupportedBackgroundError):
        zeta_pointwise(ProbePoint(0.2), 0.0, BG0)
    with pytest.raises(UnsupportedBackgroundError):
        eta_pointwise(ProbePoint(0.2), "e1", 0.0, BackgroundMedium(1.0, 10.0, 2.0))
    with pytest.raises(ValueError):
        eta_pointwise(ProbePoint(0.2), "e3", 0.0, BG10)


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------
def test_green_seminorm_at_origin_k0():
    assert seminorm_closed_v0("green", ProbePoint(0.0)) == 0.0


def test_zeta_closed_form_against_series():
    t = 0.5
    closed = seminorm_closed_v0("monopole", ProbePoint(t)) ** 2
    n = np.arange(1, 201)
    series = np.sum(n**2 / math.pi * t ** (2 * n))
    assert closed == pytest.approx(series, rel=1e-10)
    assert closed == pytest.approx(0.25 * 1.25 / (math.pi * 0.421875), rel=1e-14)
    assert closed == pytest.approx(0.2357851, abs=5e-8)


@pytest.mark.parametrize("kind", ["monopole", "dipole", "green", "grad_green"])
@pytest.mark.parametrize("R", [1.0, 1.7])
def test_closed_forms_match_probe_seminorms(kind, R):
    bg = BackgroundMedium(1.0, 0.0, R)
    for t in (0.1, 0.45, 0.8):
        x = ProbePoint(t * R, 0.7)
        d = Direction(1.3) if kind in ("dipole", "grad_green") else None
        spec = probe_coeffs(kind, x, d, bg, 190)
        assert spec.seminorm() == pytest.approx(seminorm_closed_v0(kind, x, R), rel=1e-8)


def test_dipole_closed_form_independent_of_direction_and_angle():
    x = ProbePoint(0.6, 0.0)
    vals = [
        probe_coeffs("dipole", ProbePoint(0.6, th), Direction(a), BG0, 150).seminorm()
        for th, a in ((0.0, 0.0), (1.0, 2.0), (2.5, -0.4))
    ]
    assert np.allclose(vals, seminorm_closed_v0("dipole", x), rtol=1e-10)


def test_closed_form_domain():
    with pytest.raises(DomainError):
        seminorm_closed_v0("monopole", ProbePoint(1.0))
    with pytest.raises(ValueError):
        seminorm_closed_v0("monopole", ProbePoint(0.3), gamma=0.5)


def test_zeta_seminorm_series_k_positive():
    r = 0.4
    n = np.arange(1, 80)
    ref = np.sqrt(np.sum(n**2 / math.pi * (sps.iv(n, K * r) / sps.iv(n, K)) ** 2))
    spec = probe_coeffs("monopole", ProbePoint(r), None, BG10, 60)
    assert sobolev_seminorm(spec.coeffs) == pytest.approx(ref, rel=1e-8)


def test_zeta_seminorm_at_origin_vanishes():
    assert probe_coeffs("monopole", ProbePoint(0.0), None, BG10, 30).seminorm() == 0.0
    st_ = seminorm_table([0.0], [0.0], BG10)
    assert st_.zeta2[0] == 0.0


@given(st.floats(0.0, 0.9), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.sampled_from([0.0, 0.5, 1.0, 1.5]))
@settings(max_examples=40, deadline=None)
def test_seminorm_table_matches_spectra(r, theta, alpha, gamma):
    d = Direction(alpha)
    p = SobolevParams(gamma)
    table = seminorm_table([r], [theta], BG10, p, nmax=150)
    x = ProbePoint(r, theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        spec = {k: probe_coeffs(k, x, d, BG10, 150) for k in ("monopole", "dipole", "green", "grad_green")}
    pairs = {
        "monopole": table.zeta2[0],
        "dipole": table.eta2(d)[0],
        "green": table.green2[0],
        "grad_green": table.ggrad2(d)[0],
    }
    for kind, val in pairs.items():
        ref = sobolev_pair(spec[kind].coeffs, spec[kind].coeffs, p).real
        assert val == pytest.approx(ref, rel=1e-10, abs=1e-300)
