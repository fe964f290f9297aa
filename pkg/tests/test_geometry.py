import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btlab.geometry import (FormValue, GeometryError, LocalGeometry, MODEL_KINDS,
                            curvature_report, d10_covariant, grid_curvature, grid_poisson,
                            hermitian_pairing, k_coordinates, laplacian_omega, make_model,
                            omega_form, poisson_bracket, signature_class)
from btlab.symbols import get_symbol

PI = math.pi
chart_points = st.complex_numbers(max_magnitude=0.8, allow_nan=False, allow_infinity=False)


def test_model_catalog_and_errors():
    assert MODEL_KINDS == ("cp1_fs", "bargmann", "landau_q1", "degenerate_quartic")
    with pytest.raises(GeometryError):
        make_model("cp2")
    with pytest.raises(GeometryError):
        make_model("bargmann", eps=0.1)


@given(chart_points)
def test_fs_curvature_is_homogeneous(x):
    # round sphere: mu = 1, r = r_hat = 8 pi, |R^TM|^2 = 16 pi^2 everywhere
    rep = curvature_report(make_model("cp1_fs"), x)
    assert rep.rdot_eigs[0] == pytest.approx(1.0, rel=1e-12)
    assert rep.r == pytest.approx(8 * PI, rel=1e-10)
    assert rep.r_hat == pytest.approx(8 * PI, rel=1e-10)
    assert rep.rtm_norm_sq == pytest.approx(16 * PI ** 2, rel=1e-10)
    assert rep.signature_class == 0


def test_signature_classes():
    assert curvature_report(make_model("bargmann"), 0.2).signature_class == 0
    landau = curvature_report(make_model("landau_q1"), 0.2)
    assert landau.signature_class == 1 and landau.r is None and landau.rtm_norm_sq is None
    deg = curvature_report(make_model("degenerate_quartic"), 0.0)
    assert deg.signature_class == "degenerate"
    off = curvature_report(make_model("degenerate_quartic"), 0.3 + 0.2j)
    # phi = |z|^4: phi_zzb = 4|z|^2, mu = 8|z|^2
    assert off.rdot_eigs[0] == pytest.approx(8 * 0.13, rel=1e-12)
    assert signature_class([1e-10]) == "degenerate"


@given(chart_points)
def test_det_equals_eigenvalue_product(x):
    rep = curvature_report(make_model("cp1_fs", 0.1), x)
    assert rep.det_rdot == pytest.approx(float(np.prod(rep.rdot_eigs)), rel=1e-14)


def test_flat_laplacian():
    # omega_11 = 1/(2 pi), h = 2 pi, Laplacian = -2 h d dbar
    assert laplacian_omega(make_model("bargmann"), lambda z, zb: z * zb, 0.3) == \
        pytest.approx(-4 * PI, rel=1e-12)


def test_laplacian_rejects_non_positive_points():
    with pytest.raises(GeometryError):
        laplacian_omega(make_model("landau_q1"), lambda z, zb: z * zb, 0.0)


@given(chart_points, chart_points)
def test_pairing_is_hermitian_positive(a, b):
    model = make_model("cp1_fs", 0.1)
    fa, fb = FormValue((1, 1), np.array([[a]])), FormValue((1, 1), np.array([[b]]))
    assert hermitian_pairing(model, fa, fa, 0.1).real >= 0
    assert hermitian_pairing(model, fa, fb, 0.1) == \
        pytest.approx(np.conj(hermitian_pairing(model, fb, fa, 0.1)), abs=1e-12)


def test_pairing_and_form_errors():
    model = make_model("cp1_fs")
    with pytest.raises(GeometryError):
        hermitian_pairing(model, FormValue((1, 0), np.array([1.0])),
                          FormValue((1, 1), np.array([[1.0]])), 0.0)
    with pytest.raises(GeometryError):
        FormValue((1, 1), np.array([1.0]))


def test_omega_norm_is_one():
    # |omega|^2 with omega = i omega_11 dz^dzbar: omega_11^2 h^2 = 1
    model = make_model("cp1_fs", 0.1)
    om = omega_form(model, 0.2 + 0.1j)
    assert hermitian_pairing(model, om, om, 0.2 + 0.1j) == pytest.approx(1.0, rel=1e-12)


def test_d10_of_holomorphic_frame():
    # on FS at 0 the connection term vanishes, so D(z dz) = dz (x) dz
    val = d10_covariant(make_model("cp1_fs"), lambda z, zb: z, 0.0)
    assert val.degree == (2, 0)
    assert val.coefficients[0, 0] == pytest.approx(1.0)


def test_poisson_bracket_antisymmetric_and_grid_agrees():
    model = make_model("cp1_fs", 0.1)
    f, g = get_symbol("x3").fn, get_symbol("x1").fn
    pts = np.array([0.3 + 0.2j, -0.4 + 0.1j])
    grid = grid_poisson(model, f, g, pts)
    for i, p in enumerate(pts):
        pb = poisson_bracket(model, f, g, p)
        assert pb == pytest.approx(-poisson_bracket(model, g, f, p), abs=1e-14)
        assert grid[i] == pytest.approx(pb, abs=1e-9)
        # real functions have a real bracket
        assert abs(pb.imag) <= 1e-14


def test_fs_poisson_bracket_of_coordinates():
    # {x3, x1} at 0: h = 2 pi at the pole, x3 ~ 1 - 2|z|^2, x1 ~ z + zb; gradient of x3 vanishes
    model = make_model("cp1_fs")
    assert poisson_bracket(model, get_symbol("x3").fn, get_symbol("x1").fn, 0.0) == \
        pytest.approx(0.0, abs=1e-14)
    # {x1, x2} at 0 = (i/2pi) h (1 * i - (-i) * 1) = (i/2pi)(2 pi)(2i) = -2
    assert poisson_bracket(model, get_symbol("x1").fn, get_symbol("x2").fn, 0.0) == \
        pytest.approx(-2.0, abs=1e-13)


def test_grid_curvature_matches_jets():
    model = make_model("cp1_fs", 0.1)
    pts = np.array([0.0, 0.3 + 0.2j, 1.5 - 0.4j])
    mu, om = grid_curvature(model, pts)
    for i, p in enumerate(pts):
        g = LocalGeometry(model, p, 2)
        assert mu[i] == pytest.approx(g.rdot, rel=1e-8)
        assert om[i] == pytest.approx(g.omega11.value.real, rel=1e-8)


@pytest.mark.parametrize("p", [0.0, 0.3 + 0.2j, -0.4 + 0.1j])
def test_k_coordinates_normal_form(p):
    model = make_model("cp1_fs", 0.1)
    chart = k_coordinates(model, p)
    c = chart.phi.c
    # no u^a ubar^b with a <= 1 or b <= 1 except lam |u|^2
    for a in range(chart.order + 1):
        for b in range(chart.order + 1 - a):
            if (a <= 1 or b <= 1) and (a, b) != (1, 1):
                assert abs(c[a, b]) <= 1e-12
    assert chart.lam == pytest.approx(LocalGeometry(model, p, 2).rdot / 2, rel=1e-12)
    assert chart.volume_jet().value == pytest.approx(1.0, rel=1e-12)
    u = np.array([0.01 + 0.02j, -0.03j])
    assert np.allclose(chart.from_chart(chart.to_chart(u)), u, atol=1e-13)


def test_k_coordinates_need_nondegenerate_curvature():
    with pytest.raises(GeometryError):
        k_coordinates(make_model("degenerate_quartic"), 0.0)


@pytest.mark.parametrize("kind, eps", [("cp1_fs", 0.0), ("cp1_fs", 0.1), ("bargmann", 0.0),
                                       ("degenerate_quartic", 0.0)])
def test_scalar_curvature_difference(kind, eps):
    # r - r_hat = Laplacian of log(V_omega / V_Theta)
    model = make_model(kind, eps)
    for x in (0.3 + 0.2j, -0.4 + 0.1j, 0.5):
        g = LocalGeometry(model, x)
        lhs = g.r.value - g.r_hat.value
        rhs = g.laplacian(g.log_vomega - g.log_vtheta).value
        assert lhs == pytest.approx(rhs, abs=1e-10)
        if kind == "cp1_fs" and eps == 0.0:
            assert abs(lhs) <= 1e-10


def test_theta_scaling():
    base = make_model("cp1_fs", 0.1)
    scaled = base.scaled(2.0)
    for x in (0.0, 0.3 + 0.2j, -0.4 + 0.1j, 0.2 - 0.35j, 1.1j):
        a, b = curvature_report(base, x), curvature_report(scaled, x)
        assert b.rdot_eigs[0] == pytest.approx(a.rdot_eigs[0] / 2.0, rel=1e-12)
        assert b.det_rdot == pytest.approx(a.det_rdot / 2.0, rel=1e-12)
