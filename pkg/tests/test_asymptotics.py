import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btlab import numkit as nk
from btlab.asymptotics import (AsymptoticsError, StationaryPhaseProblem,
                               closed_form_coefficients, coefficient_recursion,
                               composition_coefficients, measure_bergman_jets, required_order,
                               star_product, stationary_phase_terms)
from btlab.geometry import make_model, poisson_bracket
from btlab.symbols import get_symbol

PI = math.pi
chart_points = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def real_vars(order=12):
    x1, x2 = nk.Jet.variables((0.0, 0.0), order, "real")
    return x1, x2, nk.Jet.constant(1.0, order, "real")


@given(chart_points)
def test_fs_coefficients_of_x3(x):
    # exact spectrum (k-2m)/(k+2) gives b_{x3} = (1, -1, 2) x3 / (2 pi) at every point
    vals = closed_form_coefficients(make_model("cp1_fs"), "x3", x).values
    x3 = get_symbol("x3").fn(x, np.conj(x)).real
    assert np.allclose(vals, np.array([1.0, -1.0, 2.0]) * x3 / (2 * PI), atol=1e-12)


def test_fs_density_coefficients():
    vals = closed_form_coefficients(make_model("cp1_fs"), "1", 0.3 + 0.2j).values
    assert np.allclose(vals, [1 / (2 * PI), 1 / (2 * PI), 0.0], atol=1e-13)


def test_fs_composition_of_x3_with_itself():
    # diagonal of T_{x3}^2 at the pole: ((k-2m)/(k+2))^2 summed with |s_m(0)|^2 -> (1, -3, 8)/(2 pi)
    vals = composition_coefficients(make_model("cp1_fs"), "x3", "x3", 0.0).values
    assert np.allclose(vals, np.array([1.0, -3.0, 8.0]) / (2 * PI), atol=1e-12)


def test_flat_model_has_no_corrections():
    vals = closed_form_coefficients(make_model("bargmann"), "1", 0.2).values
    assert vals[0] == pytest.approx(1 / (2 * PI))
    assert abs(vals[1]) <= 1e-14 and abs(vals[2]) <= 1e-14


def test_closed_forms_need_positive_points():
    with pytest.raises(AsymptoticsError):
        closed_form_coefficients(make_model("landau_q1"), "1", 0.0)
    with pytest.raises(AsymptoticsError):
        closed_form_coefficients(make_model("cp1_fs"), "1", 0.0, depth=3)


@given(chart_points.filter(lambda x: abs(x) < 0.8))
def test_star_product_structure(x):
    model = make_model("cp1_fs", 0.1)
    f, g = get_symbol("x3"), get_symbol("x1")
    cfg = star_product(model, f, g, x)
    cgf = star_product(model, g, f, x)
    assert cfg[0] == pytest.approx(f.fn(x, np.conj(x)) * g.fn(x, np.conj(x)), abs=1e-14)
    # antisymmetric part of C_1 is i times the Poisson bracket
    assert cfg[1] - cgf[1] == pytest.approx(1j * poisson_bracket(model, f.fn, g.fn, x), abs=1e-10)


def test_quadratic_phase_normalization():
    # int e^{-k|x|^2} dlambda = 2 pi / k with dlambda = 2 dx dy
    x1, x2, one = real_vars()
    approx, terms = stationary_phase_terms(StationaryPhaseProblem(1j * (x1 * x1 + x2 * x2), one), 7.0, 1)
    assert approx == pytest.approx(2 * PI / 7.0, rel=1e-14)
    assert terms == [1.0]


@given(st.floats(1.0, 50.0), st.floats(0.5, 3.0), st.floats(0.5, 3.0))
def test_quadratic_phase_polynomial_exactness(k, a, b):
    x1, x2, one = real_vars()
    u = 1.0 + 0.5 * x1 * x1 - 0.2 * x1 * x2 + 0.3 * x2 ** 4
    approx, _ = stationary_phase_terms(StationaryPhaseProblem(1j * (a * x1 * x1 + b * x2 * x2), u), k, 3)
    from btlab.experiments import gaussian_moment
    exact = (gaussian_moment(0, 0, a, b, k) + 0.5 * gaussian_moment(2, 0, a, b, k)
             + 0.3 * gaussian_moment(0, 4, a, b, k))
    assert approx == pytest.approx(exact, rel=1e-12)


def test_quartic_terms_match_exact_series():
    # int e^{-k(t^2 + t^4)} dt = sqrt(pi/k) sum_j (-1)^j Gamma(2j+1/2)/(j! Gamma(1/2)) k^{-j}
    x1, x2, one = real_vars()
    _, terms = stationary_phase_terms(StationaryPhaseProblem(1j * (x1 * x1 + x2 * x2 + x1 ** 4), one), 10.0, 3)
    want = [(-1) ** j * math.gamma(2 * j + 0.5) / (math.factorial(j) * math.gamma(0.5)) for j in range(3)]
    assert np.allclose(terms, want, atol=1e-12)


def test_stationary_phase_preconditions():
    x1, x2, one = real_vars()
    assert required_order(3) == 12
    with pytest.raises(AsymptoticsError):
        StationaryPhaseProblem(1j * (x1 * x1 + x2 * x2) + x1, one)
    with pytest.raises(AsymptoticsError):
        StationaryPhaseProblem(1j * x1 * x1, one)
    lo1, lo2 = nk.Jet.variables((0.0, 0.0), 4, "real")
    prob = StationaryPhaseProblem(1j * (lo1 * lo1 + lo2 * lo2), nk.Jet.constant(1.0, 4, "real"))
    with pytest.raises(AsymptoticsError):
        stationary_phase_terms(prob, 10.0, 3)


def test_recursion_matches_closed_form_on_round_sphere():
    model = make_model("cp1_fs")
    bj = measure_bergman_jets(model, 0.0, depth=2)
    rec = coefficient_recursion(model, "x3", 0.0, 2, bj).values
    cf = closed_form_coefficients(model, "x3", 0.0).values
    assert rec[0] == pytest.approx(cf[0], rel=1e-8)
    assert rec[1] == pytest.approx(cf[1], rel=1e-6)
    assert rec[2] == pytest.approx(cf[2], rel=1e-4)


def test_bergman_reduction_matches_fit():
    from btlab.experiments import fit_diagonal_expansion
    model = make_model("cp1_fs", 0.1)
    fit = fit_diagonal_expansion(model, "1", 0.3 + 0.2j, [16, 24, 32, 48, 64, 80, 96], depth=1, guard=3)
    assert fit.rel_errors[1] <= 0.02


@pytest.mark.parametrize("p", [0.3 + 0.2j, -0.4 + 0.1j])
def test_recursion_matches_closed_form_on_perturbed_sphere(p):
    model = make_model("cp1_fs", 0.1)
    bj = measure_bergman_jets(model, p, depth=2)
    for f in ("x3", "x1"):
        rec = coefficient_recursion(model, f, p, 2, bj).values
        cf = closed_form_coefficients(model, f, p).values
        assert rec[1] == pytest.approx(cf[1], rel=0.02)
        assert rec[2] == pytest.approx(cf[2], rel=0.10)
