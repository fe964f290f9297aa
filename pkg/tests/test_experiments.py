import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btlab.experiments import (ExperimentError, ExpansionFit, decay_profile, degenerate_probe,
                               diagonal_values, fit_diagonal_expansion, fit_series,
                               landau_leading_check, map_levels, product_and_commutator,
                               weyl_trace_check)
from btlab.geometry import make_model

PI = math.pi
FS = make_model("cp1_fs")


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_planted_series_recovered(c):
    ks = [16, 24, 32, 48, 64]
    vals = [sum(cj * k ** (1 - j) for j, cj in enumerate(c)) for k in ks]
    fit = fit_series(ks, vals, depth=1, guard=1)
    assert np.allclose(fit.coefficients, c, atol=1e-9)
    assert fit.residual_rms <= 1e-12 * max(1.0, max(abs(v) for v in vals))


def test_expansion_fit_invariants():
    with pytest.raises(ExperimentError):
        ExpansionFit(0.0, (16, 16, 32, 48), (), (1, 0), (), None, (), 0.0, 1, 1)
    with pytest.raises(ExperimentError):
        ExpansionFit(0.0, (16, 24), (), (1, 0), (), None, (), 0.0, 0, 1)


def test_fs_density_fit():
    fit = fit_diagonal_expansion(FS, "1", 0.0, [16, 24, 32, 48, 64], depth=1)
    assert fit.coefficients[0] == pytest.approx(1 / (2 * PI), rel=1e-6)
    assert fit.coefficients[1] == pytest.approx(1 / (2 * PI), rel=1e-4)
    assert fit.exponents == (1.0, 0.0, -1.0)


def test_flat_density_fit_has_no_correction():
    fit = fit_diagonal_expansion(make_model("bargmann"), "1", 0.0, [16, 24, 32, 48, 64], depth=1)
    assert abs(fit.coefficients[1]) <= 1e-4


def test_weyl_exact_cases():
    one = weyl_trace_check(FS, "1", [8, 16])
    for row in one["levels"]:
        # Tr = k + 1 and k I_f = k
        assert row["deviation"] == pytest.approx(1 / row["k"], abs=1e-12)
    odd = weyl_trace_check(FS, "x3", [8, 16])
    assert all(abs(r["deviation"]) <= 1e-12 for r in odd["levels"])
    sq = weyl_trace_check(FS, "x3^2", [8, 16, 32])
    # constant density: Tr T_{x3^2} = (k+1)/3, k I_f = k/3
    for row in sq["levels"]:
        assert row["deviation"] == pytest.approx(1 / (3 * row["k"]), abs=1e-12)
        assert row["trace_identity_rel"] <= 1e-12
    assert sq["monotone"] and sq["all_within_bound"]


def test_decay_profile_round_sphere():
    prof = decay_profile(FS, "1", [16, 32])
    assert prof.fitted_rate > 0
    assert abs(prof.fitted_rate - prof.reference_rate) <= 0.1 * prof.reference_rate
    assert prof.closed_form_rate == pytest.approx(prof.fitted_rate, rel=1e-8)
    assert prof.threshold_ok
    for k, neg_log_diag, neg_log_kb0 in prof.intercepts:
        # density (k+1)/(2 pi) against k b_0 = k/(2 pi)
        assert neg_log_diag == pytest.approx(neg_log_kb0 - math.log1p(1 / k), abs=1e-12)
    assert all(d <= 3.0 for d, _, _ in prof.pairs)


def test_degenerate_probe():
    res = degenerate_probe([16, 32, 64])
    at0 = res["0.0"]
    # density at 0 grows like sqrt(k): ratio of density/k over 16 -> 64 is 1/2
    assert at0["ratio_last_first"] == pytest.approx(0.5, rel=1e-6)
    assert res["0.5"]["ratio_last_first"] > 0.95
    zero = degenerate_probe([16, 32], f="0*x1")
    assert all(v == 0.0 for v in zero["0.0"]["value_over_k"])


def test_landau_leading_term():
    res = landau_leading_check([16, 32])
    for row in res["levels"]:
        assert row["rel_error"] <= 0.03
        assert row["dz"] == 0.0
    vanishing = landau_leading_check([16, 64], f="z*zb")
    scale = [r["value_over_k_scale"] for r in vanishing["levels"]]
    # f(0) = 0 leaves an O(1/k) remainder relative to k/(2 pi)
    assert scale[1] <= 0.3 * scale[0]


def test_commutator_and_product_defects_decay():
    levels = product_and_commutator(FS, "x3", "x1", [16, 32])
    assert levels[1]["commutator_defect"] <= 0.6 * levels[0]["commutator_defect"]
    assert 0.35 <= levels[1]["product_defect"] / levels[0]["product_defect"] <= 0.65


def test_threads_do_not_change_results():
    serial = diagonal_values(FS, "x3", [0.1 + 0.2j], [8, 12, 16], threads=1)
    pooled = diagonal_values(FS, "x3", [0.1 + 0.2j], [8, 12, 16], threads=3)
    assert np.array_equal(serial, pooled)
    assert map_levels(lambda k: k * k, [3, 1, 2], threads=2) == [9, 1, 4]


def test_star_associativity_at_random_points():
    from btlab.experiments import RunContext, run_star
    res, ok, _ = run_star({"model": {"kind": "cp1_fs", "eps": 0.1}, "symbols": {}}, RunContext(seed=7))
    assert ok and len(res["points"]) == 5
    assert max(r["associativity_defect_p1"] for r in res["points"]) <= 1e-6
