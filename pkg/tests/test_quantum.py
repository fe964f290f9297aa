import math

import numpy as np
import pytest

from btlab.geometry import make_model
from btlab.quantum import (QuantumError, build_basis, default_rule, projector_diagonal_grid,
                           projector_kernel, spectral_space_q1, truncation_degree)

PI = math.pi


@pytest.mark.parametrize("k", [8, 16, 24])
def test_fs_density_is_exact(basis_cache, k):
    basis = basis_cache("cp1_fs", k)
    assert basis.dim == k + 1
    pts = np.array([0.0, 0.3 + 0.2j, -1.2 + 0.5j, 3.0j])
    assert np.allclose(projector_kernel(basis, pts, pts), (k + 1) / (2 * PI), rtol=1e-12)


@pytest.mark.parametrize("kind", ["cp1_fs", "bargmann", "degenerate_quartic", "landau_q1"])
def test_gram_residual_small(basis_cache, kind):
    assert basis_cache(kind, 16).gram_residual() <= 1e-12


@pytest.mark.parametrize("kind", ["cp1_fs", "bargmann", "degenerate_quartic", "landau_q1"])
def test_projector_reproduces_itself(basis_cache, kind):
    # idempotence on the grid: int P(x, y) P(y, w) dv(y) = P(x, w)
    basis = basis_cache(kind, 16)
    x, w = np.array([0.1 + 0.1j]), np.array([0.2 - 0.05j])
    py = basis.grid.nodes
    pxy = np.sum(basis.values_at(x) * basis.grid_values.conj(), axis=0)
    pyw = np.sum(basis.grid_values * basis.values_at(w).conj(), axis=0)
    assert basis.grid.integrate(pxy * pyw) == pytest.approx(projector_kernel(basis, x, w)[0], abs=1e-10)
    assert py.size == basis.grid.size


def test_flat_density_inside_bulk(basis_cache):
    # Bargmann space: P(x, x) = k/(2 pi) exactly for the untruncated space
    basis = basis_cache("bargmann", 16)
    pts = np.array([0.0, 0.2, 0.3j])
    assert np.allclose(projector_kernel(basis, pts, pts).real, 16 / (2 * PI), rtol=1e-9)


def test_trace_of_projector_is_dimension(basis_cache):
    basis = basis_cache("cp1_fs", 16)
    assert basis.grid.integrate(projector_diagonal_grid(basis)) == pytest.approx(17, rel=1e-13)


def test_landau_spectral_space(basis_cache):
    basis = basis_cache("landau_q1", 16)
    diag = basis.diagnostics
    assert basis.q == 1 and basis.components == ("dzbar",)
    assert basis.dim == truncation_degree(make_model("landau_q1"), 16) + 1
    assert diag["cutoff"] >= diag["requested_cutoff"]
    assert diag["lowest_eigenvalue"] <= diag["cutoff"] < diag["first_excluded"]
    # lowest band at 0: k/(2 pi)
    val = projector_kernel(basis, 0.0, 0.0)
    assert val.shape == (1, 1)
    assert val[0, 0].real == pytest.approx(16 / (2 * PI), rel=1e-9)


def test_landau_dimension_growth():
    # harmonic (0,1)-forms z^0 zbar^m, m <= d(k): dimension k + 1 for d = k
    model = make_model("landau_q1")
    assert spectral_space_q1(model, 8).dim == 9
    assert spectral_space_q1(model, 16).dim == 17


def test_wrong_model_for_q1():
    with pytest.raises(QuantumError):
        spectral_space_q1(make_model("bargmann"), 8)


def test_rule_overrides_are_used():
    rule = default_rule(make_model("cp1_fs"), 16, None, 10, 12)
    assert rule.size == 120
    basis = build_basis(make_model("cp1_fs"), 16, rule=rule)
    assert basis.grid.size == 120


@pytest.mark.parametrize("kind", ["cp1_fs", "bargmann", "degenerate_quartic", "landau_q1"])
def test_grid_gram_is_idempotent(basis_cache, kind):
    basis = basis_cache(kind, 16)
    g = basis.grid_values
    p = (g * basis.grid.weights) @ g.conj().T
    assert np.linalg.norm(p @ p - p, 2) <= 1e-8


@pytest.mark.parametrize("k", [1, 2, 37, 128])
def test_perturbed_fs_dimension(k):
    assert build_basis(make_model("cp1_fs", 0.2), k).dim == k + 1
