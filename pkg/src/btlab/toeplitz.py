"""Toeplitz operators P f P on the quantum spaces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numkit as nk
from .phase import psi
from .quantum import projector_diagonal_grid
from .symbols import get_symbol

ASYM_TOL = 1e-10


class ToeplitzError(Exception):
    pass


@dataclass(frozen=True)
class ToeplitzOperator:
    basis: object
    symbol_name: str
    matrix: np.ndarray
    k: int
    q: int
    composite: bool = False

    def norm(self):
        """Operator norm (largest singular value)."""
        if self.matrix.size == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def eigenvalues(self):
        return nk.hermitian_eig(self.matrix, tol=1e-13)[0]


@dataclass(frozen=True)
class KernelSample:
    x: complex
    y: complex
    raw: complex
    phase_normalized: complex
    dist: float


def _symbol_values(basis, f):
    sym = get_symbol(f)
    return sym, sym.on_grid(basis.grid.nodes)


def assemble(basis, f):
    """Matrix M_ij = sum_nodes w conj(b_i) f b_j of P f P in the orthonormal basis."""
    sym, fv = _symbol_values(basis, f)
    return assemble_values(basis, fv, sym.name, sym.real)


def assemble_values(basis, fv, name, real=None):
    """Same as ``assemble`` for a symbol already sampled on the grid."""
    fv = np.asarray(fv)
    if real is None:
        real = bool(np.max(np.abs(np.imag(fv)), initial=0.0) <= 1e-12 * max(1.0, np.max(np.abs(fv), initial=0.0)))
    b = basis.grid_values
    m = (b.conj() * (basis.grid.weights * fv)) @ b.T
    if real and m.size:
        scale = max(1.0, float(np.max(np.abs(m))))
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > ASYM_TOL * scale:
            raise ToeplitzError(
                f"assembled matrix for real symbol {name!r} is not Hermitian "
                f"(defect {asym:.2e}); quadrature is under-resolved")
        m = 0.5 * (m + m.conj().T)
    return ToeplitzOperator(basis, name, m, basis.k, basis.q)


def identity(basis):
    return ToeplitzOperator(basis, "1", np.eye(basis.dim, dtype=complex), basis.k, basis.q)


def compose(a, b):
    if a.basis is not b.basis:
        raise ToeplitzError("cannot compose operators on different bases")
    return ToeplitzOperator(a.basis, f"({a.symbol_name})o({b.symbol_name})",
                            a.matrix @ b.matrix, a.k, a.q, composite=True)


def linear_combination(terms, name):
    """sum c_i A_i for (c_i, A_i) on one basis."""
    terms = list(terms)
    basis = terms[0][1].basis
    if any(op.basis is not basis for _, op in terms):
        raise ToeplitzError("cannot combine operators on different bases")
    m = sum(c * op.matrix for c, op in terms)
    return ToeplitzOperator(basis, name, m, basis.k, basis.q, composite=True)


def kernel_values(op, x, y):
    """Raw localized kernel sum_ij b_i(x) M_ij conj(b_j(y)) on arrays of points."""
    bx = op.basis.values_at(x)
    by = op.basis.values_at(y)
    return np.einsum("ip,ij,jp->p", bx, op.matrix, by.conj())


def kernel_eval(op, x, y, pm=None):
    raw = complex(kernel_values(op, x, y)[0])
    x, y = complex(x), complex(y)
    if x == y or pm is None:
        norm = raw
    else:
        norm = complex(np.exp(-1j * op.k * psi(pm, x, y)) * raw)
    return KernelSample(x, y, raw, norm, abs(x - y))


def trace(op):
    return float(np.real(np.trace(op.matrix)))


def weighted_trace(basis, f):
    _, fv = _symbol_values(basis, f)
    return float(np.real(basis.grid.integrate(fv * projector_diagonal_grid(basis))))
