"""Finite-dimensional quantum spaces on the built-in models.

Sections are stored in the localized (unitary) picture: a section s = g e_L^k
is represented by g(z) e^{-k phi(z)}, and a (0,1)-form by its component against
the unit covector dzbar / |dzbar|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammainccinv, gammaln

from . import numkit as nk
from .conventions import CUTOFF_EXPONENT

TAIL_TOL = 1e-14
NOISE_FACTOR = 1e3


class QuantumError(Exception):
    pass


def truncation_degree(model, k):
    """Top monomial degree d(k) for the planar models.

    Keeps every monomial whose mass peaks inside |z| <= 1 (|z| <= 1/sqrt 2
    for the quartic weight): d = ceil(2 k t_c |dphi/dt(t_c)|), t = |z|^2.
    """
    if model.kind in ("bargmann", "landau_q1"):
        return int(math.ceil(2 * k * 1.0 * 0.5))
    if model.kind == "degenerate_quartic":
        return int(math.ceil(2 * k * 0.5 * (2 * 0.5)))
    raise QuantumError(f"no truncation rule for {model.kind}")


def _planar_t_max(model, k, d_top):
    """Radius^2 beyond which every dictionary element has relative tail mass <= 1e-14."""
    if model.kind == "degenerate_quartic":
        x = gammainccinv((d_top + 1) / 2.0, TAIL_TOL)
        return math.sqrt(x / (2.0 * k))
    return float(gammainccinv(d_top + 1.0, TAIL_TOL)) / k


def default_rule(model, k, d_top=None, n_radial=None, n_angular=None, t_max=None):
    if model.kind == "cp1_fs":
        nr = n_radial or 2 * k + 16
        na = n_angular or 4 * k + 16
        return nk.sphere_rule(nr, na)
    if d_top is None:
        d_top = truncation_degree(model, k) + (1 if model.kind == "landau_q1" else 0)
    T = t_max or _planar_t_max(model, k, d_top)
    nr = n_radial or d_top + 48
    na = n_angular or 2 * d_top + 16
    return nk.disc_rule(T, nr, na)


def _log_sigma(model, k, exps):
    """log of the prescaling factors (reciprocal model norms of z^a zbar^m)."""
    a, m = exps[:, 0], exps[:, 1]
    deg = a + m
    if model.kind == "cp1_fs":
        # 2 pi m! (k-m)! / (k+1)!
        ln = math.log(2 * math.pi) + gammaln(deg + 1) + gammaln(k - deg + 1) - gammaln(k + 2)
    elif model.kind in ("bargmann", "landau_q1"):
        ln = math.log(2 * math.pi) + gammaln(deg + 1) - (deg + 1) * math.log(k)
    else:
        ln = math.log(math.pi) + gammaln((deg + 1) / 2.0) - (deg + 1) / 2.0 * math.log(2.0 * k)
    return -0.5 * ln


@dataclass(frozen=True)
class QuantumBasis:
    model: object
    k: int
    q: int
    dictionary: np.ndarray   # rows (a, m): element z^a zbar^m (q=0 has m = 0 ... stored as (m, 0))
    coeffs: np.ndarray       # rank x len(dictionary), acting on prescaled dictionary values
    grid: nk.QuadratureRule
    grid_values: np.ndarray  # rank x nodes, localized values
    log_sigma: np.ndarray
    cutoff_exponent: int = CUTOFF_EXPONENT
    eigenvalues: Optional[np.ndarray] = None
    dropped: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def components(self):
        return ("dzbar",) if self.q == 1 else ("scalar",)

    def dictionary_values(self, z):
        return _dictionary_values(self.model, self.k, self.q, self.dictionary, self.log_sigma, z)

    def values_at(self, z):
        """Localized values of the basis at chart points (shape dim x npts)."""
        return self.coeffs @ self.dictionary_values(z)

    def poly_coeffs(self):
        """Coefficients of the basis in the raw monomials (q=0): s_j = sum C[j,m] z^m."""
        if self.q != 0:
            raise QuantumError("holomorphic coefficients only exist for q = 0")
        return self.coeffs * np.exp(self.log_sigma)[None, :]

    def gram_residual(self):
        g = (self.grid_values * self.grid.weights) @ self.grid_values.conj().T
        return float(np.max(np.abs(g - np.eye(self.dim)))) if self.dim else 0.0


def _dictionary_values(model, k, q, exps, log_sigma, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    a = exps[:, 0][:, None]
    m = exps[:, 1][:, None]
    r = np.abs(z)[None, :]
    theta = np.angle(z)[None, :]
    phi = model.phi(z)[None, :]
    logr = np.log(np.where(r > 0, r, 1.0))
    deg = a + m
    logmag = np.where((r == 0) & (deg > 0), -np.inf, deg * logr)
    if q == 0:
        logmag = logmag - k * phi
    else:
        # g = z^a zbar^m e^{2k phi}; unit frame |dzbar| = Theta_11^{-1/2}
        th = model.theta11(z)[None, :]
        logmag = logmag + k * phi - 0.5 * np.log(th)
    logmag = logmag + log_sigma[:, None]
    return np.exp(logmag) * np.exp(1j * (a - m) * theta)


def _orthonormal(model, k, q, exps, rule):
    log_sigma = _log_sigma(model, k, exps)
    vals = _dictionary_values(model, k, q, exps, log_sigma, rule.nodes)
    on = nk.orthonormalize_values(vals, rule.weights)
    return log_sigma, vals, on


def build_basis(model, k, rule=None, degree=None):
    """Orthonormal basis of holomorphic sections (q = 0)."""
    if model.kind == "landau_q1":
        raise QuantumError("landau_q1 has negative curvature; use spectral_space_q1")
    k = int(k)
    if k < 1:
        raise QuantumError("k must be a positive integer")
    if model.kind == "cp1_fs":
        d = k
    else:
        d = truncation_degree(model, k) if degree is None else int(degree)
    exps = np.stack([np.arange(d + 1), np.zeros(d + 1, dtype=int)], axis=1)
    rule = rule or default_rule(model, k, d)
    log_sigma, vals, on = _orthonormal(model, k, 0, exps, rule)
    coeffs = on.transform
    grid_values = coeffs @ vals
    diag = {"dictionary_size": int(len(exps)), "rank": int(on.rank)}
    return QuantumBasis(model, k, 0, exps, coeffs, rule, grid_values, log_sigma,
                        dropped=on.dropped, diagnostics=diag)


def spectral_space_q1(model, k, N=CUTOFF_EXPONENT, rule=None, degree=None):
    """Low-energy (0,1)-forms of the Kodaira Laplacian on the Landau model.

    Dictionary z^a zbar^m e^{2k phi} dzbar (a in {0, 1}); since dbar vanishes on
    (0,1)-forms in one variable, the quadratic form is ||dbar^* u||^2 with
    dbar^* u = -a z^{a-1} zbar^m e^{2k phi} / Theta_11 in the same frame.
    """
    if model.kind != "landau_q1":
        raise QuantumError("spectral_space_q1 needs the landau_q1 model")
    k = int(k)
    d = truncation_degree(model, k) if degree is None else int(degree)
    exps = np.array([(a, m) for m in range(d + 1) for a in (0, 1)])
    rule = rule or default_rule(model, k, d + 1)
    log_sigma, vals, on = _orthonormal(model, k, 1, exps, rule)
    # dbar^* of each prescaled element, localized (unit frame drops Theta^{-1/2} twice)
    has = exps[:, 0] == 1
    dstar = np.zeros_like(vals)
    if np.any(has):
        sub = exps[has].copy()
        sub[:, 0] = 0
        ls = _log_sigma(model, k, sub)
        shift = log_sigma[has] - ls
        dvals = _dictionary_values(model, k, 1, sub, ls, rule.nodes)
        th = model.theta11(rule.nodes)
        dstar[has] = -dvals * np.exp(shift)[:, None] / np.sqrt(th)[None, :]
    qform = (dstar * rule.weights) @ dstar.conj().T
    T = on.transform
    # ||dbar^* sum_r c_r e_r||^2 = c^H conj(T Q T^H) c
    qon = np.conj(T @ qform @ T.conj().T)
    qon = 0.5 * (qon + qon.conj().T)
    evals, evecs = nk.hermitian_eig(qon, tol=1e-13) if qon.size else (np.zeros(0), np.zeros((0, 0)))
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    floor = NOISE_FACTOR * np.finfo(float).eps * scale
    cutoff = max(float(k) ** (-N), floor)
    keep = evals <= cutoff
    coeffs = evecs[:, keep].T @ T  # rows: retained eigenvectors in dictionary coords
    grid_values = coeffs @ vals
    diag = {"dictionary_size": int(len(exps)), "rank": int(on.rank),
            "cutoff": cutoff, "requested_cutoff": float(k) ** (-N), "noise_floor": floor,
            "lowest_eigenvalue": float(evals[0]) if evals.size else None,
            "first_excluded": float(evals[~keep][0]) if np.any(~keep) else None}
    if not np.any(keep):
        diag["empty"] = "no eigenvalue below cutoff"
    return QuantumBasis(model, k, 1, exps, coeffs, rule, grid_values, log_sigma,
                        cutoff_exponent=N, eigenvalues=evals[keep], dropped=on.dropped,
                        diagnostics=diag)


def projector_kernel(basis, x, y):
    """Localized projector kernel P(x, y); a 1x1 block in the dzbar frame for q = 1."""
    vx = basis.values_at(x)
    vy = basis.values_at(y)
    val = np.sum(vx * vy.conj(), axis=0)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        val = complex(val[0])
        return np.array([[val]]) if basis.q == 1 else val
    return val


def projector_diagonal_grid(basis):
    return np.sum(np.abs(basis.grid_values) ** 2, axis=0)
