"""Built-in Kähler chart models and their curvature objects.

All curvature quantities are obtained from exact Taylor jets of the closed-form
weight phi and base form Theta_11; see ``conventions`` for normalizations.
Only complex dimension one ships, so Hermitian matrices below are 1x1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import numkit as nk
from .conventions import DEGENERACY_TOL, TAYLOR_ORDER
from .numkit import Jet


class GeometryError(Exception):
    pass


MODEL_KINDS = ("cp1_fs", "bargmann", "landau_q1", "degenerate_quartic")


def _one(z, zb):
    return 0 * z + 1.0


def _fs_weight(z, zb):
    return 0.5 * nk.log(1 + z * zb)


def _fs_theta(z, zb):
    return 1.0 / (1 + z * zb) ** 2


def _re_bump(z, zb):
    return 0.5 * (z + zb) / (1 + z * zb) ** 2


def _im_bump(z, zb):
    return -0.5j * (z - zb) / (1 + z * zb) ** 2


PERTURBATIONS = {
    "re_bump": ("Re(z)/(1+|z|^2)^2", _re_bump),
    "im_bump": ("Im(z)/(1+|z|^2)^2", _im_bump),
}


@dataclass(frozen=True)
class KahlerModel:
    kind: str
    base_weight: Callable
    theta_fn: Callable
    eps: float = 0.0
    perturbation: Optional[str] = None
    theta_scale: float = 1.0
    chart_dim: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def weight(self, z, zb):
        w = self.base_weight(z, zb)
        if self.eps and self.perturbation:
            w = w + self.eps * PERTURBATIONS[self.perturbation][1](z, zb)
        return w

    def theta(self, z, zb):
        return self.theta_scale * self.theta_fn(z, zb)

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        return np.real(self.weight(z, np.conj(z)))

    def theta11(self, z):
        z = np.asarray(z, dtype=complex)
        return np.real(self.theta(z, np.conj(z)))

    @property
    def is_compact(self):
        return self.kind == "cp1_fs"

    def scaled(self, c):
        """Same weight with base form c * Theta."""
        return replace(self, theta_scale=self.theta_scale * c)

    def describe(self):
        return {"kind": self.kind, "eps": self.eps, "perturbation": self.perturbation,
                "theta_scale": self.theta_scale}


def make_model(kind, eps=0.0, perturbation="re_bump"):
    if kind not in MODEL_KINDS:
        raise GeometryError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    if eps and perturbation not in PERTURBATIONS:
        raise GeometryError(f"unknown perturbation {perturbation!r}")
    pert = perturbation if eps else None
    if kind == "cp1_fs":
        return KahlerModel(kind, _fs_weight, _fs_theta, float(eps), pert)
    if eps:
        raise GeometryError(f"perturbations are only supported on cp1_fs, not {kind}")
    if kind == "bargmann":
        return KahlerModel(kind, lambda z, zb: 0.5 * z * zb, _one)
    if kind == "landau_q1":
        return KahlerModel(kind, lambda z, zb: -0.5 * z * zb, _one)
    return KahlerModel(kind, lambda z, zb: (z * zb) ** 2, _one)


# ---------------------------------------------------------------------------
# Local jets


class LocalGeometry:
    """Jets of the metric data at one chart point.

    ``order`` is the jet order of phi; derived fields lose two orders per
    d dbar, so ``order=8`` supports Laplacians of r and squared Laplacians.
    """

    def __init__(self, model, x, order=TAYLOR_ORDER):
        self.model = model
        self.x = complex(x)
        self.order = order
        z, zb = Jet.variables(self.x, order)
        self.z, self.zb = z, zb
        self.phi = _as_jet(model.weight(z, zb), order)
        self.phi_zzb = self.phi.dz().dzb()
        self.theta11 = _as_jet(model.theta(z, zb), order).truncate(order - 2)
        th0 = self.theta11.value.real
        if not th0 > 0:
            raise GeometryError(f"Theta is not positive definite at {x}")
        self.mu = (2.0 * self.phi_zzb / self.theta11)
        self.omega11 = self.phi_zzb / math.pi

    @property
    def rdot(self):
        return float(self.mu.value.real)

    @property
    def positive(self):
        return self.omega11.value.real > DEGENERACY_TOL / (2 * math.pi)

    def require_positive(self):
        if not self.positive:
            raise GeometryError(
                f"omega is not positive at {self.x} (mu = {self.rdot:.3e}); point not in M(0)")

    # metric objects (valid on M(0)) ---------------------------------------
    @property
    def hinv(self):
        self.require_positive()
        return 1.0 / self.omega11

    @property
    def log_vomega(self):
        self.require_positive()
        return nk.log(self.omega11)

    @property
    def log_vtheta(self):
        return nk.log(self.theta11)

    def laplacian(self, g):
        """Complex Laplacian -2 h^{11} d^2/dz dzbar applied to a jet."""
        return -2.0 * self.hinv * g.dz().dzb()

    def f_jet(self, fn, order=None):
        order = self.order if order is None else order
        z, zb = Jet.variables(self.x, order)
        return _as_jet(fn(z, zb), order)

    @property
    def r(self):
        return self.laplacian(self.log_vomega)

    @property
    def r_hat(self):
        return self.laplacian(self.log_vtheta)

    @property
    def ric(self):
        """Coefficient of Ric_omega on dz^dzbar."""
        return self.log_vomega.dz().dzb()

    @property
    def rdet(self):
        """Coefficient of R^det_Theta on dz^dzbar."""
        return self.log_vtheta.dz().dzb()

    def rtm_norm_sq(self):
        """|R^TM|^2 for the Chern connection of omega (n = 1: curvature of log omega_11)."""
        c = nk.log(self.omega11).dz().dzb()
        return c * c.conj() * self.hinv * self.hinv

    def pair11(self, a, b):
        """<a dz^dzbar | b dz^dzbar>_omega for jets or scalars."""
        return a * nk.conj(b) * self.hinv * self.hinv

    def pair10(self, a, b):
        return a * nk.conj(b) * self.hinv

    def connection(self):
        """alpha_11 with A^{-1} dA = alpha_11 dz (A = h^{11})."""
        return -(self.log_vomega.dz())

    def d10(self, u):
        """D^{1,0}(u dz) coefficient on dz (x) dz, u a jet."""
        return u.dz() + u.truncate(u.order - 1) * self.connection()


def _as_jet(v, order):
    return v if isinstance(v, Jet) else Jet.constant(v, order)


# ---------------------------------------------------------------------------
# Reports and operations


@dataclass(frozen=True)
class CurvatureReport:
    point: complex
    rdot_eigs: tuple
    det_rdot: float
    signature_class: object
    r: Optional[float]
    r_hat: Optional[float]
    ric_omega: Optional[np.ndarray]
    r_det_theta: np.ndarray
    rtm_norm_sq: Optional[float]
    omega_coeffs: np.ndarray


def signature_class(eigs, tol=DEGENERACY_TOL):
    eigs = np.asarray(eigs, dtype=float)
    if np.min(np.abs(eigs)) <= tol:
        return "degenerate"
    return int(np.sum(eigs < 0))


def curvature_report(model, x, order=TAYLOR_ORDER):
    g = LocalGeometry(model, x, order)
    eigs = (g.rdot,)
    cls = signature_class(eigs)
    omega = np.array([[g.omega11.value.real]])
    rdet = np.array([[g.rdet.value.real]])
    if g.positive:
        ric = g.ric.value.real
        hinv = g.hinv.value.real
        return CurvatureReport(complex(x), eigs, float(np.prod(eigs)), cls,
                               float(g.r.value.real), float(g.r_hat.value.real),
                               np.array([[ric]]), rdet, float((ric * hinv) ** 2), omega)
    return CurvatureReport(complex(x), eigs, float(np.prod(eigs)), cls,
                           None, None, None, rdet, None, omega)


def laplacian_omega(model, f, x, iterations=1):
    if iterations not in (1, 2):
        raise GeometryError("iterations must be 1 or 2")
    g = LocalGeometry(model, x, max(TAYLOR_ORDER, 2 * iterations + 2))
    g.require_positive()
    val = g.f_jet(f)
    for _ in range(iterations):
        val = g.laplacian(val)
    return float(val.value.real) if abs(val.value.imag) < 1e-9 * max(1.0, abs(val.value)) \
        else complex(val.value)


@dataclass(frozen=True)
class FormValue:
    """Coefficients of a form in the chart frame (no factor i on (1,1)-forms).

    degree (1,0): shape (n,); (1,1): shape (n, n) on dz_j^dzbar_k;
    (2,0) tensor (1,0)x(1,0): shape (n, n) on dz_j (x) dz_k.
    """
    degree: tuple
    coefficients: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.coefficients)
        want = {(1, 0): 1, (1, 1): 2, (2, 0): 2}.get(tuple(self.degree))
        if want is None or len(shape) != want:
            raise GeometryError(f"coefficient shape {shape} does not match degree {self.degree}")


def omega_form(model, x):
    g = LocalGeometry(model, x, 2)
    return FormValue((1, 1), np.array([[1j * g.omega11.value.real]]))


def hermitian_pairing(model, a, b, x):
    if tuple(a.degree) != tuple(b.degree):
        raise GeometryError(f"bidegree mismatch {a.degree} vs {b.degree}")
    g = LocalGeometry(model, x, 2)
    hinv = np.array([[g.hinv.value.real]])
    ca, cb = np.asarray(a.coefficients), np.asarray(b.coefficients)
    if tuple(a.degree) == (1, 0):
        return complex(np.einsum("j,l,jl->", ca, np.conj(cb), hinv))
    if tuple(a.degree) == (1, 1):
        return complex(np.einsum("jk,lm,jl,km->", ca, np.conj(cb), hinv, np.conj(hinv)))
    return complex(np.einsum("jk,lm,jl,km->", ca, np.conj(cb), hinv, hinv))


def d10_covariant(model, u, x):
    """D^{1,0} of the (1,0)-form ``u(z, zbar) dz`` at x; returns a (2,0) FormValue."""
    g = LocalGeometry(model, x, 4)
    g.require_positive()
    val = g.d10(g.f_jet(u, 4))
    return FormValue((2, 0), np.array([[complex(val.value)]]))


def grid_curvature(model, nodes):
    """(mu, omega_11) on arrays of chart points."""
    nodes = np.asarray(nodes, dtype=complex)
    pzzb = np.real(nk.grid_mixed_partial(model.weight, nodes))
    return 2.0 * pzzb / model.theta11(nodes), pzzb / math.pi


def grid_poisson(model, f, g_fn, nodes):
    """{f, g} on arrays of chart points; same convention as ``poisson_bracket``."""
    nodes = np.asarray(nodes, dtype=complex)
    _, om = grid_curvature(model, nodes)
    fz, fzb = nk.grid_partials(f, nodes)
    gz, gzb = nk.grid_partials(g_fn, nodes)
    return 1j / (2 * math.pi) / om * (fz * gzb - gz * fzb)


def poisson_bracket(model, f, g_fn, x):
    """{f, g} on (M, 2 pi omega) at x (sign fixed in ``conventions``)."""
    geo = LocalGeometry(model, x, 2)
    fj, gj = geo.f_jet(f, 2), geo.f_jet(g_fn, 2)
    h = geo.hinv.value
    val = 1j / (2 * math.pi) * h * (fj.dz().value * gj.dzb().value - gj.dz().value * fj.dzb().value)
    return complex(val)


# ---------------------------------------------------------------------------
# K-coordinates


@dataclass(frozen=True)
class KChart:
    """Holomorphic recentering z = Z(u) at p with frame change s' = s e^{G}.

    In u: Theta(0) is Euclidean, phi' = phi(Z(u)) - Re G(u) = lam |u|^2 + phi_1 where
    phi_1 has no terms u^a ubar^b with a <= 1 or b <= 1 (through ``order``).
    """
    model: KahlerModel
    center: complex
    z_coeffs: np.ndarray  # Z(u) = sum z_coeffs[i] u^i
    g_coeffs: np.ndarray  # G(u) = sum g_coeffs[i] u^i
    phi: Jet              # phi'(u) jet at u = 0
    lam: float
    order: int

    def z_jet(self, order=None):
        order = self.order if order is None else order
        u, _ = Jet.variables(0.0, order)
        out = Jet.constant(0.0, order)
        for cf in reversed(self.z_coeffs):
            out = out * u + cf
        return out

    def to_chart(self, u):
        return np.polyval(self.z_coeffs[::-1], np.asarray(u, dtype=complex))

    def from_chart(self, z, iters=50):
        z = np.asarray(z, dtype=complex)
        dcoef = np.polyder(self.z_coeffs[::-1])
        u = (z - self.center) / self.z_coeffs[1]
        for _ in range(iters):
            step = (np.polyval(self.z_coeffs[::-1], u) - z) / np.polyval(dcoef, u)
            u = u - step
            if np.all(np.abs(step) < 1e-15 * (1 + np.abs(u))):
                break
        return u

    def g_value(self, u):
        return np.polyval(self.g_coeffs[::-1], np.asarray(u, dtype=complex))

    def pullback(self, fn, order=None):
        """Jet in (u, ubar) of a closed form fn(z, zbar) composed with Z."""
        order = self.order if order is None else order
        zj = self.z_jet(order)
        return _as_jet(fn(zj, zj.conj()), order)

    def volume_jet(self, order=None):
        """V_Theta in u-coordinates: Theta_11(Z(u)) |Z'(u)|^2."""
        order = self.order if order is None else order
        zj = self.z_jet(order + 1)
        zp = zj.dz()
        th = _as_jet(self.model.theta(zj, zj.conj()), order + 1).truncate(order)
        return th * zp * zp.conj()

    @property
    def phi1(self):
        c = self.phi.c.copy()
        c[1, 1] = 0.0
        return Jet(c, self.phi.order)


def k_coordinates(model, p, order=TAYLOR_ORDER):
    p = complex(p)
    th = float(np.real(model.theta(p, p.conjugate())))
    if not th > 0:
        raise GeometryError(f"Theta not positive at {p}")
    scale = 1.0 / math.sqrt(th)
    zc = np.zeros(order + 1, dtype=complex)
    zc[0], zc[1] = p, scale
    base = LocalGeometry(model, p, 2)
    pzzb = base.phi_zzb.value.real
    if abs(2 * pzzb / th) <= DEGENERACY_TOL:
        raise GeometryError(f"curvature degenerate at {p}; K-coordinates need lam != 0")

    def compose(coeffs):
        chart = KChart(model, p, coeffs, np.zeros(1), Jet.constant(0.0, order), 0.0, order)
        zj = chart.z_jet(order)
        return _as_jet(model.weight(zj, zj.conj()), order)

    for a in range(2, order):
        c = compose(zc).c[a, 1]
        zc[a] -= c / (pzzb * scale)
    phij = compose(zc)
    c = phij.c.copy()
    g = np.zeros(order + 1, dtype=complex)
    g[0] = c[0, 0].real
    for a in range(1, order + 1):
        g[a] = 2.0 * c[a, 0]
    c[:, 0] = 0.0
    c[0, :] = 0.0
    phi_prime = Jet(c, order)
    return KChart(model, p, zc, g, phi_prime, float(c[1, 1].real), order)
