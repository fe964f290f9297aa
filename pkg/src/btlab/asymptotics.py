"""Predicted expansion coefficients.

Closed forms for b_{f,1}, b_{f,2}, the composition corrections, star product
coefficients C_0..C_2, a stationary phase engine in real jets, and the
coefficient recursion driven by measured Bergman symbol jets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numkit as nk
from .conventions import TAYLOR_ORDER
from .geometry import GeometryError, LocalGeometry, k_coordinates
from .numkit import Jet
from .symbols import get_symbol

PI = math.pi


class AsymptoticsError(Exception):
    pass


@dataclass(frozen=True)
class CoefficientSet:
    point: complex
    values: tuple
    provenance: str
    label: str = "f"
    extras: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, j):
        return self.values[j]


# ---------------------------------------------------------------------------
# Stationary phase


@dataclass(frozen=True)
class StationaryPhaseProblem:
    """Integral of e^{ikF} u V over R^2 against dlambda = 2 dx (real jets at 0)."""
    F: Jet
    u: Jet
    V: Optional[Jet] = None
    dim: int = 2

    def __post_init__(self):
        for j in (self.F, self.u) + ((self.V,) if self.V is not None else ()):
            if j.kind != "real":
                raise AsymptoticsError("stationary phase works with real-variable jets")
        if self.dim != 2:
            raise AsymptoticsError("only real dimension 2 is implemented")
        c = self.F.c
        if abs(c[0, 0].imag) > 1e-12:
            raise AsymptoticsError("Im F(0) must vanish")
        if self.F.order < 2 or abs(c[1, 0]) > 1e-12 or abs(c[0, 1]) > 1e-12:
            raise AsymptoticsError("F'(0) must vanish")
        if abs(np.linalg.det(self.hessian())) < 1e-14:
            raise AsymptoticsError("F''(0) is degenerate")

    def hessian(self):
        c = self.F.c
        return np.array([[2 * c[2, 0], c[1, 1]], [c[1, 1], 2 * c[0, 2]]], dtype=complex)

    def remainder(self):
        """h = F - F(0) - <F''(0) x, x>/2."""
        c = self.F.c.copy()
        c[0, 0] = c[1, 0] = c[0, 1] = 0.0
        c[2, 0] = c[1, 1] = c[0, 2] = 0.0
        return Jet(c, self.F.order, "real")


def _apply_form(jet, a):
    """<A D, D> jet with D = -i grad, i.e. -sum A_ab d_a d_b."""
    d00 = jet.d0().d0()
    d01 = jet.d0().d1()
    d11 = jet.d1().d1()
    return -(d00 * a[0, 0] + d01 * (a[0, 1] + a[1, 0]) + d11 * a[1, 1])


def required_order(N):
    """Highest derivative used by L_0..L_{N-1}: 2 nu_max with nu_max = 3(N-1)."""
    return 6 * (N - 1)


def stationary_phase_terms(problem, k, N):
    """Return (approximation, [L_0 u, ..., L_{N-1} u])."""
    need = required_order(N)
    orders = [problem.F.order, problem.u.order] + ([problem.V.order] if problem.V is not None else [])
    if min(orders) < need:
        raise AsymptoticsError(f"jets of order {need} needed for N={N}; got {min(orders)}")
    hess = problem.hessian()
    a = np.linalg.inv(hess)
    h = problem.remainder()
    order = max(need, 0)
    g0 = problem.u.truncate(order) if order < problem.u.order else problem.u
    if problem.V is not None:
        g0 = g0 * problem.V
    terms = []
    for j in range(N):
        total = 0.0 + 0.0j
        for mu in range(0, 2 * j + 1):
            nu = j + mu
            if 2 * nu < 3 * mu:
                continue
            g = g0
            for _ in range(mu):
                g = g * h
            for _ in range(nu):
                g = _apply_form(g, a)
            total += (1j) ** (-j) * 2.0 ** (-nu) * g.value / (math.factorial(nu) * math.factorial(mu))
        terms.append(complex(total))
    ev = np.linalg.eigvals(k * hess / (2j * PI))
    pref = 2.0 * np.exp(1j * k * problem.F.value) * np.prod(1.0 / np.sqrt(ev.astype(complex)))
    approx = pref * sum(t * k ** (-j) for j, t in enumerate(terms))
    return complex(approx), terms


# ---------------------------------------------------------------------------
# Closed forms


def _jet(geo, f, order=None):
    if isinstance(f, Jet):
        return f
    return geo.f_jet(get_symbol(f).fn if not callable(f) else f, order)


def _closed_from_jet(geo, fj, depth):
    geo.require_positive()
    det = geo.rdot
    pref = det / (2 * PI)
    f0 = fj.value
    vals = [pref * f0]
    if depth >= 1:
        r, rh = geo.r, geo.r_hat
        lapf = geo.laplacian(fj)
        vals.append(pref * (f0 * (rh.value / (4 * PI) - r.value / (8 * PI)) - lapf.value / (4 * PI)))
    if depth >= 2:
        h = geo.hinv.value
        ric, rdet = geo.ric, geo.rdet
        r0, rh0 = geo.r.value, geo.r_hat.value
        lap_r = geo.laplacian(geo.r).value
        lap_rh = geo.laplacian(geo.r_hat).value
        ric0, rdet0 = ric.value, rdet.value
        geom = (r0 ** 2 / (128 * PI ** 2) - r0 * rh0 / (32 * PI ** 2) + rh0 ** 2 / (32 * PI ** 2)
                - lap_rh / (32 * PI ** 2)
                - abs(rdet0) ** 2 * h * h / (8 * PI ** 2)
                + (ric0 * np.conj(rdet0)) * h * h / (8 * PI ** 2)
                + lap_r / (96 * PI ** 2)
                - abs(ric0) ** 2 * h * h / (24 * PI ** 2)
                + geo.rtm_norm_sq().value / (96 * PI ** 2))
        lapf = geo.laplacian(fj)
        lap2f = geo.laplacian(lapf).value
        ddbar = -fj.dz().dzb().value  # dbar d f = -f_{z zbar} dz^dzbar
        sym = (lapf.value * (-rh0 + 0.5 * r0) / (16 * PI ** 2)
               - ddbar * np.conj(rdet0) * h * h / (4 * PI ** 2)
               + ddbar * np.conj(ric0) * h * h / (8 * PI ** 2)
               + lap2f / (32 * PI ** 2))
        vals.append(pref * (f0 * geom + sym))
    return [complex(v) for v in vals]


def _clean(vals, real):
    return tuple(float(np.real(v)) if real else complex(v) for v in vals)


def closed_form_coefficients(model, f, x, depth=2):
    if depth not in (0, 1, 2):
        raise AsymptoticsError("depth must be 0, 1 or 2")
    geo = LocalGeometry(model, x, TAYLOR_ORDER)
    try:
        geo.require_positive()
    except GeometryError as exc:
        raise AsymptoticsError(f"closed forms need x in M(0): {exc}") from exc
    sym = get_symbol(f) if not isinstance(f, Jet) else None
    fj = f if isinstance(f, Jet) else geo.f_jet(sym.fn)
    vals = _closed_from_jet(geo, fj, depth)
    real = sym.real if sym is not None else False
    return CoefficientSet(complex(x), _clean(vals, real), "closed_form",
                          sym.name if sym else "jet")


def _pair_terms(geo, fj, gj):
    """Pointwise ingredients shared by the composition corrections."""
    h = geo.hinv.value
    fz, gzb = fj.dz(), gj.dzb()
    return h, fz, gzb


def composition_coefficients(model, f, g, x, depth=2):
    if depth not in (0, 1, 2):
        raise AsymptoticsError("depth must be 0, 1 or 2")
    geo = LocalGeometry(model, x, TAYLOR_ORDER)
    try:
        geo.require_positive()
    except GeometryError as exc:
        raise AsymptoticsError(f"composition formulas need x in M(0): {exc}") from exc
    fs, gs = get_symbol(f), get_symbol(g)
    fj, gj = geo.f_jet(fs.fn), geo.f_jet(gs.fn)
    vals = _composition_from_jets(geo, fj, gj, depth)
    return CoefficientSet(complex(x), tuple(complex(v) for v in vals), "closed_form",
                          f"{fs.name},{gs.name}")


def _composition_from_jets(geo, fj, gj, depth):
    base = _closed_from_jet(geo, fj * gj, depth)
    pref = geo.rdot / (2 * PI)
    vals = [base[0]]
    if depth >= 1:
        h, fz, gzb = _pair_terms(geo, fj, gj)
        pair = fz.value * gzb.value * h  # <df | d conj g>
        vals.append(base[1] + pref * (-pair / (2 * PI)))
    if depth >= 2:
        r0, rh0 = geo.r.value, geo.r_hat.value
        ric0, rdet0 = geo.ric.value, geo.rdet.value
        wedge = -fz.value * gzb.value  # dbar g ^ d f on dz^dzbar
        lapf, lapg = geo.laplacian(fj), geo.laplacian(gj)
        d_f = geo.d10(fz)
        gbar_z = gj.conj().dz()
        d_gbar = geo.d10(gbar_z)
        corr = (-wedge * np.conj(ric0) * h * h / (4 * PI ** 2)
                + wedge * np.conj(rdet0) * h * h / (4 * PI ** 2)
                + lapf.dz().value * gzb.value * h / (8 * PI ** 2)
                + lapg.dzb().value * fz.value * h / (8 * PI ** 2)
                - d_f.value * np.conj(d_gbar.value) * h * h / (8 * PI ** 2)
                - fj.dz().dzb().value * gj.dz().dzb().value * h * h / (4 * PI ** 2)
                + pair * (-rh0 + 0.5 * r0) / (8 * PI ** 2))
        vals.append(base[2] + pref * corr)
    return vals


def c1_jet(geo, fj, gj):
    """C_1(f, g) = -(1/2pi) <df | d conj g> as a jet."""
    return -(fj.dz() * gj.dzb() * geo.hinv) / (2 * PI)


def star_product(model, f, g, x, order=2):
    """[C_0, C_1, C_2](f, g)(x) by order matching of the composition expansion."""
    if order not in (0, 1, 2):
        raise AsymptoticsError("order must be 0, 1 or 2")
    geo = LocalGeometry(model, x, TAYLOR_ORDER)
    geo.require_positive()
    fj = geo.f_jet(get_symbol(f).fn)
    gj = geo.f_jet(get_symbol(g).fn)
    return [complex(v) for v in _star_from_jets(geo, fj, gj, order)]


def _star_from_jets(geo, fj, gj, order):
    pref = geo.rdot / (2 * PI)
    out = [(fj * gj).value]
    if order >= 1:
        bfg = _composition_from_jets(geo, fj, gj, order)
        bprod = _closed_from_jet(geo, fj * gj, order)
        out.append((bfg[1] - bprod[1]) / pref)
        if order >= 2:
            c1 = c1_jet(geo, fj, gj)
            b_c1 = _closed_from_jet(geo, c1, 1)
            out.append((bfg[2] - bprod[2] - b_c1[1]) / pref)
    return out


def star_c1_jet(geo, fj, gj):
    return c1_jet(geo, fj, gj)


# ---------------------------------------------------------------------------
# Recursion


@dataclass(frozen=True)
class BergmanJets:
    """Taylor coefficients b_s[n] of u -> b_s(u, 0) in K-coordinates at ``point``."""
    point: complex
    coeffs: np.ndarray  # shape (depth+1, order+1)
    ladder: tuple
    residuals: np.ndarray
    lam: float


def _holomorphic_jet(coeffs, order):
    c = np.zeros((order + 1, order + 1), dtype=complex)
    n = min(len(coeffs), order + 1)
    c[:n, 0] = coeffs[:n]
    return Jet(c, order)


def bergman_symbol_jet(basis, chart, order=4):
    """Holomorphic jet of B_k(u) = K(Z(u), p) e^{-k phi(p)} e^{-k G(u)} (exact from the basis)."""
    if basis.q != 0:
        raise AsymptoticsError("Bergman symbol jets need a q = 0 basis")
    k = basis.k
    p = chart.center
    cpoly = basis.poly_coeffs()                     # dim x M
    m = basis.dictionary[:, 0]
    phi_p = float(basis.model.phi(p))
    # conj(s_j(p)) e^{-k phi(p)} via localized values
    loc = basis.values_at(p)[:, 0]                  # s_j(p) e^{-k phi(p)}
    a = cpoly.T @ loc.conj()                        # coefficients of K(z,p) e^{-k phi(p)}
    # Taylor shift to p: t_n = sum_m a_m binom(m, n) p^{m-n}
    t = np.zeros(order + 1, dtype=complex)
    for n in range(order + 1):
        sel = m >= n
        binom = np.array([math.comb(int(mm), n) for mm in m[sel]], dtype=float)
        t[n] = np.sum(a[sel] * binom * p ** (m[sel] - n)) if np.any(sel) else 0.0
    zj = chart.z_jet(order)
    dz = zj - p
    poly = Jet.constant(0.0, order)
    for n in range(order, -1, -1):
        poly = poly * dz + t[n]
    g = _holomorphic_jet(chart.g_coeffs, order)
    # G(0) = phi(p), so e^{-k G(u)} = e^{-k phi(p)} e^{-k (G(u) - G(0))}
    out = poly * (-(g - g.value) * k).exp() * math.exp(-k * phi_p)
    return np.array([out.c[n, 0] for n in range(order + 1)])


def measure_bergman_jets(model, p, ladder=(24, 32, 40, 48, 64, 80, 96), depth=2, order=4,
                         basis_factory=None):
    """Fit b_s(u, 0) jets from exact basis jets across a k ladder."""
    from .quantum import build_basis
    chart = k_coordinates(model, p, TAYLOR_ORDER)
    factory = basis_factory or (lambda kk: build_basis(model, kk))
    rows = []
    for kk in ladder:
        rows.append(bergman_symbol_jet(factory(kk), chart, order))
    rows = np.array(rows)
    exps = [1 - s for s in range(depth + 1)] + [-depth - g for g in range(3)]
    if len(ladder) < len(exps):
        raise AsymptoticsError("ladder too short for the Bergman jet fit")
    coeffs = np.zeros((depth + 1, order + 1), dtype=complex)
    res = np.zeros(order + 1)
    for n in range(order + 1):
        fit = nk.least_squares_fit(ladder, rows[:, n], exps)
        coeffs[:, n] = fit.coefficients[:depth + 1]
        res[n] = fit.residual_rms
    return BergmanJets(complex(p), coeffs, tuple(ladder), res, chart.lam)


def coefficient_recursion(model, f, p, depth=1, bergman_jets=None, ladder=None):
    """b_{f,j}(p) for j <= depth from the stationary phase recursion in K-coordinates."""
    if depth not in (0, 1, 2):
        raise AsymptoticsError("depth must be 0, 1 or 2")
    if bergman_jets is None:
        bergman_jets = measure_bergman_jets(model, p, **({"ladder": ladder} if ladder else {}))
    if bergman_jets.coeffs.shape[0] < depth + 1:
        raise AsymptoticsError("Bergman jets missing for the requested depth")
    chart = k_coordinates(model, p, TAYLOR_ORDER)
    order = TAYLOR_ORDER
    lam = chart.lam
    sym = get_symbol(f)
    fj = chart.pullback(sym.fn, order)
    vj = chart.volume_jet(order)
    phi1 = chart.phi1
    bj = [_holomorphic_jet(bergman_jets.coeffs[s], order) for s in range(depth + 1)]

    def delta0(j):
        return j.dz().dzb() / lam

    vals = []
    for j in range(depth + 1):
        total = 0.0 + 0.0j
        for m in range(j + 1):
            for mu in range(0, m + 1):
                nu = m + mu
                if 2 * nu < 4 * mu:
                    continue
                for s in range(j - m + 1):
                    t = j - m - s
                    g = vj * fj * bj[s].conj() * bj[t]
                    for _ in range(mu):
                        g = g * phi1
                    for _ in range(nu):
                        g = delta0(g)
                    total += (-1) ** mu * 2.0 ** (-m) * g.value / (math.factorial(nu) * math.factorial(mu))
        vals.append(2 * PI / (2 * lam) * total)
    return CoefficientSet(complex(p), _clean(vals, sym.real), "recursion", sym.name,
                          {"lam": lam, "bergman_jets": bergman_jets.coeffs.tolist(),
                           "ladder": list(bergman_jets.ladder)})
