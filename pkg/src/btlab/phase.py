"""Phase functions Psi(z, w) for the localized kernels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conventions import TAYLOR_ORDER
from .geometry import GeometryError, KChart, LocalGeometry, k_coordinates


class PhaseError(Exception):
    pass


@dataclass(frozen=True)
class PhaseModel:
    """Phase data at a center p.

    ``phi_taylor[a, b]`` are Taylor coefficients of phi at p (coefficient of
    (z-p)^a conj(z-p)^b). ``lam`` is the K-coordinate weight.
    """
    center: complex
    lam: tuple
    phi_taylor: np.ndarray
    mode: str
    q: int = 0
    order: int = TAYLOR_ORDER
    weight: Optional[object] = None  # closed-form phi(z, zbar)
    chart: Optional[KChart] = None

    def __post_init__(self):
        if any(l == 0 for l in self.lam):
            raise PhaseError("K-coordinates need nonzero lambda")
        if self.mode not in ("quadratic", "polarized"):
            raise PhaseError(f"unknown phase mode {self.mode!r}")
        if self.mode == "polarized" and self.q != 0:
            raise PhaseError("polarized phase is only defined for q = 0")

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        return np.real(self.weight(z, np.conj(z)))


def phase_model(model, p=0.0, mode="polarized", q=None, order=TAYLOR_ORDER):
    """Phase data of ``model`` at ``p``; q defaults to the signature class."""
    geo = LocalGeometry(model, p, order)
    mu = geo.rdot
    if abs(mu) <= 1e-8:
        raise PhaseError(f"curvature degenerate at {p}")
    if q is None:
        q = int(mu < 0)
    try:
        chart = k_coordinates(model, p, order)
        lam = (chart.lam,)
    except GeometryError as exc:
        raise PhaseError(str(exc)) from exc
    return PhaseModel(complex(p), lam, geo.phi.c.copy(), mode, q, order, model.weight, chart)


def psi_quadratic(pm, z, w):
    """i|lam||z-w|^2 + i lam (conj(z) w - z conj(w)), z and w in K-coordinates."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    lam = pm.lam[0]
    return 1j * abs(lam) * np.abs(z - w) ** 2 + 1j * lam * (np.conj(z) * w - z * np.conj(w))


def psi_polarized(pm, z, w, order=None):
    """i(phi(z) + phi(w)) - 2i sum_{a+b<=N} c_ab (z-p)^a conj(w-p)^b in chart points."""
    if pm.q != 0:
        raise PhaseError("polarized phase requires q = 0")
    order = pm.order if order is None else order
    if order > pm.order:
        raise PhaseError(f"order {order} exceeds stored jets ({pm.order})")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    dz = z - pm.center
    dw = np.conj(w - pm.center)
    c = pm.phi_taylor
    pol = np.zeros(np.broadcast(dz, dw).shape, dtype=complex)
    # Horner in dz over rows a; each row is a polynomial in dw
    for a in range(order, -1, -1):
        row = np.zeros_like(pol)
        for b in range(order - a, -1, -1):
            row = row * dw + c[a, b]
        pol = pol * dz + row
    return 1j * (pm.phi(z) + pm.phi(w)) - 2j * pol


def psi(pm, z, w):
    if pm.mode == "polarized":
        return psi_polarized(pm, z, w)
    return psi_quadratic(pm, z, w)
