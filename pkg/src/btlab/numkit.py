"""Numerical substrate: Hermitian eigensolver, Gram orthonormalization,
quadrature rules, truncated Taylor jets and power-law least squares.

Everything here is pure: inputs are never mutated and results are plain
numpy arrays or frozen dataclasses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d
from scipy.special import roots_legendre

MAX_JET_ORDER = 12
DEFAULT_JET_ORDER = 6
HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-13
RANK_TOL = 1e-10


class NumkitError(Exception):
    pass


class ConventionError(NumkitError):
    """Input violates a structural precondition (e.g. not Hermitian)."""


class UnsupportedOrderError(NumkitError):
    pass


# ---------------------------------------------------------------------------
# Hermitian eigenproblem


def hermitian_defect(a):
    a = np.asarray(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def _round_robin(n):
    """Pairings of a cyclic tournament; every index pair meets once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a >= 0 and b >= 0:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def hermitian_eig(a, tol=JACOBI_TOL, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Disjoint rotations of a round-robin ordering are applied together, which
    keeps the sweep vectorized while the result stays deterministic.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending and ``A V = V diag``.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConventionError(f"square matrix required, got shape {a.shape}")
    if hermitian_defect(a) > HERMITIAN_TOL:
        raise ConventionError(
            f"matrix is not Hermitian (relative defect {hermitian_defect(a):.3e})")
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    if n <= 1:
        return a.real.diagonal().copy(), v

    rounds = _round_robin(n)
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= tol * fro:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            app, aqq = a[p, p].real, a[q, q].real
            theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
            c, s = np.cos(theta), np.sin(theta)
            ph = np.conj(apq) / mag  # e^{-i alpha}
            # R = diag(1, e^{-i alpha}) @ [[c, s], [-s, c]]
            r_pp, r_pq = c, s
            r_qp, r_qq = -s * ph, c * ph
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * r_pp + aq * r_qp
            a[:, q] = ap * r_pq + aq * r_qq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(r_pp)[:, None] * ap + np.conj(r_qp)[:, None] * aq
            a[q, :] = np.conj(r_pq)[:, None] * ap + np.conj(r_qq)[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * r_pp + vq * r_qp
            v[:, q] = vp * r_pq + vq * r_qq
    else:
        raise NumkitError("Jacobi iteration did not converge")
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


# ---------------------------------------------------------------------------
# Orthonormalization


@dataclass(frozen=True)
class Orthonormalized:
    vectors: np.ndarray   # (rank, ...) orthonormal combinations
    transform: np.ndarray  # (rank, m): new = transform @ old
    rank: int
    dropped: int


def gram_orthonormalize(vectors, gram, rank_tol=RANK_TOL):
    """Orthonormalize the rows of ``vectors`` given ``gram[i, j] = <v_i, v_j>``.

    The Gram matrix is equilibrated by its diagonal first, then diagonalized;
    directions with eigenvalue below ``rank_tol * max`` are dropped.
    """
    gram = np.asarray(gram, dtype=complex)
    m = gram.shape[0]
    vectors = np.asarray(vectors) if vectors is not None else None
    if m == 0:
        empty = np.zeros((0,) + (() if vectors is None else vectors.shape[1:]), dtype=complex)
        return Orthonormalized(empty, np.zeros((0, 0), dtype=complex), 0, 0)
    diag = gram.diagonal().real
    if np.any(diag < 0):
        raise ConventionError("Gram matrix has negative diagonal entries")
    scale = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 0.0)
    g = scale[:, None] * gram * scale[None, :]
    lam, u = hermitian_eig(g)
    keep = lam > rank_tol * max(lam[-1], 0.0)
    lam, u = lam[keep][::-1], u[:, keep][:, ::-1]
    transform = (u.conj().T / np.sqrt(lam)[:, None]) * scale[None, :]
    new = None if vectors is None else np.tensordot(transform, vectors, axes=(1, 0))
    return Orthonormalized(new, transform, int(keep.sum()), int(m - keep.sum()))


def orthonormalize_values(values, weights, rank_tol=RANK_TOL):
    """Orthonormalize rows of sampled ``values`` in the inner product sum(w v_i conj(v_j)).

    Works on the weighted sample matrix (QR, then SVD of the small factor)
    instead of forming the Gram matrix, so conditioning is not squared.
    Singular values below ``rank_tol * max`` are dropped.
    """
    a = np.asarray(values, dtype=complex) * np.sqrt(np.asarray(weights, dtype=float))
    m = a.shape[0]
    if m == 0:
        return Orthonormalized(np.zeros((0, a.shape[1]), dtype=complex), np.zeros((0, 0), dtype=complex), 0, 0)
    norms = np.linalg.norm(a, axis=1)
    scale = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    a = scale[:, None] * a
    if a.shape[1] > m:
        # a.T = Q R with orthonormal Q, so a and R.T share left singular pairs
        a = np.linalg.qr(a.T, mode="r").T
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    keep = sv > rank_tol * max(sv[0], 0.0)
    transform = (u[:, keep].conj().T / sv[keep][:, None]) * scale[None, :]
    return Orthonormalized(transform @ values, transform, int(keep.sum()), int(m - keep.sum()))


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray    # complex chart points
    weights: np.ndarray  # positive, measure dv_M
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ConventionError("quadrature weights must be positive")

    def integrate(self, values):
        """Integrate values (trailing axis = nodes); numpy reduces pairwise."""
        return np.sum(np.asarray(values) * self.weights, axis=-1)

    @property
    def size(self):
        return self.nodes.size


def trapezoid_angles(n):
    return 2.0 * np.pi * np.arange(n) / n


def sphere_rule(n_radial, n_angular):
    """Rule for the Fubini-Study sphere in the affine chart.

    With ``s = 1/(1+|z|^2)`` the FS volume ``2 dx dy/(1+|z|^2)^2`` becomes
    ``ds dtheta`` on ``[0,1] x [0,2pi)``; Gauss-Legendre in s, trapezoid in angle.
    Total volume is 2 pi.
    """
    x, w = roots_legendre(n_radial)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    theta = trapezoid_angles(n_angular)
    r = np.sqrt((1.0 - s) / s)
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (ws[:, None] * np.full(n_angular, 2.0 * np.pi / n_angular)[None, :]).ravel()
    return QuadratureRule(nodes, weights, {"family": "sphere-gl-trapezoid",
                                           "n_radial": int(n_radial),
                                           "n_angular": int(n_angular)})


def disc_rule(t_max, n_radial, n_angular, density=None):
    """Polar rule on the disc ``|z|^2 <= t_max`` for ``dv = 2 theta_11 dx dy``.

    Gauss-Legendre in ``t = |z|^2`` (so ``2 dx dy = dt dtheta``), trapezoid
    in angle. ``density`` is the closed-form ``theta_11`` (default 1).
    """
    x, w = roots_legendre(n_radial)
    t = 0.5 * t_max * (x + 1.0)
    wt = 0.5 * t_max * w
    theta = trapezoid_angles(n_angular)
    nodes = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (wt[:, None] * np.full(n_angular, 2.0 * np.pi / n_angular)[None, :]).ravel()
    if density is not None:
        weights = weights * np.real(density(nodes, np.conj(nodes)))
    return QuadratureRule(nodes, weights, {"family": "disc-gl-trapezoid",
                                           "t_max": float(t_max),
                                           "n_radial": int(n_radial),
                                           "n_angular": int(n_angular)})


# ---------------------------------------------------------------------------
# Truncated bivariate Taylor jets


def _factorials(n):
    return np.array([math.factorial(i) for i in range(n + 1)], dtype=float)


class Jet:
    """Truncated Taylor series in two variables.

    ``kind="complex"``: the variables are ``(dz, dzbar)`` and ``conj`` maps the
    jet of f to the jet of conj(f). ``kind="real"``: the variables are real
    ``(dx1, dx2)`` and ``conj`` acts on coefficients only. Coefficients with
    total degree above ``order`` are identically zero.
    """

    __slots__ = ("c", "order", "kind")
    __array_ufunc__ = None

    def __init__(self, coeffs, order, kind="complex"):
        if order > MAX_JET_ORDER:
            raise UnsupportedOrderError(f"jet order {order} exceeds {MAX_JET_ORDER}")
        c = np.zeros((order + 1, order + 1), dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)
        na = min(coeffs.shape[0], order + 1)
        nb = min(coeffs.shape[1], order + 1)
        c[:na, :nb] = coeffs[:na, :nb]
        c[_mask(order)] = 0.0
        self.c = c
        self.order = order
        self.kind = kind

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, order, kind="complex"):
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, order, kind)

    @classmethod
    def variables(cls, point, order, kind="complex"):
        """The two coordinate jets at ``point``.

        For ``kind="complex"`` returns ``(z, zbar)`` at the complex point;
        for ``"real"`` returns ``(x1, x2)`` at the real pair.
        """
        if kind == "complex":
            v0, v1 = complex(point), complex(point).conjugate()
        else:
            v0, v1 = point
        a = np.zeros((order + 1, order + 1), dtype=complex)
        b = np.zeros_like(a)
        a[0, 0], b[0, 0] = v0, v1
        if order >= 1:
            a[1, 0] = 1.0
            b[0, 1] = 1.0
        return cls(a, order, kind), cls(b, order, kind)

    # accessors ----------------------------------------------------------
    @property
    def value(self):
        return self.c[0, 0]

    def coeff(self, a, b):
        if a + b > self.order:
            raise UnsupportedOrderError(f"coefficient ({a},{b}) beyond order {self.order}")
        return self.c[a, b]

    def partial(self, a, b):
        """Mixed partial d^a/dz^a d^b/dzbar^b at the base point."""
        return self.coeff(a, b) * math.factorial(a) * math.factorial(b)

    def truncate(self, order):
        return Jet(self.c[:order + 1, :order + 1], min(order, self.order), self.kind)

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.kind != self.kind:
                raise NumkitError("cannot mix complex and real jets")
            return other
        return Jet.constant(other, self.order, self.kind)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        o = min(self.order, other.order)
        return Jet(self.c[:o + 1, :o + 1] + other.c[:o + 1, :o + 1], o, self.kind)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order, self.kind)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other, self.order, self.kind)
        other = self._coerce(other)
        o = min(self.order, other.order)
        prod = convolve2d(self.c[:o + 1, :o + 1], other.c[:o + 1, :o + 1])
        return Jet(prod[:o + 1, :o + 1], o, self.kind)

    __rmul__ = __mul__

    def reciprocal(self):
        c0 = self.value
        if c0 == 0:
            raise ZeroDivisionError("jet with vanishing value is not invertible")
        o = self.order
        return self._compose([(-1.0) ** j / c0 ** (j + 1) for j in range(o + 1)])

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other, self.order, self.kind)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            result = Jet.constant(1.0, self.order, self.kind)
            base = self
            while p:
                if p & 1:
                    result = result * base
                base = base * base
                p >>= 1
            return result
        c0 = self.value
        coeffs = [c0 ** p]
        for j in range(1, self.order + 1):
            coeffs.append(coeffs[-1] * (p - j + 1) / (j * c0))
        return self._compose(coeffs)

    def _nilpotent(self):
        c = self.c.copy()
        c[0, 0] = 0.0
        return Jet(c, self.order, self.kind)

    def _compose(self, taylor):
        """Evaluate sum_j taylor[j] * (self - value)^j (exact by nilpotency)."""
        n = self._nilpotent()
        out = Jet.constant(taylor[-1], self.order, self.kind)
        for t in reversed(taylor[:-1]):
            out = out * n + t
        return out

    def exp(self):
        e0 = np.exp(self.value)
        return self._compose([e0 / math.factorial(j) for j in range(self.order + 1)])

    def log(self):
        c0 = self.value
        taylor = [np.log(c0)] + [(-1.0) ** (j + 1) / (j * c0 ** j)
                                 for j in range(1, self.order + 1)]
        return self._compose(taylor)

    def sqrt(self):
        return self ** 0.5

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._compose([cyc[j % 4] / math.factorial(j) for j in range(self.order + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._compose([cyc[j % 4] / math.factorial(j) for j in range(self.order + 1)])

    def conj(self):
        if self.kind == "complex":
            return Jet(np.conj(self.c.T), self.order, self.kind)
        return Jet(np.conj(self.c), self.order, self.kind)

    # differentiation ------------------------------------------------------
    def d0(self):
        """Derivative in the first variable (d/dz or d/dx1); order drops by 1."""
        o = self.order
        if o == 0:
            raise UnsupportedOrderError("cannot differentiate an order-0 jet")
        a = np.arange(1, o + 1)[:, None]
        return Jet(self.c[1:, :o] * a, o - 1, self.kind)

    def d1(self):
        """Derivative in the second variable (d/dzbar or d/dx2)."""
        o = self.order
        if o == 0:
            raise UnsupportedOrderError("cannot differentiate an order-0 jet")
        b = np.arange(1, o + 1)[None, :]
        return Jet(self.c[:o, 1:] * b, o - 1, self.kind)

    dz = d0
    dzb = d1

    def evaluate(self, d0, d1):
        """Sum the truncated series at the displacement (d0, d1)."""
        o = self.order
        p0 = np.array([d0 ** i for i in range(o + 1)])
        p1 = np.array([d1 ** j for j in range(o + 1)])
        return p0 @ self.c @ p1

    def to_real(self):
        """Rewrite a complex (z, zbar) jet in real variables z = x1 + i x2."""
        if self.kind != "complex":
            return self
        o = self.order
        x1, x2 = Jet.variables((0.0, 0.0), o, kind="real")
        z = x1 + 1j * x2
        zb = x1 - 1j * x2
        zp = [Jet.constant(1.0, o, "real")]
        zbp = [Jet.constant(1.0, o, "real")]
        for _ in range(o):
            zp.append(zp[-1] * z)
            zbp.append(zbp[-1] * zb)
        out = Jet.constant(0.0, o, "real")
        for a in range(o + 1):
            for b in range(o + 1 - a):
                if self.c[a, b] != 0:
                    out = out + (zp[a] * zbp[b]) * self.c[a, b]
        return out

    def __repr__(self):
        return f"Jet(order={self.order}, kind={self.kind}, value={self.value!r})"


def _mask(order):
    a = np.arange(order + 1)
    return (a[:, None] + a[None, :]) > order


# elementwise functions that accept plain arrays as well as jets

def log(x):
    return x.log() if isinstance(x, (Jet, GridDual)) else np.log(x)


def exp(x):
    return x.exp() if isinstance(x, (Jet, GridDual)) else np.exp(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, (Jet, GridDual)) else np.sqrt(x)


def sin(x):
    return x.sin() if isinstance(x, (Jet, GridDual)) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, (Jet, GridDual)) else np.cos(x)


def conj(x):
    return x.conj() if isinstance(x, (Jet, GridDual)) else np.conj(x)


@dataclass(frozen=True)
class JetValue:
    """Mixed partials ``partials[a, b] = d^a_z d^b_zbar fn`` at a point."""
    value: complex
    partials: np.ndarray
    order: int

    def partial(self, a, b):
        if a + b > self.order:
            raise UnsupportedOrderError(f"partial ({a},{b}) beyond order {self.order}")
        return self.partials[a, b]


def jet_of(fn, x, order=DEFAULT_JET_ORDER):
    """Jet of ``fn(z, zbar)`` at the complex point ``x``."""
    if order > MAX_JET_ORDER:
        raise UnsupportedOrderError(f"order {order} exceeds configured max {MAX_JET_ORDER}")
    z, zb = Jet.variables(x, order)
    out = fn(z, zb)
    if not isinstance(out, Jet):
        out = Jet.constant(out, order)
    return out


def hyperdual_jet(fn, x, order=DEFAULT_JET_ORDER):
    """Mixed partials of a closed-form ``fn(z, zbar)`` at ``x``, exact to rounding."""
    jet = jet_of(fn, x, order)
    fa = _factorials(order)
    partials = jet.c * fa[:, None] * fa[None, :]
    partials[_mask(order)] = 0.0
    return JetValue(jet.value, partials, order)


class GridDual:
    """Arrays of (f, f_z, f_zbar, f_{z zbar}) under first-order hyperdual arithmetic.

    z and zbar are independent hyperdual directions, so one pass of a closed
    form gives its first partials and the mixed second partial exactly at
    every grid point.
    """
    __array_ufunc__ = None

    def __init__(self, v, a, b, ab):
        self.v, self.a, self.b, self.ab = v, a, b, ab

    @staticmethod
    def _lift(x):
        if isinstance(x, GridDual):
            return x
        return GridDual(x, 0.0, 0.0, 0.0)

    def __add__(self, other):
        o = GridDual._lift(other)
        return GridDual(self.v + o.v, self.a + o.a, self.b + o.b, self.ab + o.ab)

    __radd__ = __add__

    def __neg__(self):
        return GridDual(-self.v, -self.a, -self.b, -self.ab)

    def __sub__(self, other):
        return self + (-GridDual._lift(other))

    def __rsub__(self, other):
        return GridDual._lift(other) - self

    def __mul__(self, other):
        o = GridDual._lift(other)
        return GridDual(self.v * o.v, self.a * o.v + self.v * o.a, self.b * o.v + self.v * o.b,
                        self.ab * o.v + self.a * o.b + self.b * o.a + self.v * o.ab)

    __rmul__ = __mul__

    def _chain(self, g0, g1, g2):
        return GridDual(g0, g1 * self.a, g1 * self.b, g2 * self.a * self.b + g1 * self.ab)

    def reciprocal(self):
        r = 1.0 / self.v
        return self._chain(r, -r * r, 2.0 * r ** 3)

    def __truediv__(self, other):
        if isinstance(other, GridDual):
            return self * other.reciprocal()
        return GridDual(self.v / other, self.a / other, self.b / other, self.ab / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            if p == 0:
                return GridDual._lift(np.ones_like(self.v))
            if p == 1:
                return self
            return self._chain(self.v ** p, p * self.v ** (p - 1), p * (p - 1) * self.v ** (p - 2))
        v = self.v
        return self._chain(v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def exp(self):
        e = np.exp(self.v)
        return self._chain(e, e, e)

    def log(self):
        return self._chain(np.log(self.v), 1.0 / self.v, -1.0 / self.v ** 2)

    def sqrt(self):
        return self ** 0.5

    def sin(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self._chain(c, -s, -c)

    def conj(self):
        # d/dz conj(f) = conj(df/dzbar)
        return GridDual(np.conj(self.v), np.conj(self.b), np.conj(self.a), np.conj(self.ab))


def _grid_eval(fn, nodes):
    z = np.asarray(nodes, dtype=complex)
    one, zero = np.ones_like(z), np.zeros_like(z)
    out = fn(GridDual(z, one, zero, zero), GridDual(np.conj(z), zero, one, zero))
    out = GridDual._lift(out)
    return [np.broadcast_to(np.asarray(c, dtype=complex), z.shape) for c in (out.a, out.b, out.ab)]


def grid_partials(fn, nodes):
    """d/dz and d/dzbar of a closed form fn(z, zb) on arrays of points."""
    fz, fzb, _ = _grid_eval(fn, nodes)
    return fz, fzb


def grid_mixed_partial(fn, nodes):
    """d^2 fn / dz dzbar of a closed form on arrays of points."""
    return _grid_eval(fn, nodes)[2]


# ---------------------------------------------------------------------------
# Least squares in powers of k


@dataclass(frozen=True)
class PowerFit:
    exponents: tuple
    coefficients: np.ndarray
    residual_rms: float


def least_squares_fit(ks, values, exponents):
    """Fit ``values ~ sum_j c_j k^{p_j}``; columns are scaled before solving."""
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values)
    exponents = tuple(float(p) for p in exponents)
    if ks.size != values.size:
        raise NumkitError("ks and values differ in length")
    if ks.size < len(exponents):
        raise NumkitError(
            f"underdetermined fit: {ks.size} samples for {len(exponents)} exponents")
    if len(set(ks.tolist())) != ks.size:
        raise NumkitError("k values must be distinct")
    design = ks[:, None] ** np.array(exponents)[None, :]
    col = np.linalg.norm(design, axis=0)
    coef, *_ = np.linalg.lstsq(design / col, values, rcond=None)
    coef = coef / col
    resid = values - design @ coef
    rms = float(np.sqrt(np.mean(np.abs(resid) ** 2)))
    return PowerFit(exponents, coef, rms)
