"""Measured kernels and operators confronted with the predicted laws."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numkit as nk
from .asymptotics import (AsymptoticsError, CoefficientSet, StationaryPhaseProblem,
                          closed_form_coefficients, coefficient_recursion,
                          composition_coefficients, measure_bergman_jets, star_product,
                          stationary_phase_terms)
from .geometry import (LocalGeometry, curvature_report, grid_curvature, grid_poisson,
                       make_model, poisson_bracket)
from .quantum import build_basis, default_rule, spectral_space_q1
from .symbols import get_symbol
from .toeplitz import (assemble, assemble_values, compose, identity, kernel_values,
                       linear_combination, trace, weighted_trace)

PI = math.pi


class ExperimentError(Exception):
    pass


# ---------------------------------------------------------------------------
# Shared plumbing


def map_levels(fn, ladder, threads=1):
    """fn over ladder levels; results in ladder order regardless of thread count."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, ladder))
    return [fn(k) for k in ladder]


def make_basis(model, k, quadrature=None, N=None):
    quadrature = quadrature or {}
    rule = None
    if quadrature:
        rule = default_rule(model, k, None, quadrature.get("n_radial"), quadrature.get("n_angular"),
                            quadrature.get("t_max"))
    if model.kind == "landau_q1":
        return spectral_space_q1(model, k, N if N is not None else 8, rule=rule)
    return build_basis(model, k, rule=rule)


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else float("inf")


def _cx(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


# ---------------------------------------------------------------------------
# Diagonal expansions


@dataclass(frozen=True)
class ExpansionFit:
    point: object
    k_ladder: tuple
    measured: tuple
    exponents: tuple
    coefficients: tuple
    predicted: Optional[CoefficientSet]
    rel_errors: tuple
    residual_rms: float
    depth: int
    guard: int

    def __post_init__(self):
        ks = list(self.k_ladder)
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ExperimentError("k ladder must be strictly increasing")
        if len(ks) < len(self.exponents) + 1 and self.guard > 0:
            raise ExperimentError(
                f"ladder of length {len(ks)} too short for {len(self.exponents)} exponents plus one")


def fit_series(ks, values, depth, guard=1, n=1):
    """Fit sum_j c_j k^{n-j}, j <= depth + guard."""
    exps = tuple(n - j for j in range(depth + guard + 1))
    return nk.least_squares_fit(ks, values, exps)


def _make_fit(point, ks, vals, depth, guard, predicted):
    fit = fit_series(ks, vals, depth, guard)
    coeffs = tuple(_cx(c) for c in fit.coefficients[:depth + 1])
    rel = ()
    if predicted is not None:
        rel = tuple(_rel(coeffs[j], predicted.values[j]) for j in range(depth + 1))
    return ExpansionFit(point, tuple(ks), tuple(_cx(v) for v in vals), fit.exponents,
                        coeffs, predicted, rel, fit.residual_rms, depth, guard)


def diagonal_values(model, f, points, ladder, quadrature=None, threads=1, g=None):
    """T_f(x,x) (or (T_f T_g)(x,x)) at each point and level: array (levels, points)."""
    points = np.asarray(points, dtype=complex)

    def level(k):
        basis = make_basis(model, k, quadrature)
        op = assemble(basis, f)
        if g is not None:
            op = compose(op, assemble(basis, g))
        return kernel_values(op, points, points)

    return np.array(map_levels(level, ladder, threads))


def fit_diagonal_expansion(model, f, x, k_ladder, depth=1, guard=1, quadrature=None,
                           measured=None, threads=1):
    ks = list(k_ladder)
    if measured is None:
        measured = diagonal_values(model, f, [x], ks, quadrature, threads)[:, 0]
    sym = get_symbol(f)
    vals = np.real(measured) if sym.real else np.asarray(measured)
    try:
        pred = closed_form_coefficients(model, f, x, depth)
    except AsymptoticsError:
        pred = None
    return _make_fit(_cx(x), ks, vals, depth, guard, pred)


def fit_composition_expansion(model, f, g, x, k_ladder, depth=1, guard=1, quadrature=None,
                              measured=None, threads=1):
    ks = list(k_ladder)
    if measured is None:
        measured = diagonal_values(model, f, [x], ks, quadrature, threads, g=g)[:, 0]
    pred = composition_coefficients(model, f, g, x, depth)
    return _make_fit(_cx(x), ks, np.asarray(measured), depth, guard, pred)


# ---------------------------------------------------------------------------
# Traces


def curvature_integral(model, f, rule):
    """(2 pi)^{-1} int f |det Rdot| dv over the rule."""
    mu, _ = grid_curvature(model, rule.nodes)
    fv = get_symbol(f).on_grid(rule.nodes)
    return float(np.real(rule.integrate(fv * np.abs(mu)))) / (2 * PI)


def weyl_trace_check(model, f, k_ladder, quadrature=None, threads=1, factor=3.0):
    def level(k):
        basis = make_basis(model, k, quadrature)
        op = assemble(basis, f)
        tr = trace(op)
        wtr = weighted_trace(basis, f)
        integral = curvature_integral(model, f, basis.grid)
        return tr, wtr, integral

    rows = map_levels(level, list(k_ladder), threads)
    out = []
    for k, (tr, wtr, integral) in zip(k_ladder, rows):
        dev = (tr - k * integral) / k
        out.append({"k": int(k), "trace": tr, "weighted_trace": wtr, "integral": integral,
                    "deviation": dev, "bound": factor / k,
                    "within_bound": bool(abs(dev) <= factor / k),
                    "trace_identity_rel": abs(tr - wtr) / max(1.0, abs(tr))})
    devs = [abs(r["deviation"]) for r in out]
    monotone = all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    return {"levels": out, "monotone": bool(monotone),
            "all_within_bound": bool(all(r["within_bound"] for r in out))}


# ---------------------------------------------------------------------------
# Off-diagonal decay


@dataclass(frozen=True)
class DecayProfile:
    pairs: tuple            # (dist, k, |K|)
    fitted_rate: float
    reference_rate: float
    closed_form_rate: Optional[float]
    threshold_check: tuple  # (k, dist, |K| k^{-n}, bound, ok)
    intercepts: tuple       # (k, -log|K(x,x)|, -log(k b0))

    @property
    def threshold_ok(self):
        return all(t[4] for t in self.threshold_check)


def default_pairs(base, k, radius=0.3, step=0.05, angle=0.0, c0=3.0):
    direction = np.exp(1j * angle)
    near = [base + step * j * direction for j in range(int(round(radius / step)) + 1)]
    far = base + c0 * math.log(k) / math.sqrt(k) * direction
    return near, far


def decay_profile(model, f, k_ladder, pair_generator=None, base=0.0, quadrature=None,
                  threads=1, radius=0.3, c0=3.0, angle=0.0):
    pair_generator = pair_generator or (lambda k: default_pairs(base, k, radius, 0.05, angle, c0))
    sym = get_symbol(f)

    def level(k):
        basis = make_basis(model, k, quadrature)
        op = identity(basis) if sym.name == "1" else assemble(basis, f)
        near, far = pair_generator(k)
        near = np.asarray(near, dtype=complex)
        kv = np.abs(kernel_values(op, np.full(near.shape, base), near))
        kf = abs(kernel_values(op, np.array([base]), np.array([far]))[0])
        return near, kv, far, kf

    rows = map_levels(level, list(k_ladder), threads)
    pairs, thr, inter = [], [], []
    xs, ys, kd = [], [], []
    geo = LocalGeometry(model, base, 2)
    b0 = abs(geo.rdot) / (2 * PI) * abs(complex(sym.fn(complex(base), complex(base).conjugate())))
    for k, (near, kv, far, kf) in zip(k_ladder, rows):
        d = np.abs(near - base)
        for dist, val in zip(d, kv):
            pairs.append((float(dist), int(k), float(val)))
        diag = kv[np.argmin(d)]
        ok = d <= radius + 1e-12
        with np.errstate(divide="ignore"):
            y = -np.log(kv[ok]) + np.log(diag)
        xs.extend((k * d[ok] ** 2).tolist())
        ys.extend(y.tolist())
        kd.extend([(k, dd) for dd in d[ok]])
        dist_far = abs(far - base)
        pairs.append((float(dist_far), int(k), float(kf)))
        scaled = kf / k
        thr.append((int(k), float(dist_far), float(scaled), float(k) ** -2, bool(scaled <= float(k) ** -2)))
        inter.append((int(k), float(-np.log(diag)), float(-np.log(k * b0)) if b0 > 0 else None))
    xs, ys = np.array(xs), np.array(ys)
    rate = _origin_slope(xs, ys)
    ref = _reference_rate(model, base)
    closed = None
    if model.kind == "cp1_fs" and model.eps == 0 and base == 0:
        # |K(0,w)| = (k+1)/2pi (1+|w|^2)^{-k/2}, fitted on the same pairs
        yc = np.array([0.5 * k * math.log1p(dd * dd) for k, dd in kd])
        closed = _origin_slope(xs, yc)
    return DecayProfile(tuple(pairs), rate, ref, closed, tuple(thr), tuple(inter))


def _origin_slope(xs, ys):
    if not np.all(np.isfinite(ys)):
        return float("nan")
    denom = float(np.sum(xs * xs))
    return float(np.sum(xs * ys) / denom) if denom > 0 else float("nan")


def _reference_rate(model, base):
    """Gaussian rate of |K| in the chart: Im Psi ~ phi_{z zbar}(base) |x-y|^2."""
    geo = LocalGeometry(model, base, 2)
    return float(geo.phi_zzb.value.real)


# ---------------------------------------------------------------------------
# Degenerate and Landau probes


def degenerate_probe(k_ladder, f="1", points=(0.0, 0.5), quadrature=None, threads=1):
    model = make_model("degenerate_quartic")
    vals = diagonal_values(model, f, list(points), list(k_ladder), quadrature, threads)
    out = {}
    for i, p in enumerate(points):
        per_k = [float(np.real(vals[j, i])) / k for j, k in enumerate(k_ladder)]
        out[str(_cx(p))] = {"value_over_k": per_k,
                            "ratio_last_first": per_k[-1] / per_k[0] if per_k[0] else None,
                            "mu": LocalGeometry(model, p, 2).rdot}
    return out


def landau_leading_check(k_ladder, f="1", point=0.0, N=8, quadrature=None, threads=1):
    model = make_model("landau_q1")
    sym = get_symbol(f)

    def level(k):
        basis = make_basis(model, k, quadrature, N)
        op = assemble(basis, f)
        val = kernel_values(op, np.array([point]), np.array([point]))[0]
        return basis.dim, float(np.real(val)), basis.diagnostics, basis.gram_residual()

    rows = map_levels(level, list(k_ladder), threads)
    geo = LocalGeometry(model, point, 2)
    fval = float(np.real(sym.fn(complex(point), complex(point).conjugate())))
    out = []
    for k, (dim, val, diag, gres) in zip(k_ladder, rows):
        pred = k / (2 * PI) * abs(geo.rdot) * fval
        out.append({"k": int(k), "dim": dim, "dzbar": val, "dz": 0.0, "predicted": pred,
                    "rel_error": _rel(val, pred) if pred else None,
                    "value_over_k_scale": val / (k / (2 * PI)),
                    "lowest_eigenvalue": diag.get("lowest_eigenvalue"),
                    "cutoff": diag.get("cutoff"), "gram_residual": gres})
    return {"levels": out, "dz_component": "structural zero (dictionary has no dz part)",
            "signature_class": 1 if geo.rdot < 0 else 0}


# ---------------------------------------------------------------------------
# Operator laws


def product_and_commutator(model, f, g, k_ladder, quadrature=None, threads=1):
    """||T_f T_g - T_fg|| and ||k[T_f,T_g] - i T_{f,g}|| per level."""
    fs, gs = get_symbol(f), get_symbol(g)

    def level(k):
        basis = make_basis(model, k, quadrature)
        tf, tg = assemble(basis, fs), assemble(basis, gs)
        nodes = basis.grid.nodes
        fg = assemble_values(basis, fs.on_grid(nodes) * gs.on_grid(nodes), f"{fs.name}*{gs.name}")
        pb = grid_poisson(model, fs.fn, gs.fn, nodes)
        tpb = assemble_values(basis, np.real(pb) if fs.real and gs.real else pb, "poisson")
        prod = linear_combination([(1.0, compose(tf, tg)), (-1.0, fg)], "prod-defect").norm()
        comm = linear_combination([(k, compose(tf, tg)), (-k, compose(tg, tf)), (-1j, tpb)],
                                  "comm-defect").norm()
        return prod, comm

    rows = map_levels(level, list(k_ladder), threads)
    return [{"k": int(k), "product_defect": p, "commutator_defect": c}
            for k, (p, c) in zip(k_ladder, rows)]


def _ratio(levels, key, k_lo, k_hi):
    lut = {r["k"]: r[key] for r in levels}
    if k_lo not in lut or k_hi not in lut:
        raise ExperimentError(f"ratio levels {k_lo}, {k_hi} missing from the ladder")
    return lut[k_hi] / lut[k_lo]


# ---------------------------------------------------------------------------
# Stationary phase demos


def gaussian_moment(px, py, a, b, k):
    """int x^px y^py exp(-k(a x^2 + b y^2)) dlambda, dlambda = 2 dx dy."""
    def one(p, c):
        if p % 2:
            return 0.0
        return math.gamma((p + 1) / 2) / (k * c) ** ((p + 1) / 2)
    return 2.0 * one(px, a) * one(py, b)


def quartic_reference(k):
    """int exp(-k(|x|^2 + x1^4)) dlambda by adaptive quadrature."""
    from scipy.integrate import quad
    one = quad(lambda t: math.exp(-k * (t * t + t ** 4)), -np.inf, np.inf,
               epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return 2.0 * one * math.sqrt(PI / k)


def stationary_phase_cases(k_ladder, N=3, order=12):
    x1, x2 = nk.Jet.variables((0.0, 0.0), order, "real")
    one = nk.Jet.constant(1.0, order, "real")
    a, b = 1.0, 2.0
    quad_F = 1j * (a * x1 * x1 + b * x2 * x2)
    # polynomial amplitude of degree < 2N
    poly = [(1.0, 0, 0), (0.5, 2, 0), (-0.25, 1, 1), (0.75, 0, 2), (0.1, 2, 2), (0.2, 4, 0)]
    u = sum((c * x1 ** i * x2 ** j for c, i, j in poly), 0.0 * one)
    quartic_F = 1j * (x1 * x1 + x2 * x2) + 1j * x1 ** 4
    out = []
    for k in k_ladder:
        approx, _ = stationary_phase_terms(StationaryPhaseProblem(quad_F, u), k, N)
        exact = sum(c * gaussian_moment(i, j, a, b, k) for c, i, j in poly)
        qa, terms = stationary_phase_terms(StationaryPhaseProblem(quartic_F, one), k, N)
        qref = quartic_reference(k)
        out.append({"k": float(k), "quadratic_rel": abs(approx - exact) / abs(exact),
                    "quadratic_value": approx, "quadratic_exact": exact,
                    "quartic_value": qa, "quartic_reference": qref,
                    "quartic_rel": abs(qa - qref) / abs(qref),
                    "terms": [complex(t) for t in terms]})
    return out


# ---------------------------------------------------------------------------
# Experiment runners (config -> results, pass)


def _points(cfg, default=(0.0,)):
    pts = cfg.get("points")
    if pts is None:
        return list(default)
    return [parse_point(p) for p in pts]


def parse_point(p):
    if isinstance(p, (list, tuple)) and len(p) == 2:
        return complex(float(p[0]), float(p[1]))
    if isinstance(p, str):
        return complex(p.replace(" ", "").replace("i", "j"))
    return complex(p)


def _model(cfg):
    m = cfg["model"]
    return make_model(m["kind"], m.get("eps", 0.0), m.get("perturbation", "re_bump"))


def run_curvature(cfg, ctx):
    model = _model(cfg)
    pts = _points(cfg, (0.0, 0.3 + 0.2j, -0.5 + 0.1j))
    rows, ok = [], True
    for p in pts:
        rep = curvature_report(model, p)
        det_ok = abs(rep.det_rdot - float(np.prod(rep.rdot_eigs))) <= 1e-10
        cls_ok = rep.signature_class == ("degenerate" if min(abs(e) for e in rep.rdot_eigs) <= 1e-8
                                         else sum(e < 0 for e in rep.rdot_eigs))
        ok &= det_ok and cls_ok
        rows.append({"point": _cx(p), "rdot_eigs": list(rep.rdot_eigs), "det_rdot": rep.det_rdot,
                     "signature_class": rep.signature_class, "r": rep.r, "r_hat": rep.r_hat,
                     "ric_omega": None if rep.ric_omega is None else float(rep.ric_omega[0, 0]),
                     "r_det_theta": float(rep.r_det_theta[0, 0]), "rtm_norm_sq": rep.rtm_norm_sq,
                     "omega": float(rep.omega_coeffs[0, 0]), "det_consistent": det_ok,
                     "class_consistent": cls_ok})
    return {"points": rows}, bool(ok), {}


def run_expansion(cfg, ctx):
    model = _model(cfg)
    f = cfg["symbols"].get("f", "1")
    pts = _points(cfg)
    ladder = cfg["k_ladder"]
    depth = cfg.get("depth", 0)
    guard = cfg.get("guard", 1)
    tol = cfg.get("tolerances", {})
    ctol = [tol.get("c0", 1e-3), tol.get("c1", 0.02), tol.get("c2", 0.10)]
    atol = tol.get("absolute", 1e-4)
    meas = diagonal_values(model, f, pts, ladder, cfg.get("quadrature"), ctx.threads)
    fits, ok, csv = [], True, {}
    sym = get_symbol(f)
    for i, p in enumerate(pts):
        fit = fit_diagonal_expansion(model, f, p, ladder, depth, guard, measured=meas[:, i])
        checks = []
        for j in range(depth + 1):
            if fit.predicted is None:
                checks.append(None)
                continue
            pred = fit.predicted.values[j]
            if abs(pred) < 1e-12:
                good = abs(fit.coefficients[j] - pred) <= atol
            else:
                good = fit.rel_errors[j] <= ctol[j]
            checks.append(bool(good))
        ok &= all(c is not False for c in checks) and fit.predicted is not None
        fits.append({"point": _cx(p), "k_ladder": list(fit.k_ladder), "measured": list(fit.measured),
                     "exponents": list(fit.exponents), "coefficients": list(fit.coefficients),
                     "predicted": list(fit.predicted.values) if fit.predicted else None,
                     "rel_errors": list(fit.rel_errors), "residual_rms": fit.residual_rms,
                     "tolerances": ctol[:depth + 1], "checks": checks})
        csv[f"diagonal_{i}.csv"] = ("k,value", [(k, float(np.real(v)) if sym.real else complex(v))
                                                for k, v in zip(ladder, meas[:, i])])
    results = {"fits": fits, "depth": depth, "guard": guard}
    if cfg.get("options", {}).get("recursion"):
        rec_ladder = cfg["options"].get("recursion_ladder", [24, 32, 40, 48, 64, 80, 96])
        rtol = [tol.get("recursion_d0", 1e-6), tol.get("recursion_d1", 0.02),
                tol.get("recursion_d2", 0.10)]
        rows = []
        symbols = cfg["options"].get("recursion_symbols", [f])
        for p in pts:
            bj = measure_bergman_jets(model, p, tuple(rec_ladder), depth=max(depth, 0))
            for s in symbols:
                rec = coefficient_recursion(model, s, p, depth, bj)
                cf = closed_form_coefficients(model, s, p, depth)
                errs = [_rel(rec.values[j], cf.values[j]) for j in range(depth + 1)]
                good = [e <= rtol[j] for j, e in enumerate(errs)]
                ok &= all(good)
                rows.append({"point": _cx(p), "symbol": s, "recursion": list(rec.values),
                             "closed_form": list(cf.values), "rel_errors": errs, "checks": good})
        results["path_equivalence"] = {"ladder": rec_ladder, "rows": rows, "tolerances": rtol}
    return results, bool(ok), csv


def run_composition(cfg, ctx):
    model = _model(cfg)
    f = cfg["symbols"].get("f", "x3")
    g = cfg["symbols"].get("g", "x1")
    ladder = cfg["k_ladder"]
    checks = cfg.get("checks", ["fit", "product", "commutator"])
    tol = cfg.get("tolerances", {})
    results, ok, csv = {}, True, {}
    if "fit" in checks:
        depth = cfg.get("depth", 0)
        guard = cfg.get("guard", 1)
        pts = _points(cfg, (0.3 + 0.2j,))
        ctol = [tol.get("c0", 1e-3), tol.get("c1", 0.02), tol.get("c2", 0.10)]
        meas = diagonal_values(model, f, pts, ladder, cfg.get("quadrature"), ctx.threads, g=g)
        fits = []
        for i, p in enumerate(pts):
            fit = fit_composition_expansion(model, f, g, p, ladder, depth, guard, measured=meas[:, i])
            good = [bool(fit.rel_errors[j] <= ctol[j]) for j in range(depth + 1)]
            ok &= all(good)
            fits.append({"point": _cx(p), "measured": list(fit.measured),
                         "coefficients": list(fit.coefficients),
                         "predicted": list(fit.predicted.values), "rel_errors": list(fit.rel_errors),
                         "residual_rms": fit.residual_rms, "checks": good,
                         "tolerances": ctol[:depth + 1]})
            csv[f"diagonal_{i}.csv"] = ("k,value", [(k, complex(v)) for k, v in zip(ladder, meas[:, i])])
        results["fits"] = fits
    if "product" in checks or "commutator" in checks:
        levels_k = cfg.get("options", {}).get("ratio_levels", [32, 64])
        lv = product_and_commutator(model, f, g, sorted(set(levels_k)), cfg.get("quadrature"), ctx.threads)
        results["operator_levels"] = lv
        if "product" in checks:
            lo, hi = tol.get("product_ratio", [0.35, 0.65])
            r = _ratio(lv, "product_defect", levels_k[0], levels_k[1])
            results["product_ratio"] = r
            ok &= lo <= r <= hi
        if "commutator" in checks:
            r = _ratio(lv, "commutator_defect", levels_k[0], levels_k[1])
            results["commutator_ratio"] = r
            ok &= r <= tol.get("commutator_ratio", 0.6)
    return results, bool(ok), csv


def run_star(cfg, ctx):
    model = _model(cfg)
    f = cfg["symbols"].get("f", "x3")
    g = cfg["symbols"].get("g", "x1")
    h = cfg["symbols"].get("h", "x2")
    tol = cfg.get("tolerances", {})
    if cfg.get("points") is not None:
        pts = _points(cfg)
    else:
        rng = np.random.default_rng(ctx.seed)
        n = cfg.get("options", {}).get("n_points", 5)
        pts = list(0.6 * (rng.random(n) - 0.5) * 2 + 0.6j * (rng.random(n) - 0.5) * 2)
    fs, gs, hs = get_symbol(f), get_symbol(g), get_symbol(h)
    rows, ok = [], True
    for p in pts:
        cfg_ = star_product(model, fs, gs, p, 2)
        cgf = star_product(model, gs, fs, p, 2)
        pb = poisson_bracket(model, fs.fn, gs.fn, p)
        anti = abs((cfg_[1] - cgf[1]) - 1j * pb)
        fg0 = complex(fs.fn(p, np.conj(p)) * gs.fn(p, np.conj(p)))
        c0_ok = abs(cfg_[0] - fg0) <= 1e-12 * max(1.0, abs(fg0))
        assoc = _associativity_defect(model, fs, gs, hs, p)
        good = anti <= tol.get("antisymmetry", 1e-8) and c0_ok and assoc <= tol.get("associativity", 1e-6)
        ok &= bool(good)
        rows.append({"point": _cx(p), "C": [complex(c) for c in cfg_],
                     "C_swapped": [complex(c) for c in cgf], "poisson": complex(pb),
                     "antisymmetry_defect": anti, "associativity_defect_p1": assoc,
                     "C0_ok": bool(c0_ok), "ok": bool(good)})
    return {"points": rows}, bool(ok), {}


def _associativity_defect(model, fs, gs, hs, p):
    """|sum_{i+j=1} C_i(C_j(f,g),h) - C_i(f,C_j(g,h))| from jets."""
    from .asymptotics import c1_jet
    geo = LocalGeometry(model, p, 8)
    fj, gj, hj = geo.f_jet(fs.fn), geo.f_jet(gs.fn), geo.f_jet(hs.fn)
    lhs = c1_jet(geo, fj * gj, hj).value + (c1_jet(geo, fj, gj) * hj.truncate(7)).value
    rhs = c1_jet(geo, fj, gj * hj).value + (fj.truncate(7) * c1_jet(geo, gj, hj)).value
    return float(abs(lhs - rhs))


def run_weyl(cfg, ctx):
    model = _model(cfg)
    f = cfg["symbols"].get("f", "x3^2")
    factor = cfg.get("tolerances", {}).get("factor", 3.0)
    res = weyl_trace_check(model, f, cfg["k_ladder"], cfg.get("quadrature"), ctx.threads, factor)
    ok = res["all_within_bound"] and res["monotone"]
    csv = {"trace.csv": ("k,value", [(r["k"], r["deviation"]) for r in res["levels"]])}
    return res, bool(ok), csv


def run_decay(cfg, ctx):
    model = _model(cfg)
    f = cfg["symbols"].get("f", "1")
    opts = cfg.get("options", {})
    base = parse_point(opts.get("base_point", 0.0))
    prof = decay_profile(model, f, cfg["k_ladder"], base=base, quadrature=cfg.get("quadrature"),
                         threads=ctx.threads, radius=opts.get("radius", 0.3),
                         c0=opts.get("c0", 3.0), angle=opts.get("angle", 0.0))
    rtol = cfg.get("tolerances", {}).get("rate", 0.10)
    rate_err = _rel(prof.fitted_rate, prof.reference_rate)
    rate_ok = bool(prof.fitted_rate > 0 and rate_err <= rtol)
    ok = rate_ok and prof.threshold_ok
    res = {"fitted_rate": prof.fitted_rate, "reference_rate": prof.reference_rate,
           "closed_form_fitted_rate": prof.closed_form_rate, "rate_rel_error": rate_err,
           "rate_ok": rate_ok,
           "threshold_check": [{"k": t[0], "dist": t[1], "scaled_kernel": t[2], "bound": t[3],
                                "ok": t[4]} for t in prof.threshold_check],
           "intercepts": [{"k": t[0], "neg_log_diag": t[1], "neg_log_kb0": t[2]}
                          for t in prof.intercepts]}
    if not ok:
        res["failure"] = {"rate_ok": rate_ok, "threshold_ok": prof.threshold_ok}
    csv = {"decay.csv": ("k,dist,abs_kernel", [(k, d, v) for d, k, v in prof.pairs])}
    return res, bool(ok), csv


def run_degenerate(cfg, ctx):
    f = cfg["symbols"].get("f", "1")
    opts = cfg.get("options", {})
    pts = _points(cfg, (0.0, 0.5))
    ladder = cfg["k_ladder"]
    res = degenerate_probe(ladder, f, pts, cfg.get("quadrature"), ctx.threads)
    limit = cfg.get("tolerances", {}).get("ratio", 0.75)
    first = res[str(_cx(pts[0]))]
    ok = first["ratio_last_first"] is not None and first["ratio_last_first"] <= limit
    csv = {f"diagonal_{i}.csv": ("k,value", list(zip(ladder, [v * k for v, k in zip(r["value_over_k"], ladder)])))
           for i, r in enumerate(res.values())}
    return {"points": res, "ratio_limit": limit, "probe_point": _cx(pts[0])}, bool(ok), csv


def run_landau(cfg, ctx):
    f = cfg["symbols"].get("f", "1")
    pt = _points(cfg, (0.0,))[0]
    res = landau_leading_check(cfg["k_ladder"], f, pt, cfg.get("N", 8), cfg.get("quadrature"),
                               ctx.threads)
    tol = cfg.get("tolerances", {}).get("leading", 0.03)
    last = res["levels"][-1]
    ok = last["rel_error"] is not None and last["rel_error"] <= tol
    csv = {"diagonal_0.csv": ("k,value", [(r["k"], r["dzbar"]) for r in res["levels"]])}
    return res, bool(ok), csv


def run_stationary_phase(cfg, ctx):
    N = cfg.get("N", 3)
    tol = cfg.get("tolerances", {})
    rows = stationary_phase_cases(cfg["k_ladder"], N)
    qtol, ptol = tol.get("quadratic", 1e-12), tol.get("quartic", 1e-6)
    quad_ok = all(r["quadratic_rel"] <= qtol for r in rows)
    quartic_ok = all(r["quartic_rel"] <= ptol for r in rows)
    return ({"levels": rows, "N": N, "quadratic_ok": bool(quad_ok), "quartic_ok": bool(quartic_ok)},
            bool(quad_ok and quartic_ok), {})


RUNNERS = {
    "curvature": run_curvature,
    "expansion": run_expansion,
    "composition": run_composition,
    "star": run_star,
    "weyl": run_weyl,
    "decay": run_decay,
    "degenerate": run_degenerate,
    "landau": run_landau,
    "stationary-phase": run_stationary_phase,
}


@dataclass
class RunContext:
    threads: int = 1
    seed: int = 0
