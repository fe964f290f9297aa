"""Command line front end: ``btlab run <config>`` and ``btlab list``."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .conventions import ledger_hash
from .experiments import RUNNERS, RunContext, parse_point
from .geometry import MODEL_KINDS, PERTURBATIONS, GeometryError, make_model
from .quantum import default_rule
from .symbols import SymbolError, catalog_lines, get_symbol

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

TOP_KEYS = ("experiment", "model", "symbols", "k_ladder", "depth", "N", "guard", "points",
            "quadrature", "output", "tolerances", "checks", "options")
MODEL_KEYS = ("kind", "eps", "perturbation")
QUAD_KEYS = ("n_radial", "n_angular", "t_max")
SYMBOL_SLOTS = ("f", "g", "h")
CHECKS = ("fit", "product", "commutator")
DEFAULT_LADDER = [16, 24, 32, 48, 64]


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Config


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"{where}{getattr(exc, 'problem', None) or exc}") from None
    return normalize_config(raw)


def _int(value, key, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"key '{key}': expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"key '{key}': must be >= {lo}, got {value}")
    return value


def _num(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}': expected a number, got {value!r}")
    return float(value)


def _mapping(value, key):
    if not isinstance(value, dict):
        raise ConfigError(f"key '{key}': expected a mapping")
    return value


def normalize_config(raw):
    """Validate a parsed config and fill defaults; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    for key in raw:
        if key not in TOP_KEYS:
            raise ConfigError(f"key '{key}': unknown config key (allowed: {', '.join(TOP_KEYS)})")
    if "experiment" not in raw:
        raise ConfigError("key 'experiment': missing")
    exp = raw["experiment"]
    if exp not in RUNNERS:
        raise ConfigError(f"key 'experiment': unknown experiment {exp!r} "
                          f"(known: {', '.join(RUNNERS)})")
    cfg = {"experiment": exp}

    model = raw.get("model", "cp1_fs" if exp not in ("degenerate", "landau") else
                    {"degenerate": "degenerate_quartic", "landau": "landau_q1"}[exp])
    if isinstance(model, str):
        model = {"kind": model}
    model = dict(_mapping(model, "model"))
    for key in model:
        if key not in MODEL_KEYS:
            raise ConfigError(f"key 'model.{key}': unknown model parameter")
    if model.get("kind") not in MODEL_KINDS:
        raise ConfigError(f"key 'model': unknown model {model.get('kind')!r} "
                          f"(known: {', '.join(MODEL_KINDS)})")
    eps = _num(model.get("eps", 0.0), "model.eps")
    pert = model.get("perturbation", "re_bump")
    if pert not in PERTURBATIONS:
        raise ConfigError(f"key 'model.perturbation': unknown perturbation {pert!r}")
    try:
        make_model(model["kind"], eps, pert)
    except GeometryError as exc:
        raise ConfigError(f"key 'model': {exc}") from None
    if exp == "degenerate" and model["kind"] != "degenerate_quartic":
        raise ConfigError("key 'model': the degenerate experiment needs degenerate_quartic")
    if exp == "landau" and model["kind"] != "landau_q1":
        raise ConfigError("key 'model': the landau experiment needs landau_q1")
    cfg["model"] = {"kind": model["kind"], "eps": eps, "perturbation": pert}
    if exp == "stationary-phase":
        # the engine runs on fixed Euclidean test phases
        cfg["model"] = None

    symbols = dict(_mapping(raw.get("symbols", {}) or {}, "symbols"))
    for slot, spec in symbols.items():
        if slot not in SYMBOL_SLOTS:
            raise ConfigError(f"key 'symbols.{slot}': unknown symbol slot (allowed: f, g, h)")
        try:
            get_symbol(str(spec))
        except SymbolError as exc:
            raise ConfigError(f"key 'symbols.{slot}': {exc}") from None
        symbols[slot] = str(spec)
    cfg["symbols"] = symbols

    default = [10, 20, 40] if exp == "stationary-phase" else DEFAULT_LADDER
    ladder = raw.get("k_ladder", default)
    if not isinstance(ladder, list) or not ladder:
        raise ConfigError("key 'k_ladder': expected a non-empty list of integers")
    ladder = [_int(k, "k_ladder", 1) for k in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("key 'k_ladder': levels must be strictly increasing")
    cfg["k_ladder"] = ladder

    cfg["depth"] = _int(raw.get("depth", 0), "depth", 0)
    if cfg["depth"] > 2:
        raise ConfigError("key 'depth': at most 2")
    cfg["guard"] = _int(raw.get("guard", 1), "guard", 0)
    cfg["N"] = _int(raw.get("N", 3 if exp == "stationary-phase" else 8), "N", 1)

    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("key 'points': expected a non-empty list")
        for p in pts:
            try:
                parse_point(p)
            except (TypeError, ValueError):
                raise ConfigError(f"key 'points': cannot read point {p!r}") from None
        cfg["points"] = [p if isinstance(p, str) else _num_or_pair(p) for p in pts]

    quad = dict(_mapping(raw.get("quadrature", {}) or {}, "quadrature"))
    for key, value in quad.items():
        if key not in QUAD_KEYS:
            raise ConfigError(f"key 'quadrature.{key}': unknown quadrature parameter")
        quad[key] = _num(value, f"quadrature.{key}") if key == "t_max" else _int(value, f"quadrature.{key}", 1)
    cfg["quadrature"] = quad

    tols = dict(_mapping(raw.get("tolerances", {}) or {}, "tolerances"))
    for key, value in tols.items():
        if isinstance(value, list):
            tols[key] = [_num(v, f"tolerances.{key}") for v in value]
        else:
            tols[key] = _num(value, f"tolerances.{key}")
    cfg["tolerances"] = tols

    if "checks" in raw:
        checks = raw["checks"]
        if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
            raise ConfigError(f"key 'checks': expected a list drawn from {', '.join(CHECKS)}")
        cfg["checks"] = list(checks)
    cfg["options"] = dict(_mapping(raw.get("options", {}) or {}, "options"))
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ConfigError("key 'output': expected a path string")
        cfg["output"] = raw["output"]
    return cfg


def _num_or_pair(p):
    if isinstance(p, list):
        return [_num(v, "points") for v in p]
    return _num(p, "points")


def resolved_quadrature(cfg):
    """Quadrature actually used per level, so reports are self-contained."""
    if cfg["experiment"] in ("curvature", "star"):
        return {}
    if cfg["model"] is None:
        return {}
    model = make_model(cfg["model"]["kind"], cfg["model"]["eps"], cfg["model"]["perturbation"])
    q = cfg["quadrature"]
    ladder = list(cfg["k_ladder"])
    if cfg["experiment"] == "composition":
        ladder = sorted(set(ladder) | set(cfg["options"].get("ratio_levels", [32, 64])))
    out = {}
    for k in ladder:
        rule = default_rule(model, k, None, q.get("n_radial"), q.get("n_angular"), q.get("t_max"))
        out[str(k)] = dict(rule.descriptor, nodes=int(rule.size))
    return out


# ---------------------------------------------------------------------------
# Serialization


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = "%.17g" % x
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _quote(s):
    import json
    return json.dumps(s, ensure_ascii=False)


def to_json(obj, indent=2, level=0):
    """JSON text with floats at 17 significant digits and complex as {re, im}."""
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": float(obj.real), "im": float(obj.imag)}, indent, level)
    if isinstance(obj, str):
        return _quote(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_quote(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray, complex, np.complexfloating))
               for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [inner + to_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return _fmt_float(v.real) if v.imag == 0 else f"{_fmt_float(v.real)}{'+' if v.imag >= 0 else '-'}{_fmt_float(abs(v.imag))}j"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header.split(","))
        for row in rows:
            w.writerow([_csv_cell(v) for v in row])


# ---------------------------------------------------------------------------
# Commands


def build_report(cfg, threads=1, seed=0):
    """Run the configured experiment; returns (report dict, csv tables)."""
    ctx = RunContext(threads=threads, seed=seed)
    results, passed, tables = RUNNERS[cfg["experiment"]](cfg, ctx)
    echo = dict(cfg)
    echo["symbol_expressions"] = {slot: get_symbol(s).expr for slot, s in cfg["symbols"].items()}
    echo["quadrature_resolved"] = resolved_quadrature(cfg)
    echo["seed"] = seed
    report = {"config": echo, "results": results, "pass": bool(passed),
              "versions": {"artifact": __version__, "conventions": ledger_hash()}}
    return report, tables


def run(config_path, output=None, threads=1, seed=0, stream=sys.stdout):
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out_dir = Path(output or cfg.get("output") or Path("out") / Path(config_path).stem)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR
    try:
        report, tables = build_report(cfg, threads, seed)
    except Exception as exc:  # numerical failures surface as runtime errors
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    (out_dir / "report.json").write_text(to_json(report) + "\n")
    for name, (header, rows) in tables.items():
        write_csv(out_dir / name, header, rows)
    status = "PASS" if report["pass"] else "FAIL"
    kind = cfg["model"]["kind"] if cfg["model"] else "euclidean"
    print(f"{status} {cfg['experiment']} ({kind}) -> {out_dir / 'report.json'}",
          file=stream)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def list_catalog():
    lines = ["models:"]
    lines += [f"  {m}" for m in MODEL_KINDS]
    lines.append("perturbations (cp1_fs only):")
    lines += [f"  {p}" for p in PERTURBATIONS]
    lines.append("experiments:")
    lines += [f"  {e}" for e in RUNNERS]
    lines.append("symbols:")
    lines += [f"  {s}" for s in catalog_lines()]
    lines.append("  (any expression in z, zb, x1, x2, x3 with + - * / ^ and log exp sqrt sin cos)")
    return "\n".join(lines)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="btlab", description="Berezin-Toeplitz numerics lab")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="output directory (default: out/<config name>)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads over ladder levels")
    p_run.add_argument("--seed", type=int, default=0, help="seed for random test points")
    sub.add_parser("list", help="list models, experiments and symbols")
    args = parser.parse_args(argv)
    if args.command == "list":
        print(list_catalog())
        return EXIT_PASS
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    return run(args.config, args.output, args.threads, args.seed)


if __name__ == "__main__":
    sys.exit(main())
