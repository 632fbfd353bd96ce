"""Batch experiment front end.

Subcommands: selftest | garding | symbol-class | friedrichs | figures,
driven by a flat INI config. Reports are written atomically as JSON and CSV;
wall-clock timings go to a separate sidecar so repeated runs with the same
config and seed produce byte-identical report files.

Exit codes: 0 success, 2 verification failure, 3 configuration error,
4 numerical-resolution error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .friedrichs import FriedrichsFactored, positivity_check
from .groups import dual_max_degree, make_group
from .harmonic import forward_transform, inverse_transform, plancherel_norm
from .harness import (
    NonnegativityError,
    cutoff_for_degree,
    exponent_table,
    family_x_band,
    garding_verify,
    make_symbol,
    nonneg_gate,
    positivity_suite,
    remainder_bounds,
    sharpness_probe,
)
from .quantize import AliasingError
from .symbols import (
    SymbolClassParams,
    class_fit,
    class_inclusion_check,
    leibniz_check,
    sublaplacian_symbol,
    weight_comparison_check,
)
from .weights import build_weight

CSV_SCHEMA = "v1"
EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3
EXIT_RESOLUTION = 4


class ConfigError(ValueError):
    pass


def _atomic_write(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _dump_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=True)


def load_config(path, overrides=None):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    raw = Path(path).read_text()
    try:
        parser.read_string(raw)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if "experiment" not in parser:
        raise ConfigError("config needs an [experiment] section")
    sec = dict(parser["experiment"])
    if overrides:
        sec.update({k: v for k, v in overrides.items() if v is not None})
    cfg = {}
    cfg["hash"] = hashlib.sha256(raw.encode()).hexdigest()
    kind = sec.get("group", "torus").strip()
    if kind not in ("torus", "su2"):
        raise ConfigError(f"unknown group {kind!r}")
    cfg["group_kind"] = kind
    cfg["torus_dim"] = int(sec.get("torus_dim", "1"))
    cfg["symbol"] = sec.get("symbol", "cos_window").strip()
    try:
        cfg["m"] = float(sec.get("m", "2.0"))
        cfg["rho"] = float(sec.get("rho", "1.0"))
        cfg["delta"] = float(sec.get("delta", "0.0"))
        cfg["seed"] = int(sec.get("seed", "0"))
        cfg["cutoffs"] = [float(tok) for tok in sec.get(
            "cutoffs", "12,18,24,32" if kind == "torus" else "3,5,7").split(",")]
        wr = sec.get("weight_r", "").strip()
        cfg["weight_r"] = float(wr) if wr else None
        qd = sec.get("quadrature_degree", "").strip()
        cfg["quadrature_degree"] = float(qd) if qd else None
        pd = sec.get("positivity_degree", "").strip()
        cfg["positivity_degree"] = float(pd) if pd else None
        sl = sec.get("s_list", "").strip()
        cfg["s_list"] = [float(tok) for tok in sl.split(",")] if sl else []
        cfg["dual_cutoff"] = float(sec.get("dual_cutoff", "4.0"))
        cfg["max_order"] = int(sec.get("max_order", "1"))
    except ValueError as exc:
        raise ConfigError(f"bad numeric value in config: {exc}") from exc
    cfg["out"] = sec.get("out", "out")
    return cfg


def make_experiment_group(cfg):
    return make_group(cfg["group_kind"], cfg["torus_dim"])


def _params(cfg, group):
    try:
        return SymbolClassParams(cfg["m"], cfg["rho"], cfg["delta"],
                                 group.hormander_step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _report_header(cfg):
    return {"library_version": __version__, "config_hash": cfg["hash"],
            "csv_schema": CSV_SCHEMA}


def _write_outputs(outdir, name, doc, csv_rows=None, csv_header=None,
                   want_json=True, want_csv=True):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if want_json:
        p = outdir / f"{name}.json"
        _atomic_write(p, _dump_json(doc) + "\n")
        written.append(str(p))
    if want_csv and csv_rows is not None:
        p = outdir / f"{name}.csv"
        lines = [",".join(csv_header)]
        for row in csv_rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row))
        _atomic_write(p, "\n".join(lines) + "\n")
        written.append(str(p))
    return written


def _write_timing(outdir, name, seconds):
    p = Path(outdir) / "timing.log"
    with open(p, "a") as fh:
        fh.write(f"{name} {seconds:.3f}s\n")


# ----------------------------------------------------------------- selftest


def cmd_selftest(cfg, want_json=True, want_csv=True):
    t0 = time.perf_counter()
    group = make_experiment_group(cfg)
    checks = []

    def record(name, passed, detail):
        checks.append({"check": name, "passed": bool(passed), "detail": detail})
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    cutoff = cfg["dual_cutoff"]
    duals = group.enumerate_dual(cutoff)
    degree_needed = 2 * dual_max_degree(duals)
    degree = cfg["quadrature_degree"]
    if degree is None:
        degree = degree_needed
    if degree < dual_max_degree(duals):
        print(f"aliasing: quadrature degree {degree} below dual band "
              f"{dual_max_degree(duals)}", file=sys.stderr)
        return EXIT_RESOLUTION
    rule = group.quadrature(degree)

    # Peter-Weyl orthogonality through the transform of basis coefficients
    rng = np.random.default_rng(cfg["seed"])
    worst = 0.0
    for d in duals:
        R = group.rep_values(d, rule.points)
        co = forward_transform(rule, math.sqrt(d.dim) * R[:, 0, d.dim - 1], duals)
        for e in duals:
            blk = co.blocks[e.key].copy()
            if e.key == d.key:
                blk[d.dim - 1, 0] -= 1.0 / math.sqrt(d.dim)
            worst = max(worst, float(np.max(np.abs(blk))))
    record("peter_weyl_orthogonality", worst <= 1e-12, f"max defect {worst:.2e}")

    # Fourier round trip on random band-limited data
    from .harmonic import FourierCoefficients
    blocks = {d.key: rng.normal(size=(d.dim, d.dim))
              + 1j * rng.normal(size=(d.dim, d.dim)) for d in duals}
    co = FourierCoefficients(group, duals, blocks)
    vals = inverse_transform(co, rule)
    co2 = forward_transform(rule, vals, duals)
    resid = max(float(np.max(np.abs(co2.blocks[d.key] - blocks[d.key])))
                for d in duals)
    record("fourier_round_trip", resid <= 1e-10, f"residual {resid:.2e}")

    # Parseval
    pn = float(plancherel_norm(co))
    gn = float(np.sqrt(np.sum(rule.weights * np.abs(vals) ** 2)))
    record("parseval", abs(pn - gn) <= 1e-10 * max(1, pn),
           f"|{pn:.6f} - {gn:.6f}|")

    # Laplacian and sub-Laplacian spectra
    from .groups import laplacian_generator
    worst_l = 0.0
    for d in duals:
        L = laplacian_generator(group, d)
        worst_l = max(worst_l, float(np.max(np.abs(
            L - d.eigenvalue * np.eye(d.dim)))))
    record("laplacian_spectrum", worst_l <= 1e-8, f"max defect {worst_l:.2e}")
    subl = sublaplacian_symbol(group, duals)
    if group.kind == "su2":
        worst_s = 0.0
        for d in duals:
            l = d.index[0] / 2.0
            m = np.arange(-d.index[0], d.index[0] + 1, 2) / 2.0
            worst_s = max(worst_s, float(np.max(np.abs(
                subl.nu_sq[d.key] - (l * (l + 1) - m * m)))))
        record("sublaplacian_spectrum", worst_s <= 1e-8, f"max defect {worst_s:.2e}")

    # first-order Leibniz identity (torus backends only)
    if group.kind == "torus":
        from .symbols import Symbol
        a1 = Symbol.from_multiplier(group, rule, duals,
                                    lambda d: 1.0 + d.eigenvalue, None, "a1")
        a2 = Symbol.from_multiplier(group, rule, duals,
                                    lambda d: d.elliptic_weight, None, "a2")
        res = leibniz_check(a1, a2)
        record("leibniz_rule", res <= 1e-12, f"residual {res:.2e}")

    # eigenvalue comparison between elliptic and subelliptic weights
    rep = weight_comparison_check(group, duals, subl)
    record("weight_comparison", rep["lower_holds"] and rep["upper_holds"],
           f"c_lower {rep['c_lower']:.3f}, c_upper {rep['c_upper']:.3f}")

    passed = all(c["passed"] for c in checks)
    doc = dict(_report_header(cfg))
    doc.update({"command": "selftest", "group": group.label, "checks": checks,
                "passed": passed})
    _write_outputs(cfg["out"], "selftest", doc,
                   csv_rows=[(c["check"], c["passed"]) for c in checks],
                   csv_header=["check", "passed"],
                   want_json=want_json, want_csv=want_csv)
    _write_timing(cfg["out"], "selftest", time.perf_counter() - t0)
    return EXIT_OK if passed else EXIT_VERIFY


# ------------------------------------------------------------------ garding


def cmd_garding(cfg, want_json=True, want_csv=True):
    t0 = time.perf_counter()
    group = make_experiment_group(cfg)
    params = _params(cfg, group)
    family = cfg["symbol"]
    cutoffs = cfg["cutoffs"]
    try:
        verify = garding_verify(group, family, params, cutoffs, seed=cfg["seed"])
        probe = sharpness_probe(group, family, params, cutoffs,
                                s_list=cfg["s_list"], seed=cfg["seed"])
        remainder = remainder_bounds(group, family, params, cutoffs,
                                     weight_r=cfg["weight_r"], seed=cfg["seed"])
        pos_deg = cfg["positivity_degree"]
        if pos_deg is None:
            pos_deg = min(max(cutoffs), 12.0 if group.kind == "torus" else 5.0)
        pos = positivity_suite(group, pos_deg, params=params,
                               weight_r=cfg["weight_r"], seed=cfg["seed"],
                               families=[(family, params.m)])
    except NonnegativityError as exc:
        doc = dict(_report_header(cfg))
        doc.update({"command": "garding", "group": group.label,
                    "symbol": family, "rejected": True,
                    "reason": "nonnegativity scan failed",
                    "witness": exc.witness})
        _write_outputs(cfg["out"], "garding", doc, want_json=want_json,
                       want_csv=False)
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except AliasingError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION

    doc = dict(_report_header(cfg))
    doc.update({
        "command": "garding",
        "group": group.label,
        "symbol": family,
        "verify": verify.to_dict(),
        "sharpness": {k: v for k, v in probe.items() if k != "runtime_seconds"},
        "remainder": {k: v for k, v in remainder.items() if k != "runtime_seconds"},
        "positivity": {k: v for k, v in pos.items() if k != "runtime_seconds"},
        "passed": bool(verify.verdicts["passed"] and remainder["passed"]
                       and pos["passed"]),
    })
    rows = []
    for deg, lam in zip(verify.cutoff_degrees, verify.lambda_min):
        rows.append((float(deg), float(lam), float(verify.s), float(verify.theta),
                     float(verify.c_estimate),
                     "PASS" if verify.verdicts["passed"] else "FAIL"))
    _write_outputs(cfg["out"], "garding", doc, csv_rows=rows,
                   csv_header=["cutoff", "lambda_min", "s", "theta",
                               "C_estimate", "verdict"],
                   want_json=want_json, want_csv=want_csv)
    elapsed = time.perf_counter() - t0
    _write_timing(cfg["out"], "garding", elapsed)
    print(f"garding: {'PASS' if doc['passed'] else 'FAIL'} "
          f"(lambda_min {verify.lambda_min}, C {verify.c_estimate:.4g})")
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


# ------------------------------------------------------------- symbol-class


def cmd_symbol_class(cfg, want_json=True, want_csv=True):
    t0 = time.perf_counter()
    group = make_experiment_group(cfg)
    params = _params(cfg, group)
    family = cfg["symbol"]
    deg = max(cfg["cutoffs"])
    xb = family_x_band(family)
    rule = (group.minimal_quadrature(2 * deg + xb) if group.kind == "su2"
            else group.quadrature(2 * deg + xb))
    duals = group.enumerate_dual(cutoff_for_degree(group, deg))
    try:
        sym = make_symbol(group, rule, duals, family, params, cfg["seed"])
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fit = class_fit(sym, params, max_order=cfg["max_order"])
    inclusion = class_inclusion_check(sym, params, max_order=min(cfg["max_order"], 1))
    table = exponent_table(params.m, params.rho, params.delta, group.hormander_step)
    doc = dict(_report_header(cfg))
    doc.update({"command": "symbol-class", "group": group.label,
                "symbol": family, "class_fit": fit, "inclusion": inclusion,
                "exponent_table": table,
                "passed": bool(fit["consistent"] and inclusion["all_finite"])})
    rows = [(r2["route"], float(r2["index"]), r2["valid"], r2["strongest"])
            for r2 in table["rows"]]
    _write_outputs(cfg["out"], "symbol_class", doc, csv_rows=rows,
                   csv_header=["route", "sobolev_index", "valid", "strongest"],
                   want_json=want_json, want_csv=want_csv)
    _write_timing(cfg["out"], "symbol_class", time.perf_counter() - t0)
    print(f"symbol-class: fitted order {fit['fitted_order_zero']:.3f} "
          f"(target {params.m}), strongest route {table['strongest']}")
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


# --------------------------------------------------------------- friedrichs


def cmd_friedrichs(cfg, want_json=True, want_csv=True):
    t0 = time.perf_counter()
    group = make_experiment_group(cfg)
    params = _params(cfg, group)
    deg = cfg["positivity_degree"] or min(max(cfg["cutoffs"]),
                                          10.0 if group.kind == "torus" else 4.0)
    try:
        rep = positivity_suite(group, deg, params=params,
                               weight_r=cfg["weight_r"], seed=cfg["seed"],
                               families=[(cfg["symbol"], params.m)])
    except NonnegativityError as exc:
        doc = dict(_report_header(cfg))
        doc.update({"command": "friedrichs", "rejected": True,
                    "witness": exc.witness})
        _write_outputs(cfg["out"], "friedrichs", doc, want_json=want_json,
                       want_csv=False)
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    doc = dict(_report_header(cfg))
    doc.update({"command": "friedrichs", "group": group.label,
                "report": {k: v for k, v in rep.items() if k != "runtime_seconds"},
                "passed": rep["passed"]})
    rows = [(r["symbol"], float(r["lambda_min"]), float(r["norm"]),
             "PASS" if r["passed"] else "FAIL") for r in rep["checks"]]
    _write_outputs(cfg["out"], "friedrichs", doc, csv_rows=rows,
                   csv_header=["symbol", "lambda_min", "norm", "verdict"],
                   want_json=want_json, want_csv=want_csv)
    _write_timing(cfg["out"], "friedrichs", time.perf_counter() - t0)
    print(f"friedrichs: {'PASS' if rep['passed'] else 'FAIL'}")
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


# ------------------------------------------------------------------ figures


def cmd_figures(cfg, out_dir=None):
    from . import figures

    src = Path(cfg["out"])
    dest = Path(out_dir or cfg["out"])
    made = figures.render_all(src, dest)
    for p in made:
        print(f"wrote {p}")
    return EXIT_OK


# --------------------------------------------------------------------- main


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="garding",
        description="Pseudo-differential lower-bound experiments on T^n and SU(2)")
    ap.add_argument("command",
                    choices=["selftest", "garding", "symbol-class",
                             "friedrichs", "figures"])
    ap.add_argument("--config", default=None, help="path to INI config")
    ap.add_argument("--out", default=None, help="output directory override")
    ap.add_argument("--cutoffs", default=None,
                    help="comma-separated cutoff degrees override")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--json", action="store_true", help="write JSON only")
    ap.add_argument("--csv", action="store_true", help="write CSV only")
    args = ap.parse_args(argv)

    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.cutoffs is not None:
        overrides["cutoffs"] = args.cutoffs
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    try:
        if args.config is None:
            cfg = load_config_default(overrides)
        else:
            cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    want_json = not args.csv or args.json
    want_csv = not args.json or args.csv
    try:
        if args.command == "selftest":
            return cmd_selftest(cfg, want_json, want_csv)
        if args.command == "garding":
            return cmd_garding(cfg, want_json, want_csv)
        if args.command == "symbol-class":
            return cmd_symbol_class(cfg, want_json, want_csv)
        if args.command == "friedrichs":
            return cmd_friedrichs(cfg, want_json, want_csv)
        if args.command == "figures":
            return cmd_figures(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AliasingError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    return EXIT_CONFIG


def load_config_default(overrides=None):
    """Built-in torus default when no config file is given."""
    import io

    text = "[experiment]\ngroup = torus\n"
    parser = configparser.ConfigParser()
    parser.read_string(text)
    cfg = {
        "hash": hashlib.sha256(text.encode()).hexdigest(),
        "group_kind": "torus", "torus_dim": 1, "symbol": "cos_window",
        "m": 2.0, "rho": 1.0, "delta": 0.0, "seed": 0,
        "cutoffs": [12.0, 18.0, 24.0, 32.0], "weight_r": None,
        "quadrature_degree": None, "positivity_degree": None, "s_list": [],
        "dual_cutoff": 4.0, "max_order": 1, "out": "out",
    }
    if overrides:
        for k, v in overrides.items():
            if v is None:
                continue
            if k == "cutoffs" and isinstance(v, str):
                cfg[k] = [float(t) for t in v.split(",")]
            elif k == "seed":
                cfg[k] = int(v)
            else:
                cfg[k] = v
    return cfg


if __name__ == "__main__":
    sys.exit(main())
