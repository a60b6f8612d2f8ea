"""Command-line front end: experiment config in, CSV/JSON artifacts out.

Every command accepts ``--config FILE`` (JSON) and flags named after the
config keys; flags win over the file. Exit codes: 0 success, 2 invalid
config, 3 model/command mismatch, 4 failed numerical validation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .bk18 import compare_case
from .checks import validate_model
from .exceptions import InputError, PreconditionError, UnsupportedQueryError
from .ldm import Example8LDM, PQDLDM, closed_form_ldm, ldm_estimate
from .legendre import lambda_star as compute_lambda_star, transform_report
from .models import AlphaFn, model_from_dict
from .perpetuity import envelope, one_step_tail, tail_log_estimate
from .regvar import RegVarFn
from .rng import default_workers

COMMANDS = ("ldm", "transform", "tail", "envelope", "one-step", "compare-bk18", "validate-model")

INTRO_MODEL = {"kind": "independent", "A": {"law": "uniform", "a_plus": 0.5},
               "B": {"law": "weibull", "sigma": 1.0, "rho": 2.0}}

DEFAULTS = {
    "model": INTRO_MODEL,
    "f": {"rho": 2.0},
    "y_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "lambda_grid": [float(x) for x in np.geomspace(1e-3, 10.0, 50)],
    "mode": "quadrature",
    "method": "series",
    "burnin": 1000,
    "n_samples": 10**6,
    "N": 10**5,
    "n_traj": 8,
    "n_start": 1000,
    "lambda": 0.75,
    "case": "a",
    "rho": 2.0,
    "format": "json",
}
T_GRID_DEFAULTS = {"ldm": [10.0, 100.0, 1000.0], "tail": [0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4],
                   "one-step": [0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4]}

_num = {"type": "number"}
_grid = {"type": "array", "items": _num, "minItems": 1}
SCHEMA = {
    "type": "object",
    "required": ["command", "seed"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0},
        "model": {"type": "object", "required": ["kind"],
                  "properties": {"kind": {"enum": ["independent", "atom_survival"]}}},
        "f": {"type": "object", "required": ["rho"],
              "properties": {"rho": {"type": "number", "exclusiveMinimum": 0},
                             "scale": {"type": "number", "exclusiveMinimum": 0},
                             "log_exponent": _num,
                             "domain_floor": {"type": "number", "minimum": 0}}},
        "ldm": {"type": "object", "required": ["kind"],
                "properties": {"kind": {"enum": ["pqd", "example8"]}}},
        "y_grid": _grid, "t_grid": _grid, "lambda_grid": _grid,
        "mode": {"enum": ["quadrature", "monte_carlo"]},
        "method": {"enum": ["series", "recursion_burnin"]},
        "burnin": {"type": "integer", "minimum": 0},
        "n_samples": {"type": "integer", "minimum": 1000},
        "N": {"type": "integer", "minimum": 3},
        "n_traj": {"type": "integer", "minimum": 1},
        "n_start": {"type": "integer", "minimum": 3},
        "lambda": {"type": "number", "minimum": 0},
        "lambda_star": {"type": "number", "exclusiveMinimum": 0},
        "case": {"enum": ["a", "b"]},
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number", "minimum": 0},
        "a_plus": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "format": {"enum": ["csv", "json"]},
        "out": {"type": "string"},
    },
}


class ConfigError(Exception):
    pass


class MismatchError(Exception):
    pass


class ValidationFailed(Exception):
    pass


# ------------------------------------------------------------------ config --

def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _add_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--model", type=json.loads, help="model descriptor (JSON)")
    p.add_argument("--f", type=json.loads, help="scale function descriptor (JSON)")
    p.add_argument("--ldm", type=json.loads, help="LDM descriptor (JSON), transform only")
    p.add_argument("--y-grid", dest="y_grid", type=_float_list)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list)
    p.add_argument("--mode", choices=["quadrature", "monte_carlo"])
    p.add_argument("--method", choices=["series", "recursion_burnin"])
    p.add_argument("--burnin", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--N", dest="N", type=int)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--n-start", dest="n_start", type=int)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--lambda-star", dest="lambda_star", type=float)
    p.add_argument("--case", choices=["a", "b"])
    p.add_argument("--rho", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--a-plus", dest="a_plus", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perpetua", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_flags(sub.add_parser(name))
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"$: cannot read config: {e}")
        if not isinstance(cfg, dict):
            raise ConfigError("$: config must be a JSON object")
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    cfg.update(flags)
    if "seed" not in cfg and os.environ.get("PERPETUA_SEED"):
        try:
            cfg["seed"] = int(os.environ["PERPETUA_SEED"])
        except ValueError:
            raise ConfigError("$.seed: PERPETUA_SEED is not an integer")
    merged = dict(DEFAULTS)
    if cfg.get("command") in T_GRID_DEFAULTS:
        merged["t_grid"] = T_GRID_DEFAULTS[cfg["command"]]
    merged.update(cfg)
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(merged), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise ConfigError(f"{path}: {e.message}")
    for key in ("y_grid", "t_grid", "lambda_grid"):
        g = merged.get(key)
        if g is not None and any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigError(f"$.{key}: must be sorted strictly increasing")
    merged.setdefault("workers", default_workers())
    return merged


def config_sha(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k not in ("out", "format")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


# ----------------------------------------------------------------- output ---

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(rows: list[dict], sha: str) -> str:
    buf = io.StringIO()
    buf.write(f"# perpetua-manifest: {sha}\n")
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, dict):
        return {k: _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


# --------------------------------------------------------------- commands ---

def _model(cfg):
    try:
        return model_from_dict(cfg["model"])
    except (KeyError, TypeError) as e:
        raise ConfigError(f"$.model: {e}")


def _f(cfg):
    return RegVarFn.from_dict(cfg["f"])


def _ldm_from_cfg(cfg):
    d = cfg.get("ldm")
    if d is None and ("gamma" in cfg or "a_plus" in cfg):
        d = {"kind": "pqd", "gamma": cfg.get("gamma", 1.0), "a_plus": cfg.get("a_plus", 0.5),
             "rho": cfg["rho"]}
    if d is None:
        return closed_form_ldm(_model(cfg), _f(cfg))
    if d["kind"] == "pqd":
        return PQDLDM(float(d.get("gamma", 1.0)), float(d.get("a_plus", 0.5)), float(d.get("rho", cfg["rho"])))
    rho = float(d.get("rho", cfg["rho"]))
    return Example8LDM(AlphaFn.from_dict(d.get("alpha", {"variant": "case_a"}), rho=rho), rho)


def cmd_ldm(cfg):
    model, f = _model(cfg), _f(cfg)
    rows, summary = [], {"estimates": []}
    try:
        g = closed_form_ldm(model, f)
    except UnsupportedQueryError:
        g = None
    for y in cfg["y_grid"]:
        est = ldm_estimate(model, f, y, cfg["t_grid"], cfg["mode"], cfg["n_samples"],
                           cfg["seed"], cfg["workers"])
        rows.extend(est.rows())
        summary["estimates"].append({"y": y, "estimate": est.estimate, "infinite": est.infinite,
                                     "closed_form": float(g(y)) if g is not None else None})
    return rows, summary


def cmd_transform(cfg):
    g = _ldm_from_cfg(cfg)
    rep = transform_report(g, cfg["lambda_grid"])
    return list(rep.rows()), rep.summary()


def cmd_tail(cfg):
    te = tail_log_estimate(_model(cfg), _f(cfg), cfg["t_grid"], cfg["n_samples"], cfg["method"],
                           cfg["burnin"], seed=cfg["seed"], workers=cfg["workers"])
    last = te.last_resolvable
    return list(te.rows()), {"predicted_lambda_star": te.predicted,
                             "last_resolvable_t": last and last[0], "ratio": last and last[1]}


def cmd_envelope(cfg):
    model, f = _model(cfg), _f(cfg)
    ls = cfg.get("lambda_star")
    if ls is None:
        try:
            ls = compute_lambda_star(closed_form_ldm(model, f))[0]
        except UnsupportedQueryError as e:
            raise MismatchError(f"envelope: {e}; pass lambda_star explicitly")
    if not (0 < ls < math.inf):
        raise MismatchError(f"envelope needs lambda_star in (0, inf), got {ls}")
    rep = envelope(model, f, ls, cfg["N"], cfg["n_traj"], n_start=cfg["n_start"],
                   seed=cfg["seed"], workers=cfg["workers"])
    return list(rep.rows()), {"lambda_star": ls, "predicted_limit": rep.predicted_limit,
                              "median_final_ratio": rep.median_final,
                              "final_ratios": rep.final_ratios, "nondecreasing": rep.nondecreasing()}


def cmd_one_step(cfg):
    te = one_step_tail(_model(cfg), _f(cfg), cfg["lambda"], cfg["t_grid"], cfg["n_samples"],
                       cfg["seed"], cfg["workers"])
    last = te.last_resolvable
    return list(te.rows()), {"lambda": cfg["lambda"], "predicted_phi": te.predicted,
                             "last_resolvable_t": last and last[0], "ratio": last and last[1]}


def cmd_compare(cfg):
    rep = compare_case(cfg["case"], cfg["rho"])
    row = {"rho": rep.rho, "case": rep.case, "lambda_star": rep.lambda_star,
           "bk18_value": rep.bk18_value, "gap": rep.gap}
    return [row], rep.to_dict()


def cmd_validate(cfg):
    checks = validate_model(_model(cfg), cfg["n_samples"], cfg["seed"], cfg["workers"])
    rows = [{"check": c.name, "value": c.value, "bound": c.bound, "passed": c.passed} for c in checks]
    summary = {"passed": all(c.passed for c in checks), "checks": rows}
    return rows, summary


HANDLERS = {"ldm": cmd_ldm, "transform": cmd_transform, "tail": cmd_tail,
            "envelope": cmd_envelope, "one-step": cmd_one_step,
            "compare-bk18": cmd_compare, "validate-model": cmd_validate}


def run(cfg: dict, stdout=None) -> int:
    stdout = stdout or sys.stdout
    sha = config_sha(cfg)
    try:
        rows, summary = HANDLERS[cfg["command"]](cfg)
    except (PreconditionError, UnsupportedQueryError, MismatchError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (InputError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    summary = _jsonable({"perpetua_manifest": sha, "command": cfg["command"], **summary})
    csv_text = to_csv(rows, sha)
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        stem = cfg["command"].replace("-", "_")
        (out / f"{stem}.csv").write_text(csv_text)
        (out / f"{stem}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        manifest = {"perpetua_manifest": sha, "version": __version__, "config": _jsonable(cfg)}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if cfg["format"] == "csv":
        stdout.write(csv_text)
    else:
        stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if cfg["command"] == "validate-model" and not summary["passed"]:
        return 4
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
