"""Command-line front end.

Subcommands:
  catalog   list built-in metrics with parameter docs
  run       execute a JSON run configuration and write a report
  point     evaluate every tensor at a single point and dump JSON
  oracle    compare jet derivatives against the finite-difference oracle

Exit codes: 0 success / all non-skipped identities pass, 1 identity failure,
2 configuration error, 3 acceptance starvation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .analysis import (DEFAULT_CLASSIFY_TOL, Workspace, classify,
                       identity_names, kahler_equivalence_witness,
                       verify_all, verify_conformal)
from .catalog import CATALOG, RHO_KINDS, rho_named
from .curvature import (curvature_bundle, flag_and_sectional)
from .errors import (AcceptanceStarvationError, ConfigError,
                     FinslerLabError)
from .expressions import MetricExpr, node_from_dict
from .geometry import Frame, frame_data, torsions
from .jets import eval_jet
from .oracle import oracle_table
from .points import Point
from .sampling import SampleConfig, metric_from_config, sample_points

EXIT_OK = 0
EXIT_IDENTITY = 1
EXIT_CONFIG = 2
EXIT_STARVED = 3

TASKS = ("eval", "classify", "verify", "conformal", "theorem41")
_TASK_ALIASES = {"kahler_witness": "theorem41", "witness": "theorem41"}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _parse_complex_vector(text: str) -> np.ndarray:
    """Parse 're,im;re,im;...' into a complex vector."""
    parts = [p for p in text.split(";") if p.strip()]
    vals = []
    for p in parts:
        bits = p.split(",")
        if len(bits) != 2:
            raise ConfigError(f"bad complex component {p!r}; expected 're,im'")
        vals.append(complex(float(bits[0]), float(bits[1])))
    if not vals:
        raise ConfigError("empty coordinate vector")
    return np.array(vals)


def _parse_param(text: str):
    if "=" not in text:
        raise ConfigError(f"parameter {text!r} is not of the form name=value")
    key, raw = text.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return key.strip(), val


def _metric_from_args(args) -> MetricExpr:
    if getattr(args, "metric_json", None):
        with open(args.metric_json, "r", encoding="utf-8") as fh:
            return metric_from_config({"inline": json.load(fh)})
    if not getattr(args, "metric", None):
        raise ConfigError("need --metric <catalog name> or --metric-json <path>")
    params = {}
    for ptext in args.param or []:
        key, val = _parse_param(ptext)
        params[key] = val
    return metric_from_config({"catalog": args.metric, "params": params})


def _rho_from_config(spec) -> object:
    if isinstance(spec, dict) and "catalog" in spec:
        return rho_named(spec["catalog"], float(spec.get("c", 1.0)))
    if isinstance(spec, dict) and "inline" in spec:
        return node_from_dict(spec["inline"])
    if isinstance(spec, str):
        return rho_named(spec)
    raise ConfigError(
        "conformal factor must be a name, {'catalog': name, 'c': scale} "
        "or {'inline': node}"
    )


def _complex_pairs(arr) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(arr)]


def _dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path and path != "-":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


# ---------------------------------------------------------------------------
# per-point tensor dump
# ---------------------------------------------------------------------------

def point_report(metric: MetricExpr, point: Point) -> dict:
    jt = eval_jet(metric, point)
    f = Frame(jt)
    fd = frame_data(f)
    tor = torsions(f)
    bundle = curvature_bundle(f)
    flags = flag_and_sectional(f)
    return {
        "point": point.to_json_dict(),
        "metric_value": [jt.value().real, jt.value().imag],
        "frame": {
            "fundamental": fd.fundamental.to_json_dict(),
            "inverse": fd.inverse.to_json_dict(),
            "nonlinear": fd.nonlinear.to_json_dict(),
            "condition_number": fd.condition_number,
            "levi_eigenvalues": [float(x) for x in f.levi_eigenvalues],
        },
        "coefficients": {
            "chern_horizontal": _tensor_json(f.Gam_h, point),
            "chern_vertical": _tensor_json(f.Gam_v, point),
            "canonical_symmetrized": _tensor_json(f.Lh, point),
            "canonical_mixed": _tensor_json(f.Lmix, point),
        },
        "torsions": {
            "horizontal": tor.horizontal.to_json_dict(),
            "trace": tor.trace.to_json_dict(),
            "mixed": tor.mixed.to_json_dict(),
            "lowered": tor.lowered.to_json_dict(),
            "weak_kahler": tor.weak_kahler.to_json_dict(),
        },
        "curvature": {
            "chern": bundle.chern.to_json_dict(),
            "rund_horizontal": bundle.rund_horizontal.to_json_dict(),
            "canonical": bundle.canonical.to_json_dict(),
            "complexified": bundle.complexified.to_json_dict(),
            "ricci_chern": bundle.ricci_chern.to_json_dict(),
            "ricci_canonical": bundle.ricci_canonical.to_json_dict(),
            "ricci_complexified": bundle.ricci_complexified.to_json_dict(),
            "torsion_square": bundle.torsion_square.to_json_dict(),
            "torsion_square_scalar": bundle.torsion_square_scalar,
            "scalar_chern": bundle.scalar_chern,
            "scalar_canonical": bundle.scalar_canonical,
            "scalar_complexified": bundle.scalar_complexified,
        },
        "flags": flags,
    }


def _tensor_json(values, point: Point) -> dict:
    arr = np.asarray(values)
    flat = arr.ravel(order="C")
    return {
        "dims": list(arr.shape),
        "re": flat.real.tolist(),
        "im": flat.imag.tolist(),
    }


# ---------------------------------------------------------------------------
# run task execution
# ---------------------------------------------------------------------------

def _load_run_config(args) -> dict:
    path = args.config_path or args.config
    if not path:
        raise ConfigError("run needs a config path (positional or --config)")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    # CLI overrides
    sample = dict(cfg.get("sample", {}))
    if args.seed is not None:
        sample["seed"] = args.seed
    if args.points is not None:
        sample["count"] = args.points
    cfg["sample"] = sample
    if args.task:
        cfg["tasks"] = list(args.task)
    tols = dict(cfg.get("tolerances", {}))
    for ttext in args.tol or []:
        key, val = _parse_param(ttext)
        tols[key] = float(val)
    cfg["tolerances"] = tols
    if args.out:
        cfg["output"] = args.out
    return cfg


def execute_run(cfg: dict) -> tuple[dict, int]:
    if "metric" not in cfg:
        raise ConfigError("config is missing the metric block")
    metric = metric_from_config(cfg["metric"])
    sample_cfg = SampleConfig.from_dict(cfg.get("sample", {}))
    tasks = cfg.get("tasks", ["classify", "verify"])
    if not isinstance(tasks, list) or not tasks:
        raise ConfigError("tasks must be a non-empty list")
    normalized_tasks = []
    for t in tasks:
        t = _TASK_ALIASES.get(t, t)
        if t not in TASKS:
            raise ConfigError(f"unknown task {t!r}; choose from {list(TASKS)}")
        normalized_tasks.append(t)
    tolerances = cfg.get("tolerances", {})
    classify_tol = float(tolerances.get("classify", DEFAULT_CLASSIFY_TOL))

    t_start = time.perf_counter()
    points, sample_report = sample_points(metric, sample_cfg)
    ws = Workspace(metric, points, seed=sample_cfg.seed)

    report = {
        "schema": "finslerlab-report@1",
        "version": __version__,
        "config": cfg,
        "metric": {"name": metric.name, "n": metric.n},
        "sample": sample_report.to_json_dict() | {"seed": sample_cfg.seed},
        "tasks": {},
    }
    failed = False

    for task in normalized_tasks:
        if task == "eval":
            limit = int(cfg.get("eval_limit", 3))
            rows = [point_report(metric, p) for p in points[:limit]]
            report["tasks"]["eval"] = {"points": rows}
        elif task == "classify":
            dv = classify(metric, points, tol=classify_tol, workspace=ws)
            report["tasks"]["classify"] = dv.to_json_dict()
        elif task == "verify":
            names = cfg.get("identities")
            if names is not None:
                unknown = set(names) - set(identity_names())
                if unknown:
                    raise ConfigError(f"unknown identities {sorted(unknown)}")
            reps = verify_all(metric, points, tolerances=tolerances,
                              names=names, workspace=ws)
            report["tasks"]["verify"] = {
                "identities": [r.to_json_dict() for r in reps],
                "all_passed": all(r.verdict != "fail" for r in reps),
            }
            failed |= any(r.verdict == "fail" for r in reps)
        elif task == "conformal":
            conf = cfg.get("conformal")
            if not conf or "rho" not in conf:
                raise ConfigError("conformal task needs config.conformal.rho")
            rho = _rho_from_config(conf["rho"])
            tol = float(tolerances.get("conformal", 1e-7))
            reps = verify_conformal(metric, rho, points, tol=tol,
                                    classify_tol=classify_tol)
            report["tasks"]["conformal"] = {
                "laws": [r.to_json_dict() for r in reps],
                "all_passed": all(r.verdict != "fail" for r in reps),
            }
            failed |= any(r.verdict == "fail" for r in reps)
        elif task == "theorem41":
            tol = float(tolerances.get("witness", 1e-8))
            wit = kahler_equivalence_witness(metric, points, tol=tol,
                                             workspace=ws)
            report["tasks"]["kahler_witness"] = wit
            failed |= wit["verdict"] != "consistent"

    report["exit_code"] = EXIT_IDENTITY if failed else EXIT_OK
    report["timing"] = {"wall_seconds": time.perf_counter() - t_start}
    return report, report["exit_code"]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_catalog(args) -> int:
    if args.json:
        payload = {
            name: {
                "doc": entry.doc,
                "params": [
                    {"name": p, "default": d, "doc": doc}
                    for p, d, doc in entry.params
                ],
            }
            for name, entry in CATALOG.items()
        }
        payload["_conformal_factors"] = list(RHO_KINDS)
        print(_dump_json(payload))
        return EXIT_OK
    for name, entry in CATALOG.items():
        print(f"{name}: {entry.doc}")
        for p, d, doc in entry.params:
            print(f"    {p:10s} (default {d!r}) {doc}")
    print(f"conformal factors: {', '.join(RHO_KINDS)}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_run_config(args)
    report, code = execute_run(cfg)
    text = _dump_json(report, cfg.get("output"))
    if not cfg.get("output") or cfg.get("output") == "-":
        print(text)
    else:
        print(f"report written to {cfg['output']} (exit {code})")
    return code


def _cmd_point(args) -> int:
    metric = _metric_from_args(args)
    z = _parse_complex_vector(args.z)
    v = _parse_complex_vector(args.v)
    if z.shape[0] != metric.n or v.shape[0] != metric.n:
        raise ConfigError(
            f"metric has dimension {metric.n}; got z of length {z.shape[0]} "
            f"and v of length {v.shape[0]}"
        )
    rep = point_report(metric, Point(z, v))
    rep["metric"] = {"name": metric.name, "n": metric.n}
    print(_dump_json(rep, args.out))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    metric = _metric_from_args(args)
    z = _parse_complex_vector(args.z)
    v = _parse_complex_vector(args.v)
    point = Point(z, v)
    jt = eval_jet(metric, point)
    rows = oracle_table(metric, point, jt, richardson=args.richardson)
    by_order = {}
    worst = []
    for key, order, jval, oval, rel in rows:
        by_order[order] = max(by_order.get(order, 0.0), rel)
        worst.append((rel, order, key, jval, oval))
    worst.sort(reverse=True, key=lambda r: r[0])
    if args.json:
        payload = {
            "metric": {"name": metric.name, "n": metric.n},
            "point": point.to_json_dict(),
            "max_rel_by_order": {str(o): r for o, r in sorted(by_order.items())},
            "max_rel": max(by_order.values()),
            "entries": len(rows),
        }
        print(_dump_json(payload))
    else:
        print(f"jet vs finite-difference oracle: {metric.name} ({len(rows)} entries)")
        for o in sorted(by_order):
            print(f"  order {o}: max relative difference {by_order[o]:.3e}")
        print("  worst entries:")
        for rel, order, key, jval, oval in worst[:5]:
            print(f"    {key} (order {order}): jet={jval:.6e} fd={oval:.6e} "
                  f"rel={rel:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="finslerlab",
        description=("Evaluate connection and curvature tensors of complex "
                     "Finsler metrics and verify their pointwise identities."),
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_cat = sub.add_parser("catalog", help="list built-in metrics")
    p_cat.add_argument("--json", action="store_true")
    p_cat.set_defaults(func=_cmd_catalog)

    p_run = sub.add_parser("run", help="execute a run configuration")
    p_run.add_argument("config_path", nargs="?", default=None)
    p_run.add_argument("--config", default=None, help="config path (alternative)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--points", type=int, default=None)
    p_run.add_argument("--tol", action="append", metavar="NAME=FLOAT")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--task", action="append", choices=TASKS + tuple(_TASK_ALIASES))
    p_run.set_defaults(func=_cmd_run)

    def add_metric_args(p):
        p.add_argument("--metric", default=None, help="catalog metric name")
        p.add_argument("--param", action="append", metavar="NAME=VALUE")
        p.add_argument("--metric-json", default=None,
                       help="path to an inline metric JSON document")
        p.add_argument("--z", required=True, help="base point 're,im;re,im;...'")
        p.add_argument("--v", required=True, help="fiber vector 're,im;...'")

    p_pt = sub.add_parser("point", help="dump every tensor at one point")
    add_metric_args(p_pt)
    p_pt.add_argument("--out", default=None)
    p_pt.set_defaults(func=_cmd_point)

    p_or = sub.add_parser("oracle", help="jet vs finite-difference diff")
    add_metric_args(p_or)
    p_or.add_argument("--richardson", type=int, default=1)
    p_or.add_argument("--json", action="store_true")
    p_or.set_defaults(func=_cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AcceptanceStarvationError as e:
        print(f"sampling failed: {e}", file=sys.stderr)
        print(f"rejection histogram: {e.histogram}", file=sys.stderr)
        return EXIT_STARVED
    except FinslerLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
