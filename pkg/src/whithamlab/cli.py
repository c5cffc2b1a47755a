"""Command line front door.

    whithamlab run --config CONFIG.json [--suite all] [--seed 0] [--tol NAME=VALUE ...] [--out REPORT.json]
    whithamlab extract --config CONFIG.json [--block genus0|genus1] [--index 0] [--seed 0] [--out SYSTEM.json]

Exit codes: 0 every asserted check passed, 1 some check failed, 2 the
configuration (file, schema, flags or invariants) is invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import jsonschema

from . import genus0 as g0
from . import genus1 as g1
from .errors import ConfigError, ExtractionError, InvalidInputError, WhithamLabError
from .numerics import ToleranceConfig
from .suites import SUITES, _jsonable, build_deformation, build_genus0, build_genus1, perturbed_system, run_suites

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_POINT = {"oneOf": [{"type": "string"}, _COMPLEX]}
_CONTOUR = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["segment", "circle", "arc", "polyline", "path"]},
        "from": _POINT,
        "to": _POINT,
        "center": _POINT,
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "orientation": {"enum": ["positive", "negative"]},
        "start_angle": {"type": "number"},
        "end_angle": {"type": "number"},
        "turns": {"type": "integer", "minimum": 1},
        "points": {"type": "array", "items": _POINT, "minItems": 2},
        "closed": {"type": "boolean"},
        "parts": {"type": "array", "minItems": 1},
    },
    "additionalProperties": False,
}
_TOLERANCES = {
    "type": "object",
    "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in ("quad_tol", "fd_step", "rank_rel_tol", "residual_tol")},
    "additionalProperties": False,
}
_NAMES = {"type": "array", "items": {"type": "string"}}
_HYDRO = {
    "type": "object",
    "required": ["triple"],
    "properties": {
        "triple": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
        "perturbation": {"type": "number"},
        "inject_fault": {"type": "boolean"},
    },
    "additionalProperties": False,
}
_GENUS_COMMON = {
    "name": {"type": "string"},
    "u": {"type": "array", "items": _COMPLEX, "minItems": 1},
    "s": {"type": "array", "items": {"type": "number"}},
    "contours": {"type": "object", "additionalProperties": _CONTOUR},
    "z_ref": _COMPLEX,
    "cycles": _NAMES,
    "rank_contours": _NAMES,
    "derivative_samples": {"type": "integer", "minimum": 3},
    "tolerances": _TOLERANCES,
    "hydro": _HYDRO,
}
_GENUS0 = {
    "type": "object",
    "required": ["u", "s", "contours"],
    "properties": dict(
        _GENUS_COMMON,
        oracle={
            "type": "object",
            "required": ["contour", "z"],
            "properties": {"contour": {"type": "string"}, "z": {"type": "array", "items": _COMPLEX, "minItems": 1}},
            "additionalProperties": False,
        },
        deformation={
            "type": "object",
            "required": ["d", "contours"],
            "properties": {
                "d": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "v": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
                "contours": _NAMES,
            },
            "additionalProperties": False,
        },
    ),
    "additionalProperties": False,
}
_GENUS1 = {
    "type": "object",
    "required": ["u", "s", "tau", "contours"],
    "properties": dict(
        _GENUS_COMMON,
        a=_COMPLEX,
        b=_COMPLEX,
        tau=_COMPLEX,
        sample_center=_COMPLEX,
        sample_radius={"type": "number", "exclusiveMinimum": 0},
        periodicity_pair={"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
    ),
    "additionalProperties": False,
}
_PARTITION = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_SYSTEM = {
    "type": "object",
    "required": ["u", "s"],
    "properties": {"u": {"type": "array", "items": _COMPLEX, "minItems": 2}, "s": {"type": "array", "items": {"type": "number"}}},
    "additionalProperties": False,
}
_TAU = {
    "type": "object",
    "properties": {
        "K": {"type": "integer", "minimum": 1},
        "max_partition_size": {"type": "integer", "minimum": 0},
        "partitions": {"type": "array", "items": _PARTITION},
        "systems": {"type": "array", "items": _SYSTEM, "minItems": 1},
        "a": {"type": "array", "items": _COMPLEX},
        "b": {"type": "array", "items": _COMPLEX},
        "genus1_tau": _COMPLEX,
        "z_samples": {"type": "array", "items": _COMPLEX},
        "potential": {
            "type": "object",
            "required": ["u", "s", "contours"],
            "properties": {
                "K": {"type": "integer", "minimum": 1},
                "u": {"type": "array", "items": _COMPLEX, "minItems": 1},
                "s": {"type": "array", "items": {"type": "number"}},
                "a": {"type": "array", "items": _COMPLEX},
                "b": {"type": "array", "items": _COMPLEX},
                "z_ref": _COMPLEX,
                "contours": {"type": "object", "additionalProperties": _CONTOUR},
                "partitions": {"type": "array", "items": _PARTITION},
                "report": {
                    "type": "object",
                    "required": ["contours_used"],
                    "properties": {
                        "partition": _PARTITION,
                        "u": {"type": "array", "items": _COMPLEX},
                        "s": {"type": "array", "items": {"type": "number"}},
                        "a": {"type": "array", "items": _COMPLEX},
                        "b": {"type": "array", "items": _COMPLEX},
                        "contours": {"type": "object", "additionalProperties": _CONTOUR},
                        "contours_used": _NAMES,
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}
CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tolerances": _TOLERANCES,
        "theta": {
            "type": "object",
            "properties": {"taus": {"type": "array", "items": _COMPLEX, "minItems": 1},
                           "samples": {"type": "integer", "minimum": 1},
                           "threshold": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "fay": {
            "type": "object",
            "properties": {"taus": {"type": "array", "items": _COMPLEX, "minItems": 1},
                           "samples": {"type": "integer", "minimum": 1},
                           "K": {"type": "integer", "minimum": 1},
                           "max_partition_size": {"type": "integer", "minimum": 0}},
            "additionalProperties": False,
        },
        "genus0": {"oneOf": [_GENUS0, {"type": "array", "items": _GENUS0}]},
        "genus1": {"oneOf": [_GENUS1, {"type": "array", "items": _GENUS1}]},
        "tau": _TAU,
    },
    "additionalProperties": False,
}


def _line_of(text: str, path) -> str:
    """Best-effort line number of the innermost key named in a schema error path."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return ""
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return f" (line {number})"
    return ""


def load_config(path) -> dict:
    """Parse and schema-validate a config file; raises ConfigError with a located message."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    # best_match descends into oneOf branches, so the message names the innermost field
    err = jsonschema.exceptions.best_match(validator.iter_errors(config))
    if err is not None:
        field = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{path}: schema violation at {field}{_line_of(text, err.absolute_path)}: {err.message}")
    return config


def parse_tolerances(config: dict, overrides) -> ToleranceConfig:
    values = dict(config.get("tolerances", {}))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            values[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--tol {name}: {value!r} is not a number") from exc
    try:
        return ToleranceConfig().replace(**values)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc


def _suites_for(name: str, config: dict) -> list:
    if name == "all":
        out = ["theta", "fay"]
        if config.get("genus0"):
            out.append("g0")
        if config.get("genus1"):
            out.append("g1")
        if config.get("genus0") or config.get("genus1"):
            out.append("hydro")
        out.append("tau")
        return out
    required = {"g0": ["genus0"], "g1": ["genus1"], "hydro": ["genus0", "genus1"]}
    if name in required and not any(config.get(b) for b in required[name]):
        raise ConfigError(f"suite {name!r} needs a {' or '.join(required[name])} block in the config")
    return [name]


def _validate_blocks(config: dict, tol: ToleranceConfig):
    """Construct every genus config once so invariant violations surface as config errors."""
    for key, build in (("genus0", build_genus0), ("genus1", build_genus1)):
        blocks = config.get(key)
        blocks = blocks if isinstance(blocks, list) else ([blocks] if blocks else [])
        for i, block in enumerate(blocks):
            try:
                build(block, tol)
                if "deformation" in block:
                    build_deformation(block["deformation"]).exponent(build(block, tol).points)
            except (InvalidInputError, ValueError) as exc:
                raise ConfigError(f"{key}[{i}]: {exc}") from exc


def build_report(config_path, suite: str, seed: int, tol: ToleranceConfig, records, wall_time: float) -> dict:
    recs = [r.to_json() for r in records]
    asserted = [r for r in records if not r.measured_only]
    passed = sum(1 for r in asserted if r.passed)
    return {
        "schema_version": SCHEMA_VERSION,
        "config": str(config_path),
        "suite": suite,
        "seed": seed,
        "tolerances": {k: getattr(tol, k) for k in ("quad_tol", "fd_step", "rank_rel_tol", "residual_tol")},
        "checks": recs,
        "summary": {
            "total": len(records),
            "passed": passed,
            "failed": len(asserted) - passed,
            "measured_only": len(records) - len(asserted),
        },
        "wall_time": round(wall_time, 6),
    }


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall_time fields (for determinism comparisons)."""
    out = {k: v for k, v in report.items() if k != "wall_time"}
    out["checks"] = [{k: v for k, v in c.items() if k != "wall_time"} for c in report["checks"]]
    return out


def run(config_path, suite: str = "all", seed: int = 0, tol_overrides=(), out=None) -> tuple:
    """Run suites and return (exit_code, report); the report is None on config errors."""
    if suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    config = load_config(config_path)
    tol = parse_tolerances(config, tol_overrides)
    _validate_blocks(config, tol)
    suites = _suites_for(suite, config)
    start = time.perf_counter()
    try:
        runner = run_suites(config, suites, seed, tol)
    except (InvalidInputError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    records = runner.report()
    report = build_report(config_path, suite, seed, tol, records, time.perf_counter() - start)
    if out is not None:
        Path(out).write_text(json.dumps(report, indent=2) + "\n")
    code = EXIT_PASS if report["summary"]["failed"] == 0 else EXIT_FAIL
    return code, report


def extract(config_path, block: str | None = None, index: int | None = None, seed: int = 0, tol_overrides=(),
            out=None) -> tuple:
    """Extract the hydrodynamic-type system of one genus block; returns (exit_code, document).

    Without ``index`` the first block carrying a hydro section is used.
    """
    config = load_config(config_path)
    tol = parse_tolerances(config, tol_overrides)
    if block is None:
        block = "genus0" if config.get("genus0") else "genus1"
    blocks = config.get(block)
    blocks = blocks if isinstance(blocks, list) else ([blocks] if blocks else [])
    if index is None:
        index = next((i for i, b in enumerate(blocks) if "hydro" in b), 0)
    if not 0 <= index < len(blocks):
        raise ConfigError(f"config has no {block} block number {index}")
    raw = blocks[index]
    if "hydro" not in raw:
        raise ConfigError(f"{block}[{index}] has no hydro block naming a contour triple")
    try:
        cfg = build_genus0(raw, tol) if block == "genus0" else build_genus1(raw, tol)
    except (InvalidInputError, ValueError) as exc:
        raise ConfigError(f"{block}[{index}]: {exc}") from exc
    triple = tuple(raw["hydro"]["triple"])
    missing = [t for t in triple if t not in cfg.contours]
    if missing:
        raise ConfigError(f"{block}[{index}]: unknown contour(s) {missing}")
    doc = {"schema_version": SCHEMA_VERSION, "config": str(config_path), "block": block, "index": index, "seed": seed}
    try:
        if block == "genus0":
            system = g0.extract_hydro_g0(cfg, triple, seed)
            consistency = g0.hydro_consistency_g0(system, cfg, seed)
            perturbed = g0.hydro_consistency_g0(perturbed_system(system, 0.1), cfg, seed)
        else:
            system = g1.extract_hydro_g1(cfg, triple, seed)
            consistency = g1.hydro_consistency_g1(system, cfg, seed)
            perturbed = g1.hydro_consistency_g1(perturbed_system(system, 0.1), cfg, seed)
    except ExtractionError as exc:
        doc.update({"error": str(exc), "diagnostics": _jsonable(exc.diagnostics)})
        if out is not None:
            Path(out).write_text(json.dumps(doc, indent=2) + "\n")
        return EXIT_FAIL, doc
    except WhithamLabError as exc:
        doc["error"] = f"{type(exc).__name__}: {exc}"
        if out is not None:
            Path(out).write_text(json.dumps(doc, indent=2) + "\n")
        return EXIT_FAIL, doc
    doc.update({
        "genus": system.genus,
        "triple": list(system.triple),
        "fields": list(system.fields),
        "m": system.m,
        "basis": list(system.basis),
        "a": _jsonable(system.a),
        "b": _jsonable(system.b),
        "c": _jsonable(system.c),
        "fit_residual": system.fit_residual,
        "held_out_residual": system.held_out_residual,
        "consistency_residual": None if consistency.singular else consistency.residual,
        "consistency_singular": consistency.singular,
        "perturbed_consistency_residual": None if perturbed.singular else perturbed.residual,
        "notes": list(system.notes),
    })
    if out is not None:
        Path(out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_PASS, doc


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whithamlab", description="Residual checks for Whitham-type potentials")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override a tolerance field (repeatable)")
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    p_run = sub.add_parser("run", parents=[common], help="run verification suites")
    p_run.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES + ('all',))}")
    p_ext = sub.add_parser("extract", parents=[common], help="export a hydrodynamic-type system")
    p_ext.add_argument("--block", choices=["genus0", "genus1"])
    p_ext.add_argument("--index", type=int)
    return parser


def _print_table(report: dict, stream):
    for rec in report["checks"]:
        if rec["measured_only"]:
            status = "MEASURED"
        else:
            status = "PASS" if rec["pass"] else "FAIL"
        res = rec["residual"]
        res_s = f"{res:.3e}" if isinstance(res, float) else str(res)
        thr = "-" if rec["threshold"] is None else f"{rec['threshold']:.1e}"
        line = f"{status:8s} {rec['name']:60s} residual={res_s:>10s} threshold={thr}"
        if "error" in rec:
            line += f"  [{rec['error']}]"
        print(line, file=stream)
    s = report["summary"]
    print(f"total={s['total']} passed={s['passed']} failed={s['failed']} measured_only={s['measured_only']}", file=stream)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            code, report = run(args.config, args.suite, args.seed, args.tol, args.out)
            if args.out is None:
                print(json.dumps(report, indent=2))
            else:
                _print_table(report, sys.stdout)
            return code
        code, doc = extract(args.config, args.block, args.index, args.seed, args.tol, args.out)
        if args.out is None:
            print(json.dumps(doc, indent=2))
        elif "error" in doc:
            print(doc["error"], file=sys.stderr)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
