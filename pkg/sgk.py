#!/usr/bin/env python3
"""Batch front end for spin-gauge kinetics runs.

Every command reads one JSON run configuration, validates it completely
(all schema violations are reported at once) and writes its artefacts into
the output directory:

  run-scenario   trajectory.csv + results.jsonl (one summary per band)
  curvature-map  curvature_map.csv (grid point, band, every F_a_b component)
  chern-charge   results.jsonl (sphere flux / 2π of one band)
  ensemble       ensemble_samples.csv + results.jsonl (transport report)
  verify         results.jsonl (one record per self-check)

Usage:
  python sgk.py run-scenario --config run.json --out results/
  python sgk.py ensemble --config rashba.json --threads 8 --seed 7
  python sgk.py verify --config verify.json

Exit codes: 0 ok, 1 verify checks failed, 2 configuration, 3 physics
(degeneracy, singularity, quadrature, ensemble), 4 adiabaticity breach,
5 internal. Failures also print one JSON object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np
from jsonschema import Draft202012Validator

from dynamics import (
    COUPLINGS,
    CURVATURE_SOURCES,
    METHODS,
    STATUS_BREACH,
    IntegratorConfig,
    Trajectory,
    energy_drift,
)
from errors import (
    EXIT_CHECKS_FAILED,
    EXIT_CONFIG,
    EXIT_INTERNAL,
    EXIT_OK,
    AdiabaticityBreach,
    SchemaError,
    SpinGaugeError,
)
from gauge import adiabatic_curvature_numeric, chern_charge, curvature_m_space
from scenarios import PARAMETER_SCHEMAS, SCENARIOS, build_scenario, simulate
from spectral_core import PhasePoint, directions
from transport import SAMPLER_KINDS, EnsembleSpec, SamplerSpec, polarization_current, run_ensemble
from verification import CHECKS, run_checks

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
FORMAT_VERSION = 1
OUTPUT_DIR_DEFAULT = "sgk_out"
COMMANDS = ("run-scenario", "curvature-map", "chern-charge", "ensemble", "verify")

TRAJECTORY_CSV = "trajectory.csv"
CURVATURE_CSV = "curvature_map.csv"
SAMPLES_CSV = "ensemble_samples.csv"
RESULTS_JSONL = "results.jsonl"

CHERN_NODES_DEFAULT = (48, 96)
LOG_FORMAT = "[%(module)-12s] %(message)s"


_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 3}
_VEC3 = {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

POINT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["p", "r"],
    "properties": {"p": _VECTOR, "r": _VECTOR, "t": _NUMBER},
}

INTEGRATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "method": {"enum": list(METHODS)},
        "step": _POSITIVE,
        "tolerance": _POSITIVE,
        "max_steps": {"type": "integer", "minimum": 1},
        "t_final": _POSITIVE,
        "epsilon_abort": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "coupling": {"enum": list(COUPLINGS)},
        "curvature": {"enum": list(CURVATURE_SOURCES)},
        "track_phases": {"type": "boolean"},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["command"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "format_version": {"const": FORMAT_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {"name": {"enum": list(SCENARIOS)}, "params": {"type": "object"}},
        },
        "initial": POINT_SCHEMA,
        "bands": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1, "uniqueItems": True},
        "integrator": INTEGRATOR_SCHEMA,
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axes"],
            "properties": {
                "base": POINT_SCHEMA,
                "source": {"enum": ["numeric", "split"]},
                "axes": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["axis", "min", "max", "count"],
                        "properties": {
                            "axis": {"type": "string", "pattern": "^(p[1-3]|r[1-3]|t)$"},
                            "min": _NUMBER,
                            "max": _NUMBER,
                            "count": {"type": "integer", "minimum": 1, "maximum": 1000},
                        },
                    },
                },
            },
        },
        "sphere": {
            "type": "object",
            "additionalProperties": False,
            "required": ["center", "radius"],
            "properties": {
                "space": {"enum": ["r", "p"]},
                "center": _VEC3,
                "radius": _POSITIVE,
                "source": {"enum": ["numeric", "split"]},
                "band": {"type": "integer", "minimum": 0},
                "at": POINT_SCHEMA,
                "nodes": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
        },
        "ensemble": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sampler", "count"],
            "properties": {
                "sampler": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "p_min", "p_max", "r_min", "r_max"],
                    "properties": {
                        "kind": {"enum": list(SAMPLER_KINDS)},
                        "p_min": _VECTOR,
                        "p_max": _VECTOR,
                        "r_min": _VECTOR,
                        "r_max": _VECTOR,
                    },
                },
                "count": {"type": "integer", "minimum": 1},
                "principal_axis": _VECTOR,
                "transverse_axis": _VECTOR,
                "fractions": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                "t0": _NUMBER,
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "checks": {"type": "array", "items": {"enum": list(CHECKS)}, "uniqueItems": True},
                "quick": {"type": "boolean"},
            },
        },
    },
    "allOf": [
        {"if": {"properties": {"command": {"const": "run-scenario"}}}, "then": {"required": ["scenario", "initial"]}},
        {"if": {"properties": {"command": {"const": "curvature-map"}}}, "then": {"required": ["scenario", "grid"]}},
        {"if": {"properties": {"command": {"const": "chern-charge"}}}, "then": {"required": ["scenario", "sphere"]}},
        {"if": {"properties": {"command": {"const": "ensemble"}}}, "then": {"required": ["scenario", "ensemble"]}},
    ],
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    command: str
    scenario: Optional[str] = None
    params: dict = field(default_factory=dict)
    initial: Optional[PhasePoint] = None
    bands: tuple[int, ...] = ()
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    grid: Optional[dict] = None
    sphere: Optional[dict] = None
    ensemble: Optional[dict] = None
    checks: Optional[tuple[str, ...]] = None
    quick: bool = False
    seed: int = 0


def _where(path: Sequence[Any]) -> str:
    return "/".join(str(part) for part in path) or "<root>"


def _violations(validator: Draft202012Validator, doc: Any, prefix: Sequence[Any] = ()) -> List[str]:
    errors = sorted(validator.iter_errors(doc), key=lambda e: [str(part) for part in e.absolute_path])
    return [f"{_where([*prefix, *e.absolute_path])}: {e.message}" for e in errors]


def _point(spec: dict, t_default: float = 0.0) -> PhasePoint:
    return PhasePoint(spec["p"], spec["r"], float(spec.get("t", t_default)))


def _semantic_violations(doc: dict) -> List[str]:
    """Cross-field rules that the schema cannot express."""
    problems: List[str] = []
    name = doc.get("scenario", {}).get("name")
    if name is None:
        return problems
    params = doc["scenario"].get("params", {})
    problems += _violations(Draft202012Validator(PARAMETER_SCHEMAS[name]), params, ("scenario", "params"))
    if problems:
        return problems
    try:
        scn = build_scenario(name, params)
    except (KeyError, TypeError, ValueError, SpinGaugeError) as exc:
        return [f"scenario/params: scenario {name} cannot be built: {type(exc).__name__}: {exc}"]
    d = scn.d
    n = scn.model().n

    def check_dim(path: str, values: Optional[Sequence[float]]) -> None:
        if values is not None and len(values) != d:
            problems.append(f"{path}: scenario {name} needs {d} components, got {len(values)}")

    for key in ("initial", "grid/base", "sphere/at"):
        section, _, sub = key.partition("/")
        spec = doc.get(section, {}).get(sub) if sub else doc.get(section)
        if spec is not None:
            check_dim(f"{key}/p", spec.get("p"))
            check_dim(f"{key}/r", spec.get("r"))
    for band in doc.get("bands", []):
        if band >= n:
            problems.append(f"bands: band {band} does not exist ({name} has {n} bands)")
    if name == "optical":
        for band in doc.get("bands", []):
            if band not in scn.channels():
                problems.append(f"bands: optical rays are traced for bands {list(scn.channels())}, got {band}")
    axes = directions(d)
    for k, axis in enumerate(doc.get("grid", {}).get("axes", [])):
        if axis["axis"] not in axes:
            problems.append(f"grid/axes/{k}/axis: {axis['axis']!r} is not one of {list(axes)}")
        if axis["max"] < axis["min"]:
            problems.append(f"grid/axes/{k}: max is below min")
    sphere = doc.get("sphere")
    if sphere is not None:
        if d != 3:
            problems.append(f"sphere: chern charges need d = 3, scenario {name} has d = {d}")
        if sphere.get("band", 0) >= n:
            problems.append(f"sphere/band: band {sphere['band']} does not exist ({name} has {n} bands)")
    ensemble = doc.get("ensemble")
    if ensemble is not None:
        for key in ("p_min", "p_max", "r_min", "r_max"):
            check_dim(f"ensemble/sampler/{key}", ensemble["sampler"].get(key))
        for key in ("principal_axis", "transverse_axis"):
            check_dim(f"ensemble/{key}", ensemble.get(key))
        lows = ensemble["sampler"]["p_min"] + ensemble["sampler"]["r_min"]
        highs = ensemble["sampler"]["p_max"] + ensemble["sampler"]["r_max"]
        if any(lo > hi for lo, hi in zip(lows, highs)):
            problems.append("ensemble/sampler: a minimum exceeds its maximum")
        fractions = ensemble.get("fractions")
        if fractions is not None:
            if len(fractions) != len(scn.channels()):
                problems.append(f"ensemble/fractions: need {len(scn.channels())} values, got {len(fractions)}")
            elif abs(sum(fractions) - 1.0) > 1e-12:
                problems.append(f"ensemble/fractions: must sum to 1, got {sum(fractions)}")
    return problems


def parse_config(text: str, command: Optional[str] = None, seed: Optional[int] = None) -> RunConfig:
    """Validate a JSON run configuration and fill in defaults.

    `command` (from the command line) is inserted when the document has none
    and must agree with it otherwise; `seed` overrides the document's seed.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([f"<root>: not valid JSON ({exc})"]) from exc
    if isinstance(doc, dict) and command is not None:
        doc.setdefault("command", command)
        if doc["command"] != command:
            raise SchemaError([f"command: configuration is for {doc['command']!r}, not {command!r}"])

    problems = _violations(Draft202012Validator(CONFIG_SCHEMA), doc)
    if not problems:
        problems = _semantic_violations(doc)
    if problems:
        raise SchemaError(problems)

    scenario = doc.get("scenario", {})
    name = scenario.get("name")
    params = dict(scenario.get("params", {}))
    bands: tuple[int, ...] = ()
    if name is not None:
        bands = tuple(doc.get("bands", build_scenario(name, params).channels()))
    verify = doc.get("verify", {})
    return RunConfig(
        command=doc["command"],
        scenario=name,
        params=params,
        initial=_point(doc["initial"]) if "initial" in doc else None,
        bands=bands,
        integrator=IntegratorConfig(**doc.get("integrator", {})),
        grid=doc.get("grid"),
        sphere=doc.get("sphere"),
        ensemble=doc.get("ensemble"),
        checks=tuple(verify["checks"]) if "checks" in verify else None,
        quick=bool(verify.get("quick", False)),
        seed=int(seed if seed is not None else doc.get("seed", 0)),
    )


# =========================
# Writers
# =========================
def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_json(value: Any) -> str:
    """Compact JSON with floats at 17 significant digits; non-finite floats become null."""
    if value is None or isinstance(value, (bool, np.bool_)):
        return json.dumps(None if value is None else bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return format(value, ".17g") if math.isfinite(value) else "null"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in value) + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    print(f"Wrote {len(rows)} rows to {path}")


def write_jsonl(path: Path, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(to_json({"format_version": FORMAT_VERSION, **record}) + "\n")
    print(f"Wrote {len(records)} records to {path}")


def _axis_names(d: int) -> List[str]:
    return [f"p{i + 1}" for i in range(d)] + [f"r{i + 1}" for i in range(d)]


# =========================
# Commands
# =========================
def _trajectory_rows(traj: Trajectory) -> List[list]:
    return [
        [FORMAT_VERSION, s.m.t, *s.m.p, *s.m.r, traj.band, s.energy, s.epsilon, s.berry_phase, s.dynamic_phase]
        for s in traj.states
    ]


def _run_scenario(config: RunConfig, out: Path, threads: Optional[int]) -> int:
    scn = build_scenario(config.scenario, config.params)
    rows: List[list] = []
    records: List[dict] = []
    breach: Optional[tuple[int, Trajectory]] = None
    for band in config.bands:
        traj = simulate(scn, band, config.initial, config.integrator)
        rows += _trajectory_rows(traj)
        final = traj.final
        records.append(
            {
                "command": config.command,
                "scenario": config.scenario,
                "band": band,
                "status": traj.status,
                "steps": len(traj.states) - 1,
                "t": final.m.t,
                "p": final.m.p,
                "r": final.m.r,
                "energy_drift": energy_drift(traj),
                "max_epsilon": max(s.epsilon for s in traj.states),
                "berry_phase": final.berry_phase,
                "dynamic_phase": final.dynamic_phase,
            }
        )
        if traj.status == STATUS_BREACH and breach is None:
            breach = (band, traj)
    d = config.initial.d
    header = ["format_version", "t", *_axis_names(d), "band", "energy", "epsilon", "berry_phase", "dynamic_phase"]
    write_csv(out / TRAJECTORY_CSV, header, rows)
    write_jsonl(out / RESULTS_JSONL, records)
    if breach is not None:
        band, traj = breach
        raise AdiabaticityBreach(
            f"band {band}: ε = {traj.final.epsilon:.6g} exceeded {config.integrator.epsilon_abort:g} at t = {traj.final.m.t:.6g}",
            step=len(traj.states) - 1,
        )
    return EXIT_OK


def _grid_points(grid: dict, d: int) -> List[PhasePoint]:
    base = _point(grid["base"]) if "base" in grid else PhasePoint(np.zeros(d), np.zeros(d), 0.0)
    names = directions(d)
    axes = [(names.index(a["axis"]), np.linspace(a["min"], a["max"], a["count"])) for a in grid["axes"]]
    points = []
    for combo in product(*(values for _, values in axes)):
        v = base.as_vector()
        for (k, _), x in zip(axes, combo):
            v[k] = x
        points.append(PhasePoint.from_vector(v, d))
    return points


def _curvature_map(config: RunConfig, out: Path, threads: Optional[int]) -> int:
    scn = build_scenario(config.scenario, config.params)
    model = scn.model()
    d = scn.d
    names = directions(d)
    pairs = [(i, j) for i in range(len(names)) for j in range(i + 1, len(names))]
    source = config.grid.get("source", "numeric")
    rows = []
    for m in _grid_points(config.grid, d):
        F = curvature_m_space(model, m) if source == "split" else adiabatic_curvature_numeric(model, m)
        for band in config.bands:
            rows.append([FORMAT_VERSION, *m.p, *m.r, m.t, band, *(F.F[band][i, j] for i, j in pairs)])
    header = ["format_version", *_axis_names(d), "t", "band", *(f"F_{names[i]}_{names[j]}" for i, j in pairs)]
    write_csv(out / CURVATURE_CSV, header, rows)
    return EXIT_OK


def _chern(config: RunConfig, out: Path, threads: Optional[int]) -> int:
    scn = build_scenario(config.scenario, config.params)
    model = scn.model()
    sphere = config.sphere
    space = sphere.get("space", "r")
    source = sphere.get("source", "split")
    band = int(sphere.get("band", config.bands[-1]))
    at = _point(sphere["at"]) if "at" in sphere else PhasePoint(np.zeros(3), np.zeros(3), 0.0)
    block = space * 2
    axes = range(0, 3) if space == "p" else range(3, 6)

    def field_at(x: np.ndarray) -> np.ndarray:
        m = PhasePoint(x, at.r, at.t) if space == "p" else PhasePoint(at.p, x, at.t)
        if source == "split":
            F = curvature_m_space(model, m)
        else:
            F = adiabatic_curvature_numeric(model, m, axes=axes)
        return F.pseudovector(block, band)

    nodes = tuple(sphere.get("nodes", CHERN_NODES_DEFAULT))
    charge = chern_charge(field_at, sphere["center"], sphere["radius"], nodes=nodes)
    S = model.spin_charges[band]
    print(f"Chern charge of band {band} in {space}-space: {charge:.12f} (expected {-2.0 * S:g} for S = {S:g})")
    record = {
        "command": config.command,
        "scenario": config.scenario,
        "space": space,
        "source": source,
        "band": band,
        "spin_charge": S,
        "center": sphere["center"],
        "radius": sphere["radius"],
        "charge": charge,
    }
    write_jsonl(out / RESULTS_JSONL, [record])
    return EXIT_OK


def _ensemble(config: RunConfig, out: Path, threads: Optional[int]) -> int:
    ens = config.ensemble
    d = len(ens["sampler"]["p_min"])
    sampler = SamplerSpec(
        kind=ens["sampler"]["kind"],
        **{key: tuple(map(float, ens["sampler"][key])) for key in ("p_min", "p_max", "r_min", "r_max")},
    )
    default_principal = (1.0,) + (0.0,) * (d - 1)
    default_transverse = (0.0, 1.0) + (0.0,) * (d - 2)
    spec = EnsembleSpec(
        scenario=config.scenario,
        params=config.params,
        sampler=sampler,
        count=int(ens["count"]),
        config=config.integrator,
        principal_axis=tuple(ens.get("principal_axis", default_principal)),
        transverse_axis=tuple(ens.get("transverse_axis", default_transverse)),
        seed=config.seed,
        t0=float(ens.get("t0", 0.0)),
    )
    report = run_ensemble(spec, workers=threads)
    rows = []
    for sample in report.samples:
        for ch in sample.channels:
            rows.append(
                [FORMAT_VERSION, sample.index, *sample.p, *sample.r, ch.band, ch.status, ch.displacement, ch.velocity, ch.initial_velocity]
            )
    header = ["format_version", "index", *_axis_names(d), "band", "status", "displacement", "velocity", "initial_velocity"]
    write_csv(out / SAMPLES_CSV, header, rows)
    record = {"command": config.command, "seed": config.seed, **report.as_record(), "failures": list(report.failures)}
    if "fractions" in ens:
        record["polarization_current"] = polarization_current(report, ens["fractions"])
    write_jsonl(out / RESULTS_JSONL, [record])
    print(f"\nSummary: done={len(report.samples)}, failed={len(report.failures)}")
    return EXIT_OK


def _verify(config: RunConfig, out: Path, threads: Optional[int]) -> int:
    results = run_checks(config.checks, quick=config.quick, seed=config.seed)
    write_jsonl(out / RESULTS_JSONL, [{"command": config.command, **r.as_record()} for r in results])
    failed = [r.name for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}: {r.name:<13} {r.value:.3e} (tolerance {r.tolerance:.1e}) {r.detail}")
    print(f"\nSummary: passed={len(results) - len(failed)}, failed={len(failed)}")
    return EXIT_OK if not failed else EXIT_CHECKS_FAILED


HANDLERS = {
    "run-scenario": _run_scenario,
    "curvature-map": _curvature_map,
    "chern-charge": _chern,
    "ensemble": _ensemble,
    "verify": _verify,
}


def report_error(exc: BaseException) -> int:
    if isinstance(exc, SpinGaugeError):
        payload = exc.payload()
    else:
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": EXIT_INTERNAL}
    print(to_json(payload), file=sys.stderr)
    return int(payload["exit_code"])


def execute(config: RunConfig, out_dir: str | os.PathLike = OUTPUT_DIR_DEFAULT, threads: Optional[int] = None) -> int:
    """Run a parsed configuration; returns the process exit code."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[config.command](config, out, threads)
    except SpinGaugeError as exc:
        logger.info("%s failed: %s", config.command, exc)
        return report_error(exc)
    except Exception as exc:
        logger.exception("%s: unexpected failure", config.command)
        return report_error(exc)


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(description="Spin-gauge semiclassical dynamics: batch runs, maps, charges, ensembles, checks.")
    p.add_argument("command", choices=COMMANDS, help="What to run")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=OUTPUT_DIR_DEFAULT, help=f"Output directory (default: {OUTPUT_DIR_DEFAULT})")
    p.add_argument("-j", "--threads", type=int, default=None, help="Worker processes for ensembles (default: all cores)")
    p.add_argument("--seed", type=int, default=None, help="Override the configuration seed")
    p.add_argument("-v", "--verbose", action="store_true", help="Per-step debug logging")
    args = p.parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)

    if not os.path.isfile(args.config):
        print(to_json({"error": "FileNotFoundError", "message": f"config not found: {args.config}", "exit_code": EXIT_CONFIG}), file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None and args.threads < 1:
        print(to_json({"error": "SchemaError", "message": "--threads must be >= 1", "exit_code": EXIT_CONFIG}), file=sys.stderr)
        return EXIT_CONFIG
    with open(args.config, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        config = parse_config(text, command=args.command, seed=args.seed)
    except SchemaError as exc:
        return report_error(exc)
    return execute(config, args.out, args.threads)


if __name__ == "__main__":
    raise SystemExit(main())
