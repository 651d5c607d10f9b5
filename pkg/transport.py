"""Ensembles of trajectories over both spin channels: spin current and Hall splitting.

Every sample starts both channels of a scenario from the same initial point.
Samples run one task per process (like the batch runners this repo grew out
of) and are reduced in sample order, so the report does not depend on how
many workers ran it.

Usage:
  spec = EnsembleSpec("rashba", {"E": [1, 0], "B": 1}, SamplerSpec("grid", ...), count=16)
  report = run_ensemble(spec, workers=4)
  print(report.spin_current, report.splitting)
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from dynamics import STATUS_BREACH, IntegratorConfig, Trajectory
from errors import EnsembleFailure, SpinGaugeError
from scenarios import build_scenario, simulate
from spectral_core import PhasePoint

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
FAILURE_LIMIT = 0.10            # fraction of failed samples that fails the run
SAMPLER_KINDS = ("grid", "random")


@dataclass(frozen=True)
class SamplerSpec:
    kind: str
    p_min: tuple[float, ...]
    p_max: tuple[float, ...]
    r_min: tuple[float, ...]
    r_max: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"sampler kind must be one of {SAMPLER_KINDS}, got {self.kind!r}")
        sizes = {len(self.p_min), len(self.p_max), len(self.r_min), len(self.r_max)}
        if len(sizes) != 1:
            raise ValueError("sampler ranges must all have the same dimension")
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"sampler range is inverted: {lo} > {hi}")

    @property
    def d(self) -> int:
        return len(self.p_min)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.p_min + self.r_min, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.p_max + self.r_max, dtype=float)


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    scenario: str
    params: Mapping[str, Any]
    sampler: SamplerSpec
    count: int
    config: IntegratorConfig = field(default_factory=IntegratorConfig)
    principal_axis: tuple[float, ...] = (1.0, 0.0)
    transverse_axis: tuple[float, ...] = (0.0, 1.0)
    seed: int = 0
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        for name in ("principal_axis", "transverse_axis"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.size != self.sampler.d:
                raise ValueError(f"{name} needs {self.sampler.d} components, got {axis.size}")
            if float(np.linalg.norm(axis)) == 0.0:
                raise ValueError(f"{name} must be non-zero")


@dataclass(frozen=True)
class ChannelSample:
    band: int
    status: str
    displacement: float             # transverse
    velocity: float                 # transverse displacement / elapsed parameter
    initial_velocity: float         # transverse component of ṙ at the start


@dataclass(frozen=True)
class SampleRecord:
    index: int
    p: tuple[float, ...]
    r: tuple[float, ...]
    channels: tuple[ChannelSample, ...]


@dataclass(frozen=True, eq=False)
class TransportReport:
    scenario: str
    channels: tuple[int, ...]
    count: int
    samples: tuple[SampleRecord, ...]
    failures: tuple[str, ...]
    mean_displacement: np.ndarray
    mean_velocity: np.ndarray
    mean_initial_velocity: np.ndarray
    stderr_displacement: np.ndarray
    stderr_velocity: np.ndarray
    spin_current: float             # ½(v₁ - v₀) of mean transverse velocity
    splitting: float                # d₁ - d₀ of mean transverse displacement
    splitting_stderr: float

    def as_record(self) -> dict:
        return {
            "scenario": self.scenario,
            "channels": list(self.channels),
            "count": self.count,
            "completed": len(self.samples),
            "failed": len(self.failures),
            "mean_displacement": self.mean_displacement.tolist(),
            "mean_velocity": self.mean_velocity.tolist(),
            "mean_initial_velocity": self.mean_initial_velocity.tolist(),
            "stderr_displacement": self.stderr_displacement.tolist(),
            "stderr_velocity": self.stderr_velocity.tolist(),
            "spin_current": self.spin_current,
            "splitting": self.splitting,
            "splitting_stderr": self.splitting_stderr,
        }


def _unit(axis: Sequence[float]) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    return axis / np.linalg.norm(axis)


def _counter_rng(seed: int, index: int) -> np.random.Generator:
    # one independent stream per (seed, sample index)
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + int(index)))


def sample_initial_conditions(spec: EnsembleSpec) -> list[PhasePoint]:
    """`count` initial points; only axes with min != max are varied."""
    s = spec.sampler
    d = s.d
    lo, hi = s.lower, s.upper
    varying = [k for k in range(2 * d) if hi[k] != lo[k]]
    points: list[PhasePoint] = []
    if s.kind == "grid":
        per_axis = max(1, math.ceil(spec.count ** (1.0 / len(varying)) - 1e-9)) if varying else 1
        axes = [np.linspace(lo[k], hi[k], per_axis) for k in varying]
        for combo in product(*axes):
            v = lo.copy()
            v[varying] = combo
            points.append(PhasePoint(v[:d], v[d:], spec.t0))
            if len(points) == spec.count:
                break
        while len(points) < spec.count:
            points.append(PhasePoint(lo[:d], lo[d:], spec.t0))
        return points
    for index in range(spec.count):
        u = _counter_rng(spec.seed, index).random(2 * d)
        v = np.where(hi > lo, lo + u * (hi - lo), lo)
        points.append(PhasePoint(v[:d], v[d:], spec.t0))
    return points


def _channel_sample(traj: Trajectory, transverse: np.ndarray) -> ChannelSample:
    start, end = traj.states[0], traj.final
    d = start.m.d
    displacement = float(np.dot(end.m.r - start.m.r, transverse))
    elapsed = end.m.t - start.m.t
    velocity = displacement / elapsed if elapsed > 0 else 0.0
    initial = float(np.dot(start.velocity[d : 2 * d], transverse))
    return ChannelSample(traj.band, traj.status, displacement, velocity, initial)


def _run_one(spec: EnsembleSpec, index: int, point: PhasePoint) -> tuple[int, Optional[SampleRecord], str]:
    try:
        scn = build_scenario(spec.scenario, spec.params)
        transverse = _unit(spec.transverse_axis)
        channels = []
        for band in scn.channels():
            traj = simulate(scn, band, point, spec.config)
            if traj.status == STATUS_BREACH:
                return index, None, f"ERROR: sample {index} band {band}: adiabaticity breach at t = {traj.final.m.t:.6g}"
            channels.append(_channel_sample(traj, transverse))
        record = SampleRecord(index, tuple(point.p.tolist()), tuple(point.r.tolist()), tuple(channels))
        return index, record, f"DONE: sample {index}"
    except (SpinGaugeError, ValueError, ArithmeticError) as exc:
        return index, None, f"ERROR: sample {index}: {type(exc).__name__}: {exc}"


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / np.sqrt(x.size))


def _reduce(spec: EnsembleSpec, channels: tuple[int, ...], records: list[SampleRecord], failures: list[str]) -> TransportReport:
    records = sorted(records, key=lambda rec: rec.index)
    disp = np.array([[c.displacement for c in rec.channels] for rec in records]).reshape(len(records), len(channels))
    vel = np.array([[c.velocity for c in rec.channels] for rec in records]).reshape(len(records), len(channels))
    init = np.array([[c.initial_velocity for c in rec.channels] for rec in records]).reshape(len(records), len(channels))
    n = max(1, len(records))
    mean_d = np.sum(disp, axis=0) / n
    mean_v = np.sum(vel, axis=0) / n
    mean_i = np.sum(init, axis=0) / n
    split = disp[:, -1] - disp[:, 0]
    return TransportReport(
        scenario=spec.scenario,
        channels=channels,
        count=spec.count,
        samples=tuple(records),
        failures=tuple(failures),
        mean_displacement=mean_d,
        mean_velocity=mean_v,
        mean_initial_velocity=mean_i,
        stderr_displacement=np.array([_stderr(disp[:, k]) for k in range(len(channels))]),
        stderr_velocity=np.array([_stderr(vel[:, k]) for k in range(len(channels))]),
        spin_current=float(0.5 * (mean_v[-1] - mean_v[0])),
        splitting=float(mean_d[-1] - mean_d[0]),
        splitting_stderr=_stderr(split),
    )


def run_ensemble(spec: EnsembleSpec, workers: Optional[int] = None) -> TransportReport:
    """Integrate both channels for every sample and reduce the transverse observables."""
    points = sample_initial_conditions(spec)
    channels = tuple(build_scenario(spec.scenario, spec.params).channels())
    workers = workers if workers and workers > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(points))

    records: list[SampleRecord] = []
    failures: list[tuple[int, str]] = []

    def collect(index: int, record: Optional[SampleRecord], message: str) -> None:
        logger.debug(message)
        if record is None:
            failures.append((index, message))
        else:
            records.append(record)

    logger.info("ensemble %s: %d samples, %d worker(s)", spec.scenario, len(points), workers)
    if workers == 1:
        for index, point in enumerate(points):
            collect(*_run_one(spec, index, point))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(_run_one, spec, index, point): index for index, point in enumerate(points)}
            for future in as_completed(futures):
                try:
                    collect(*future.result())
                except Exception as exc:
                    index = futures[future]
                    collect(index, None, f"ERROR: sample {index}: worker failed: {exc}")

    messages = [msg for _, msg in sorted(failures)]
    logger.info("Summary: done=%d, failed=%d", len(records), len(messages))
    if len(messages) > FAILURE_LIMIT * len(points) or not records:
        raise EnsembleFailure(
            f"{len(messages)} of {len(points)} trajectories failed (limit {FAILURE_LIMIT:.0%}); first: {messages[0]}",
            messages,
        )
    return _reduce(spec, channels, records, messages)


def polarization_current(report: TransportReport, fractions: Sequence[float]) -> float:
    """Σ_b w_b ⟨v_b⟩ over the report's channels; the weights are the band populations."""
    w = np.asarray(fractions, dtype=float)
    if w.shape != report.mean_velocity.shape:
        raise ValueError(f"need {report.mean_velocity.size} fractions, got {w.size}")
    if np.any(w < 0.0) or np.any(w > 1.0):
        raise ValueError("fractions must lie in [0, 1]")
    if abs(float(np.sum(w)) - 1.0) > 1e-12:
        raise ValueError(f"fractions must sum to 1, got {float(np.sum(w))}")
    return float(np.dot(w, report.mean_velocity))
