"""Named self-checks of the gauge pipeline against closed forms.

Each check builds its own models, measures one error figure and compares it
with a fixed tolerance. `quick=True` shrinks grids and sample counts so the
whole suite stays interactive; the tolerances do not change.

Usage:
  for result in run_checks(["chern", "solid_angle"], quick=True):
      print(result.name, result.passed, result.value)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from dynamics import (
    STATUS_BREACH,
    IntegratorConfig,
    adiabaticity_epsilon,
    integrate,
    velocity_field,
)
from errors import SpinGaugeError
from gauge import (
    ConnectionField,
    adiabatic_curvature_numeric,
    chern_charge,
    curvature_from_connection,
    curvature_m_space,
    maxwell_residuals,
    monopole_curvature,
    nonabelian_curvature,
    phase_distance,
    phase_line_integral,
    pseudovector_to_tensor,
    regauge,
)
from scenarios import (
    AnalyticConnectionField,
    LinearField,
    LinearIndex,
    OpticalScenario,
    RashbaScenario,
    RotatingField,
    SmoothRandomField,
    SpinOrbitScenario,
    UniformField,
    ZeemanScenario,
    bspace_scenario,
    magnus_contour_oracle,
    magnus_ray,
    rashba_motion,
    spin_orbit_analytic,
    spin_orbit_pp_pseudovector,
    zeeman_analytic,
)
from spectral_core import PhasePoint, band_energies

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
FLATNESS_TOL = 1e-6
ORACLE_RTOL = 1e-5
ORACLE_MIN_GAP = 0.1
CHERN_TOL = 1e-6
CHERN_RADII_RTOL = 1e-8
SOLID_ANGLE_TOL = 1e-6
GAUGE_TOL = 1e-8
NULL_TOL = 1e-10
RASHBA_RTOL = 1e-4
RASHBA_RATIO = (3.5, 4.5)
MAGNUS_RTOL = 1e-4
CONSTRAINT_TOL = 1e-6
MAXWELL_TOL = 1e-6
ADIABATICITY_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_record(self) -> dict:
        return {
            "check": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


def _result(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tolerance, bool(np.isfinite(value) and value < tolerance), detail)


def _random_point(rng: np.random.Generator, d: int = 3, p_scale: float = 1.0) -> PhasePoint:
    return PhasePoint(rng.uniform(-p_scale, p_scale, d), rng.uniform(-1.0, 1.0, d), float(rng.uniform(0.0, 1.0)))


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))


@dataclass(frozen=True)
class RandomPhase:
    """Smooth per-band phase φ_b(m): random quadratic form, optionally plus one harmonic."""

    seed: int
    n: int
    dim: int
    harmonic: bool = False

    def __call__(self, m: PhasePoint) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        x = m.as_vector()
        Q = rng.uniform(-0.5, 0.5, size=(self.n, self.dim, self.dim))
        g = rng.uniform(-1.0, 1.0, size=(self.n, self.dim))
        q = rng.uniform(-1.0, 1.0, size=(self.n, self.dim))
        phase = np.einsum("bij,i,j->b", Q, x, x) + g @ x
        if self.harmonic:
            phase = phase + 0.5 * np.sin(q @ x)
        return phase


# =========================
# Checks
# =========================
def check_flatness(quick: bool = False, seed: int = 0) -> CheckResult:
    """Full (non-Abelian) curvature of the exact connection vanishes."""
    scn = ZeemanScenario(SmoothRandomField(seed), lorentz=False)
    model = scn.model()
    k = 2 if quick else 5
    axis = np.linspace(-0.5, 0.5, k)
    center = PhasePoint(np.zeros(3), np.zeros(3), 0.0)
    field = ConnectionField(model, kind="exact", reference=center)
    worst = 0.0
    for x in axis:
        for y in axis:
            for z in axis:
                F = nonabelian_curvature(field, PhasePoint(np.zeros(3), [x, y, z], 0.0), step=1e-4)
                worst = max(worst, float(np.max(np.abs(F))))
    return _result("flatness", worst, FLATNESS_TOL, f"{k}^3 grid, step 1e-4")


def check_oracle(quick: bool = False, seed: int = 0) -> CheckResult:
    """Plaquette curvature against the analytic Zeeman and spin-orbit curvatures."""
    rng = np.random.default_rng(seed)
    count = 10 if quick else 100
    zeeman = ZeemanScenario(SmoothRandomField(seed), lorentz=False)
    spin_orbit = SpinOrbitScenario(
        SmoothRandomField(seed + 1, offset=(0.8, 0.0, 0.0), amplitude=0.2),
        SmoothRandomField(seed + 2),
        rho=0.5,
    )
    worst = 0.0
    used = skipped = 0
    for scn, analytic in (
        (zeeman, lambda m: zeeman_analytic(zeeman, m).curvature),
        (spin_orbit, lambda m: spin_orbit_analytic(spin_orbit, m)),
    ):
        model = scn.model()
        hits = 0
        while hits < count:
            m = _random_point(rng)
            energies = band_energies(model, m)
            if float(np.min(np.diff(energies))) <= ORACLE_MIN_GAP:
                skipped += 1
                continue
            numeric = adiabatic_curvature_numeric(model, m).F
            worst = max(worst, _relative(numeric, analytic(m).F))
            hits += 1
        used += hits
    return _result("oracle", worst, ORACLE_RTOL, f"{used} points, {skipped} skipped for small gap")


def check_chern(quick: bool = False, seed: int = 0) -> CheckResult:
    """Monopole charge -2S on spheres of radius 0.5 and 1 around H1 = 0."""
    nodes = (24, 48) if quick else (48, 96)
    worst = 0.0
    radii_spread = 0.0
    for S in (-0.5, 0.5, -1.0, 1.0):
        values = [
            chern_charge(lambda x, S=S: monopole_curvature(x, S), np.zeros(3), radius, nodes=nodes)
            for radius in (0.5, 1.0)
        ]
        worst = max(worst, *(abs(v + 2.0 * S) for v in values))
        radii_spread = max(radii_spread, abs(values[0] - values[1]) / max(1.0, abs(values[0])))
    detail = f"max radius spread {radii_spread:.3e}"
    if radii_spread > CHERN_RADII_RTOL:
        return CheckResult("chern", worst, CHERN_TOL, False, detail)
    return _result("chern", worst, CHERN_TOL, detail)


def _cone_loop(theta: float, count: int) -> list[PhasePoint]:
    phis = np.linspace(0.0, 2.0 * np.pi, count + 1)
    return [
        PhasePoint(np.zeros(3), [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], 0.0)
        for phi in phis
    ]


def check_solid_angle(quick: bool = False, seed: int = 0) -> CheckResult:
    """Berry phase of a B-space loop on a cone against ∓π(1 - cos θ)."""
    scn = bspace_scenario()
    model = scn.model()
    north = PhasePoint(np.zeros(3), [0.0, 0.0, 1.0], 0.0)
    numeric = ConnectionField(model, reference=north)
    analytic = AnalyticConnectionField(scn, patch="north")
    count = 400 if quick else 2000
    worst = 0.0
    for theta in (np.pi / 6, np.pi / 3, np.pi / 2):
        loop = _cone_loop(theta, count)
        for band, sign in ((0, 1.0), (1, -1.0)):
            expected = sign * np.pi * (1.0 - np.cos(theta))
            for field in (numeric, analytic):
                got = phase_line_integral(field, loop, band, richardson=True)
                worst = max(worst, phase_distance(got.raw, expected))
    return _result("solid_angle", worst, SOLID_ANGLE_TOL, f"{count} loop points per cone")


def check_gauge(quick: bool = False, seed: int = 0) -> CheckResult:
    """Curvature and closed-loop phases survive a random smooth diagonal regauge."""
    scn = bspace_scenario()
    model = scn.model()
    north = PhasePoint(np.zeros(3), [0.0, 0.0, 1.0], 0.0)
    base = ConnectionField(model, reference=north)
    rng = np.random.default_rng(seed)
    worst = 0.0

    curl_phase = regauge(base, RandomPhase(seed, 2, 7, harmonic=True), step=1e-3)
    for _ in range(2 if quick else 10):
        m = PhasePoint(rng.uniform(-1, 1, 3), [*rng.uniform(-0.3, 0.3, 2), 1.0], float(rng.uniform(0, 1)))
        before = curvature_from_connection(base, m, step=1e-3).F
        after = curvature_from_connection(curl_phase, m, step=1e-3).F
        worst = max(worst, float(np.max(np.abs(before - after))))

    loop_phase = regauge(base, RandomPhase(seed + 1, 2, 7), step=1e-3)
    loop = _cone_loop(np.pi / 3, 100 if quick else 400)
    for band in (0, 1):
        before = phase_line_integral(base, loop, band).wrapped
        after = phase_line_integral(loop_phase, loop, band).wrapped
        worst = max(worst, phase_distance(before, after))
    return _result("gauge", worst, GAUGE_TOL)


def check_null_cases(quick: bool = False, seed: int = 0) -> CheckResult:
    """B = B(t) Zeeman has no curvature at all; constant E ⊥ B spin-orbit has F_pp = 0."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ramp = ZeemanScenario(RotatingField(1.0, 0.7, 2.0), lorentz=False)
    so = SpinOrbitScenario(UniformField((1.0, 0.0, 0.0)), UniformField((0.0, 0.0, 1.0)), rho=0.5)
    for _ in range(3 if quick else 20):
        m = _random_point(rng)
        model = ramp.model()
        worst = max(worst, curvature_m_space(model, m).max_abs(), adiabatic_curvature_numeric(model, m).max_abs())
        worst = max(worst, zeeman_analytic(ramp, m).curvature.max_abs())
        if np.linalg.norm(m.p) > 0:
            pp = [curvature_m_space(so.model(), m).F_pp(b) for b in (0, 1)]
            pp += [spin_orbit_analytic(so, m).F_pp(b) for b in (0, 1)]
            worst = max(worst, float(np.max(np.abs(pp))), float(np.max(np.abs(spin_orbit_pp_pseudovector(so, m)))))
    return _result("null_cases", worst, NULL_TOL)


def _transverse(v: np.ndarray, p: np.ndarray) -> float:
    n = np.array([-p[1], p[0]]) / np.linalg.norm(p)
    return float(np.dot(v, n))


def check_rashba(quick: bool = False, seed: int = 0) -> CheckResult:
    """Generic velocities against the closed-form transverse drift; O(ħ²) discrepancy."""
    momenta = [np.array([0.6, 0.0]), np.array([1.0, 0.0])] if quick else [np.array([a, 0.0]) for a in (0.3, 0.6, 1.0, 1.5)]
    worst = 0.0
    sign_ok = True
    for p in momenta:
        scn = RashbaScenario(E=(1.0, 0.0), B=1.0, hbar=1e-5)
        m = PhasePoint(p, [0.0, 0.0], 0.0)
        drifts = []
        for band in (0, 1):
            _, rdot = velocity_field(scn.model(), band, m, scn.em_field())
            drift = rashba_motion(scn, m, band).drift
            drifts.append(drift)
            worst = max(worst, abs(_transverse(rdot, p) - _transverse(drift, p)) / abs(_transverse(drift, p)))
        sign_ok = sign_ok and bool(np.all(drifts[0] == -drifts[1]))

    def discrepancy(hbar: float) -> float:
        scn = RashbaScenario(E=(1.0, 0.0), B=1.0, hbar=hbar)
        m = PhasePoint(momenta[-1], [0.0, 0.0], 0.0)
        motion = rashba_motion(scn, m, 1)
        return abs(_transverse(motion.rdot, m.p) - _transverse(motion.rdot_reduced, m.p))

    ratio = discrepancy(1e-2) / discrepancy(5e-3)
    detail = f"halving ratio {ratio:.4f}, band signs {'opposite' if sign_ok else 'NOT opposite'}"
    if not sign_ok or not RASHBA_RATIO[0] <= ratio <= RASHBA_RATIO[1]:
        return CheckResult("rashba", worst, RASHBA_RTOL, False, detail)
    return _result("rashba", worst, RASHBA_RTOL, detail)


def check_magnus(quick: bool = False, seed: int = 0) -> CheckResult:
    """Helicity splitting of a ray pair in a linear-index medium against the contour oracle."""
    config = IntegratorConfig(method="rk4", step=1e-3, t_final=0.5 if quick else 1.0)
    scn = OpticalScenario(LinearIndex(1.5, (0.0, 0.5, 0.0)), k0=100.0)
    rays = {h: magnus_ray(scn, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), h, config) for h in (1, -1)}
    split = rays[1].final.m.r[2] - rays[-1].final.m.r[2]
    oracle = magnus_contour_oracle(scn, rays[1], 1)[2] - magnus_contour_oracle(scn, rays[-1], -1)[2]
    rel = abs(split - oracle) / abs(oracle)
    drift = max(
        abs(float(s.m.p @ s.m.p) - scn.n_field.n2(s.m.r)) for ray in rays.values() for s in ray.states
    )
    flat = OpticalScenario(LinearIndex(1.5), k0=100.0)
    flat_rays = [magnus_ray(flat, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), h, config) for h in (1, -1)]
    flat_split = abs(flat_rays[0].final.m.r[2] - flat_rays[1].final.m.r[2])
    detail = f"split {split:.6e}, oracle {oracle:.6e}, constraint drift {drift:.2e}, homogeneous split {flat_split:.1e}"
    if drift > CONSTRAINT_TOL or flat_split != 0.0:
        return CheckResult("magnus", rel, MAGNUS_RTOL, False, detail)
    return _result("magnus", rel, MAGNUS_RTOL, detail)


def check_maxwell(quick: bool = False, seed: int = 0) -> CheckResult:
    """Divergence and cyclic residuals on the shell 0.5 ≤ |H1| ≤ 2."""
    rng = np.random.default_rng(seed)
    count = 5 if quick else 50
    dirs = rng.normal(size=(count, 3))
    points = dirs / np.linalg.norm(dirs, axis=1)[:, None] * rng.uniform(0.5, 2.0, size=(count, 1))
    worst = 0.0
    for S in (0.5, -1.0):
        res = maxwell_residuals(lambda x, S=S: pseudovector_to_tensor(monopole_curvature(x, S)), points, step=1e-4)
        worst = max(worst, res.max_divergence, res.max_cyclic)
    if not quick:
        model = bspace_scenario().model()
        phase_points = [np.concatenate([np.zeros(3), x, [0.0]]) for x in points[:10]]
        res = maxwell_residuals(
            lambda v: curvature_m_space(model, PhasePoint.from_vector(v, 3), step=1e-4).F[1], phase_points, step=1e-4
        )
        worst = max(worst, res.max_divergence, res.max_cyclic)
    return _result("maxwell", worst, MAXWELL_TOL, f"{count} shell points")


def ramp_scenario(B0: float = 1.0, beta: float = 0.05, chi: float = 1.0) -> ZeemanScenario:
    """B = (0, 0, B0 + βt)."""
    return ZeemanScenario(LinearField((0.0, 0.0, B0), ((0.0,) * 3,) * 3, (0.0, 0.0, beta)), chi=chi)


def check_adiabaticity(quick: bool = False, seed: int = 0) -> CheckResult:
    """ε of a linear Zeeman ramp against β/(4χB²), and the breach stop."""
    worst = 0.0
    for B0, beta, chi in ((1.0, 0.05, 1.0), (2.0, 0.3, 0.5), (0.7, 0.01, 1.5)):
        scn = ramp_scenario(B0, beta, chi)
        m = PhasePoint(np.zeros(3), np.zeros(3), 0.0)
        eps = adiabaticity_epsilon(scn.model(), 1, m, np.array([0, 0, 0, 0, 0, 0, 1.0]), scn.em_field())
        expected = beta / (4.0 * chi * B0**2)
        worst = max(worst, abs(eps - expected))
    fast = ramp_scenario(0.5, 2.0)
    traj = integrate(fast.model(), 1, PhasePoint(np.zeros(3), np.zeros(3), 0.0), IntegratorConfig(t_final=0.1, step=1e-2), fast.em_field())
    detail = f"fast ramp status {traj.status}"
    if traj.status != STATUS_BREACH:
        return CheckResult("adiabaticity", worst, ADIABATICITY_TOL, False, detail)
    return _result("adiabaticity", worst, ADIABATICITY_TOL, detail)


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "flatness": check_flatness,
    "oracle": check_oracle,
    "chern": check_chern,
    "solid_angle": check_solid_angle,
    "gauge": check_gauge,
    "null_cases": check_null_cases,
    "rashba": check_rashba,
    "magnus": check_magnus,
    "maxwell": check_maxwell,
    "adiabaticity": check_adiabaticity,
}


def run_checks(names: Optional[Iterable[str]] = None, quick: bool = False, seed: int = 0) -> list[CheckResult]:
    selected = list(CHECKS) if names is None else list(names)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; expected some of {list(CHECKS)}")
    results = []
    for name in selected:
        try:
            result = CHECKS[name](quick=quick, seed=seed)
        except SpinGaugeError as exc:
            result = CheckResult(name, float("nan"), 0.0, False, f"{type(exc).__name__}: {exc}")
        logger.info("check %-12s %s (%.3e vs %.1e)", name, "ok" if result.passed else "FAILED", result.value, result.tolerance)
        results.append(result)
    return results
