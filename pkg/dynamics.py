"""Adiabatic semiclassical equations of motion with spin-gauge and Lorentz forces.

The velocity system is linear in (ṗ, ṙ) and is solved exactly:

    ṗ = -∂E/∂r + e𝓔 + (e/c) ṙ × 𝓑 + ħ F_rm·ṁ
    ṙ = +∂E/∂p - ħ F_pm·ṁ,          ṁ = (ṗ, ṙ, 1)

`integrate` advances a single band with fixed-step RK4 or adaptive
Runge-Kutta-Fehlberg 4(5), records ε, the Berry phase in the locally pinned
gauge of each point and the dynamic phase per accepted step, and stops on an
adiabaticity breach.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from errors import (
    NumericalError,
    PerturbationWarning,
    SingularityError,
    SingularSystemError,
    SpinGaugeError,
)
from gauge import (
    Connection,
    ConnectionField,
    adiabatic_curvature_numeric,
    curvature_m_space,
    phase_increment,
    tensor_to_pseudovector,
)
from spectral_core import (
    LEVI_CIVITA,
    HamiltonianModel,
    PhasePoint,
    band_energies,
    band_energy,
    energy_gradient,
)

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
METHODS = ("rk4", "rkf45")
COUPLINGS = ("exact", "perturbative")
CURVATURE_SOURCES = ("auto", "numeric", "none")

STATUS_COMPLETED = "completed"
STATUS_MAX_STEPS = "max_steps"
STATUS_BREACH = "adiabaticity_breach"

SINGULAR_COND = 1e12
PERTURBATION_LIMIT = 0.1
RKF45_SAFETY = 0.84
RKF45_MIN_FACTOR = 0.1
RKF45_MAX_FACTOR = 4.0


def _as3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 3:
        return v
    if v.size == 2:
        return np.array([v[0], v[1], 0.0])
    raise ValueError(f"expected a 2- or 3-vector, got {v.size} components")


@dataclass(frozen=True)
class ConstantVector:
    value: tuple[float, ...]

    def __call__(self, m: PhasePoint) -> np.ndarray:
        return _as3(self.value)


@dataclass(frozen=True)
class ExternalEMField:
    """External electric and magnetic fields; e and c come from the model constants."""

    E: Optional[Callable[[PhasePoint], np.ndarray]] = None
    B: Optional[Callable[[PhasePoint], np.ndarray]] = None

    @classmethod
    def uniform(cls, E: Sequence[float] = (0.0, 0.0, 0.0), B: Sequence[float] = (0.0, 0.0, 0.0)) -> "ExternalEMField":
        return cls(E=ConstantVector(tuple(map(float, E))), B=ConstantVector(tuple(map(float, B))))

    def electric(self, m: PhasePoint) -> np.ndarray:
        return np.zeros(3) if self.E is None else _as3(self.E(m))

    def magnetic(self, m: PhasePoint) -> np.ndarray:
        return np.zeros(3) if self.B is None else _as3(self.B(m))


def cross_matrix(B: np.ndarray) -> np.ndarray:
    """C with C·v = v × B."""
    return np.einsum("ijk,k->ij", LEVI_CIVITA, _as3(B))


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    step: float = 1e-3
    tolerance: float = 1e-8
    max_steps: int = 100_000
    t_final: float = 1.0
    epsilon_abort: float = 0.1
    coupling: str = "exact"
    curvature: str = "auto"
    track_phases: bool = True

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {COUPLINGS}, got {self.coupling!r}")
        if self.curvature not in CURVATURE_SOURCES:
            raise ValueError(f"curvature must be one of {CURVATURE_SOURCES}, got {self.curvature!r}")
        if not (self.step > 0 and self.tolerance > 0 and self.t_final > 0):
            raise ValueError("step, tolerance and t_final must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not 0 < self.epsilon_abort <= 1:
            raise ValueError("epsilon_abort must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class TrajectoryState:
    m: PhasePoint
    band: int
    energy: float
    epsilon: float
    berry_phase: float
    dynamic_phase: float
    velocity: np.ndarray                    # ṁ = (ṗ, ṙ, 1)
    connection: Optional[np.ndarray] = None  # adiabatic A of the band over all D axes
    hbar: float = 1.0

    @property
    def generalized(self) -> tuple[np.ndarray, np.ndarray]:
        """(P, R) = (p + ħA_r, r - ħA_p)."""
        d = self.m.d
        if self.connection is None:
            return self.m.p.copy(), self.m.r.copy()
        A = self.connection
        return self.m.p + self.hbar * A[d : 2 * d], self.m.r - self.hbar * A[:d]


@dataclass
class Trajectory:
    band: int
    states: list[TrajectoryState] = field(default_factory=list)
    status: str = STATUS_COMPLETED

    @property
    def final(self) -> TrajectoryState:
        return self.states[-1]

    def times(self) -> np.ndarray:
        return np.array([s.m.t for s in self.states])

    def momenta(self) -> np.ndarray:
        return np.array([s.m.p for s in self.states])

    def positions(self) -> np.ndarray:
        return np.array([s.m.r for s in self.states])

    def path(self) -> list[PhasePoint]:
        return [s.m for s in self.states]


def band_curvature(
    model: HamiltonianModel,
    band: int,
    m: PhasePoint,
    source: str = "auto",
    step: Optional[float] = None,
) -> np.ndarray:
    if source == "none":
        return np.zeros((m.dim, m.dim))
    if source == "auto" and model.split_form is not None:
        return curvature_m_space(model, m, step).F[band]
    return adiabatic_curvature_numeric(model, m, step).F[band]


def _velocities(
    model: HamiltonianModel,
    band: int,
    m: PhasePoint,
    em: Optional[ExternalEMField],
    curvature: str,
    coupling: str,
    step: Optional[float],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if curvature not in CURVATURE_SOURCES:
        raise ValueError(f"curvature must be one of {CURVATURE_SOURCES}, got {curvature!r}")
    if coupling not in COUPLINGS:
        raise ValueError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")
    d = m.d
    band_energies(model, m)  # degeneracy check
    grad = energy_gradient(model, band, m, step)
    F = band_curvature(model, band, m, curvature, step)

    hbar = model.hbar
    e = model.constant("e")
    c = model.constant("c")
    E = em.electric(m)[:d] if em is not None else np.zeros(d)
    C = cross_matrix(em.magnetic(m))[:d, :d] if em is not None else np.zeros((d, d))

    dEdp, dEdr = grad[:d], grad[d : 2 * d]
    pp, pr, pt = F[:d, :d], F[:d, d : 2 * d], F[:d, 2 * d]
    rp, rr, rt = F[d : 2 * d, :d], F[d : 2 * d, d : 2 * d], F[d : 2 * d, 2 * d]
    force0 = -dEdr + e * E

    if hbar * float(np.max(np.abs(F))) > PERTURBATION_LIMIT:
        warnings.warn(
            f"spin force not perturbative at {m!r} (ħ|F| = {hbar * np.max(np.abs(F)):.3g})",
            PerturbationWarning,
            stacklevel=3,
        )

    if coupling == "exact":
        I = np.eye(d)
        M = np.block([[I - hbar * rp, -(e / c) * C - hbar * rr], [hbar * pp, I + hbar * pr]])
        rhs = np.concatenate([force0 + hbar * rt, dEdp - hbar * pt])
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularSystemError(f"velocity matrix is singular at {m!r} (cond {cond:.3e})")
        sol = np.linalg.solve(M, rhs)
        pdot, rdot = sol[:d], sol[d:]
    else:
        # one substitution of the zeroth-order velocities into the spin terms
        rdot0 = dEdp
        pdot0 = force0 + (e / c) * C @ rdot0
        rdot = dEdp - hbar * (pp @ pdot0 + pr @ rdot0 + pt)
        pdot = force0 + (e / c) * C @ rdot + hbar * (rp @ pdot0 + rr @ rdot0 + rt)
    return pdot, rdot, grad


def velocity_field(
    model: HamiltonianModel,
    band: int,
    m: PhasePoint,
    em: Optional[ExternalEMField] = None,
    curvature: str = "auto",
    coupling: str = "exact",
    step: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    pdot, rdot, _ = _velocities(model, band, m, em, curvature, coupling, step)
    return pdot, rdot


def _epsilon(
    model: HamiltonianModel,
    band: int,
    m: PhasePoint,
    mdot: np.ndarray,
    grad: np.ndarray,
    em: Optional[ExternalEMField],
    delta_p: Optional[float],
) -> float:
    d = m.d
    energies = band_energies(model, m)
    neighbours = [abs(energies[band] - energies[k]) for k in (band - 1, band + 1) if 0 <= k < energies.size]
    dE = min(neighbours)
    term_t = abs(float(np.dot(grad, mdot))) / dE**2

    e = model.constant("e")
    E = em.electric(m)[:d] if em is not None else np.zeros(d)
    num = float(np.linalg.norm(grad[d : 2 * d] - e * E))
    speed = float(np.linalg.norm(grad[:d]))
    if num == 0.0:
        term_p = 0.0
    elif delta_p is not None:
        term_p = math.inf if speed == 0.0 else (num / speed) / delta_p**2
    else:
        # |∂p/∂r| ≈ num/speed with δp = δE/speed
        term_p = num * speed / dE**2
    return model.hbar * max(term_t, term_p)


def adiabaticity_epsilon(
    model: HamiltonianModel,
    band: int,
    m: PhasePoint,
    mdot: Sequence[float],
    em: Optional[ExternalEMField] = None,
    delta_p: Optional[float] = None,
    step: Optional[float] = None,
) -> float:
    """ε = ħ·max(|dE/dt|/δE², |∂p/∂r|/δp²) along the direction ṁ (t-component 1)."""
    mdot = np.asarray(mdot, dtype=float)
    if mdot.size != m.dim:
        raise ValueError(f"ṁ needs {m.dim} components, got {mdot.size}")
    grad = energy_gradient(model, band, m, step)
    return _epsilon(model, band, m, mdot, grad, em, delta_p)


# =========================
# Steppers
# =========================
def rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, h: float, y: np.ndarray) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rkf45_step(
    rhs: Callable[[float, np.ndarray], np.ndarray], t: float, h: float, y: np.ndarray
) -> tuple[np.ndarray, float]:
    """Fehlberg 4(5) step; returns the fifth-order solution and the max-norm error estimate."""
    k1 = h * rhs(t, y)
    k2 = h * rhs(t + h / 4, y + k1 / 4)
    k3 = h * rhs(t + 3 * h / 8, y + 3 * k1 / 32 + 9 * k2 / 32)
    k4 = h * rhs(t + 12 * h / 13, y + 1932 * k1 / 2197 - 7200 * k2 / 2197 + 7296 * k3 / 2197)
    k5 = h * rhs(t + h, y + 439 * k1 / 216 - 8 * k2 + 3680 * k3 / 513 - 845 * k4 / 4104)
    k6 = h * rhs(t + h / 2, y - 8 * k1 / 27 + 2 * k2 - 3544 * k3 / 2565 + 1859 * k4 / 4104 - 11 * k5 / 40)
    y4 = y + 25 * k1 / 216 + 1408 * k3 / 2565 + 2197 * k4 / 4104 - k5 / 5
    y5 = y + 16 * k1 / 135 + 6656 * k3 / 12825 + 28561 * k4 / 56430 - 9 * k5 / 50 + 2 * k6 / 55
    return y5, float(np.max(np.abs(y5 - y4)))


def ode_steps(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    config: IntegratorConfig,
) -> Iterator[tuple[float, np.ndarray]]:
    """Yield accepted (t, y) up to t0 + t_final or max_steps accepted steps."""
    t_end = t0 + config.t_final
    if config.method == "rk4":
        # uniform steps that land exactly on t_end
        total = max(1, math.ceil(config.t_final / config.step - 1e-9))
        h = config.t_final / total
        y = np.asarray(y0, dtype=float)
        for k in range(min(total, config.max_steps)):
            y = rk4_step(rhs, t0 + k * h, h, y)
            yield (t_end if k + 1 == total else t0 + (k + 1) * h), y
        return

    t, y, h = t0, np.asarray(y0, dtype=float), config.step
    accepted = attempts = 0
    while t < t_end and accepted < config.max_steps:
        attempts += 1
        if attempts > 20 * config.max_steps:
            raise NumericalError("adaptive integrator exceeded its attempt budget")
        h = min(h, t_end - t)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise NumericalError(f"adaptive step underflow at t = {t!r}")
        y_new, err = rkf45_step(rhs, t, h, y)
        scale = config.tolerance * (1.0 + float(np.max(np.abs(y))))
        if err <= scale:
            t = t_end if t_end - (t + h) <= 1e-15 * max(1.0, abs(t_end)) else t + h
            y = y_new
            accepted += 1
            yield t, y
        factor = RKF45_MAX_FACTOR if err == 0.0 else RKF45_SAFETY * (scale / err) ** 0.25
        h *= min(RKF45_MAX_FACTOR, max(RKF45_MIN_FACTOR, factor))


def integrate(
    model: HamiltonianModel,
    band: int,
    initial: PhasePoint,
    config: Optional[IntegratorConfig] = None,
    em: Optional[ExternalEMField] = None,
) -> Trajectory:
    """Advance one band from `initial`.

    The Berry phase is the trapezoid ∫A·dm in the locally pinned gauge of
    `ConnectionField`; where the pinned component changes the running phase is
    carried into the new gauge, so `berry_phase` is always relative to the
    band eigenvector of the current point in its own gauge.
    """
    config = config or IntegratorConfig()
    d = initial.d
    hbar = model.hbar
    phase_field = ConnectionField(model) if config.track_phases else None

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        pdot, rdot, _ = _velocities(model, band, PhasePoint(y[:d], y[d:], t), em, config.curvature, config.coupling, None)
        return np.concatenate([pdot, rdot])

    def connection_at(m: PhasePoint) -> Optional[Connection]:
        return phase_field(m) if phase_field is not None else None

    def observe(m: PhasePoint, berry: float, dynamic: float, conn: Optional[Connection]) -> TrajectoryState:
        pdot, rdot, grad = _velocities(model, band, m, em, config.curvature, config.coupling, None)
        mdot = np.concatenate([pdot, rdot, [1.0]])
        eps = _epsilon(model, band, m, mdot, grad, em, None)
        return TrajectoryState(
            m=m,
            band=band,
            energy=band_energy(model, band, m),
            epsilon=eps,
            berry_phase=berry,
            dynamic_phase=dynamic,
            velocity=mdot,
            connection=None if conn is None else conn.band(band),
            hbar=hbar,
        )

    step_index = 0
    try:
        conn = connection_at(initial)
        traj = Trajectory(band=band, states=[observe(initial, 0.0, 0.0, conn)])
        if traj.final.epsilon > config.epsilon_abort:
            traj.status = STATUS_BREACH
            return traj
        y0 = np.concatenate([initial.p, initial.r])
        for step_index, (t, y) in enumerate(ode_steps(rhs, initial.t, y0, config), start=1):
            prev = traj.final
            m = PhasePoint(y[:d], y[d:], t)
            berry = prev.berry_phase
            conn_new = connection_at(m)
            if conn_new is not None:
                berry += phase_increment(phase_field, band, prev.m, conn, m, conn_new)
            dynamic = prev.dynamic_phase + (
                0.5 * float(np.dot(prev.m.p + m.p, m.r - prev.m.r))
                - 0.5 * (prev.energy + band_energy(model, band, m)) * (m.t - prev.m.t)
            ) / hbar
            state = observe(m, berry, dynamic, conn_new)
            conn = conn_new
            traj.states.append(state)
            if state.epsilon > config.epsilon_abort:
                traj.status = STATUS_BREACH
                logger.info("band %d: adiabaticity breach at step %d (ε = %.3g)", band, step_index, state.epsilon)
                return traj
    except SpinGaugeError as exc:
        exc.with_step(step_index)
        raise

    reached = traj.final.m.t >= initial.t + config.t_final - 1e-12 * max(1.0, abs(initial.t + config.t_final))
    traj.status = STATUS_COMPLETED if reached else STATUS_MAX_STEPS
    logger.debug("band %d: %d steps, status %s", band, len(traj.states) - 1, traj.status)
    return traj


def energy_drift(trajectory: Trajectory) -> float:
    energies = np.array([s.energy for s in trajectory.states])
    return float(np.max(np.abs(energies - energies[0])))


def displacement_contour(
    p_path: Sequence[Sequence[float]],
    F_pp_field: Callable[[np.ndarray], np.ndarray],
    band: Optional[int] = None,
    hbar: float = 1.0,
) -> np.ndarray:
    """ħ∫F × dp along a momentum path (trapezoid); F is the pp-block pseudovector."""
    pts = [_as3(p) for p in p_path]
    total = np.zeros(3)
    if len(pts) < 2:
        return total

    def value(p: np.ndarray) -> np.ndarray:
        F = np.asarray(F_pp_field(p), dtype=float)
        return F[band] if F.ndim == 2 else F

    values = [value(p) for p in pts]
    for k in range(len(pts) - 1):
        total += np.cross(0.5 * (values[k] + values[k + 1]), pts[k + 1] - pts[k])
    return hbar * total


def effective_em_fields(scn, m: PhasePoint, band: int) -> tuple[np.ndarray, np.ndarray]:
    """(𝓑_eff, 𝓔_eff) for a Zeeman-type scenario: external fields plus the band's spin-gauge field.

    𝓑_eff = 𝓑 + (ħc/e)·𝓑_spin and 𝓔_eff = 𝓔 + (ħ/e)·F_rt, so that
    e𝓔_eff + (e/c)ṙ × 𝓑_eff reproduces the r-row force of the equations of motion.

    𝓑_spin is the pseudovector of the antisymmetric rr block, 𝓑_k = ½ ε_kij F_ij,
    i.e. F_ij = ε_ijk 𝓑_k with (F_23, F_31, F_12) = (𝓑_1, 𝓑_2, 𝓑_3). This is the
    convention in which the spin force ħ F_rr·ṙ equals ħ ṙ × 𝓑_spin, matching the
    Lorentz term (e/c) ṙ × 𝓑; no extra factor of 2 enters.
    """
    if m.d != 3:
        raise ValueError("effective fields are defined for d = 3")
    B = _as3(scn.B_field(m))
    if float(np.linalg.norm(B)) == 0.0:
        raise SingularityError(f"B = 0 at {m!r}")
    model = scn.model()
    hbar, e, c = model.hbar, model.constant("e"), model.constant("c")
    F = curvature_m_space(model, m)
    E_ext = _as3(scn.E_field(m)) if getattr(scn, "E_field", None) is not None else np.zeros(3)
    B_eff = B + (hbar * c / e) * tensor_to_pseudovector(F.F_rr(band))
    E_eff = E_ext + (hbar / e) * F.F_rt(band)
    return B_eff, E_eff

