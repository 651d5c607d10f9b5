"""Worked physical scenarios with closed-form connections, curvatures and motion laws.

Four scenarios, each a `HamiltonianModel` factory plus analytic oracles:

  zeeman      H = p²/2m + ħχ σ·𝓑(r, t)
  spin_orbit  H = p²/2m + ħ σ·(χ𝓑 + ρ 𝓔 × p)
  rashba      H = p²/2m + e𝓐⁰ + ħ σ·(χ𝓑 + ρ e_z × p), planar motion
  optical     H = ½(p² - n²(r)), helicity ±1 with k0⁻¹ in place of ħ

Field profiles are small frozen dataclasses (picklable, with analytic
derivatives) so scenarios can be rebuilt inside ensemble worker processes
from their parameter dictionaries.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from dynamics import (
    STATUS_BREACH,
    STATUS_COMPLETED,
    ExternalEMField,
    IntegratorConfig,
    Trajectory,
    TrajectoryState,
    _as3,
    displacement_contour,
    integrate,
    ode_steps,
)
from errors import ConstraintDriftWarning, GaugePatchError, SingularityError, SpinGaugeError
from gauge import (
    PATCH_SWITCH,
    Connection,
    CurvatureTensor,
    monopole_connection,
    monopole_curvature,
    _antisymmetrize,
)
from spectral_core import LEVI_CIVITA, SPIN_CHARGES, HamiltonianModel, PhasePoint, directions

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
CONSTRAINT_DRIFT_LIMIT = 1e-6
SINGULAR_ATOL = 1e-12


# =========================
# Field profiles
# =========================
@dataclass(frozen=True)
class UniformField:
    vector: tuple[float, float, float]

    def value(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)

    def jacobian(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.zeros((3, np.size(r)))

    def rate(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.zeros(3)

    def __call__(self, m: PhasePoint) -> np.ndarray:
        return self.value(m.r, m.t)


@dataclass(frozen=True)
class LinearField:
    """b0 + G·r + rate·t; G[i][j] = ∂B_i/∂r_j."""

    b0: tuple[float, float, float]
    gradient: tuple[tuple[float, ...], ...]
    growth: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def value(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.b0, dtype=float) + np.asarray(self.gradient, dtype=float) @ np.asarray(r, dtype=float) + np.asarray(self.growth, dtype=float) * t

    def jacobian(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.gradient, dtype=float)

    def rate(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.growth, dtype=float)

    def __call__(self, m: PhasePoint) -> np.ndarray:
        return self.value(m.r, m.t)


@dataclass(frozen=True)
class RotatingField:
    """Field of fixed magnitude precessing on a cone of the given polar angle about z."""

    magnitude: float
    polar: float
    omega: float
    phase: float = 0.0

    def value(self, r: np.ndarray, t: float) -> np.ndarray:
        a = self.omega * t + self.phase
        s = np.sin(self.polar)
        return self.magnitude * np.array([s * np.cos(a), s * np.sin(a), np.cos(self.polar)])

    def jacobian(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.zeros((3, np.size(r)))

    def rate(self, r: np.ndarray, t: float) -> np.ndarray:
        a = self.omega * t + self.phase
        s = np.sin(self.polar)
        return self.magnitude * self.omega * np.array([-s * np.sin(a), s * np.cos(a), 0.0])

    def __call__(self, m: PhasePoint) -> np.ndarray:
        return self.value(m.r, m.t)


@dataclass(frozen=True)
class SmoothRandomField:
    """offset + Σ a_k sin(q_k·r + w_k t + φ_k) with seeded coefficients."""

    seed: int
    offset: tuple[float, float, float] = (0.0, 0.0, 1.5)
    amplitude: float = 0.3
    modes: int = 3
    d: int = 3
    _a: np.ndarray = field(init=False, repr=False, compare=False)
    _q: np.ndarray = field(init=False, repr=False, compare=False)
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rng = np.random.default_rng(self.seed)
        object.__setattr__(self, "_a", self.amplitude * rng.uniform(-1.0, 1.0, size=(self.modes, 3)))
        object.__setattr__(self, "_q", rng.uniform(-1.0, 1.0, size=(self.modes, self.d)))
        object.__setattr__(self, "_w", rng.uniform(-1.0, 1.0, size=self.modes))
        object.__setattr__(self, "_phi", rng.uniform(0.0, 2.0 * np.pi, size=self.modes))

    def _arg(self, r: np.ndarray, t: float) -> np.ndarray:
        return self._q @ np.asarray(r, dtype=float) + self._w * t + self._phi

    def value(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.offset, dtype=float) + np.sin(self._arg(r, t)) @ self._a

    def jacobian(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.einsum("ki,k,kj->ij", self._a, np.cos(self._arg(r, t)), self._q)

    def rate(self, r: np.ndarray, t: float) -> np.ndarray:
        return (np.cos(self._arg(r, t)) * self._w) @ self._a

    def __call__(self, m: PhasePoint) -> np.ndarray:
        return self.value(m.r, m.t)


FieldProfile = Union[UniformField, LinearField, RotatingField, SmoothRandomField]


def field_from_config(spec: Mapping[str, Any], d: int = 3) -> FieldProfile:
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return UniformField(tuple(map(float, _as3(spec.get("vector", (0.0, 0.0, 0.0))))))
    if kind == "linear":
        gradient = spec.get("gradient", [[0.0] * d for _ in range(3)])
        return LinearField(
            b0=tuple(map(float, _as3(spec.get("b0", (0.0, 0.0, 0.0))))),
            gradient=tuple(tuple(map(float, row)) for row in gradient),
            growth=tuple(map(float, _as3(spec.get("rate", (0.0, 0.0, 0.0))))),
        )
    if kind == "rotating":
        return RotatingField(
            magnitude=float(spec["magnitude"]),
            polar=float(spec["polar"]),
            omega=float(spec["omega"]),
            phase=float(spec.get("phase", 0.0)),
        )
    if kind == "random":
        return SmoothRandomField(
            seed=int(spec.get("seed", 0)),
            offset=tuple(map(float, _as3(spec.get("offset", (0.0, 0.0, 1.5))))),
            amplitude=float(spec.get("amplitude", 0.3)),
            modes=int(spec.get("modes", 3)),
            d=d,
        )
    raise ValueError(f"unknown field kind {kind!r}")


def _kinetic(p: np.ndarray, mass: float) -> float:
    return float(np.dot(p, p)) / (2.0 * mass)


def _spin_of(band: int) -> float:
    return SPIN_CHARGES[2][band]


# =========================
# Zeeman
# =========================
@dataclass(frozen=True)
class ZeemanScenario:
    B_field: FieldProfile
    chi: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0
    e: float = 1.0
    c: float = 1.0
    lorentz: bool = True
    d: int = 3

    def h0(self, m: PhasePoint) -> float:
        return _kinetic(m.p, self.mass)

    def h1(self, m: PhasePoint) -> np.ndarray:
        return self.chi * self.B_field(m)

    def model(self) -> HamiltonianModel:
        return HamiltonianModel.from_split(
            2,
            self.d,
            self.h0,
            self.h1,
            constants={"hbar": self.hbar, "chi": self.chi, "mass": self.mass, "e": self.e, "c": self.c},
            name="zeeman",
        )

    def em_field(self) -> ExternalEMField:
        return ExternalEMField(B=self.B_field) if self.lorentz else ExternalEMField()

    def channels(self) -> tuple[int, ...]:
        return (0, 1)


def bspace_scenario(chi: float = 1.0, hbar: float = 1.0) -> ZeemanScenario:
    """Zeeman model whose coordinate r is the field itself (B = r)."""
    eye = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    return ZeemanScenario(LinearField((0.0, 0.0, 0.0), eye), chi=chi, hbar=hbar, lorentz=False)


def monopole_frame(h1: np.ndarray, patch: str = "auto") -> np.ndarray:
    """Eigenvectors of σ·H1 as columns (anti-aligned, aligned) in the north or south patch."""
    h1 = np.asarray(h1, dtype=float)
    H = float(np.linalg.norm(h1))
    if H < SINGULAR_ATOL:
        raise SingularityError("spin frame undefined at H1 = 0")
    x, y, z = h1
    if patch == "auto":
        patch = "north" if z > PATCH_SWITCH * H else "south"
    norm = np.sqrt(2.0 * H)
    if patch == "north":
        q = np.sqrt(H + z)
        if q * q <= SINGULAR_ATOL * H:
            raise GaugePatchError(f"north patch is singular at H1 = {h1.tolist()}")
        aligned = np.array([q, (x + 1j * y) / q]) / norm
        anti = np.array([-(x - 1j * y) / q, q]) / norm
    elif patch == "south":
        s = np.sqrt(H - z)
        if s * s <= SINGULAR_ATOL * H:
            raise GaugePatchError(f"south patch is singular at H1 = {h1.tolist()}")
        aligned = np.array([(x - 1j * y) / s, s]) / norm
        anti = np.array([s, -(x + 1j * y) / s]) / norm
    else:
        raise ValueError(f"unknown gauge patch {patch!r}")
    return np.column_stack([anti, aligned])


@dataclass(frozen=True, eq=False)
class ZeemanAnalytic:
    energies: np.ndarray
    unitary: np.ndarray
    connection_B: np.ndarray        # (2, 3) adiabatic potential in B-space per band
    curvature_B: np.ndarray         # (2, 3) pseudovector in B-space per band
    connection: Connection          # adiabatic potential over the phase-space axes
    curvature: CurvatureTensor      # F_rr and F_rt blocks, everything else zero


def _split_curvature(S_values: Sequence[float], h1: np.ndarray, D: np.ndarray, d: int) -> CurvatureTensor:
    """-S·H1·(D_i × D_j)/|H1|³ from analytic derivative columns D (3 × dim)."""
    norm = float(np.linalg.norm(h1))
    base = np.einsum("abc,a,bi,cj->ij", LEVI_CIVITA, h1, D, D) / norm**3
    base = _antisymmetrize(base)
    return CurvatureTensor(np.stack([-S * base for S in S_values]), d)


def zeeman_analytic(scn: ZeemanScenario, m: PhasePoint, patch: str = "auto") -> ZeemanAnalytic:
    B = scn.B_field(m)
    Bn = float(np.linalg.norm(B))
    if Bn < SINGULAR_ATOL:
        raise SingularityError(f"B = 0 at {m!r}")
    h1 = scn.chi * B
    H = abs(scn.chi) * Bn
    U = monopole_frame(h1, patch)
    energies = scn.h0(m) + scn.hbar * np.array([-H, H])

    S_values = SPIN_CHARGES[2]
    # chain rule through H1 = χB
    A_B = np.stack([scn.chi * monopole_connection(h1, S, patch) for S in S_values])
    F_B = np.stack([scn.chi**2 * monopole_curvature(h1, S) for S in S_values])

    d = m.d
    D = np.zeros((3, 2 * d + 1))
    D[:, d : 2 * d] = scn.chi * scn.B_field.jacobian(m.r, m.t)
    D[:, 2 * d] = scn.chi * scn.B_field.rate(m.r, m.t)
    A_m = np.stack([D.T @ monopole_connection(h1, S, patch) for S in S_values], axis=1)
    connection = Connection(directions(d), A_m, "adiabatic")
    return ZeemanAnalytic(
        energies=energies,
        unitary=U,
        connection_B=A_B,
        curvature_B=F_B,
        connection=connection,
        curvature=_split_curvature(S_values, h1, D, d),
    )


class AnalyticConnectionField:
    """m -> adiabatic connection of a Zeeman scenario from the monopole potential."""

    def __init__(self, scn: ZeemanScenario, patch: str = "auto") -> None:
        self.scn = scn
        self.patch = patch

    def __call__(self, m: PhasePoint) -> Connection:
        return zeeman_analytic(self.scn, m, self.patch).connection


# =========================
# Spin-orbit
# =========================
@dataclass(frozen=True)
class SpinOrbitScenario:
    E_field: FieldProfile
    B_field: FieldProfile
    chi: float = 1.0
    rho: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0
    e: float = 1.0
    c: float = 1.0
    d: int = 3

    def h0(self, m: PhasePoint) -> float:
        return _kinetic(m.p, self.mass)

    def h1(self, m: PhasePoint) -> np.ndarray:
        return self.chi * self.B_field(m) + self.rho * np.cross(self.E_field(m), m.p)

    def model(self) -> HamiltonianModel:
        return HamiltonianModel.from_split(
            2,
            self.d,
            self.h0,
            self.h1,
            constants={"hbar": self.hbar, "chi": self.chi, "rho": self.rho, "mass": self.mass, "e": self.e, "c": self.c},
            name="spin_orbit",
        )

    def em_field(self) -> ExternalEMField:
        return ExternalEMField(E=self.E_field, B=self.B_field)

    def channels(self) -> tuple[int, ...]:
        return (0, 1)


def spin_orbit_analytic(scn: SpinOrbitScenario, m: PhasePoint) -> CurvatureTensor:
    """All five curvature blocks from analytic field derivatives, written block by block."""
    h1 = scn.h1(m)
    norm = float(np.linalg.norm(h1))
    if norm < SINGULAR_ATOL:
        raise SingularityError(f"H1 = 0 at {m!r}")
    eps = LEVI_CIVITA
    rho, chi = scn.rho, scn.chi
    E = scn.E_field(m)
    p = m.p
    # ∂H1/∂r_j and ∂H1/∂t
    Dr = chi * scn.B_field.jacobian(m.r, m.t) + rho * np.cross(scn.E_field.jacobian(m.r, m.t).T, p).T
    Dt = chi * scn.B_field.rate(m.r, m.t) + rho * np.cross(scn.E_field.rate(m.r, m.t), p)
    # (E × e_i)_l = ε_lpi E_p
    ExI = np.einsum("lpi,p->li", eps, E)
    inv = 1.0 / norm**3

    pp = rho**2 * np.einsum("klm,k,li,mj->ij", eps, h1, ExI, ExI) * inv
    rr = np.einsum("klm,k,li,mj->ij", eps, h1, Dr, Dr) * inv
    pr = rho * np.einsum("klm,k,li,mj->ij", eps, h1, ExI, Dr) * inv
    pt = rho * np.einsum("klm,k,li,m->i", eps, h1, ExI, Dt) * inv
    rt = np.einsum("klm,k,li,m->i", eps, h1, Dr, Dt) * inv

    d = m.d
    base = np.zeros((2 * d + 1, 2 * d + 1))
    base[:d, :d] = pp
    base[d : 2 * d, d : 2 * d] = rr
    base[:d, d : 2 * d] = pr
    base[:d, 2 * d] = pt
    base[d : 2 * d, 2 * d] = rt
    base = _antisymmetrize(base)
    return CurvatureTensor(np.stack([-S * base for S in SPIN_CHARGES[2]]), d)


def spin_orbit_pp_pseudovector(scn: SpinOrbitScenario, m: PhasePoint) -> np.ndarray:
    """F_pp per band as a pseudovector: -S·χρ²(𝓑·𝓔)𝓔/|H1|³."""
    h1 = scn.h1(m)
    norm = float(np.linalg.norm(h1))
    if norm < SINGULAR_ATOL:
        raise SingularityError(f"H1 = 0 at {m!r}")
    E = scn.E_field(m)
    B = scn.B_field(m)
    base = scn.chi * scn.rho**2 * float(np.dot(B, E)) * E / norm**3
    return np.stack([-S * base for S in SPIN_CHARGES[2]])


# =========================
# Rashba
# =========================
@dataclass(frozen=True)
class ScalarPotential:
    """e𝓐⁰ for a uniform in-plane field: 𝓐⁰ = -𝓔·r."""

    E: tuple[float, float]

    def __call__(self, r: np.ndarray) -> float:
        return -float(np.dot(self.E, r))


@dataclass(frozen=True)
class RashbaScenario:
    """Planar electron with Rashba coupling; 𝓔 in-plane, 𝓑 along the lattice normal e_z.

    The electric force enters through e𝓐⁰ in H0, so `em_field()` carries only 𝓑.
    """

    E: tuple[float, float] = (1.0, 0.0)
    B: float = 1.0
    chi: float = 1.0
    rho: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    e: float = 1.0
    c: float = 1.0
    d: int = 2

    @property
    def e_z(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0])

    def h0(self, m: PhasePoint) -> float:
        return _kinetic(m.p, self.mass) + self.e * ScalarPotential(self.E)(m.r)

    def h1(self, m: PhasePoint) -> np.ndarray:
        return self.chi * self.B * self.e_z + self.rho * np.cross(self.e_z, _as3(m.p))

    def model(self) -> HamiltonianModel:
        return HamiltonianModel.from_split(
            2,
            2,
            self.h0,
            self.h1,
            constants={"hbar": self.hbar, "chi": self.chi, "rho": self.rho, "mass": self.mass, "e": self.e, "c": self.c},
            name="rashba",
        )

    def em_field(self) -> ExternalEMField:
        return ExternalEMField.uniform(B=(0.0, 0.0, self.B))

    def channels(self) -> tuple[int, ...]:
        return (0, 1)


@dataclass(frozen=True, eq=False)
class RashbaMotion:
    pdot: np.ndarray
    rdot: np.ndarray
    pdot_reduced: np.ndarray
    rdot_reduced: np.ndarray
    drift: np.ndarray               # second term of the reduced ṙ


def rashba_motion(scn: RashbaScenario, m: PhasePoint, band: int) -> RashbaMotion:
    S = _spin_of(band)
    p = m.p
    h1 = scn.h1(m)
    H = float(np.linalg.norm(h1))
    if H < SINGULAR_ATOL:
        raise SingularityError(f"|χ𝓑 + ρ(e_z × p)| = 0 at {m!r}")
    E = np.asarray(scn.E, dtype=float)
    e, c, hbar, B = scn.e, scn.c, scn.hbar, scn.B
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])     # v × e_z for in-plane v
    k = S * hbar * scn.chi * scn.rho**2 * B / H**3

    v0 = p / scn.mass + 2.0 * S * hbar * scn.rho * np.cross(h1, scn.e_z)[:2] / H
    I = np.eye(2)
    M = np.block([[I, -(e / c) * B * J], [-k * J, I]])
    sol = np.linalg.solve(M, np.concatenate([e * E, v0]))

    drift = k * e * (J @ E)
    pdot_red = e * E + (e / c) * B * (J @ (p / scn.mass))
    rdot_red = p / scn.mass + drift
    return RashbaMotion(sol[:2], sol[2:], pdot_red, rdot_red, drift)


# =========================
# Optical
# =========================
@dataclass(frozen=True)
class LinearIndex:
    """n²(r) = n0² - 2 g·r; g = 0 is a homogeneous medium."""

    n0: float
    gradient: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def n2(self, r: np.ndarray) -> float:
        return self.n0**2 - 2.0 * float(np.dot(self.gradient, r))

    def grad_n2(self, r: np.ndarray) -> np.ndarray:
        return -2.0 * np.asarray(self.gradient, dtype=float)

    def __call__(self, r: np.ndarray) -> float:
        n2 = self.n2(r)
        if n2 <= 0.0:
            raise SingularityError(f"refractive index not positive at r = {np.asarray(r).tolist()}")
        return float(np.sqrt(n2))


@dataclass(frozen=True)
class OpticalScenario:
    n_field: LinearIndex
    k0: float = 1.0
    d: int = 3

    @property
    def hbar(self) -> float:
        return 1.0 / self.k0

    def h0(self, m: PhasePoint) -> float:
        return 0.5 * (float(np.dot(m.p, m.p)) - self.n_field.n2(m.r))

    def h1(self, m: PhasePoint) -> np.ndarray:
        return np.asarray(m.p, dtype=float)

    def helicity_model(self) -> HamiltonianModel:
        """Spin-1 helicity Hamiltonian; its p-space curvature is -λp/p³."""
        return HamiltonianModel.from_split(3, 3, self.h0, self.h1, constants={"hbar": self.hbar, "k0": self.k0}, name="optical")

    def model(self) -> HamiltonianModel:
        return self.helicity_model()

    def channels(self) -> tuple[int, ...]:
        return (0, 2)


HELICITY_OF_BAND = {0: -1, 2: 1}


def _ray_rhs(scn: OpticalScenario, helicity: int):
    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        p, r = y[:3], y[3:]
        pdot = 0.5 * scn.n_field.grad_n2(r)
        rdot = p + scn.hbar * np.cross(monopole_curvature(p, helicity), pdot)
        return np.concatenate([pdot, rdot])

    return rhs


def magnus_ray(
    scn: OpticalScenario,
    r0: Sequence[float],
    direction: Sequence[float],
    helicity: int,
    config: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """Trace one ray with helicity ±1; p starts on the dispersion surface |p| = n(r0)."""
    if helicity not in (-1, 1):
        raise ValueError(f"helicity must be ±1, got {helicity}")
    config = config or IntegratorConfig()
    r0 = _as3(r0)
    direction = _as3(direction)
    if float(np.linalg.norm(direction)) == 0.0:
        raise SingularityError("ray direction is zero")
    p0 = scn.n_field(r0) * direction / np.linalg.norm(direction)
    band = 2 if helicity > 0 else 0
    rhs = _ray_rhs(scn, helicity)
    k0 = scn.k0
    drift_warned = False

    def state(tau: float, y: np.ndarray, berry: float, dynamic: float) -> TrajectoryState:
        p, r = y[:3], y[3:]
        deriv = rhs(tau, y)
        pnorm = float(np.linalg.norm(p))
        return TrajectoryState(
            m=PhasePoint(p, r, tau),
            band=band,
            energy=0.5 * (pnorm**2 - scn.n_field.n2(r)),
            epsilon=scn.hbar * float(np.linalg.norm(deriv[:3])) / pnorm**2,
            berry_phase=berry,
            dynamic_phase=dynamic,
            velocity=np.concatenate([deriv, [1.0]]),
            connection=np.concatenate([monopole_connection(p, helicity), np.zeros(4)]),
            hbar=scn.hbar,
        )

    y0 = np.concatenate([p0, r0])
    traj = Trajectory(band=band, states=[state(0.0, y0, 0.0, 0.0)])
    step_index = 0
    try:
        for step_index, (tau, y) in enumerate(ode_steps(rhs, 0.0, y0, config), start=1):
            prev = traj.final
            p, r = y[:3], y[3:]
            A_prev, A_new = prev.connection[:3], monopole_connection(p, helicity)
            berry = prev.berry_phase + 0.5 * float(np.dot(A_prev + A_new, p - prev.m.p))
            dynamic = prev.dynamic_phase + k0 * (
                0.5 * float(np.dot(prev.m.p + p, r - prev.m.r)) - 0.5 * (prev.energy + 0.5 * (p @ p - scn.n_field.n2(r))) * (tau - prev.m.t)
            )
            current = state(tau, y, berry, dynamic)
            traj.states.append(current)
            if abs(current.energy) * 2.0 > CONSTRAINT_DRIFT_LIMIT and not drift_warned:
                warnings.warn(
                    f"ray left the dispersion surface: |p² - n²| = {abs(2.0 * current.energy):.3e} at τ = {tau:.6g}",
                    ConstraintDriftWarning,
                    stacklevel=2,
                )
                drift_warned = True
            if current.epsilon > config.epsilon_abort:
                traj.status = STATUS_BREACH
                logger.info("helicity %+d: adiabaticity breach at step %d (ε = %.3g)", helicity, step_index, current.epsilon)
                return traj
    except SpinGaugeError as exc:
        exc.with_step(step_index)
        raise
    traj.status = STATUS_COMPLETED
    return traj


def magnus_contour_oracle(scn: OpticalScenario, ray: Trajectory, helicity: int) -> np.ndarray:
    """k0⁻¹∫F × dp along the ray's own momentum path, F = -λp/p³."""
    return displacement_contour(ray.momenta(), lambda p: monopole_curvature(p, helicity), hbar=scn.hbar)


def linear_index_displacement(scn: OpticalScenario, ray: Trajectory, helicity: int) -> float:
    """Closed form of λ k0⁻¹∫dθ/p for a planar path with constant p_x (index gradient along y)."""
    p_start, p_end = ray.momenta()[0], ray.momenta()[-1]
    p0 = float(p_start[0])

    def primitive(p: np.ndarray) -> float:
        return float(p[1]) / (p0 * float(np.linalg.norm(p)))

    return -helicity * scn.hbar * (primitive(p_end) - primitive(p_start))


# =========================
# Registry
# =========================
_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_VEC2 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

FIELD_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "rotating"}}},
            "then": {"required": ["magnitude", "polar", "omega"]},
        },
    ],
    "properties": {
        "kind": {"enum": ["uniform", "linear", "rotating", "random"]},
        "vector": _VEC3,
        "b0": _VEC3,
        "gradient": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3},
        "rate": _VEC3,
        "magnitude": _POSITIVE,
        "polar": {"type": "number"},
        "omega": {"type": "number"},
        "phase": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "offset": _VEC3,
        "amplitude": {"type": "number", "minimum": 0},
        "modes": {"type": "integer", "minimum": 1},
    },
}

_COMMON = {
    "chi": {"type": "number"},
    "hbar": _POSITIVE,
    "mass": _POSITIVE,
    "e": {"type": "number"},
    "c": _POSITIVE,
}

PARAMETER_SCHEMAS: dict[str, dict] = {
    "zeeman": {
        "type": "object",
        "additionalProperties": False,
        "required": ["B"],
        "properties": {**_COMMON, "B": FIELD_SCHEMA, "lorentz": {"type": "boolean"}},
    },
    "spin_orbit": {
        "type": "object",
        "additionalProperties": False,
        "required": ["E", "B"],
        "properties": {**_COMMON, "rho": {"type": "number"}, "E": FIELD_SCHEMA, "B": FIELD_SCHEMA},
    },
    "rashba": {
        "type": "object",
        "additionalProperties": False,
        "properties": {**_COMMON, "rho": {"type": "number"}, "E": _VEC2, "B": {"type": "number"}},
    },
    "optical": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n0"],
        "properties": {"n0": _POSITIVE, "gradient": _VEC3, "k0": _POSITIVE},
    },
}

SCENARIOS = tuple(sorted(PARAMETER_SCHEMAS))

Scenario = Union[ZeemanScenario, SpinOrbitScenario, RashbaScenario, OpticalScenario]


def _common(params: Mapping[str, Any]) -> dict:
    return {k: float(params[k]) for k in ("chi", "hbar", "mass", "e", "c") if k in params}


def build_scenario(name: str, params: Optional[Mapping[str, Any]] = None) -> Scenario:
    params = dict(params or {})
    if name == "zeeman":
        return ZeemanScenario(field_from_config(params["B"]), lorentz=bool(params.get("lorentz", True)), **_common(params))
    if name == "spin_orbit":
        return SpinOrbitScenario(
            field_from_config(params["E"]),
            field_from_config(params["B"]),
            rho=float(params.get("rho", 1.0)),
            **_common(params),
        )
    if name == "rashba":
        return RashbaScenario(
            E=tuple(map(float, params.get("E", (1.0, 0.0)))),
            B=float(params.get("B", 1.0)),
            rho=float(params.get("rho", 1.0)),
            **_common(params),
        )
    if name == "optical":
        return OpticalScenario(
            LinearIndex(float(params["n0"]), tuple(map(float, params.get("gradient", (0.0, 0.0, 0.0))))),
            k0=float(params.get("k0", 1.0)),
        )
    raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")


def simulate(scn: Scenario, band: int, initial: PhasePoint, config: Optional[IntegratorConfig] = None) -> Trajectory:
    """Run one channel of a scenario from an initial point."""
    if isinstance(scn, OpticalScenario):
        if band not in HELICITY_OF_BAND:
            raise ValueError(f"optical bands are {sorted(HELICITY_OF_BAND)}, got {band}")
        return magnus_ray(scn, initial.r, initial.p, HELICITY_OF_BAND[band], config)
    return integrate(scn.model(), band, initial, config, scn.em_field())
