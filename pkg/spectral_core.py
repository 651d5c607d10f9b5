"""Matrix Hamiltonians on the extended phase space m = (p, r, t).

Holds the phase-space point type, the Hamiltonian model wrapper, gauge-fixed
eigendecomposition with degeneracy detection, and eigenframe continuation
along paths. Everything else in sgk builds on `diagonalize` and
`smooth_frame_along`.

Usage:
  model = HamiltonianModel.from_split(2, 3, h0=..., h1=..., constants={"chi": 1.0})
  frame = diagonalize(model, PhasePoint(p=[0, 0, 0], r=[0, 0, 1], t=0.0))
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from errors import BandTrackingError, DegeneracyError, GaugePatchError, NumericalError, check_step

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
DEGENERACY_RTOL = 1e-8
HERMITIAN_REJECT_RTOL = 1e-8
TRACKING_MIN_OVERLAP = 0.5
STEP_SCALE = 1e-4
PHASE_TIE_RTOL = 1e-10
PIN_MIN_MAGNITUDE = 1e-8
SPLIT_CONSISTENCY_RTOL = 1e-12

DEFAULT_CONSTANTS: dict[str, float] = {
    "hbar": 1.0,
    "c": 1.0,
    "e": 1.0,
    "chi": 1.0,
    "rho": 1.0,
    "mass": 1.0,
    "k0": 1.0,
}

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

_S2 = 1.0 / np.sqrt(2.0)
SPIN_ONE = np.array(
    [
        [[0, _S2, 0], [_S2, 0, _S2], [0, _S2, 0]],
        [[0, -1j * _S2, 0], [1j * _S2, 0, -1j * _S2], [0, 1j * _S2, 0]],
        [[1, 0, 0], [0, 0, 0], [0, 0, -1]],
    ],
    dtype=complex,
)

# eigenvalues of the generator along the unit H1 direction, ascending
GENERATOR_EIGENVALUES: dict[int, tuple[float, ...]] = {2: (-1.0, 1.0), 3: (-1.0, 0.0, 1.0)}
SPIN_CHARGES: dict[int, tuple[float, ...]] = {2: (-0.5, 0.5), 3: (-1.0, 0.0, 1.0)}

LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0


def directions(d: int) -> tuple[str, ...]:
    """Axis labels of the extended phase space: p1..pd, r1..rd, t."""
    return tuple(f"p{i + 1}" for i in range(d)) + tuple(f"r{i + 1}" for i in range(d)) + ("t",)


@dataclass(frozen=True, eq=False)
class PhasePoint:
    p: np.ndarray
    r: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float).reshape(-1)
        r = np.array(self.r, dtype=float).reshape(-1)
        t = float(self.t)
        if p.shape != r.shape:
            raise ValueError(f"p and r must have the same length, got {p.size} and {r.size}")
        if p.size not in (2, 3):
            raise ValueError(f"spatial dimension must be 2 or 3, got {p.size}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(r)) and np.isfinite(t)):
            raise ValueError("phase-space point has non-finite components")
        p.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)

    @property
    def d(self) -> int:
        return int(self.p.size)

    @property
    def dim(self) -> int:
        return 2 * self.d + 1

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.r, [self.t]])

    @classmethod
    def from_vector(cls, v: Sequence[float], d: int) -> "PhasePoint":
        v = np.asarray(v, dtype=float)
        return cls(p=v[:d], r=v[d : 2 * d], t=float(v[2 * d]))

    def shifted(self, k: int, h: float) -> "PhasePoint":
        v = self.as_vector()
        v[k] += h
        return PhasePoint.from_vector(v, self.d)

    def __repr__(self) -> str:
        return f"PhasePoint(p={self.p.tolist()}, r={self.r.tolist()}, t={self.t!r})"


@dataclass(frozen=True)
class SplitForm:
    """H = H0(m)·I + ħ·(G·H1(m)); G are Pauli matrices (n = 2) or spin-1 matrices (n = 3)."""

    h0: Callable[[PhasePoint], float]
    h1: Callable[[PhasePoint], np.ndarray]


def spin_generators(n: int) -> np.ndarray:
    if n == 2:
        return PAULI
    if n == 3:
        return SPIN_ONE
    raise ValueError(f"split form is defined for n = 2 or 3, got n = {n}")


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    n: int
    d: int
    evaluate_fn: Optional[Callable[[PhasePoint], np.ndarray]] = None
    split_form: Optional[SplitForm] = None
    constants: Mapping[str, float] = field(default_factory=dict)
    name: str = "model"

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"band count must be >= 2, got {self.n}")
        if self.d not in (2, 3):
            raise ValueError(f"spatial dimension must be 2 or 3, got {self.d}")
        if self.evaluate_fn is None and self.split_form is None:
            raise ValueError("model needs an evaluate function or a split form")
        if self.split_form is not None:
            spin_generators(self.n)
        object.__setattr__(self, "constants", {**DEFAULT_CONSTANTS, **dict(self.constants)})

    @classmethod
    def from_split(
        cls,
        n: int,
        d: int,
        h0: Callable[[PhasePoint], float],
        h1: Callable[[PhasePoint], np.ndarray],
        constants: Optional[Mapping[str, float]] = None,
        name: str = "split-model",
    ) -> "HamiltonianModel":
        return cls(n=n, d=d, split_form=SplitForm(h0=h0, h1=h1), constants=constants or {}, name=name)

    @property
    def hbar(self) -> float:
        return float(self.constants["hbar"])

    def constant(self, key: str) -> float:
        return float(self.constants[key])

    @property
    def spin_charges(self) -> tuple[float, ...]:
        if self.n not in SPIN_CHARGES:
            raise ValueError(f"no spin charges for n = {self.n}")
        return SPIN_CHARGES[self.n]

    def h0(self, m: PhasePoint) -> float:
        if self.split_form is None:
            raise ValueError(f"{self.name} has no split form")
        return float(self.split_form.h0(m))

    def h1(self, m: PhasePoint) -> np.ndarray:
        if self.split_form is None:
            raise ValueError(f"{self.name} has no split form")
        return np.asarray(self.split_form.h1(m), dtype=float).reshape(3)

    def split_matrix(self, m: PhasePoint) -> np.ndarray:
        gens = spin_generators(self.n)
        return self.h0(m) * np.eye(self.n) + self.hbar * np.einsum("k,kij->ij", self.h1(m), gens)

    def evaluate(self, m: PhasePoint) -> np.ndarray:
        """H(m), checked for shape, finiteness, Hermiticity and agreement with the split form."""
        if self.evaluate_fn is not None:
            H = np.asarray(self.evaluate_fn(m), dtype=complex)
        else:
            H = self.split_matrix(m)
        if H.shape != (self.n, self.n):
            raise NumericalError(f"{self.name}: expected {self.n}x{self.n} matrix, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise NumericalError(f"{self.name}: non-finite Hamiltonian at {m!r}")
        scale = max(1.0, float(np.max(np.abs(H))))
        defect = float(np.max(np.abs(H - H.conj().T)))
        if defect > HERMITIAN_REJECT_RTOL * scale:
            raise NumericalError(f"{self.name}: Hamiltonian not Hermitian (defect {defect:.3e})")
        if self.evaluate_fn is not None and self.split_form is not None:
            deviation = self.check_split_consistency(m, H)
            if deviation > SPLIT_CONSISTENCY_RTOL * scale:
                raise NumericalError(
                    f"{self.name}: evaluate function and split form disagree by {deviation:.3e} at {m!r}"
                )
        return 0.5 * (H + H.conj().T)

    def check_split_consistency(self, m: PhasePoint, H: Optional[np.ndarray] = None) -> float:
        """Max deviation between evaluate_fn and the split form at m."""
        if self.evaluate_fn is None or self.split_form is None:
            return 0.0
        if H is None:
            H = np.asarray(self.evaluate_fn(m), dtype=complex)
        return float(np.max(np.abs(H - self.split_matrix(m))))


@dataclass(frozen=True, eq=False)
class EigenFrame:
    energies: np.ndarray
    unitary: np.ndarray
    gap: float
    point: PhasePoint

    @property
    def n(self) -> int:
        return int(self.energies.size)

    def column(self, band: int) -> np.ndarray:
        return self.unitary[:, band]

    def residuals(self, H: np.ndarray) -> tuple[float, float]:
        """(max |U†U - I|, max |U†HU - diag(E)|)."""
        U = self.unitary
        unitarity = float(np.max(np.abs(U.conj().T @ U - np.eye(self.n))))
        diag = float(np.max(np.abs(U.conj().T @ H @ U - np.diag(self.energies))))
        return unitarity, diag


def default_step(m: PhasePoint) -> float:
    return STEP_SCALE * max(1.0, float(np.linalg.norm(m.as_vector())))


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>."""
    return complex(np.sum(np.conj(a) * b))


def phase_pivots(U: np.ndarray) -> tuple[int, ...]:
    """Index of the largest-magnitude component of every column, lowest index on ties."""
    pivots = []
    for k in range(U.shape[1]):
        mags = np.abs(U[:, k])
        pivots.append(int(np.flatnonzero(mags >= mags.max() * (1.0 - PHASE_TIE_RTOL))[0]))
    return tuple(pivots)


def pin_phases(U: np.ndarray, pivots: Sequence[int]) -> np.ndarray:
    """Rephase every column so its component at pivots[k] is real positive."""
    U = np.array(U, dtype=complex)
    for k, idx in enumerate(pivots):
        value = U[idx, k]
        if abs(value) < PIN_MIN_MAGNITUDE:
            raise GaugePatchError(f"column {k} has no weight on component {idx}; the pinned gauge is singular here")
        U[:, k] *= np.conj(value) / abs(value)
    return U


def fix_phases(U: np.ndarray) -> np.ndarray:
    """Largest-magnitude component of every column real positive, lowest index on ties."""
    return pin_phases(U, phase_pivots(U))


def _eigh(H: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, U = linalg.eigh(H, check_finite=False)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"{name}: eigensolver failed: {exc}") from exc
    return w, U


def _gap(energies: np.ndarray) -> float:
    return float(np.min(np.diff(energies)))


def _check_gap(model: HamiltonianModel, m: PhasePoint, energies: np.ndarray, H: np.ndarray) -> float:
    gap = _gap(np.sort(energies))
    tol = DEGENERACY_RTOL * max(1.0, float(np.max(np.abs(H))))
    if gap < tol:
        raise DegeneracyError(f"{model.name}: gap {gap:.3e} below tolerance {tol:.3e} at {m!r}")
    return gap


def diagonalize(model: HamiltonianModel, m: PhasePoint) -> EigenFrame:
    H = model.evaluate(m)
    if model.split_form is not None and model.evaluate_fn is None:
        # diagonalise G·H1 only, so the frame does not depend on H0
        K = np.einsum("k,kij->ij", model.h1(m), spin_generators(model.n))
        w, U = _eigh(K, model.name)
        energies = model.h0(m) + model.hbar * w
    else:
        energies, U = _eigh(H, model.name)
    gap = _check_gap(model, m, energies, H)
    return EigenFrame(energies=np.asarray(energies, dtype=float), unitary=fix_phases(U), gap=gap, point=m)


def band_energies(model: HamiltonianModel, m: PhasePoint) -> np.ndarray:
    """Ascending band energies with the degeneracy check, without eigenvectors where possible."""
    H = model.evaluate(m)
    if model.split_form is not None and model.evaluate_fn is None:
        g = np.asarray(GENERATOR_EIGENVALUES[model.n])
        energies = model.h0(m) + model.hbar * g * float(np.linalg.norm(model.h1(m)))
    else:
        try:
            energies = linalg.eigvalsh(H, check_finite=False)
        except (linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"{model.name}: eigensolver failed: {exc}") from exc
    _check_gap(model, m, energies, H)
    return np.asarray(energies, dtype=float)


def band_energy(model: HamiltonianModel, band: int, m: PhasePoint) -> float:
    if model.split_form is not None and model.evaluate_fn is None:
        g = GENERATOR_EIGENVALUES[model.n][band]
        return model.h0(m) + model.hbar * g * float(np.linalg.norm(model.h1(m)))
    return float(band_energies(model, m)[band])


def central_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """J[:, k] = (fn(x + h e_k) - fn(x - h e_k)) / 2h."""
    h = check_step(h)
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(fn(x + e), dtype=float) - np.asarray(fn(x - e), dtype=float)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def energy_gradient(model: HamiltonianModel, band: int, m: PhasePoint, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of the band energy over all D phase-space axes."""
    h = check_step(default_step(m) if h is None else h)
    grad = np.empty(m.dim)
    for k in range(m.dim):
        grad[k] = (band_energy(model, band, m.shifted(k, h)) - band_energy(model, band, m.shifted(k, -h))) / (2.0 * h)
    return grad


def align_frame(frame: EigenFrame, reference: np.ndarray) -> EigenFrame:
    """Rephase columns so each overlaps its reference column real-positively."""
    U = np.array(frame.unitary, dtype=complex)
    for b in range(U.shape[1]):
        ov = overlap(reference[:, b], U[:, b])
        if abs(ov) < 1e-8:
            raise GaugePatchError(
                f"band {b} is orthogonal to the gauge reference at {frame.point!r}; "
                "choose a reference closer to the evaluation point"
            )
        U[:, b] *= np.conj(ov) / abs(ov)
    return EigenFrame(energies=frame.energies, unitary=U, gap=frame.gap, point=frame.point)


def band_order(previous: EigenFrame, frame: EigenFrame) -> np.ndarray:
    """Column permutation of `frame` that continues the bands of `previous`."""
    O = np.abs(previous.unitary.conj().T @ frame.unitary)
    rows, cols = linear_sum_assignment(-O)
    order = cols[np.argsort(rows)]
    worst = float(np.min(O[np.arange(O.shape[0]), order]))
    if worst < TRACKING_MIN_OVERLAP:
        raise BandTrackingError(
            f"eigenvector overlap {worst:.3f} below {TRACKING_MIN_OVERLAP} between "
            f"{previous.point!r} and {frame.point!r}"
        )
    return order


def permuted(frame: EigenFrame, order: np.ndarray) -> EigenFrame:
    return EigenFrame(energies=frame.energies[order], unitary=frame.unitary[:, order], gap=frame.gap, point=frame.point)


def follow_frame(previous: EigenFrame, frame: EigenFrame) -> EigenFrame:
    """Continue `previous` onto `frame`: match bands by overlap, then parallel-transport phases."""
    order = band_order(previous, frame)
    U = frame.unitary[:, order]
    for b in range(U.shape[1]):
        ov = overlap(previous.unitary[:, b], U[:, b])
        U[:, b] = U[:, b] * (np.conj(ov) / abs(ov))
    return EigenFrame(energies=frame.energies[order], unitary=U, gap=frame.gap, point=frame.point)


def smooth_frame_along(model: HamiltonianModel, path: Sequence[PhasePoint]) -> list[EigenFrame]:
    frames: list[EigenFrame] = []
    for m in path:
        frame = diagonalize(model, m)
        if frames:
            frame = follow_frame(frames[-1], frame)
        frames.append(frame)
    logger.debug("tracked %d frames of %s", len(frames), model.name)
    return frames
