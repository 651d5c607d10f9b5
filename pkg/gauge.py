"""Spin gauge potentials, curvatures, phases and topological charges.

Connections come in two kinds: the exact (matrix) potential A = iU†∂U and its
adiabatic (diagonal) part. Curvatures are computed three ways that must agree:
the gauge-invariant plaquette over eigenvectors, the pull-back of the monopole
field through H1(m) for split-form models, and the curl of a connection field.

Usage:
  F = adiabatic_curvature_numeric(model, m)
  field = ConnectionField(model)          # locally pinned gauge
  north = ConnectionField(model, reference=north_pole_point)
  phase = phase_line_integral(field, loop, band=1)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from errors import GaugePatchError, QuadratureError, SingularityError, check_step
from spectral_core import (
    LEVI_CIVITA,
    EigenFrame,
    HamiltonianModel,
    PhasePoint,
    align_frame,
    central_jacobian,
    default_step,
    diagonalize,
    directions,
    band_order,
    overlap,
    permuted,
    phase_pivots,
    pin_phases,
    smooth_frame_along,
)

logger = logging.getLogger(__name__)

# =========================
# Config
# =========================
CHERN_NODES = (48, 96)          # Gauss-Legendre nodes in cos(theta), trapezoid nodes in phi
CHERN_RTOL = 1e-6
CHERN_SECOND_RADIUS = 1.5
SINGULAR_ATOL = 1e-12
PATCH_SWITCH = -0.9             # north patch where H_z > PATCH_SWITCH * |H|
LOOP_HOLONOMY_ATOL = 1e-2       # trapezoid loop phase vs transported-frame holonomy

Reference = Union[None, np.ndarray, PhasePoint, EigenFrame]


@dataclass(frozen=True, eq=False)
class Connection:
    directions: tuple[str, ...]
    components: np.ndarray      # (D, n, n) complex for exact, (D, n) real for adiabatic
    kind: str
    hermitian_defect: float = 0.0                # max |A - A†| of the exact components
    pivots: Optional[tuple[int, ...]] = None     # pinned component per band; None for a reference gauge

    @property
    def n(self) -> int:
        return int(self.components.shape[1])

    def diagonal(self) -> "Connection":
        if self.kind == "adiabatic":
            return self
        diag = np.real(np.einsum("kbb->kb", self.components))
        return Connection(self.directions, diag, "adiabatic", self.hermitian_defect, self.pivots)

    def band(self, b: int) -> np.ndarray:
        return self.diagonal().components[:, b]


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    F: np.ndarray               # (n, D, D), antisymmetric in the last two axes
    d: int

    @property
    def bands(self) -> int:
        return int(self.F.shape[0])

    @property
    def directions(self) -> tuple[str, ...]:
        return directions(self.d)

    def _slices(self, block: str) -> tuple[slice, slice]:
        d = self.d
        axes = {"p": slice(0, d), "r": slice(d, 2 * d), "t": slice(2 * d, 2 * d + 1)}
        if len(block) != 2 or block[0] not in axes or block[1] not in axes:
            raise ValueError(f"unknown block {block!r}")
        return axes[block[0]], axes[block[1]]

    def block(self, block: str, band: int) -> np.ndarray:
        rows, cols = self._slices(block)
        return self.F[band][rows, cols]

    def F_pp(self, band: int) -> np.ndarray:
        return self.block("pp", band)

    def F_rr(self, band: int) -> np.ndarray:
        return self.block("rr", band)

    def F_pr(self, band: int) -> np.ndarray:
        return self.block("pr", band)

    def F_pt(self, band: int) -> np.ndarray:
        return self.block("pt", band)[:, 0]

    def F_rt(self, band: int) -> np.ndarray:
        return self.block("rt", band)[:, 0]

    def pseudovector(self, block: str, band: int) -> np.ndarray:
        """v_k = ½ ε_kij F_ij of a pp or rr block; planar blocks give (0, 0, F_12)."""
        sub = self.block(block, band)
        if sub.shape == (2, 2):
            return np.array([0.0, 0.0, sub[0, 1]])
        return tensor_to_pseudovector(sub)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.F)))


@dataclass(frozen=True)
class SpinCharge:
    S: tuple[float, ...]

    @classmethod
    def of(cls, model: HamiltonianModel) -> "SpinCharge":
        return cls(tuple(model.spin_charges))

    def __getitem__(self, band: int) -> float:
        return self.S[band]


@dataclass(frozen=True)
class PhaseIntegral:
    raw: float
    wrapped: float              # raw reduced to [0, 2π)
    holonomy: Optional[float] = None    # closed model-backed loops: phase of the transported frame, in [0, 2π)


def wrap_phase(x: float) -> float:
    return float(np.mod(x, 2.0 * np.pi))


def phase_distance(a: float, b: float) -> float:
    """Distance between two phases on the circle."""
    d = np.mod(a - b + np.pi, 2.0 * np.pi) - np.pi
    return float(abs(d))


def pseudovector_to_tensor(v: np.ndarray) -> np.ndarray:
    """F_ij = ε_ijk v_k."""
    return np.einsum("ijk,k->ij", LEVI_CIVITA, np.asarray(v, dtype=float))


def tensor_to_pseudovector(F: np.ndarray) -> np.ndarray:
    return 0.5 * np.einsum("kij,ij->k", LEVI_CIVITA, np.asarray(F, dtype=float))


def _antisymmetrize(upper: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle (last two axes) into an exactly antisymmetric array."""
    iu = np.triu(np.ones(upper.shape[-2:], dtype=bool), k=1)
    U = np.where(iu, upper, 0.0)
    return U - np.swapaxes(U, -1, -2)


def _reference_unitary(model: HamiltonianModel, reference: Reference) -> Optional[np.ndarray]:
    if reference is None:
        return None
    if isinstance(reference, EigenFrame):
        return reference.unitary
    if isinstance(reference, PhasePoint):
        return diagonalize(model, reference).unitary
    return np.asarray(reference, dtype=complex)


def _tracked(previous: EigenFrame, frame: EigenFrame) -> EigenFrame:
    return permuted(frame, band_order(previous, frame))


def exact_connection(
    model: HamiltonianModel,
    m: PhasePoint,
    step: Optional[float] = None,
    reference: Reference = None,
    pivots: Optional[Sequence[int]] = None,
) -> Connection:
    """i U†∂U by central differences over band-tracked neighbours.

    Without a reference the gauge is pinned locally: every band keeps the
    component that is largest at m (or the given `pivots`) real positive at m
    and at m ± h, which is smooth wherever that component does not vanish.
    With a reference, every frame is aligned to it instead.
    """
    h = check_step(default_step(m) if step is None else step)
    center = diagonalize(model, m)
    ref = _reference_unitary(model, reference)
    if ref is not None and pivots is not None:
        raise ValueError("pivots apply to the pinned gauge only, not together with a reference")
    if ref is None:
        pinned = tuple(int(k) for k in (phase_pivots(center.unitary) if pivots is None else pivots))
        if len(pinned) != model.n:
            raise ValueError(f"need one pivot per band ({model.n}), got {len(pinned)}")

        def gauge(frame: EigenFrame) -> np.ndarray:
            return pin_phases(frame.unitary, pinned)
    else:
        pinned = None

        def gauge(frame: EigenFrame) -> np.ndarray:
            return align_frame(frame, ref).unitary

    U0 = gauge(center)
    comps = np.empty((m.dim, model.n, model.n), dtype=complex)
    for k in range(m.dim):
        plus = gauge(_tracked(center, diagonalize(model, m.shifted(k, h))))
        minus = gauge(_tracked(center, diagonalize(model, m.shifted(k, -h))))
        comps[k] = 1j * (U0.conj().T @ (plus - minus)) / (2.0 * h)
    defect = float(np.max(np.abs(comps - np.swapaxes(comps.conj(), 1, 2))))
    logger.debug("exact connection at %r: hermitian defect %.3e", m, defect)
    return Connection(directions(m.d), comps, "exact", defect, pinned)


def adiabatic_connection(
    model: HamiltonianModel,
    m: PhasePoint,
    step: Optional[float] = None,
    reference: Reference = None,
    pivots: Optional[Sequence[int]] = None,
) -> Connection:
    return exact_connection(model, m, step, reference, pivots).diagonal()


class ConnectionField:
    """Connection as a function of m.

    With a reference every evaluation shares that one gauge; without one each
    point uses the locally pinned gauge of `exact_connection`, and the
    connection records which component it pinned.
    """

    def __init__(
        self,
        model: HamiltonianModel,
        *,
        kind: str = "adiabatic",
        reference: Reference = None,
        step: Optional[float] = None,
    ) -> None:
        if kind not in ("exact", "adiabatic"):
            raise ValueError(f"kind must be 'exact' or 'adiabatic', got {kind!r}")
        self.model = model
        self.kind = kind
        self.step = step
        self.reference = _reference_unitary(model, reference)

    def __call__(self, m: PhasePoint, pivots: Optional[Sequence[int]] = None) -> Connection:
        conn = exact_connection(self.model, m, self.step, self.reference, pivots)
        return conn if self.kind == "exact" else conn.diagonal()

    def transition(self, m: PhasePoint, band: int, pivot: int) -> float:
        """χ with u(m) = e^{iχ}·u'(m), u' the band pinned at `pivot` instead of its own pivot."""
        u = diagonalize(self.model, m).column(band)
        return float(np.angle(u[pivot]))


class RegaugedField:
    """A -> A - ∂φ/∂m per band, φ given as a callable m -> (n,) phases."""

    def __init__(self, base: Callable[[PhasePoint], Connection], phase_field, step: Optional[float] = None) -> None:
        self.base = base
        self.phase_field = phase_field
        self.step = step
        self.model = getattr(base, "model", None)

    def __call__(self, m: PhasePoint) -> Connection:
        conn = self.base(m).diagonal()
        h = check_step(default_step(m) if self.step is None else self.step)
        grad = np.stack(
            [
                (np.asarray(self.phase_field(m.shifted(k, h)), dtype=float)
                 - np.asarray(self.phase_field(m.shifted(k, -h)), dtype=float)) / (2.0 * h)
                for k in range(m.dim)
            ]
        )
        return Connection(conn.directions, conn.components - grad, "adiabatic")


def regauge(field: Callable[[PhasePoint], Connection], phase_field, step: Optional[float] = None) -> RegaugedField:
    return RegaugedField(field, phase_field, step)


def nonabelian_curvature(
    field: Callable[[PhasePoint], Connection],
    m: PhasePoint,
    step: Optional[float] = None,
    include_commutator: bool = True,
) -> np.ndarray:
    """∂_i A_j - ∂_j A_i - i[A_i, A_j] as a (D, D, n, n) array."""
    h = check_step(default_step(m) if step is None else step)
    A = field(m).components
    dA = np.stack(
        [(field(m.shifted(k, h)).components - field(m.shifted(k, -h)).components) / (2.0 * h) for k in range(m.dim)]
    )
    F = dA - np.swapaxes(dA, 0, 1)
    if include_commutator:
        AA = np.einsum("iab,jbc->ijac", A, A)
        F = F - 1j * (AA - np.swapaxes(AA, 0, 1))
    return F


def curvature_from_connection(
    field: Callable[[PhasePoint], Connection],
    m: PhasePoint,
    step: Optional[float] = None,
) -> CurvatureTensor:
    """Curl of an adiabatic connection field, all bands."""
    h = check_step(default_step(m) if step is None else step)
    dA = np.stack(
        [
            (field(m.shifted(k, h)).diagonal().components - field(m.shifted(k, -h)).diagonal().components) / (2.0 * h)
            for k in range(m.dim)
        ]
    )  # dA[i, j, b] = ∂_i A_j of band b
    per_band = np.moveaxis(dA, 2, 0)
    return CurvatureTensor(per_band - np.swapaxes(per_band, 1, 2), m.d)


def _plaquette(model: HamiltonianModel, m: PhasePoint, h: float, axes: Optional[Sequence[int]] = None) -> np.ndarray:
    D = m.dim
    v = m.as_vector()
    a = 0.5 * h
    upper = np.zeros((model.n, D, D))
    wanted = sorted(set(range(D) if axes is None else axes))
    for i in wanted:
        for j in (k for k in wanted if k > i):
            corners = []
            for si, sj in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
                delta = np.zeros(D)
                delta[i] = si * a
                delta[j] = sj * a
                corners.append(diagonalize(model, PhasePoint.from_vector(v + delta, m.d)))
            # band labels follow the first corner; phases are left untouched
            for k in range(1, 4):
                corners[k] = _tracked(corners[0], corners[k])
            for b in range(model.n):
                total = 0.0
                for k in range(4):
                    total += float(np.angle(overlap(corners[k].unitary[:, b], corners[(k + 1) % 4].unitary[:, b])))
                total = (total + np.pi) % (2.0 * np.pi) - np.pi
                upper[b, i, j] = -total / (h * h)
    return _antisymmetrize(upper)


def adiabatic_curvature_numeric(
    model: HamiltonianModel,
    m: PhasePoint,
    step: Optional[float] = None,
    richardson: bool = False,
    axes: Optional[Sequence[int]] = None,
) -> CurvatureTensor:
    """Plaquette curvature of every band, centred on m; independent of eigenvector phases.

    `axes` limits the work to planes spanned by those phase-space axes; the rest stay zero.
    """
    h = check_step(default_step(m) if step is None else step)
    F = _plaquette(model, m, h, axes)
    if richardson:
        F = (4.0 * _plaquette(model, m, 0.5 * h, axes) - F) / 3.0
    return CurvatureTensor(F, m.d)


def monopole_curvature(h1: np.ndarray, S: float) -> np.ndarray:
    """Pseudovector -S·H1/|H1|³."""
    h1 = np.asarray(h1, dtype=float)
    norm = float(np.linalg.norm(h1))
    if norm < SINGULAR_ATOL:
        raise SingularityError("monopole curvature evaluated at its source H1 = 0")
    return -S * h1 / norm**3


def monopole_connection(h1: np.ndarray, S: float, patch: str = "auto") -> np.ndarray:
    """Dirac-monopole potential in H1-space with curl -S·H1/|H1|³.

    north: S·(H_y, -H_x, 0)/(H(H + H_z)), singular on the negative z ray
    south: -S·(H_y, -H_x, 0)/(H(H - H_z)), singular on the positive z ray
    """
    h1 = np.asarray(h1, dtype=float)
    H = float(np.linalg.norm(h1))
    if H < SINGULAR_ATOL:
        raise SingularityError("monopole connection evaluated at its source H1 = 0")
    if patch == "auto":
        patch = "north" if h1[2] > PATCH_SWITCH * H else "south"
    swirl = np.array([h1[1], -h1[0], 0.0])
    if patch == "north":
        denom = H * (H + h1[2])
        if denom <= SINGULAR_ATOL * H * H:
            raise GaugePatchError(f"north patch is singular at H1 = {h1.tolist()}")
        return S * swirl / denom
    if patch == "south":
        denom = H * (H - h1[2])
        if denom <= SINGULAR_ATOL * H * H:
            raise GaugePatchError(f"south patch is singular at H1 = {h1.tolist()}")
        return -S * swirl / denom
    raise ValueError(f"unknown gauge patch {patch!r}")


def pullback_curvature(
    map_fn: Callable[[np.ndarray], np.ndarray],
    F_b: Callable[[np.ndarray], np.ndarray],
    a: np.ndarray,
    step: Optional[float] = None,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """F_a(a) = Jᵀ F_b(b(a)) J with J_ki = ∂b_k/∂a_i."""
    a = np.asarray(a, dtype=float)
    if jacobian is not None:
        J = np.asarray(jacobian(a), dtype=float)
    else:
        h = check_step(1e-4 * max(1.0, float(np.linalg.norm(a))) if step is None else step)
        J = central_jacobian(map_fn, a, h)
    if not np.all(np.isfinite(J)):
        raise ValueError("pull-back Jacobian is not finite")
    Fb = np.asarray(F_b(np.asarray(map_fn(a), dtype=float)), dtype=float)
    return J.T @ Fb @ J


def curvature_m_space(
    model: HamiltonianModel,
    m: PhasePoint,
    step: Optional[float] = None,
    charges: Optional[SpinCharge] = None,
) -> CurvatureTensor:
    """F_ij = -S·H1·(∂_i H1 × ∂_j H1)/|H1|³ for every band of a split-form model.

    `charges` defaults to the spin projections of the model's generators.
    """
    if model.split_form is None:
        raise ValueError(f"{model.name} has no split form")
    charges = SpinCharge.of(model) if charges is None else charges
    if len(charges.S) != model.n:
        raise ValueError(f"need one spin charge per band ({model.n}), got {len(charges.S)}")
    h = check_step(default_step(m) if step is None else step)
    h1 = model.h1(m)
    norm = float(np.linalg.norm(h1))
    if norm < SINGULAR_ATOL:
        raise SingularityError(f"{model.name}: H1 = 0 at {m!r}")
    J = central_jacobian(lambda v: model.h1(PhasePoint.from_vector(v, m.d)), m.as_vector(), h)
    base = np.einsum("abc,a,bi,cj->ij", LEVI_CIVITA, h1, J, J) / norm**3
    base = _antisymmetrize(base)
    F = np.stack([-S * base for S in charges.S])
    return CurvatureTensor(F, m.d)


def phase_increment(
    field: Callable[[PhasePoint], Connection],
    band: int,
    a: PhasePoint,
    conn_a: Connection,
    b: PhasePoint,
    conn_b: Connection,
) -> float:
    """Trapezoid ∫A·dm of one band from a to b, expressed in the gauge of b.

    When the pinned component of the band changes between a and b, A at b is
    re-evaluated in the gauge of a and the transition phase to the gauge of b
    is subtracted, so the running phase stays continuous.
    """
    dm = b.as_vector() - a.as_vector()
    va = np.asarray(conn_a.band(band), dtype=float)
    if conn_a.pivots is None or conn_b.pivots is None or conn_a.pivots[band] == conn_b.pivots[band]:
        return 0.5 * float(np.dot(va + np.asarray(conn_b.band(band), dtype=float), dm))
    if not isinstance(field, ConnectionField):
        raise GaugePatchError(f"cannot carry band {band} across a change of pinned component at {b!r}")
    pivot = int(conn_a.pivots[band])
    pivots = list(conn_b.pivots)
    pivots[band] = pivot
    carried = np.asarray(field(b, pivots).band(band), dtype=float)
    chi = field.transition(b, band, pivot)
    logger.debug("band %d: pinned component %d -> %d at %r (transition %.6f)", band, pivot, conn_b.pivots[band], b, chi)
    return 0.5 * float(np.dot(va + carried, dm)) - chi


def _trapezoid(field, band: int, path: Sequence[PhasePoint], conns: Sequence[Connection]) -> float:
    total = 0.0
    for k in range(len(path) - 1):
        total += phase_increment(field, band, path[k], conns[k], path[k + 1], conns[k + 1])
    return total


def _is_closed(path: Sequence[PhasePoint]) -> bool:
    first, last = path[0].as_vector(), path[-1].as_vector()
    return bool(np.max(np.abs(first - last)) <= 1e-12 * max(1.0, float(np.max(np.abs(first)))))


def phase_line_integral(
    field: Callable[[PhasePoint], Connection],
    path: Sequence[PhasePoint],
    band: int,
    richardson: bool = False,
) -> PhaseIntegral:
    """Composite-trapezoid ∫A·dm of one band along a discretised path.

    With `richardson`, the sum over every other point is combined with the full
    one to cancel the leading chord error; needs an even number of segments.
    For a closed path on a model-backed field the result is checked against the
    holonomy of the parallel-transported frame; a mismatch means the connection
    was not single-valued along the loop.
    """
    if len(path) < 2:
        return PhaseIntegral(0.0, 0.0)
    path = list(path)
    if richardson and (len(path) - 1) % 2:
        raise ValueError(f"Richardson extrapolation needs an even number of segments, got {len(path) - 1}")
    model = getattr(field, "model", None)
    # refuses paths too coarse for a single-valued adiabatic connection
    frames = smooth_frame_along(model, path) if model is not None else None
    conns = [field(m) for m in path]
    total = _trapezoid(field, band, path, conns)
    if richardson:
        total = (4.0 * total - _trapezoid(field, band, path[::2], conns[::2])) / 3.0

    holonomy = None
    if frames is not None and _is_closed(path):
        holonomy = wrap_phase(float(np.angle(overlap(frames[0].column(band), frames[-1].column(band)))))
        mismatch = phase_distance(total, holonomy)
        if mismatch > LOOP_HOLONOMY_ATOL:
            raise GaugePatchError(
                f"band {band}: loop phase {total:.6f} differs from the transported-frame holonomy "
                f"{holonomy:.6f} by {mismatch:.3e}; the connection is not single-valued along this loop"
            )
    return PhaseIntegral(total, wrap_phase(total), holonomy)


def dirac_phase(
    em_potential: Callable[[PhasePoint], tuple[float, np.ndarray]],
    path: Sequence[PhasePoint],
    constants: Optional[dict] = None,
) -> float:
    """(e/ħc)∫A^α dr_α with metric diag(-1, 1, 1, 1) and r⁰ = ct.

    `em_potential(m)` returns (A⁰, A) at the point; only r and t of the path are used.
    """
    consts = {"e": 1.0, "hbar": 1.0, "c": 1.0, **(constants or {})}
    e, hbar, c = float(consts["e"]), float(consts["hbar"]), float(consts["c"])
    samples = []
    for m in path:
        a0, a = em_potential(m)
        a = np.asarray(a, dtype=float)
        if not (np.isfinite(a0) and np.all(np.isfinite(a))):
            raise ValueError(f"potential not finite at {m!r}")
        samples.append((float(a0), a))
    total = 0.0
    for k in range(len(path) - 1):
        dr = path[k + 1].r - path[k].r
        dt = path[k + 1].t - path[k].t
        a0 = 0.5 * (samples[k][0] + samples[k + 1][0])
        a = 0.5 * (samples[k][1] + samples[k + 1][1])
        total += float(np.dot(a, dr)) - c * a0 * dt
    return e / (hbar * c) * total


def _sphere_flux(field: Callable[[np.ndarray], np.ndarray], center: np.ndarray, radius: float, band, nodes) -> float:
    n_theta, n_phi = nodes
    u, w = leggauss(n_theta)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    total = 0.0
    for ui, wi in zip(u, w):
        s = np.sqrt(max(0.0, 1.0 - ui * ui))
        ring = 0.0
        for phi in phis:
            normal = np.array([s * np.cos(phi), s * np.sin(phi), ui])
            value = np.asarray(field(center + radius * normal), dtype=float)
            if value.ndim == 2:
                value = value[band]
            ring += float(np.dot(value, normal))
        total += wi * ring * (2.0 * np.pi / n_phi)
    return total * radius * radius


def chern_charge(
    field: Callable[[np.ndarray], np.ndarray],
    center: Sequence[float],
    radius: float,
    band: Optional[int] = None,
    nodes: tuple[int, int] = CHERN_NODES,
) -> float:
    """(1/2π)∮F·ds of a pseudovector field over a sphere, cross-checked at 1.5 × radius."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    first = _sphere_flux(field, center, radius, band, nodes) / (2.0 * np.pi)
    second = _sphere_flux(field, center, CHERN_SECOND_RADIUS * radius, band, nodes) / (2.0 * np.pi)
    if abs(first - second) > CHERN_RTOL * max(1.0, abs(first)):
        raise QuadratureError(
            f"sphere flux differs between radius {radius} ({first:.9f}) and "
            f"{CHERN_SECOND_RADIUS * radius} ({second:.9f}); another degeneracy is nearby"
        )
    logger.debug("chern charge %.12f at radius %g", first, radius)
    return first


@dataclass(frozen=True)
class MaxwellResiduals:
    divergence: np.ndarray      # (N, K): Σ_j ∂_j F_ij
    cyclic: np.ndarray          # (N, T): ∂_k F_ij + ∂_i F_jk + ∂_j F_ki
    triples: tuple[tuple[int, int, int], ...]

    @property
    def max_divergence(self) -> float:
        return float(np.max(np.abs(self.divergence))) if self.divergence.size else 0.0

    @property
    def max_cyclic(self) -> float:
        return float(np.max(np.abs(self.cyclic))) if self.cyclic.size else 0.0


def maxwell_residuals(
    field: Callable[[np.ndarray], np.ndarray],
    points: Sequence[Sequence[float]],
    step: float = 1e-4,
) -> MaxwellResiduals:
    """Divergence and cyclic residuals of an antisymmetric tensor field (fourth-order stencil)."""
    h = check_step(step)
    pts = [np.asarray(x, dtype=float) for x in points]
    K = pts[0].size if pts else 0
    triples = tuple((i, j, k) for i in range(K) for j in range(i + 1, K) for k in range(j + 1, K))
    div = np.zeros((len(pts), K))
    cyc = np.zeros((len(pts), len(triples)))
    for n, x in enumerate(pts):
        dF = []
        for k in range(K):
            e = np.zeros(K)
            e[k] = h
            f = lambda s: np.asarray(field(x + s * e), dtype=float)  # noqa: E731
            dF.append((-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h))
        dF = np.stack(dF)       # dF[k] = ∂_k F
        div[n] = np.einsum("jij->i", dF)
        for t, (i, j, k) in enumerate(triples):
            cyc[n, t] = dF[k][i, j] + dF[i][j, k] + dF[j][k, i]
    return MaxwellResiduals(div, cyc, triples)
