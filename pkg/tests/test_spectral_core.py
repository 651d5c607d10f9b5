from __future__ import annotations

import numpy as np
import pytest

from errors import BandTrackingError, DegeneracyError, GaugePatchError, NumericalError, StepError, check_step
from scenarios import RotatingField, ZeemanScenario
from spectral_core import (
    DEFAULT_CONSTANTS,
    HamiltonianModel,
    PhasePoint,
    band_energies,
    band_energy,
    band_order,
    central_jacobian,
    default_step,
    diagonalize,
    directions,
    energy_gradient,
    fix_phases,
    follow_frame,
    overlap,
    permuted,
    phase_pivots,
    pin_phases,
    smooth_frame_along,
)


def _dft(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def test_phase_point_validates_shape_and_values():
    with pytest.raises(ValueError):
        PhasePoint([0, 0, 0], [0, 0], 0.0)
    with pytest.raises(ValueError):
        PhasePoint([0, 0, 0, 0], [0, 0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        PhasePoint([0, np.nan, 0], [0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        PhasePoint([0, 0, 0], [0, 0, 0], np.inf)


def test_phase_point_vector_layout_and_immutability():
    m = PhasePoint([1, 2, 3], [4, 5, 6], 7.0)
    assert m.d == 3 and m.dim == 7
    np.testing.assert_array_equal(m.as_vector(), [1, 2, 3, 4, 5, 6, 7])
    back = PhasePoint.from_vector(m.as_vector(), 3)
    np.testing.assert_array_equal(back.as_vector(), m.as_vector())

    shifted = m.shifted(4, 0.5)
    assert shifted.r[1] == 5.5
    assert m.r[1] == 5.0
    with pytest.raises(ValueError):
        m.p[0] = 9.0


def test_directions_labels():
    assert directions(2) == ("p1", "p2", "r1", "r2", "t")
    assert len(directions(3)) == 7


def test_model_needs_a_definition_and_merges_constants():
    with pytest.raises(ValueError):
        HamiltonianModel(n=2, d=3)
    with pytest.raises(ValueError):
        HamiltonianModel.from_split(4, 3, lambda m: 0.0, lambda m: np.ones(3))
    model = HamiltonianModel.from_split(2, 3, lambda m: 0.0, lambda m: np.ones(3), constants={"hbar": 0.5})
    assert model.hbar == 0.5
    assert model.constant("chi") == DEFAULT_CONSTANTS["chi"]
    assert model.spin_charges == (-0.5, 0.5)


def test_diagonalize_residuals_for_random_split_points(hedgehog_model, rng):
    for _ in range(20):
        m = PhasePoint(rng.normal(size=3), rng.normal(size=3), 0.0)
        frame = diagonalize(hedgehog_model, m)
        unitarity, diag = frame.residuals(hedgehog_model.evaluate(m))
        assert unitarity < 1e-12
        assert diag < 1e-12
        assert np.all(np.diff(frame.energies) > 0)


def test_split_frames_do_not_depend_on_h0():
    h1 = lambda m: np.array([0.3, -0.4, 1.0]) + m.r  # noqa: E731
    a = HamiltonianModel.from_split(2, 3, lambda m: 0.0, h1)
    b = HamiltonianModel.from_split(2, 3, lambda m: 1234.5 + float(m.p @ m.p), h1)
    m = PhasePoint([1.0, 2.0, 3.0], [0.1, 0.2, 0.3], 0.0)
    np.testing.assert_array_equal(diagonalize(a, m).unitary, diagonalize(b, m).unitary)
    np.testing.assert_allclose(diagonalize(b, m).energies - diagonalize(a, m).energies, 1234.5 + 14.0)


def test_split_and_matrix_paths_agree():
    h1 = lambda m: np.array([0.2, 0.5, -0.7]) * (1.0 + m.t)  # noqa: E731
    split = HamiltonianModel.from_split(3, 3, lambda m: 0.1, h1)
    matrix = HamiltonianModel(n=3, d=3, evaluate_fn=split.split_matrix)
    m = PhasePoint([0, 0, 0], [0, 0, 0], 0.3)
    np.testing.assert_allclose(band_energies(split, m), band_energies(matrix, m), atol=1e-13)
    assert band_energy(split, 2, m) == pytest.approx(band_energies(matrix, m)[2], abs=1e-13)


def test_degenerate_point_is_refused(hedgehog_model):
    with pytest.raises(DegeneracyError):
        diagonalize(hedgehog_model, PhasePoint([0, 0, 0], [0, 0, 0], 0.0))
    with pytest.raises(DegeneracyError):
        band_energies(hedgehog_model, PhasePoint([1, 0, 0], [0, 0, 0], 0.0))


def test_non_hermitian_input_is_rejected_and_small_defects_symmetrised():
    bad = HamiltonianModel(n=2, d=3, evaluate_fn=lambda m: np.array([[0.0, 1.0], [0.0, 0.0]]))
    m = PhasePoint([0, 0, 0], [0, 0, 0], 0.0)
    with pytest.raises(NumericalError):
        bad.evaluate(m)
    slightly = HamiltonianModel(n=2, d=3, evaluate_fn=lambda m: np.array([[1.0, 0.5 + 1e-12], [0.5, -1.0]]))
    H = slightly.evaluate(m)
    np.testing.assert_array_equal(H, H.conj().T)


def test_wrong_shape_and_non_finite_matrices_are_numerical_errors():
    m = PhasePoint([0, 0, 0], [0, 0, 0], 0.0)
    with pytest.raises(NumericalError):
        HamiltonianModel(n=2, d=3, evaluate_fn=lambda m: np.eye(3)).evaluate(m)
    with pytest.raises(NumericalError):
        HamiltonianModel(n=2, d=3, evaluate_fn=lambda m: np.array([[np.nan, 0], [0, 1]])).evaluate(m)


def test_fix_phases_makes_largest_component_real_positive(rng):
    U = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    V = fix_phases(U)
    for k in range(3):
        idx = int(np.argmax(np.abs(V[:, k])))
        assert V[idx, k].imag == pytest.approx(0.0, abs=1e-15)
        assert V[idx, k].real > 0
        assert abs(overlap(U[:, k], V[:, k])) == pytest.approx(1.0, abs=1e-12)


def test_band_order_undoes_a_permutation(hedgehog_model):
    frame = diagonalize(hedgehog_model, PhasePoint([0, 0, 0], [0.2, 0.1, 1.0], 0.0))
    swapped = permuted(frame, np.array([1, 0]))
    np.testing.assert_array_equal(band_order(frame, swapped), [1, 0])


def test_tracking_fails_when_eigenvectors_jump():
    D = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
    F = _dft(5)

    def evaluate(m):
        return D if m.r[0] < 0 else F @ D @ F.conj().T

    model = HamiltonianModel(n=5, d=3, evaluate_fn=evaluate)
    a = diagonalize(model, PhasePoint([0, 0, 0], [-1, 0, 0], 0.0))
    b = diagonalize(model, PhasePoint([0, 0, 0], [1, 0, 0], 0.0))
    with pytest.raises(BandTrackingError):
        follow_frame(a, b)


def test_smooth_frames_are_parallel_transported(hedgehog_model):
    thetas = np.linspace(0.1, 1.2, 60)
    path = [PhasePoint([0, 0, 0], [np.sin(t) * np.cos(3 * t), np.sin(t) * np.sin(3 * t), np.cos(t)], 0.0) for t in thetas]
    frames = smooth_frame_along(hedgehog_model, path)
    for prev, cur in zip(frames, frames[1:]):
        for b in range(2):
            ov = overlap(prev.column(b), cur.column(b))
            assert ov.imag == pytest.approx(0.0, abs=1e-14)
            assert ov.real > 0.9


def test_energy_gradient_of_free_particle_in_uniform_field(uniform_zeeman):
    model = uniform_zeeman.model()
    m = PhasePoint([0.3, -0.2, 0.5], [1.0, 2.0, 3.0], 0.5)
    for band in (0, 1):
        grad = energy_gradient(model, band, m)
        np.testing.assert_allclose(grad[:3], m.p, atol=1e-9)
        np.testing.assert_allclose(grad[3:], 0.0, atol=1e-9)


def test_central_jacobian_of_linear_map_is_exact():
    A = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0]])
    J = central_jacobian(lambda x: A @ x, np.array([0.5, -0.5, 2.0]), 1e-3)
    np.testing.assert_allclose(J, A, atol=1e-10)


def test_default_step_scales_with_point():
    assert default_step(PhasePoint([0, 0, 0], [0, 0, 0], 0.0)) == pytest.approx(1e-4)
    assert default_step(PhasePoint([0, 0, 0], [0, 0, 10], 0.0)) == pytest.approx(1e-3)


def test_non_positive_steps_are_step_errors(hedgehog_model):
    with pytest.raises(StepError):
        check_step(0.0)
    with pytest.raises(ValueError):
        check_step(-1e-3)
    with pytest.raises(StepError):
        energy_gradient(hedgehog_model, 0, PhasePoint([0, 0, 0], [0, 0, 1], 0.0), h=-1e-4)


def test_evaluate_refuses_a_matrix_that_disagrees_with_its_split_form():
    base = HamiltonianModel.from_split(2, 3, lambda m: 0.2, lambda m: np.array([0.3, -0.1, 0.8]) + m.r)
    m = PhasePoint([0, 0, 0], [0.1, 0.2, 0.3], 0.0)
    consistent = HamiltonianModel(n=2, d=3, evaluate_fn=base.split_matrix, split_form=base.split_form)
    np.testing.assert_allclose(consistent.evaluate(m), base.evaluate(m), atol=1e-15)
    assert consistent.check_split_consistency(m) == 0.0

    shifted = HamiltonianModel(n=2, d=3, evaluate_fn=lambda m: base.split_matrix(m) + 1e-6 * np.eye(2), split_form=base.split_form)
    assert shifted.check_split_consistency(m) == pytest.approx(1e-6)
    with pytest.raises(NumericalError, match="disagree"):
        shifted.evaluate(m)


def test_phase_pivots_prefer_the_lowest_index_on_ties():
    U = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    assert phase_pivots(U) == (0, 0)
    assert phase_pivots(np.array([[0.6, 0.8], [0.8j, -0.6]])) == (1, 0)
    V = pin_phases(np.array([[0.6, 0.8], [0.8j, -0.6]]), (1, 1))
    assert V[1, 0] == pytest.approx(0.8)
    assert V[1, 1] == pytest.approx(0.6)
    with pytest.raises(GaugePatchError):
        pin_phases(np.eye(2), (1, 0))


def _great_circle(segments: int) -> list[PhasePoint]:
    a = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    b = np.array([0.0, 1.0, 0.0])
    return [PhasePoint([0, 0, 0], np.cos(s) * a + np.sin(s) * b, 0.0) for s in np.linspace(0.0, np.pi / 2, segments + 1)]


def test_transported_frame_does_not_depend_on_refinement(hedgehog_model):
    coarse = smooth_frame_along(hedgehog_model, _great_circle(40))[-1].unitary
    fine = smooth_frame_along(hedgehog_model, _great_circle(80))[-1].unitary
    np.testing.assert_allclose(fine, coarse, atol=1e-8)


def test_transported_overlaps_are_half_angle_cosines():
    scn = ZeemanScenario(RotatingField(1.0, 0.9, 1.0), lorentz=False)
    path = [PhasePoint([0, 0, 0], [0, 0, 0], t) for t in np.linspace(0.0, 3.0, 31)]
    frames = smooth_frame_along(scn.model(), path)
    fields = [scn.B_field(m) for m in path]
    for k in range(len(path) - 1):
        u, v = fields[k] / np.linalg.norm(fields[k]), fields[k + 1] / np.linalg.norm(fields[k + 1])
        gamma = np.arccos(np.clip(u @ v, -1.0, 1.0))
        for band in (0, 1):
            ov = overlap(frames[k].column(band), frames[k + 1].column(band))
            assert ov.real == pytest.approx(np.cos(gamma / 2.0), abs=1e-12)
            assert ov.imag == pytest.approx(0.0, abs=1e-12)
