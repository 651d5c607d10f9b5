from __future__ import annotations

import warnings

import numpy as np
import pytest

from dynamics import (
    STATUS_BREACH,
    STATUS_COMPLETED,
    STATUS_MAX_STEPS,
    ExternalEMField,
    IntegratorConfig,
    TrajectoryState,
    adiabaticity_epsilon,
    band_curvature,
    cross_matrix,
    displacement_contour,
    effective_em_fields,
    energy_drift,
    integrate,
    ode_steps,
    rk4_step,
    rkf45_step,
    velocity_field,
)
from errors import PerturbationWarning, SingularityError
from gauge import ConnectionField, phase_distance, phase_line_integral
from scenarios import LinearField, RotatingField, SpinOrbitScenario, UniformField, ZeemanScenario
from spectral_core import (
    HamiltonianModel,
    PhasePoint,
    band_energies,
    diagonalize,
    energy_gradient,
    overlap,
    smooth_frame_along,
)
from verification import ramp_scenario


ORIGIN = PhasePoint([0, 0, 0], [0, 0, 0], 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [{"method": "euler"}, {"step": 0.0}, {"t_final": -1.0}, {"epsilon_abort": 2.0}, {"max_steps": 0}, {"coupling": "loose"}],
)
def test_integrator_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_cross_matrix_is_the_cross_product():
    v, B = np.array([0.3, -1.0, 2.0]), np.array([1.0, 0.5, -0.2])
    np.testing.assert_allclose(cross_matrix(B) @ v, np.cross(v, B))
    np.testing.assert_allclose(cross_matrix([0.0, 1.0]) @ v, np.cross(v, [0.0, 1.0, 0.0]))


def test_rk4_and_rkf45_single_steps():
    rhs = lambda t, y: y  # noqa: E731
    y = rk4_step(rhs, 0.0, 0.1, np.array([1.0]))
    assert abs(y[0] - np.exp(0.1)) < 2e-7
    y5, err = rkf45_step(rhs, 0.0, 0.1, np.array([1.0]))
    assert abs(y5[0] - np.exp(0.1)) < 1e-8
    assert 0.0 < err < 1e-6


def test_rk4_steps_land_exactly_on_the_end_time():
    steps = list(ode_steps(lambda t, y: np.zeros_like(y), 0.5, np.zeros(2), IntegratorConfig(step=0.3, t_final=1.0)))
    assert len(steps) == 4
    assert steps[-1][0] == 1.5


def test_rkf45_steps_land_exactly_on_the_end_time():
    config = IntegratorConfig(method="rkf45", step=0.1, tolerance=1e-10, t_final=1.0)
    steps = list(ode_steps(lambda t, y: -y, 0.0, np.array([1.0]), config))
    times = [t for t, _ in steps]
    assert times[-1] == 1.0
    assert all(b > a for a, b in zip(times, times[1:]))
    assert steps[-1][1][0] == pytest.approx(np.exp(-1.0), abs=1e-8)


@pytest.mark.parametrize("method", ["rk4", "rkf45"])
@pytest.mark.parametrize("band", [0, 1])
def test_free_particle_moves_in_a_straight_line(method, band):
    scn = ZeemanScenario(UniformField((0.0, 0.0, 1.0)), lorentz=False)
    initial = PhasePoint([0.3, -0.2, 0.5], [1.0, 0.0, -1.0], 0.0)
    traj = integrate(scn.model(), band, initial, IntegratorConfig(method=method, step=0.05, t_final=1.0), scn.em_field())
    assert traj.status == STATUS_COMPLETED
    np.testing.assert_allclose(traj.final.m.r, initial.r + initial.p, atol=1e-9)
    np.testing.assert_allclose(traj.final.m.p, initial.p, atol=1e-12)
    assert energy_drift(traj) < 1e-10
    assert np.all(np.diff(traj.times()) > 0)


@pytest.mark.parametrize("band, sign", [(0, 1.0), (1, -1.0)])
def test_rotating_field_berry_phase_is_the_solid_angle(band, sign):
    theta = np.pi / 3
    scn = ZeemanScenario(RotatingField(1.0, theta, 1.0), lorentz=False)
    config = IntegratorConfig(step=2e-2, t_final=2.0 * np.pi)
    traj = integrate(scn.model(), band, ORIGIN, config, scn.em_field())
    assert traj.status == STATUS_COMPLETED
    np.testing.assert_array_equal(traj.final.m.r, 0.0)
    assert phase_distance(traj.final.berry_phase, sign * np.pi * (1.0 - np.cos(theta))) < 1e-3
    # E = ±ħχ|B| while p stays zero
    assert traj.final.dynamic_phase == pytest.approx(sign * 2.0 * np.pi, abs=1e-9)


def test_equatorial_orbit_berry_phase_is_half_the_sphere():
    scn = ZeemanScenario(RotatingField(1.0, np.pi / 2, 1.0), lorentz=False)
    config = IntegratorConfig(step=2.0 * np.pi / 314, t_final=2.0 * np.pi)
    traj = integrate(scn.model(), 1, ORIGIN, config, scn.em_field())
    assert traj.status == STATUS_COMPLETED
    assert phase_distance(traj.final.berry_phase, -np.pi) < 1e-4


GRADIENT_FIELD = LinearField((0.0, 0.0, 1.0), ((0.0, 0.3, 0.0), (0.0, 0.0, 0.2), (0.5, 0.0, 0.0)), (0.0, 0.1, 0.0))


@pytest.mark.parametrize(
    "scn, initial, config",
    [
        (ZeemanScenario(RotatingField(1.0, np.pi / 3, 1.0), lorentz=False), ORIGIN, IntegratorConfig(step=0.05, t_final=2.0)),
        (
            ZeemanScenario(GRADIENT_FIELD, lorentz=False),
            PhasePoint([0.4, -0.2, 0.3], [0.1, 0.2, -0.1], 0.0),
            IntegratorConfig(step=0.05, t_final=1.0),
        ),
    ],
)
def test_berry_phase_is_the_line_integral_along_the_trajectory(scn, initial, config):
    model = scn.model()
    for band in (0, 1):
        traj = integrate(model, band, initial, config, scn.em_field())
        along = phase_line_integral(ConnectionField(model), traj.path(), band)
        assert along.holonomy is None
        assert traj.final.berry_phase == pytest.approx(along.raw, abs=1e-6)


def test_berry_phase_follows_a_change_of_pinned_component():
    # the field swings from below to above the xy plane along one meridian
    scn = ZeemanScenario(LinearField((0.6, 0.6, -1.0), ((0.0, 0.0, 0.0),) * 3, (0.0, 0.0, 0.05)), lorentz=False)
    model = scn.model()
    traj = integrate(model, 1, ORIGIN, IntegratorConfig(step=0.2, t_final=40.0), scn.em_field())
    assert traj.status == STATUS_COMPLETED
    field = ConnectionField(model)
    assert field(traj.states[0].m).pivots[1] != field(traj.final.m).pivots[1]

    end = traj.final.m
    transported = smooth_frame_along(model, traj.path())[-1].column(1)
    expected = float(np.angle(overlap(diagonalize(model, end).column(1), transported)))
    assert phase_distance(traj.final.berry_phase, expected) < 1e-3
    assert phase_distance(traj.final.berry_phase, -np.pi / 4) < 1e-3


def test_rk4_trajectories_converge_at_fourth_order():
    scn = ZeemanScenario(GRADIENT_FIELD, lorentz=False)
    model = scn.model()
    initial = PhasePoint([0.4, -0.2, 0.3], [0.1, 0.2, -0.1], 0.0)

    def end_state(step):
        traj = integrate(model, 1, initial, IntegratorConfig(step=step, t_final=2.0, track_phases=False))
        assert traj.status == STATUS_COMPLETED
        return np.concatenate([traj.final.m.p, traj.final.m.r])

    reference = end_state(0.03125)
    coarse = np.linalg.norm(end_state(0.25) - reference)
    fine = np.linalg.norm(end_state(0.125) - reference)
    assert fine > 1e-12
    assert 10.0 < coarse / fine < 24.0


def _precessing_model(hbar=0.05):
    def h1(m):
        theta = 0.8 + 0.3 * m.r[1]
        phi = 1.2 * m.r[0] + 0.5 * m.t
        return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])

    return HamiltonianModel.from_split(2, 3, lambda m: 0.5 * float(m.p @ m.p), h1, constants={"hbar": hbar})


def test_spin_force_is_opposite_between_bands():
    model = _precessing_model()
    m = PhasePoint([0.7, -0.3, 0.2], [0.4, 0.1, -0.2], 0.3)
    np.testing.assert_array_equal(band_curvature(model, 0, m), -band_curvature(model, 1, m))

    spin = []
    for band in (0, 1):
        pert = np.concatenate(velocity_field(model, band, m, coupling="perturbative"))
        bare = np.concatenate(velocity_field(model, band, m, curvature="none"))
        spin.append(pert - bare)
    assert np.max(np.abs(spin[0])) > 1e-4
    np.testing.assert_allclose(spin[0], -spin[1], atol=1e-9)


def test_ramp_epsilon_closed_form():
    for B0, beta, chi in ((1.0, 0.05, 1.0), (2.0, 0.3, 0.5)):
        scn = ramp_scenario(B0, beta, chi)
        mdot = np.zeros(7)
        mdot[6] = 1.0
        eps = adiabaticity_epsilon(scn.model(), 1, ORIGIN, mdot, scn.em_field())
        assert eps == pytest.approx(beta / (4.0 * chi * B0**2), abs=1e-8)
    with pytest.raises(ValueError):
        adiabaticity_epsilon(ramp_scenario().model(), 1, ORIGIN, np.zeros(3))


def test_explicit_delta_p_matches_the_default_choice(gradient_zeeman):
    model = gradient_zeeman.model()
    m = PhasePoint([0.4, 0.1, 0.0], [0.2, -0.3, 0.1], 0.0)
    mdot = np.zeros(7)
    energies = band_energies(model, m)
    dE = energies[1] - energies[0]
    speed = float(np.linalg.norm(energy_gradient(model, 1, m)[:3]))
    default = adiabaticity_epsilon(model, 1, m, mdot)
    explicit = adiabaticity_epsilon(model, 1, m, mdot, delta_p=dE / speed)
    assert default > 0
    assert explicit == pytest.approx(default, rel=1e-9)


def test_ramp_down_stops_on_breach():
    scn = ramp_scenario(1.0, -0.3)
    traj = integrate(scn.model(), 1, ORIGIN, IntegratorConfig(step=0.01, t_final=1.0), scn.em_field())
    assert traj.status == STATUS_BREACH
    assert traj.final.epsilon > 0.1
    assert all(s.epsilon <= 0.1 for s in traj.states[:-1])
    assert 0.44 < traj.final.m.t < 0.47


def test_breach_at_the_start_returns_one_state():
    scn = ramp_scenario(0.5, 2.0)
    traj = integrate(scn.model(), 1, ORIGIN, IntegratorConfig(step=0.01, t_final=0.1), scn.em_field())
    assert traj.status == STATUS_BREACH
    assert len(traj.states) == 1


def test_max_steps_status():
    scn = ZeemanScenario(UniformField((0.0, 0.0, 1.0)))
    config = IntegratorConfig(step=0.01, t_final=1.0, max_steps=5, track_phases=False)
    traj = integrate(scn.model(), 0, ORIGIN, config, scn.em_field())
    assert traj.status == STATUS_MAX_STEPS
    assert len(traj.states) == 6
    assert traj.final.connection is None


def test_generalized_coordinates():
    state = TrajectoryState(
        m=PhasePoint([1, 0, 0], [0, 1, 0], 0.0),
        band=0,
        energy=0.0,
        epsilon=0.0,
        berry_phase=0.0,
        dynamic_phase=0.0,
        velocity=np.zeros(7),
        connection=np.array([1.0, 0, 0, 0, 2.0, 0, 0]),
        hbar=0.5,
    )
    P, R = state.generalized
    np.testing.assert_allclose(P, [1.0, 1.0, 0.0])
    np.testing.assert_allclose(R, [-0.5, 1.0, 0.0])


def test_perturbative_coupling_agrees_to_second_order(random_spin_orbit, rng):
    scn = SpinOrbitScenario(random_spin_orbit.E_field, random_spin_orbit.B_field, rho=0.5, hbar=1e-3)
    model, em = scn.model(), scn.em_field()
    m = PhasePoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3), 0.2)
    for band in (0, 1):
        exact = np.concatenate(velocity_field(model, band, m, em))
        pert = np.concatenate(velocity_field(model, band, m, em, coupling="perturbative"))
        bare = np.concatenate(velocity_field(model, band, m, em, curvature="none"))
        first_order = np.max(np.abs(exact - bare))
        assert first_order > 0
        assert np.max(np.abs(exact - pert)) < 1e-2 * first_order


def test_large_spin_force_warns():
    scn = ZeemanScenario(LinearField((0.0, 0.0, 0.05), ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))), lorentz=False)
    with pytest.warns(PerturbationWarning):
        velocity_field(scn.model(), 0, PhasePoint([0, 0, 0], [0.01, 0.0, 0.0], 0.0))


def test_uniform_field_gives_no_warning(uniform_zeeman):
    with warnings.catch_warnings():
        warnings.simplefilter("error", PerturbationWarning)
        velocity_field(uniform_zeeman.model(), 0, PhasePoint([1, 0, 0], [0, 0, 0], 0.0), uniform_zeeman.em_field())


def test_displacement_contour_of_constant_curvature():
    F = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]])
    path = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [1.0, 0.0, 0.0]]
    np.testing.assert_allclose(displacement_contour(path, lambda p: F, band=1, hbar=0.5), [0.0, 0.5, 0.0])
    np.testing.assert_allclose(displacement_contour(path, lambda p: F[0]), [0.0, -1.0, 0.0])
    np.testing.assert_allclose(displacement_contour(path[:1], lambda p: F[0]), 0.0)


def test_effective_fields_reproduce_the_position_force():
    scn = ZeemanScenario(
        LinearField((0.0, 0.0, 1.0), ((0.0, 0.3, 0.0), (0.0, 0.0, 0.2), (0.5, 0.0, 0.0)), (0.0, 0.1, 0.0)),
        hbar=0.1,
        e=2.0,
        c=3.0,
    )
    model, em = scn.model(), scn.em_field()
    m = PhasePoint([0.4, -0.2, 0.3], [0.1, 0.2, -0.1], 0.3)
    for band in (0, 1):
        pdot, rdot = velocity_field(model, band, m, em)
        B_eff, E_eff = effective_em_fields(scn, m, band)
        dEdr = energy_gradient(model, band, m)[3:6]
        expected = -dEdr + 2.0 * E_eff + (2.0 / 3.0) * np.cross(rdot, B_eff)
        np.testing.assert_allclose(pdot, expected, atol=1e-10)


def test_effective_fields_of_a_uniform_field(uniform_zeeman):
    B_eff, E_eff = effective_em_fields(uniform_zeeman, PhasePoint([0, 0, 0], [1, 2, 3], 0.0), 1)
    np.testing.assert_allclose(B_eff, [0.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(E_eff, 0.0, atol=1e-12)


def test_effective_fields_refuse_zero_field(hedgehog):
    with pytest.raises(SingularityError):
        effective_em_fields(hedgehog, ORIGIN, 0)


def test_external_field_defaults():
    em = ExternalEMField()
    np.testing.assert_array_equal(em.electric(ORIGIN), 0.0)
    uniform = ExternalEMField.uniform(E=(1.0, 0.0))
    np.testing.assert_array_equal(uniform.electric(ORIGIN), [1.0, 0.0, 0.0])
