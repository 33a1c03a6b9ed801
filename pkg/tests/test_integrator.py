"""Stepper and driver behavior on systems with known closed forms."""
import math

import numpy as np
import pytest

import coldplasma as cp
from coldplasma.integrator import EVENT_FIRED, REACHED_HORIZON, STEP_FAILURE

DECAY = cp.OdeSystem(1, lambda t, y: np.array([-y[0]]))
OSCILLATOR = cp.OdeSystem(2, lambda t, y: np.array([y[1], -y[0]]))
RAMP_DOWN = cp.OdeSystem(1, lambda t, y: np.array([-1.0]))


def test_exponential_decay_endpoint():
    traj = cp.integrate(DECAY, np.array([1.0]), (0.0, 1.0))
    assert traj.terminal_status == REACHED_HORIZON
    assert traj.times[-1] == 1.0
    assert abs(traj.states[-1, 0] - math.exp(-1.0)) < 10 * 1e-9


def test_oscillator_closes_after_full_period():
    traj = cp.integrate(OSCILLATOR, np.array([1.0, 0.0]),
                        (0.0, 2.0 * math.pi))
    drift = math.hypot(traj.states[-1, 0] - 1.0, traj.states[-1, 1])
    assert drift < 100 * 1e-9


def test_linear_crossing_event_time():
    ev = cp.EventSpec(lambda t, y: y[0], direction="decreasing")
    traj = cp.integrate(RAMP_DOWN, np.array([1.0]), (0.0, 5.0), events=[ev])
    assert traj.terminal_status == EVENT_FIRED
    assert traj.event_index == 0
    assert abs(traj.event_time - 1.0) <= 1e-9


def test_step_flat_field_has_zero_error():
    y4, y5, err = cp.step(cp.OdeSystem(1, lambda t, y: np.array([0.0])),
                          0.0, np.array([1.0]), 0.5)
    assert y4[0] == 1.0
    assert y5[0] == 1.0
    assert err == 0.0


def test_step_constant_slope_exact():
    y4, y5, err = cp.step(cp.OdeSystem(1, lambda t, y: np.array([1.0])),
                          0.0, np.array([0.0]), 0.5)
    assert y5[0] == pytest.approx(0.5, abs=1e-15)
    assert err < 1e-14


def test_step_decay_fifth_order_accuracy():
    y4, y5, err = cp.step(DECAY, 0.0, np.array([1.0]), 0.1)
    assert abs(y5[0] - math.exp(-0.1)) < 1e-9


def test_error_drops_at_least_8x_per_tolerance_decade():
    # h_max must not bind or the loose-tolerance runs all sit on the cap
    errs = []
    for rel in (1e-4, 1e-5, 1e-6, 1e-7):
        ctl = cp.StepControl(rel_tol=rel, abs_tol=1e-14, h_max=2.0)
        traj = cp.integrate(DECAY, np.array([1.0]), (0.0, 2.0), control=ctl)
        errs.append(abs(traj.states[-1, 0] - math.exp(-2.0)))
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse / 8.0 or fine < 1e-12


def test_repeat_runs_bit_identical():
    runs = [cp.integrate(OSCILLATOR, np.array([1.0, 0.0]), (0.0, 20.0))
            for _ in range(2)]
    assert np.array_equal(runs[0].times, runs[1].times)
    assert np.array_equal(runs[0].states, runs[1].states)
    assert runs[0].n_accepted == runs[1].n_accepted
    assert runs[0].n_rejected == runs[1].n_rejected


def test_event_bracketed_by_sign_change():
    ev = cp.EventSpec(lambda t, y: y[0], direction="decreasing")
    traj = cp.integrate(OSCILLATOR, np.array([1.0, 0.0]), (0.0, 10.0),
                        events=[ev])
    assert traj.terminal_status == EVENT_FIRED
    # crossing of cos at pi/2; the located state sits on the zero within
    # slope * time_tol up to a small safety factor
    assert abs(traj.event_time - math.pi / 2.0) < 1e-7
    assert abs(traj.event_state[0]) < 10 * 1e-9
    before = traj.states[traj.times < traj.event_time]
    assert before[-1, 0] > 0.0


def test_event_direction_filter_skips_rising_crossings():
    # sin starts rising; a decreasing-only event must wait until t = pi
    sys_sin = cp.OdeSystem(2, lambda t, y: np.array([y[1], -y[0]]))
    ev = cp.EventSpec(lambda t, y: y[0], direction="decreasing")
    traj = cp.integrate(sys_sin, np.array([0.0, 1.0]), (0.0, 10.0),
                        events=[ev])
    assert traj.terminal_status == EVENT_FIRED
    assert abs(traj.event_time - math.pi) < 1e-7


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_finite_time_singularity_reports_step_failure():
    # trial steps past the pole overflow; that is the detection mechanism
    sq = cp.OdeSystem(1, lambda t, y: np.array([y[0] * y[0]]))
    traj = cp.integrate(sq, np.array([1.0]), (0.0, 2.0))
    assert traj.terminal_status == STEP_FAILURE
    assert traj.times[-1] < 2.0
    assert traj.times[-1] == pytest.approx(1.0, abs=1e-3)


def test_step_budget_exhaustion_reports_step_failure():
    ctl = cp.StepControl(max_steps=5)
    traj = cp.integrate(DECAY, np.array([1.0]), (0.0, 10.0), control=ctl)
    assert traj.terminal_status == STEP_FAILURE
    assert traj.n_accepted + traj.n_rejected <= 5


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        cp.integrate(DECAY, np.array([1.0, 2.0]), (0.0, 1.0))


def test_control_validation():
    with pytest.raises(ValueError):
        cp.StepControl(rel_tol=0.0)
    with pytest.raises(ValueError):
        cp.StepControl(h_min=0.1, h_max=0.01)
    with pytest.raises(ValueError):
        cp.StepControl(max_steps=0)


def test_event_spec_validation():
    with pytest.raises(ValueError):
        cp.EventSpec(lambda t, y: y[0], direction="sideways")
    with pytest.raises(ValueError):
        cp.EventSpec(lambda t, y: y[0], time_tol=0.0)


def test_time_span_must_advance():
    with pytest.raises(ValueError):
        cp.integrate(DECAY, np.array([1.0]), (1.0, 1.0))


def test_compiled_driver_matches_interpreted_on_phase_system():
    from coldplasma import core
    params = cp.ModelParams(2, 0.5)
    y0 = np.array([0.0, 0.2])
    raw = cp.integrate_compiled(core._rhs_phase, y0, (0.0, 10.0),
                                params.as_array(), store=True)
    compiled = cp.pack_trajectory(raw)
    interp = cp.integrate(
        cp.OdeSystem(2, lambda t, y: np.asarray(cp.rhs_phase(y[0], y[1],
                                                             params))),
        y0, (0.0, 10.0))
    assert compiled.terminal_status == interp.terminal_status
    assert np.allclose(compiled.states[-1], interp.states[-1],
                       rtol=0, atol=1e-12)


def test_compiled_driver_deterministic():
    from coldplasma import core
    params = cp.ModelParams(3, 0.1)
    y0 = cp.initial_state(cp.GaussianPulse(0.2), 0.7, params)
    a = cp.pack_trajectory(cp.integrate_compiled(
        core._rhs_characteristic, y0, (0.0, 25.0), params.as_array(),
        store=True))
    b = cp.pack_trajectory(cp.integrate_compiled(
        core._rhs_characteristic, y0, (0.0, 25.0), params.as_array(),
        store=True))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)
