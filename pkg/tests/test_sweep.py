"""Grid sweeps, bisection searches, and the damping-schedule scan."""
import math

import numpy as np
import pytest

import coldplasma as cp
from coldplasma import core
from coldplasma.integrator import Trajectory

P = cp.ModelParams

COARSE = cp.RGrid(0.05, 0.8, 0.05)


# ---------------------------------------------------------------- grid

def test_rgrid_values():
    g = cp.RGrid(0.05, 0.8, 0.05)
    vals = g.values()
    assert len(g) == 16
    assert vals[0] == 0.05
    assert vals[-1] == pytest.approx(0.8, abs=1e-12)
    assert np.allclose(np.diff(vals), 0.05)


def test_rgrid_defaults_span_the_pulse_region():
    g = cp.RGrid()
    assert (g.r_min, g.r_max, g.step) == (0.001, 3.0, 0.005)
    assert len(g) == 600


def test_rgrid_validation():
    with pytest.raises(ValueError, match="r_min must be >= 0"):
        cp.RGrid(-0.1, 1.0, 0.1)
    with pytest.raises(ValueError, match="r_min must be < r_max"):
        cp.RGrid(1.0, 1.0, 0.1)
    with pytest.raises(ValueError, match="step must be > 0"):
        cp.RGrid(0.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="exceed 1e6 points"):
        cp.RGrid(0.0, 1e3, 1e-6)
    with pytest.raises(ValueError, match="must be finite"):
        cp.RGrid(0.0, math.inf, 0.1)


# ---------------------------------------------------------------- sweeps

def test_sweep_finds_blowup_radius(warm_kernels):
    res = cp.sweep_r(cp.GaussianPulse(0.41), COARSE, P(2, 0.018))
    assert res.global_verdict == "blowup"
    assert res.blew_up and not res.all_smooth
    assert res.worst_r == pytest.approx(0.35, abs=1e-12)
    assert res.t_star == pytest.approx(33.26050281465845, rel=1e-9)
    assert len(res.per_r) == 16
    blown = [row for row in res.per_r if row.status == "blowup"]
    assert all(row.t_blowup >= res.t_star for row in blown)


def test_sweep_all_smooth_just_below_critical(warm_kernels):
    res = cp.sweep_r(cp.GaussianPulse(0.40), COARSE, P(2, 0.018))
    assert res.global_verdict == "all_smooth"
    assert res.t_star is None
    assert res.worst_r == pytest.approx(0.4, abs=1e-12)
    qmins = [row.q_min for row in res.per_r]
    assert min(qmins) == pytest.approx(0.17810124345915462, rel=1e-9)
    # interior worst radius: the grid brackets the dangerous region
    assert COARSE.r_min < res.worst_r < COARSE.r_max
    assert all(row.status == "smooth_certified" for row in res.per_r)
    assert all(row.envelope_decayed is None for row in res.per_r)


def test_frictionless_pulse_always_blows_up(warm_kernels):
    res = cp.sweep_r(cp.GaussianPulse(0.3), cp.RGrid(0.2, 1.2, 0.2), P(2, 0.0))
    assert res.blew_up
    assert res.worst_r == pytest.approx(0.6, abs=1e-12)
    assert res.t_star == pytest.approx(190.26799417604138, rel=1e-9)


def test_parallel_sweep_matches_serial(warm_kernels):
    grid = cp.RGrid(0.1, 0.6, 0.1)
    serial = cp.sweep_r(cp.GaussianPulse(0.44), grid, P(2, 0.1))
    parallel = cp.sweep_r(cp.GaussianPulse(0.44), grid, P(2, 0.1), threads=2)
    assert serial == parallel


def test_inconclusive_rows_warn_and_are_excluded(warm_kernels):
    # r = 0 certifies before stepping; the off-axis row exhausts its budget
    grid = cp.RGrid(0.0, 0.5, 0.5)
    with pytest.warns(UserWarning, match="inconclusive"):
        res = cp.sweep_r(cp.GaussianPulse(0.3), grid, P(2, 0.05),
                         control=cp.StepControl(max_steps=5))
    assert res.inconclusive_r == (0.5,)
    assert res.all_smooth


def test_all_rows_inconclusive_raises(warm_kernels):
    with pytest.warns(UserWarning, match="inconclusive"):
        with pytest.raises(RuntimeError, match="every grid point"):
            cp.sweep_r(cp.GaussianPulse(0.3), cp.RGrid(0.4, 0.6, 0.2),
                       P(2, 0.05), control=cp.StepControl(max_steps=5))


def test_smooth_to_horizon_rows_carry_envelope_flag(warm_kernels):
    res = cp.sweep_r(cp.GaussianPulse(0.3), cp.RGrid(0.75, 0.85, 0.1),
                     P(2, 0.05), horizon=3.0)
    for row in res.per_r:
        assert row.status == "smooth_to_horizon"
        assert isinstance(row.envelope_decayed, bool)


# ---------------------------------------------------------------- bisections

def test_critical_amplitude_at_half_friction(warm_kernels):
    s = cp.critical_a(2, 0.5, grid=COARSE, tol=2e-3)
    assert s.target == "critical_a"
    assert s.result == pytest.approx(0.488046875, abs=1e-12)
    assert s.result == s.bracket[0]
    assert s.bracket[1] - s.bracket[0] <= s.tol
    # every blow-up probe sits above every smooth probe
    blow = [p for p, b in s.bracket_history if b]
    calm = [p for p, b in s.bracket_history if not b]
    assert min(blow) > max(calm)


def test_critical_damping_for_strong_pulse(warm_kernels):
    s = cp.critical_nu(cp.GaussianPulse(0.499), 2,
                       grid=cp.RGrid(0.01, 0.11, 0.02),
                       bracket=(0.5, 2.0), tol=0.01)
    assert s.target == "critical_nu"
    assert s.result == pytest.approx(0.9189453125, abs=1e-12)
    assert s.bracket[0] < s.result < s.bracket[1]
    assert s.bracket[1] - s.bracket[0] <= s.tol
    blow = [p for p, b in s.bracket_history if b]
    calm = [p for p, b in s.bracket_history if not b]
    assert max(blow) < min(calm)


def test_critical_nu_escalates_a_short_bracket(warm_kernels):
    # hi = 0.1 still blows; the bracket doubles until it straddles
    s = cp.critical_nu(cp.GaussianPulse(0.499), 2,
                       grid=cp.RGrid(0.01, 0.11, 0.02),
                       bracket=(0.05, 0.1), tol=0.2)
    assert 0.8 <= s.result <= 1.6


def test_critical_nu_rejects_smooth_low_end(warm_kernels):
    with pytest.raises(RuntimeError, match="no blow-up at bracket.lo"):
        cp.critical_nu(cp.GaussianPulse(0.499), 2,
                       grid=cp.RGrid(0.01, 0.11, 0.02), bracket=(1.5, 2.0))


def test_critical_a_rejects_bad_brackets(warm_kernels):
    with pytest.raises(RuntimeError, match="blow-up already at bracket.lo"):
        cp.critical_a(2, 0.5, grid=COARSE, bracket=(0.495, 0.499))
    with pytest.raises(RuntimeError, match="no blow-up at bracket.hi"):
        cp.critical_a(2, 0.5, grid=COARSE, bracket=(0.05, 0.1))
    with pytest.raises(ValueError, match="bracket.hi < 1/d"):
        cp.critical_a(2, 0.5, bracket=(0.1, 0.6))


def test_bisection_refuses_inconclusive_rows(warm_kernels):
    with pytest.raises(RuntimeError, match="cannot drive the bisection"):
        cp.critical_a(2, 0.05, grid=cp.RGrid(0.4, 0.6, 0.2),
                      bracket=(0.1, 0.4),
                      control=cp.StepControl(max_steps=5))


# ---------------------------------------------------------------- decay fits

def test_decay_rate_recovers_half_friction(warm_kernels):
    raw = cp.integrate_compiled(core._rhs_phase, np.array([0.0, 0.2]),
                                (0.0, 60.0), P(2, 0.8).as_array(), store=True)
    run = cp.pack_trajectory(raw)
    rate = cp.decay_rate(run)
    assert rate == pytest.approx(0.4, rel=0.01)


def test_decay_rate_flat_trajectory_is_inf():
    n = 50
    flat = Trajectory(times=np.linspace(0.0, 10.0, n),
                      states=np.zeros((n, 2)), terminal_status="reached_horizon",
                      event_index=None, event_time=None, event_state=None,
                      n_accepted=n, n_rejected=0)
    assert cp.decay_rate(flat) == math.inf


def test_decay_rate_validation():
    n = 30
    run = Trajectory(times=np.linspace(0.0, 10.0, n),
                     states=np.ones((n, 2)), terminal_status="reached_horizon",
                     event_index=None, event_time=None, event_state=None,
                     n_accepted=n, n_rejected=0)
    with pytest.raises(ValueError, match="window_fraction"):
        cp.decay_rate(run, window_fraction=0.0)
    with pytest.raises(ValueError, match="at least 20 samples"):
        cp.decay_rate(run, window_fraction=0.5)


# ---------------------------------------------------------------- theorem 3

def test_schedule_scan_finds_first_smooth_damping(warm_kernels):
    scan = cp.verify_theorem_3(cp.GaussianPulse(0.499), 2,
                               grid=cp.RGrid(0.01, 0.11, 0.02),
                               nu_schedule=(0.5, 1.0))
    assert scan.satisfied
    assert scan.nu == 1.0
    assert scan.entries == ((0.5, "blowup"), (1.0, "all_smooth"))


def test_schedule_scan_reports_exhaustion(warm_kernels):
    scan = cp.verify_theorem_3(cp.GaussianPulse(0.499), 2,
                               grid=cp.RGrid(0.01, 0.11, 0.02),
                               nu_schedule=(0.02, 0.04))
    assert not scan.satisfied
    assert scan.nu is None
    assert scan.entries == ((0.02, "blowup"), (0.04, "blowup"))


def test_schedule_validation():
    pulse = cp.GaussianPulse(0.3)
    with pytest.raises(ValueError, match="strictly increasing"):
        cp.verify_theorem_3(pulse, 2, nu_schedule=(1.0, 0.5))
    with pytest.raises(ValueError, match="must be positive"):
        cp.verify_theorem_3(pulse, 2, nu_schedule=(-1.0, 0.5))
