"""Blow-up decision machinery along single characteristics.

A characteristic is smooth exactly as long as Q(t) = 1 + int p1 stays
positive, so the decision problem is: does Q have a zero? Three outcomes
are distinguished. The Q = 0 event fires -> blow-up at that time. The
horizon is reached -> smooth_to_horizon with the observed minimum of Q.
In between, at periodic checkpoints, a tail certificate is attempted:
the remaining contribution to Q is bounded through the level-curve
geometry, and when the bound leaves a positive margin the run is cut
short with smooth_certified.

Near-critical subcritical data can also diverge through sheer amplitude:
the level curve through a point close to G = 1/d reaches out to
astronomically large |F|, |G| (far beyond floating point), the phase
trajectory plunges along it in finite time, and the derivative channels
grow with it. Such runs report blowup with t_star at the moment the
phase amplitude passes 1e6; an actual Q zero can never be observed
across such a cliff, and the companion Riccati system diverges at the
same moment. Step failure with a moderate phase state, by contrast, is
genuine stiffness and stays inconclusive.

Initial data with G0 >= 1/d sit outside the subcritical region; there the
phase system escapes on its own and the verdict is supercritical_escape,
without derivative semantics.

The analytic functionals F1, F2, F3 (global smoothness, smoothness up to
a horizon T, guaranteed blow-up) are evaluated by theorem_two_report.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import pulses
from .core import (ESCAPE_THRESHOLD, CharacteristicState, ModelParams,
                   PhaseCurveGeometry, phase_curve_geometry,
                   _rhs_characteristic, _rhs_phase, _event_escape,
                   _event_q_escape)
from .integrator import StepControl, Trajectory, integrate_compiled

SMOOTH_CERTIFIED = "smooth_certified"
SMOOTH_TO_HORIZON = "smooth_to_horizon"
BLOWUP = "blowup"
SUPERCRITICAL_ESCAPE = "supercritical_escape"
INCONCLUSIVE = "inconclusive"

Q_MARGIN = 0.01

_DECREASING = np.array([-1], dtype=np.int64)
_DEC2 = np.array([-1, -1], dtype=np.int64)


def default_horizon(nu: float) -> float:
    """Integration horizon giving the nu/2 decay time to settle."""
    if nu == 0.0:
        return 2000.0
    return max(50.0, 20.0 / nu)


@dataclass(frozen=True)
class BlowupVerdict:
    status: str
    q_min: float
    t_at_qmin: float
    final_state: CharacteristicState
    t_final: float
    horizon: float
    tail_bound: Optional[float] = None
    t_certified: Optional[float] = None
    t_star: Optional[float] = None
    q_slope: Optional[float] = None
    reason: Optional[str] = None

    @property
    def is_smooth(self) -> bool:
        return self.status in (SMOOTH_CERTIFIED, SMOOTH_TO_HORIZON)

    @property
    def blew_up(self) -> bool:
        return self.status in (BLOWUP, SUPERCRITICAL_ESCAPE)


@dataclass(frozen=True)
class TheoremTwoReport:
    h0: float
    h1: float
    j_plus: float
    m_minus: float
    m_plus: float
    T: float
    f1: Optional[float] = None
    f1_reason: Optional[str] = None
    f2_at_T: Optional[float] = None
    f3: Optional[float] = None
    f3_reason: Optional[str] = None
    blowup_deadline: Optional[float] = None
    phi_integral: Optional[float] = None


def certify_tail(state: CharacteristicState, t: float,
                 geometry: PhaseCurveGeometry, params: ModelParams,
                 q_margin: float = Q_MARGIN) -> Optional[float]:
    """Bound on the remaining |integral of p1| from time t on, or None.

    The bound multiplies an energy envelope of |H| (valid while J stays
    above j_floor, taken from the current level curve), the integrating-
    factor bound m_plus * exp(-(d+2)*calF/2) for the trajectory's future,
    and the explicitly integrable exp(-nu*tau/2) tail. Certification
    succeeds when the current Q minus the bound clears q_margin; geometry
    must be the level curve through the state itself.
    """
    d, nu = params.d, params.nu
    if nu <= 0.0:
        return None
    j_floor = 1.0 - 0.25 * nu * nu - 0.5 * (d + 2) * max(0.0, geometry.g_plus)
    if j_floor <= 0.0:
        return None
    e_h = math.sqrt(state.H ** 2 + state.Z ** 2 / max(j_floor, 1e-12))
    s_now = math.exp(-0.5 * (d + 2) * state.calF)
    bound = e_h * geometry.m_plus * s_now * (2.0 / nu) * math.exp(-0.5 * nu * t)
    if state.Q - bound > q_margin:
        return bound
    return None


def _single_point_trajectory(t, y, status):
    return Trajectory(times=np.array([t]), states=np.asarray(y)[None, :].copy(),
                      terminal_status=status, event_index=None, event_time=None,
                      event_state=None, n_accepted=0, n_rejected=0)


def _stitch(pieces, status, event_time, event_state, n_acc, n_rej):
    times = [pieces[0][0]] + [ts[1:] for ts, _ in pieces[1:]]
    states = [pieces[0][1]] + [ys[1:] for _, ys in pieces[1:]]
    fired = status == "event_fired"
    return Trajectory(times=np.concatenate(times),
                      states=np.concatenate(states),
                      terminal_status=status,
                      event_index=0 if fired else None,
                      event_time=event_time if fired else None,
                      event_state=event_state if fired else None,
                      n_accepted=n_acc, n_rejected=n_rej)


def _escape_run(F0, G0, params, horizon, control, store):
    p = params.as_array()
    raw = integrate_compiled(_rhs_phase, np.array([F0, G0]), (0.0, horizon), p,
                             control, event_fn=_event_escape, n_events=1,
                             directions=_DECREASING, store=store)
    status, t, y, _, ev_time, n_acc, n_rej, ts, ys, _, _ = raw
    final = CharacteristicState(y[0], y[1], math.nan, math.nan, math.nan,
                                math.nan)
    nan = math.nan
    if status == 1:
        verdict = BlowupVerdict(SUPERCRITICAL_ESCAPE, nan, nan, final, t,
                                horizon, t_star=float(ev_time))
    elif status == 2:
        verdict = BlowupVerdict(SUPERCRITICAL_ESCAPE, nan, nan, final, t,
                                horizon, t_star=float(t))
    else:
        verdict = BlowupVerdict(
            INCONCLUSIVE, nan, nan, final, t, horizon,
            reason=f"supercritical start but no escape before t={horizon}")
    pad = np.full((ys.shape[0], 4), math.nan)
    traj = Trajectory(times=ts, states=np.hstack([ys, pad]),
                      terminal_status="event_fired" if status == 1 else
                      ("step_failure" if status >= 2 else "reached_horizon"),
                      event_index=0 if status == 1 else None,
                      event_time=float(ev_time) if status == 1 else None,
                      event_state=np.hstack([y, [nan] * 4]) if status == 1 else None,
                      n_accepted=n_acc, n_rejected=n_rej)
    return traj, verdict


def simulate_characteristic(profile, r0: float, params: ModelParams,
                            horizon: Optional[float] = None,
                            control: StepControl = StepControl(),
                            h1_form: str = "h0eq", store: bool = False,
                            n_checkpoints: int = 32):
    """Integrate one characteristic and decide its smoothness.

    Returns (Trajectory, BlowupVerdict). With store=False only segment
    endpoints are kept, which is what parameter searches need; store=True
    keeps every accepted step for output tables.
    """
    profile.check_params(params)
    if horizon is None:
        horizon = default_horizon(params.nu)
    F0, G0, _, _ = profile.evaluate(r0)
    if 1.0 - params.d * G0 <= 0.0:
        return _escape_run(F0, G0, params, horizon, control, store)

    y0 = pulses.initial_state(profile, r0, params, h1_form)
    if y0[3] == 0.0 and y0[4] == 0.0:
        # H and Z stay identically zero, so Q stays 1: certified at once
        verdict = BlowupVerdict(SMOOTH_CERTIFIED, 1.0, 0.0,
                                CharacteristicState(*y0), 0.0, horizon,
                                tail_bound=0.0, t_certified=0.0)
        return _single_point_trajectory(0.0, y0, "reached_horizon"), verdict

    p = params.as_array()
    t, y = 0.0, y0
    q_min, t_at_qmin = 1.0, 0.0
    n_acc = n_rej = 0
    pieces = []
    seg = horizon / n_checkpoints

    for k in range(n_checkpoints):
        t_end = horizon if k == n_checkpoints - 1 else (k + 1) * seg
        raw = integrate_compiled(_rhs_characteristic, y, (t, t_end), p,
                                 control, event_fn=_event_q_escape,
                                 n_events=2, directions=_DEC2, track_idx=5,
                                 store=store)
        status, t, y, ev_index, ev_time, acc, rej, ts, ys, mval, mt = raw
        n_acc += acc
        n_rej += rej
        pieces.append((ts, ys))
        if mval < q_min:
            q_min, t_at_qmin = float(mval), float(mt)
        final = CharacteristicState(*y)

        if status == 1 and ev_index == 0:
            s = math.exp(-0.5 * params.nu * t - 0.5 * (params.d + 2) * y[2])
            verdict = BlowupVerdict(BLOWUP, min(q_min, 0.0), float(ev_time),
                                    final, float(t), horizon,
                                    t_star=float(ev_time),
                                    q_slope=float(y[3] * s))
            break
        escaped = max(abs(y[0]), abs(y[1])) >= 0.5 * ESCAPE_THRESHOLD
        if status == 1 or (status == 2 and escaped):
            # phase amplitude ran away along a near-critical level curve;
            # derivatives diverge with it even though Q never crossed zero
            t_star = float(ev_time) if status == 1 else float(t)
            verdict = BlowupVerdict(
                BLOWUP, q_min, t_at_qmin, final, float(t), horizon,
                t_star=t_star,
                reason="phase amplitude escape before any Q zero")
            break
        if status >= 2:
            why = ("step size underflow" if status == 2 else
                   "step budget exhausted")
            verdict = BlowupVerdict(INCONCLUSIVE, q_min, t_at_qmin, final,
                                    float(t), horizon,
                                    reason=f"{why} at t={t:.6g} before any Q zero")
            break

        try:
            geo = phase_curve_geometry(y[0], y[1], params)
        except (ValueError, OverflowError):
            # curve constants beyond float range: certification must wait
            # until friction has pulled the state down
            geo = None
        bound = (certify_tail(final, float(t), geo, params)
                 if geo is not None else None)
        if bound is not None:
            verdict = BlowupVerdict(SMOOTH_CERTIFIED, q_min, t_at_qmin, final,
                                    float(t), horizon, tail_bound=bound,
                                    t_certified=float(t))
            break
    else:
        verdict = BlowupVerdict(SMOOTH_TO_HORIZON, q_min, t_at_qmin, final,
                                float(t), horizon)

    if store:
        traj = _stitch(pieces, "event_fired" if verdict.status == BLOWUP
                       else ("step_failure" if verdict.status == INCONCLUSIVE
                             else "reached_horizon"),
                       verdict.t_star, y.copy(), n_acc, n_rej)
    else:
        traj = _single_point_trajectory(t, y, "reached_horizon"
                                        if verdict.is_smooth else
                                        ("event_fired" if verdict.status == BLOWUP
                                         else "step_failure"))
    return traj, verdict


def linearized_channels(times, states, params: ModelParams):
    """Derivative channels (p1, p2, u, v, n) from stored 6-state samples.

    u and v are the Riccati variables recovered as p1/Q and p2/Q; they are
    meaningful only while Q > 0. n = 1 - v - d*G is the density channel.
    """
    d, nu = params.d, params.nu
    F, calF, H, Z, Q = (states[:, 0], states[:, 2], states[:, 3],
                        states[:, 4], states[:, 5])
    G = states[:, 1]
    # samples past an amplitude escape may overflow; their channels are
    # reported as inf/nan rather than raising
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        s = np.exp(-0.5 * nu * times - 0.5 * (d + 2) * calF)
        p1 = H * s
        p2 = (-Z + (0.5 * (d - 2) * F - 0.5 * nu) * H) * s
        u = p1 / Q
        v = p2 / Q
        n = 1.0 - v - d * G
    return p1, p2, u, v, n


def phi_integral(profile, r_values, params: ModelParams,
                 truncation: float = 1e-10,
                 control: StepControl = StepControl(),
                 dt: float = 0.25, t_cap: float = 1e5) -> float:
    """Approximate int_0^infty max_r |phi| dtau along phase trajectories.

    phi = -(d+2)/2*G + (d-2)*nu*F - (d-2)(d-4)/2*F^2 decays like
    exp(-nu*t/2), so the quadrature (trapezoid on shared time nodes, max
    over the r grid at each node) is truncated once a block of nodes adds
    less than `truncation` times the accumulated value. The grid max is a
    working approximation of the sup over all r.
    """
    d, nu = params.d, params.nu
    p = params.as_array()
    pts = []
    for r in r_values:
        F0, G0, _, _ = profile.evaluate(r)
        if 1.0 - d * G0 <= 0.0:
            raise ValueError(f"phi integral needs subcritical data; "
                             f"G0(r={r}) >= 1/d")
        pts.append(np.array([F0, G0]))

    def node_max(states):
        m = 0.0
        for s in states:
            F, G = s[0], s[1]
            val = abs(-0.5 * (d + 2) * G + (d - 2) * nu * F
                      - 0.5 * (d - 2) * (d - 4) * F * F)
            if val > m:
                m = val
        return m

    total = 0.0
    prev = node_max(pts)
    t = 0.0
    while t < t_cap:
        block = 0.0
        for _ in range(64):
            for i, s in enumerate(pts):
                raw = integrate_compiled(_rhs_phase, s, (t, t + dt), p, control)
                pts[i] = raw[2]
            t += dt
            cur = node_max(pts)
            block += 0.5 * (prev + cur) * dt
            prev = cur
        total += block
        if block <= truncation * total:
            break
    return total


def theorem_two_report(profile, r0: float, params: ModelParams, T: float,
                       phi_truncation: float = 1e-10, h1_form: str = "h0eq",
                       fp_form: str = "sqrt", phi_value: Optional[float] = None,
                       phi_grid=None,
                       control: StepControl = StepControl()) -> TheoremTwoReport:
    """Evaluate the three analytic functionals for one characteristic.

    F1 < 1 certifies global smoothness, F2(T) < 1 smoothness on [0, T];
    F3 >= 1 (which needs H0 <= 0 and H1 < 0) asserts blow-up before
    pi/sqrt(J+). The phi integral inside F1 may be passed in (phi_value)
    when amortized over a table; otherwise it is computed on phi_grid
    (default: just r0).
    """
    d, nu = params.d, params.nu
    ini = pulses.derived_initials(profile, r0, params, h1_form)
    h0, h1 = ini.h0, ini.h1
    if not 0.0 < nu < 2.0:
        return TheoremTwoReport(
            h0=h0, h1=h1, j_plus=math.nan, m_minus=math.nan, m_plus=math.nan,
            T=T, f1_reason="requires 0 < nu < 2",
            f3_reason="requires 0 < nu < 2")
    F0, G0, _, _ = profile.evaluate(r0)
    if 1.0 - d * G0 <= 0.0:
        return TheoremTwoReport(
            h0=h0, h1=h1, j_plus=math.nan, m_minus=math.nan, m_plus=math.nan,
            T=T, f1_reason="supercritical initial point (G0 >= 1/d)",
            f3_reason="supercritical initial point (G0 >= 1/d)")

    geo = phase_curve_geometry(F0, G0, params, fp_form)
    pref = math.sqrt(h0 ** 2 + h1 ** 2 / (1.0 - 0.25 * nu * nu))
    f2 = (2.0 / nu) * geo.m_plus * pref * math.exp(
        (geo.j_plus - 1.0 + 0.25 * nu * nu) * T)

    if phi_value is None:
        grid = [r0] if phi_grid is None else phi_grid
        phi_value = phi_integral(profile, grid, params, phi_truncation,
                                 control)
    f1 = (2.0 / nu) * geo.m_plus * pref * math.exp(phi_value)

    f3 = None
    f3_reason = None
    deadline = None
    if not (h0 <= 0.0 and h1 < 0.0):
        f3_reason = "requires H0 <= 0 and H1 < 0"
    elif geo.j_plus <= 0.0:
        f3_reason = f"requires J+ > 0 (J+ = {geo.j_plus:.6g})"
    else:
        f3 = (2.0 / nu) * geo.m_minus * math.sqrt(h0 ** 2
                                                  + h1 ** 2 / geo.j_plus)
        deadline = math.pi / math.sqrt(geo.j_plus)

    return TheoremTwoReport(h0=h0, h1=h1, j_plus=geo.j_plus,
                            m_minus=geo.m_minus, m_plus=geo.m_plus, T=T,
                            f1=f1, f2_at_T=f2, f3=f3, f3_reason=f3_reason,
                            blowup_deadline=deadline, phi_integral=phi_value)


def verify_theorem_2c(profile, r0: float, params: ModelParams,
                      horizon: Optional[float] = None,
                      control: StepControl = StepControl(),
                      h1_form: str = "h0eq"):
    """Check one guaranteed-blow-up instance against simulation.

    Requires F3 >= 1 with H0 <= 0 and H1 < 0, then simulates and demands
    a blow-up strictly before pi/sqrt(J+). Returns (t_star, deadline) on
    success; raises AssertionError with diagnostics when the simulated
    characteristic does not comply.
    """
    ini = pulses.derived_initials(profile, r0, params, h1_form)
    if not (ini.h0 <= 0.0 and ini.h1 < 0.0):
        raise ValueError(f"applicability requires H0 <= 0 and H1 < 0; "
                         f"got H0={ini.h0:.6g}, H1={ini.h1:.6g}")
    F0, G0, _, _ = profile.evaluate(r0)
    geo = phase_curve_geometry(F0, G0, params)
    if geo.j_plus <= 0.0:
        raise ValueError(f"applicability requires J+ > 0; got {geo.j_plus:.6g}")
    f3 = (2.0 / params.nu) * geo.m_minus * math.sqrt(
        ini.h0 ** 2 + ini.h1 ** 2 / geo.j_plus)
    if f3 < 1.0:
        raise ValueError(f"applicability requires F3 >= 1; got {f3:.6g}")
    deadline = math.pi / math.sqrt(geo.j_plus)
    if horizon is None:
        horizon = max(default_horizon(params.nu), 3.0 * deadline)
    _, verdict = simulate_characteristic(profile, r0, params, horizon,
                                         control, h1_form)
    if verdict.status != BLOWUP:
        raise AssertionError(
            f"guaranteed blow-up did not occur: F3={f3:.6g}, "
            f"deadline={deadline:.6g}, verdict={verdict.status} "
            f"(q_min={verdict.q_min:.6g} at t={verdict.t_at_qmin:.6g}, "
            f"horizon={horizon:.6g})")
    if not verdict.t_star < deadline:
        raise AssertionError(
            f"blow-up at t={verdict.t_star:.6g} missed the deadline "
            f"pi/sqrt(J+)={deadline:.6g} (F3={f3:.6g})")
    return verdict.t_star, deadline
