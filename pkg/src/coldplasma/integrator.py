"""Adaptive Runge-Kutta-Fehlberg 4(5) integration with event location.

One loop implements the method; it runs under numba when handed compiled
right-hand sides (the hot paths in `criteria` and `sweep`) and as plain
Python otherwise. Events are located by bisecting re-integrations of the
bracketing step, so no dense output is needed.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._compat import njit, is_compiled, python_twin

REACHED_HORIZON = "reached_horizon"
EVENT_FIRED = "event_fired"
STEP_FAILURE = "step_failure"

_STATUS_NAMES = (REACHED_HORIZON, EVENT_FIRED, STEP_FAILURE, STEP_FAILURE)

DIR_ANY = 0
DIR_DECREASING = -1
DIR_INCREASING = 1

_DIR_CODES = {"any": DIR_ANY, "decreasing": DIR_DECREASING,
              "increasing": DIR_INCREASING}


@dataclass(frozen=True)
class StepControl:
    """Error tolerances and step-size limits for one integration."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 0.1
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be strictly positive")
        if not (self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need h_min <= h_init <= h_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class EventSpec:
    """Scalar event g(t, y); integration stops at its first located zero."""

    event_fn: Callable[[float, np.ndarray], float]
    direction: str = "any"
    time_tol: float = 1e-9

    def __post_init__(self):
        if self.direction not in _DIR_CODES:
            raise ValueError(f"unknown direction {self.direction!r}")
        if not self.time_tol > 0:
            raise ValueError("time_tol must be positive")


@dataclass(frozen=True)
class OdeSystem:
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Accepted integration samples plus how the run ended."""

    times: np.ndarray
    states: np.ndarray
    terminal_status: str
    event_index: Optional[int] = None
    event_time: Optional[float] = None
    event_state: Optional[np.ndarray] = None
    n_accepted: int = 0
    n_rejected: int = 0

    @property
    def samples(self):
        return list(zip(self.times, self.states))

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


# Classical Fehlberg tableau. y5 (the fifth-order line) is propagated.
_A21 = 1.0 / 4.0
_A31, _A32 = 3.0 / 32.0, 9.0 / 32.0
_A41, _A42, _A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
_A51, _A52, _A53, _A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
_A61, _A62, _A63, _A64, _A65 = (-8.0 / 27.0, 2.0, -3544.0 / 2565.0,
                                1859.0 / 4104.0, -11.0 / 40.0)
_C2, _C3, _C4, _C5, _C6 = 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0
_B51, _B53, _B54, _B55, _B56 = (16.0 / 135.0, 6656.0 / 12825.0,
                                28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0)
_B41, _B43, _B44, _B45 = 25.0 / 216.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2


# no disk cache: overload keys embed the rhs dispatcher identity, and a
# key minted from a caller's local function poisons the shared index once
# that function is gone
@njit(cache=False)
def _fehlberg_step(rhs, t, y, h, params, k, y4, y5, work):
    n = y.shape[0]
    rhs(t, y, params, k[0])
    for i in range(n):
        work[i] = y[i] + h * _A21 * k[0, i]
    rhs(t + _C2 * h, work, params, k[1])
    for i in range(n):
        work[i] = y[i] + h * (_A31 * k[0, i] + _A32 * k[1, i])
    rhs(t + _C3 * h, work, params, k[2])
    for i in range(n):
        work[i] = y[i] + h * (_A41 * k[0, i] + _A42 * k[1, i] + _A43 * k[2, i])
    rhs(t + _C4 * h, work, params, k[3])
    for i in range(n):
        work[i] = y[i] + h * (_A51 * k[0, i] + _A52 * k[1, i]
                              + _A53 * k[2, i] + _A54 * k[3, i])
    rhs(t + _C5 * h, work, params, k[4])
    for i in range(n):
        work[i] = y[i] + h * (_A61 * k[0, i] + _A62 * k[1, i] + _A63 * k[2, i]
                              + _A64 * k[3, i] + _A65 * k[4, i])
    rhs(t + _C6 * h, work, params, k[5])
    for i in range(n):
        y5[i] = y[i] + h * (_B51 * k[0, i] + _B53 * k[2, i] + _B54 * k[3, i]
                            + _B55 * k[4, i] + _B56 * k[5, i])
        y4[i] = y[i] + h * (_B41 * k[0, i] + _B43 * k[2, i] + _B44 * k[3, i]
                            + _B45 * k[4, i])


@njit(cache=True)
def _scaled_error(y, y4, y5, rel_tol, abs_tol):
    n = y.shape[0]
    acc = 0.0
    for i in range(n):
        ay = abs(y[i])
        ay5 = abs(y5[i])
        scale = abs_tol + rel_tol * (ay if ay > ay5 else ay5)
        e = (y5[i] - y4[i]) / scale
        acc += e * e
    return np.sqrt(acc / n)


@njit(cache=True)
def _crossed(prev, curr, direction):
    if direction <= 0 and prev > 0.0 and curr <= 0.0:
        return True
    if direction >= 0 and prev < 0.0 and curr >= 0.0:
        return True
    return False


# no disk cache, same reason as _fehlberg_step
@njit(cache=False)
def _rkf45_loop(stepper, rhs, event_fn, y0, t0, t1, params,
                rel_tol, abs_tol, h_init, h_min, h_max, max_steps, time_tol,
                n_events, directions, track_idx, store):
    """Shared integration loop.

    stepper is the embedded-pair step kernel, passed in so the compiled
    and interpreted flavors of this loop each get a matching one.
    rhs(t, y, params, out) writes the derivative; event_fn(t, y, params, out)
    writes n_events event values. Returns status 0..3 (horizon, event,
    step failure, max_steps), endpoint, event data, step counts, stored
    samples, and the running minimum of component track_idx.
    """
    n = y0.shape[0]
    y = y0.copy()
    t = t0
    k = np.empty((6, n))
    y4 = np.empty(n)
    y5 = np.empty(n)
    y_try = np.empty(n)
    work = np.empty(n)
    ev_prev = np.empty(max(n_events, 1))
    ev_curr = np.empty(max(n_events, 1))
    ev_try = np.empty(max(n_events, 1))
    if n_events > 0:
        event_fn(t, y, params, ev_prev)

    cap = 1024 if store else 1
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t
    ys[0] = y
    n_stored = 1

    min_val = y[track_idx] if track_idx >= 0 else 0.0
    min_t = t

    status = 0
    ev_index = -1
    ev_time = t1
    n_acc = 0
    n_rej = 0
    h = h_init

    while t < t1:
        if n_acc + n_rej >= max_steps:
            status = 3
            break
        clipped = False
        if t + h >= t1:
            h = t1 - t
            clipped = True
        stepper(rhs, t, y, h, params, k, y4, y5, work)
        finite = True
        for i in range(n):
            if not np.isfinite(y5[i]):
                finite = False
                break
        if finite:
            err = _scaled_error(y, y4, y5, rel_tol, abs_tol)
        else:
            err = np.inf
        if np.isnan(err):
            err = np.inf

        if err <= 1.0:
            t_new = t1 if clipped else t + h
            hit = False
            if n_events > 0:
                event_fn(t_new, y5, params, ev_curr)
                best_s = h
                best_i = -1
                for ie in range(n_events):
                    if _crossed(ev_prev[ie], ev_curr[ie], directions[ie]):
                        lo = 0.0
                        hi = h
                        while hi - lo > time_tol:
                            mid = 0.5 * (lo + hi)
                            stepper(rhs, t, y, mid, params,
                                    k, y4, y_try, work)
                            event_fn(t + mid, y_try, params, ev_try)
                            if _crossed(ev_prev[ie], ev_try[ie],
                                        directions[ie]):
                                hi = mid
                            else:
                                lo = mid
                        if hi < best_s:
                            best_s = hi
                            best_i = ie
                if best_i >= 0:
                    hit = True
                    stepper(rhs, t, y, best_s, params,
                            k, y4, y5, work)
                    t_new = t + best_s
                    ev_index = best_i
                    ev_time = t_new
            for i in range(n):
                y[i] = y5[i]
            t = t_new
            n_acc += 1
            if track_idx >= 0 and y[track_idx] < min_val:
                min_val = y[track_idx]
                min_t = t
            if store or hit or t >= t1:
                if n_stored == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    ts2[:n_stored] = ts[:n_stored]
                    ys2[:n_stored] = ys[:n_stored]
                    ts = ts2
                    ys = ys2
                ts[n_stored] = t
                ys[n_stored] = y
                n_stored += 1
            if hit:
                status = 1
                break
            if n_events > 0:
                event_fn(t, y, params, ev_prev)
            fac = 5.0 if err == 0.0 else 0.9 * err ** -0.2
            if fac > 5.0:
                fac = 5.0
            h = h * fac
            if h > h_max:
                h = h_max
        else:
            fac = 0.5 if err == np.inf else 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h = h * fac
            n_rej += 1
            if h < h_min:
                status = 2
                break

    if status == 2 or status == 3:
        # endpoint of a failed run is the last accepted state
        if not store:
            ts[n_stored - 1] = t
            ys[n_stored - 1] = y
        elif ts[n_stored - 1] != t:
            if n_stored == cap:
                cap += 1
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, n))
                ts2[:n_stored] = ts[:n_stored]
                ys2[:n_stored] = ys[:n_stored]
                ts = ts2
                ys = ys2
            ts[n_stored] = t
            ys[n_stored] = y
            n_stored += 1
    elif not store and ts[n_stored - 1] != t:
        ts[n_stored - 1] = t
        ys[n_stored - 1] = y

    return (status, t, y, ev_index, ev_time,
            n_acc, n_rej, ts[:n_stored], ys[:n_stored], min_val, min_t)


_rkf45_py = python_twin(_rkf45_loop)
_fehlberg_py = python_twin(_fehlberg_step)
_EMPTY = np.empty(0)


@njit(cache=True)
def _no_event(t, y, params, out):
    pass


def _wrap_rhs(fn):
    def inplace(t, y, params, out):
        out[:] = fn(t, y)

    return inplace


def _wrap_events(events: Sequence[EventSpec]):
    fns = [e.event_fn for e in events]

    def vector_event(t, y, params, out):
        for i, f in enumerate(fns):
            out[i] = f(t, y)

    return vector_event


def step(system: OdeSystem, t: float, y, h: float,
         control: StepControl = StepControl()):
    """One embedded Fehlberg step: (y4, y5, scaled error estimate)."""
    if h <= 0:
        raise ValueError("h must be positive")
    y = np.asarray(y, dtype=float)
    if y.shape != (system.dimension,):
        raise ValueError("state dimension mismatch")
    n = y.shape[0]
    k = np.empty((6, n))
    y4 = np.empty(n)
    y5 = np.empty(n)
    work = np.empty(n)
    _fehlberg_py(_wrap_rhs(system.rhs), t, y, h, _EMPTY, k, y4, y5, work)
    err = python_twin(_scaled_error)(y, y4, y5,
                                     control.rel_tol, control.abs_tol)
    return y4, y5, float(err)


def integrate(system: OdeSystem, y0, t_span,
              control: StepControl = StepControl(),
              events: Sequence[EventSpec] = ()) -> Trajectory:
    """Integrate system.rhs over t_span, stopping at the first event zero."""
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t0 < t1:
        raise ValueError("t_span must satisfy t0 < t1")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (system.dimension,):
        raise ValueError("state dimension mismatch")
    directions = np.array([_DIR_CODES[e.direction] for e in events],
                          dtype=np.int64)
    time_tol = min((e.time_tol for e in events), default=1e-9)
    ev = _wrap_events(events) if events else (lambda t, y, p, out: None)
    res = _rkf45_py(_fehlberg_py, _wrap_rhs(system.rhs), ev, y0, t0, t1,
                    _EMPTY, control.rel_tol, control.abs_tol, control.h_init,
                    control.h_min, control.h_max, control.max_steps,
                    time_tol, len(events), directions, -1, True)
    return _pack(res)


def integrate_compiled(rhs, y0, t_span, params,
                       control: StepControl = StepControl(),
                       event_fn=None, n_events: int = 0, directions=None,
                       time_tol: float = 1e-9, track_idx: int = -1,
                       store: bool = False):
    """Run the same loop on numba-compiled kernels.

    rhs(t, y, params, out) and event_fn(t, y, params, out) must both be
    compiled (or both plain Python, which falls back to the interpreted
    twin). Returns the raw loop tuple; `pack_trajectory` builds the
    public Trajectory from it.
    """
    y0 = np.asarray(y0, dtype=float)
    params = np.asarray(params, dtype=float)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if directions is None:
        directions = np.zeros(max(n_events, 1), dtype=np.int64)
    if event_fn is None:
        event_fn = _no_event
        n_events = 0
    compiled = is_compiled(rhs) and is_compiled(event_fn)
    loop = _rkf45_loop if compiled else _rkf45_py
    stepper = _fehlberg_step if compiled else _fehlberg_py
    rhs_c = rhs if is_compiled(rhs) else python_twin(rhs)
    ev_c = event_fn if is_compiled(event_fn) else python_twin(event_fn)
    return loop(stepper, rhs_c, ev_c, y0, t0, t1, params,
                control.rel_tol, control.abs_tol, control.h_init,
                control.h_min, control.h_max, control.max_steps,
                time_tol, n_events, directions, track_idx, store)


def pack_trajectory(raw) -> Trajectory:
    return _pack(raw)


def _pack(raw) -> Trajectory:
    (status, t, y, ev_index, ev_time, n_acc, n_rej, ts, ys,
     _min_val, _min_t) = raw
    fired = status == 1
    return Trajectory(
        times=np.asarray(ts),
        states=np.asarray(ys),
        terminal_status=_STATUS_NAMES[status],
        event_index=int(ev_index) if fired else None,
        event_time=float(ev_time) if fired else None,
        event_state=np.asarray(y).copy() if fired else None,
        n_accepted=int(n_acc),
        n_rejected=int(n_rej),
    )
