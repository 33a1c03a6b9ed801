"""Whole-solution analysis over radius grids.

A radial solution stays smooth only if every characteristic does, so the
questions "does this pulse blow up" and "which damping prevents it" reduce
to sweeping r over a grid, finding the worst characteristic, and bisecting
on nu or on the pulse amplitude over the resulting blow-up predicate.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import ModelParams
from .criteria import (
    BLOWUP,
    INCONCLUSIVE,
    Q_MARGIN,
    SMOOTH_CERTIFIED,
    SMOOTH_TO_HORIZON,
    SUPERCRITICAL_ESCAPE,
    default_horizon,
    simulate_characteristic,
)
from .integrator import StepControl
from .pulses import GaussianPulse

ALL_SMOOTH = "all_smooth"
GRID_BLOWUP = "blowup"

EQUILIBRIUM_FLOOR = 1e-14

_DEFAULT_NU_BRACKET = (0.05, 2.0)
_NU_CAP = 64.0
_DEFAULT_SCHEDULE = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class RGrid:
    """Uniform radius grid [r_min, r_max] with spacing step."""

    r_min: float = 0.001
    r_max: float = 3.0
    step: float = 0.005

    def __post_init__(self):
        for name in ("r_min", "r_max", "step"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.r_min < 0.0:
            raise ValueError("r_min must be >= 0")
        if not self.r_min < self.r_max:
            raise ValueError("r_min must be < r_max")
        if self.step <= 0.0:
            raise ValueError("step must be > 0")
        if (self.r_max - self.r_min) / self.step > 1e6:
            raise ValueError("grid would exceed 1e6 points")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.r_max - self.r_min) / self.step + 1e-9)) + 1
        return self.r_min + self.step * np.arange(n)

    def __len__(self) -> int:
        return len(self.values())


@dataclass(frozen=True)
class RadiusOutcome:
    """One grid row: where Q bottomed out, or when it hit zero."""

    r: float
    status: str
    q_min: float
    t_at_qmin: float
    t_blowup: Optional[float]
    # endpoint phase amplitude no larger than the initial one; None when
    # the row was certified or blew up and the check is moot
    envelope_decayed: Optional[bool] = None


@dataclass(frozen=True)
class SweepResult:
    per_r: Tuple[RadiusOutcome, ...]
    worst_r: float
    global_verdict: str
    t_star: Optional[float] = None
    inconclusive_r: Tuple[float, ...] = ()

    @property
    def all_smooth(self) -> bool:
        return self.global_verdict == ALL_SMOOTH

    @property
    def blew_up(self) -> bool:
        return self.global_verdict == GRID_BLOWUP


@dataclass(frozen=True)
class CriticalSearch:
    """Completed bisection: final bracket, answer, and every probe taken."""

    target: str
    bracket: Tuple[float, float]
    tol: float
    result: float
    bracket_history: Tuple[Tuple[float, bool], ...]


@dataclass(frozen=True)
class Theorem3Scan:
    """First damping in an increasing schedule that keeps the grid smooth."""

    nu: Optional[float]
    entries: Tuple[Tuple[float, str], ...]

    @property
    def satisfied(self) -> bool:
        return self.nu is not None


def _summarize(profile, r: float, verdict) -> RadiusOutcome:
    env = None
    if verdict.status == SMOOTH_TO_HORIZON:
        F0, G0, _, _ = profile.evaluate(r)
        end = math.hypot(verdict.final_state.F, verdict.final_state.G)
        env = bool(end <= math.hypot(F0, G0) + 1e-12)
    t_star = verdict.t_star if verdict.blew_up else None
    return RadiusOutcome(float(r), verdict.status, verdict.q_min,
                         verdict.t_at_qmin, t_star, env)


def _row_worker(payload):
    profile, r, params, horizon, control, h1_form = payload
    _, verdict = simulate_characteristic(profile, r, params, horizon=horizon,
                                         control=control, h1_form=h1_form)
    return _summarize(profile, r, verdict)


def _aggregate(rows) -> SweepResult:
    inconclusive = tuple(row.r for row in rows if row.status == INCONCLUSIVE)
    for r in inconclusive:
        warnings.warn(f"characteristic at r={r:.6g} was inconclusive; "
                      "excluded from the smooth/blow-up dichotomy",
                      stacklevel=3)
    blown = [row for row in rows if row.status in (BLOWUP, SUPERCRITICAL_ESCAPE)]
    if blown:
        first = min(blown, key=lambda row: row.t_blowup)
        return SweepResult(tuple(rows), first.r, GRID_BLOWUP,
                           t_star=first.t_blowup, inconclusive_r=inconclusive)
    smooth = [row for row in rows
              if row.status in (SMOOTH_CERTIFIED, SMOOTH_TO_HORIZON)]
    if not smooth:
        raise RuntimeError("every grid point came back inconclusive; "
                           "nothing to aggregate")
    worst = min(smooth, key=lambda row: row.q_min)
    return SweepResult(tuple(rows), worst.r, ALL_SMOOTH,
                       inconclusive_r=inconclusive)


def sweep_r(profile, grid: RGrid, params: ModelParams,
            horizon: Optional[float] = None,
            control: StepControl = StepControl(),
            h1_form: str = "h0eq", threads: int = 1) -> SweepResult:
    """Simulate every characteristic on the grid and aggregate.

    The worst radius is the one with the minimal q_min, or the earliest
    blow-up time if any row blew up. Aggregation is by grid index, so
    serial and parallel runs produce identical results.
    """
    profile.check_params(params)
    if horizon is None:
        horizon = default_horizon(params.nu)
    values = grid.values()
    payloads = [(profile, float(r), params, horizon, control, h1_form)
                for r in values]
    if threads > 1:
        chunk = max(1, len(payloads) // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row_worker, payloads, chunksize=chunk))
    else:
        rows = [_row_worker(p) for p in payloads]
    return _aggregate(rows)


def _row_confidently_smooth(row: RadiusOutcome) -> bool:
    if row.status == SMOOTH_CERTIFIED:
        return True
    if row.status == SMOOTH_TO_HORIZON:
        return row.q_min > Q_MARGIN and bool(row.envelope_decayed)
    return False


def _grid_blows_up(profile, grid: RGrid, params: ModelParams,
                   horizon: Optional[float], control: StepControl,
                   h1_form: str, threads: int) -> bool:
    """Bisection predicate: blow-up somewhere on the grid within horizon.

    A row that merely survives to the horizon counts as smooth only with
    q_min above the margin and a decayed phase envelope; anything weaker
    lands on the blow-up side, which biases critical nu up and critical a
    down, the conservative direction for "sufficient to prevent".
    An inconclusive row cannot be classified at all and raises.
    """
    if threads > 1:
        result = sweep_r(profile, grid, params, horizon=horizon,
                         control=control, h1_form=h1_form, threads=threads)
        if result.inconclusive_r:
            raise RuntimeError("inconclusive characteristics at r="
                               f"{list(result.inconclusive_r)}; cannot drive "
                               "the bisection predicate")
        if result.blew_up:
            return True
        return not all(_row_confidently_smooth(row) for row in result.per_r)
    profile.check_params(params)
    if horizon is None:
        horizon = default_horizon(params.nu)
    for r in grid.values():
        _, verdict = simulate_characteristic(profile, float(r), params,
                                             horizon=horizon, control=control,
                                             h1_form=h1_form)
        if verdict.status == INCONCLUSIVE:
            raise RuntimeError(f"inconclusive characteristic at r={r:.6g} "
                               f"({verdict.reason}); cannot drive the "
                               "bisection predicate")
        if verdict.blew_up:
            return True
        row = _summarize(profile, float(r), verdict)
        if not _row_confidently_smooth(row):
            return True
    return False


def _audit_monotone(history, blows_low: bool) -> None:
    """All blow-up probes must sit on one side of all smooth probes."""
    blow = [p for p, b in history if b]
    calm = [p for p, b in history if not b]
    if not blow or not calm:
        return
    bad = (max(blow) > min(calm)) if blows_low else (min(blow) < max(calm))
    if bad:
        trace = ", ".join(f"({p:.6g}, {'blow' if b else 'smooth'})"
                          for p, b in history)
        raise RuntimeError("non-monotone blow-up predicate along the "
                           f"bisection: {trace}")


def critical_nu(profile, d: int, grid: Optional[RGrid] = None,
                bracket: Tuple[float, float] = _DEFAULT_NU_BRACKET,
                tol: float = 1e-3, horizon: Optional[float] = None,
                control: StepControl = StepControl(),
                h1_form: str = "h0eq", threads: int = 1) -> CriticalSearch:
    """Smallest damping that prevents blow-up for a fixed pulse.

    The bracket must blow up at its low end; if the high end also blows
    up it is doubled up to a cap before giving up. Returns the bracket
    midpoint once the width drops below tol.
    """
    if grid is None:
        grid = RGrid()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi:
        raise ValueError("need 0 < bracket.lo < bracket.hi")
    history = []

    def blows(nu: float) -> bool:
        b = _grid_blows_up(profile, grid, ModelParams(d, nu), horizon,
                           control, h1_form, threads)
        history.append((nu, b))
        return b

    if not blows(lo):
        raise RuntimeError(f"no blow-up at bracket.lo={lo:g}; the critical "
                           "damping lies below the bracket")
    while blows(hi):
        if hi >= _NU_CAP:
            trace = ", ".join(f"({p:.6g}, {'blow' if b else 'smooth'})"
                              for p, b in history)
            raise RuntimeError("blow-up persists up to the nu cap "
                               f"{_NU_CAP:g}; probes: {trace}")
        hi = min(2.0 * hi, _NU_CAP)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if blows(mid):
            lo = mid
        else:
            hi = mid
    _audit_monotone(history, blows_low=True)
    return CriticalSearch("critical_nu", (lo, hi), tol, 0.5 * (lo + hi),
                          tuple(history))


def critical_a(d: int, nu: float, grid: Optional[RGrid] = None,
               bracket: Optional[Tuple[float, float]] = None,
               tol: float = 5e-4, horizon: Optional[float] = None,
               control: StepControl = StepControl(),
               h1_form: str = "h0eq", threads: int = 1) -> CriticalSearch:
    """Largest gaussian amplitude that stays smooth at fixed damping.

    Amplitudes are confined to (0, 1/d), where the pulse is subcritical.
    The bracket must be smooth at its low end and blow up at its high
    end. Returns the low end once the width drops below tol, i.e. the
    largest amplitude verified smooth.
    """
    if grid is None:
        grid = RGrid()
    cap = 1.0 / d
    if bracket is None:
        bracket = (0.1 * cap, 0.99 * cap)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi < cap:
        raise ValueError(f"need 0 < bracket.lo < bracket.hi < 1/d = {cap:g}")
    params = ModelParams(d, nu)
    history = []

    def blows(a: float) -> bool:
        b = _grid_blows_up(GaussianPulse(a), grid, params, horizon,
                           control, h1_form, threads)
        history.append((a, b))
        return b

    if blows(lo):
        raise RuntimeError(f"blow-up already at bracket.lo={lo:g}; the "
                           "critical amplitude lies below the bracket")
    if not blows(hi):
        trace = ", ".join(f"({p:.6g}, {'blow' if b else 'smooth'})"
                          for p, b in history)
        raise RuntimeError(f"no blow-up at bracket.hi={hi:g}; probes: {trace}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if blows(mid):
            hi = mid
        else:
            lo = mid
    _audit_monotone(history, blows_low=False)
    return CriticalSearch("critical_a", (lo, hi), tol, lo, tuple(history))


def decay_rate(trajectory, window_fraction: float = 0.5) -> float:
    """Fitted decay rate of the phase amplitude over the trailing window.

    Least-squares slope of log ||(F, G)|| against t over the trailing
    window_fraction of the trajectory, sign-flipped so decay is positive.
    Samples already at equilibrium (norm below 1e-14) are dropped from
    the fit; if none remain the trajectory is flat and the rate is the
    +inf sentinel.
    """
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    t = np.asarray(trajectory.times, dtype=float)
    states = np.asarray(trajectory.states, dtype=float)
    norm = np.hypot(states[:, 0], states[:, 1])
    window = t >= t[-1] - window_fraction * (t[-1] - t[0])
    if int(np.count_nonzero(window)) < 20:
        raise ValueError("need at least 20 samples in the fitting window")
    live = window & (norm > EQUILIBRIUM_FLOOR)
    if not live.any():
        return math.inf
    slope = np.polyfit(t[live], np.log(norm[live]), 1)[0]
    return float(-slope)


def verify_theorem_3(profile, d: int, grid: Optional[RGrid] = None,
                     nu_schedule: Optional[Sequence[float]] = None,
                     horizon: Optional[float] = None,
                     control: StepControl = StepControl(),
                     h1_form: str = "h0eq", threads: int = 1) -> Theorem3Scan:
    """Scan an increasing damping schedule for the first all-smooth entry.

    Large enough damping always wins eventually; a schedule that tops out
    without an all-smooth entry is reported as a finding (nu=None), not
    raised as an error.
    """
    if grid is None:
        grid = RGrid()
    if nu_schedule is None:
        nu_schedule = _DEFAULT_SCHEDULE
    schedule = [float(nu) for nu in nu_schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("nu_schedule must be strictly increasing")
    if any(nu <= 0.0 for nu in schedule):
        raise ValueError("nu_schedule entries must be positive")
    entries = []
    for nu in schedule:
        result = sweep_r(profile, grid, ModelParams(d, nu), horizon=horizon,
                         control=control, h1_form=h1_form, threads=threads)
        entries.append((nu, result.global_verdict))
        confident = result.all_smooth and not result.inconclusive_r and all(
            _row_confidently_smooth(row) for row in result.per_r)
        if confident:
            return Theorem3Scan(nu, tuple(entries))
    return Theorem3Scan(None, tuple(entries))
