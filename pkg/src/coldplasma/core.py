"""Phase-plane dynamics of radial cold-plasma oscillations.

The model is the damped planar system

    dF/dt = -F^2 - G - nu*F,    dG/dt = F - d*F*G,

together with the companion quantities integrated along a characteristic:
the accumulated velocity slope calF = int F dt, the oscillator pair (H, Z)
with Hdot = Z, Zdot = -J(F,G)*H, and the positivity witness Q with
Qdot = H * exp(-nu*t/2 - (d+2)*calF/2). Derivatives of the solution stay
bounded exactly while Q > 0, so the first zero of Q is the blow-up time.

For nu = 0 the phase system has a first integral Phi whose level sets are
closed curves; their axis crossings G-, G+ and the derived bounds M-, M+,
F+, J+ feed the analytic smoothness/blow-up functionals in `criteria`.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from ._compat import njit

ESCAPE_THRESHOLD = 1e6

CENTER = "center"
STABLE_FOCUS = "stable_focus"
STABLE_NODE = "stable_node"
STABLE_DEGENERATE_NODE = "stable_degenerate_node"
SADDLE = "saddle"
UNSTABLE_NODE = "unstable_node"
SADDLE_NODE = "saddle_node"


@dataclass(frozen=True)
class ModelParams:
    """Spatial dimension d and collision frequency nu."""

    d: int
    nu: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError("d must be an integer >= 1")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError("nu must be finite and >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([float(self.d), self.nu])


class CharacteristicState(NamedTuple):
    F: float
    G: float
    calF: float
    H: float
    Z: float
    Q: float


@dataclass(frozen=True)
class Equilibrium:
    F: float
    G: float
    kind: str


@dataclass(frozen=True)
class PhaseCurveGeometry:
    """Level-set data of Phi through one phase point."""

    c_d: float
    g_minus: float
    g_plus: float
    f_plus: float
    m_minus: float
    m_plus: float
    j_plus: float


@njit(cache=True)
def _rhs_phase(t, y, p, out):
    d, nu = p[0], p[1]
    F, G = y[0], y[1]
    out[0] = -F * F - G - nu * F
    out[1] = F - d * F * G


@njit(cache=True)
def _rhs_characteristic(t, y, p, out):
    d, nu = p[0], p[1]
    F, G, calF, H, Z, Q = y[0], y[1], y[2], y[3], y[4], y[5]
    J = (1.0 - 0.25 * nu * nu - 0.25 * (d - 2.0) * (d - 4.0) * F * F
         + (d - 2.0) * nu * F - 0.5 * (d + 2.0) * G)
    out[0] = -F * F - G - nu * F
    out[1] = F - d * F * G
    out[2] = F
    out[3] = Z
    out[4] = -J * H
    out[5] = H * np.exp(-0.5 * nu * t - 0.5 * (d + 2.0) * calF)


@njit(cache=True)
def _rhs_riccati(t, y, p, out):
    d, nu = p[0], p[1]
    F, G, u, v = y[0], y[1], y[2], y[3]
    out[0] = -F * F - G - nu * F
    out[1] = F - d * F * G
    out[2] = -u * u - 2.0 * u * F - v - nu * u
    out[3] = -u * v + (1.0 - d * G) * u - d * F * v


@njit(cache=True)
def _rhs_dlam(t, y, p, out):
    d, nu = p[0], p[1]
    F, G, D, lam = y[0], y[1], y[2], y[3]
    out[0] = -F * F - G - nu * F
    out[1] = F - d * F * G
    out[2] = (-D * D + 2.0 * (d - 1.0) * F * D - d * (d - 1.0) * F * F
              - lam - nu * D)
    out[3] = D * (1.0 - lam)


@njit(cache=True)
def _event_q_zero(t, y, p, out):
    out[0] = y[5]


@njit(cache=True)
def _event_escape(t, y, p, out):
    # fires (decreasing) when either phase component reaches 1e6
    m = abs(y[0])
    if abs(y[1]) > m:
        m = abs(y[1])
    out[0] = ESCAPE_THRESHOLD - m


@njit(cache=True)
def _event_q_escape(t, y, p, out):
    out[0] = y[5]
    m = abs(y[0])
    if abs(y[1]) > m:
        m = abs(y[1])
    out[1] = ESCAPE_THRESHOLD - m


def rhs_phase(F: float, G: float, params: ModelParams):
    """Right-hand side (dF, dG) of the damped phase system."""
    return (-F * F - G - params.nu * F, F - params.d * F * G)


def j_coefficient(F: float, G: float, params: ModelParams) -> float:
    """Coefficient J in the oscillator equation Hddot + J*H = 0."""
    d, nu = params.d, params.nu
    return (1.0 - 0.25 * nu * nu - 0.25 * (d - 2) * (d - 4) * F * F
            + (d - 2) * nu * F - 0.5 * (d + 2) * G)


def phase_invariant(F: float, G: float, d: int) -> float:
    """First integral Phi of the frictionless phase system.

    Defined on the subcritical half-plane G < 1/d; constant along nu = 0
    trajectories and non-increasing along damped ones.
    """
    # python floats so extreme level sets raise OverflowError, not a
    # numpy warning with a silent inf
    F, G = float(F), float(G)
    w = 1.0 - d * G
    if w <= 0.0:
        raise ValueError(f"phase invariant undefined for G >= 1/d (G={G})")
    if d == 2:
        return (2.0 * F * F + math.log(w) * w + 1.0) / (2.0 * w)
    return ((d - 2) * F * F - 2.0 * G + 1.0) / ((d - 2) * w ** (2.0 / d))


def lyapunov_rate(F: float, G: float, params: ModelParams) -> float:
    """Time derivative of Phi along damped trajectories; always <= 0."""
    w = 1.0 - params.d * G
    if w <= 0.0:
        raise ValueError(f"lyapunov rate undefined for G >= 1/d (G={G})")
    return -2.0 * params.nu * F * F / w ** (2.0 / params.d)


def classify_equilibria(params: ModelParams):
    """All equilibria of the phase system with their linearized kinds."""
    d, nu = params.d, params.nu
    if nu == 0.0:
        origin_kind = CENTER
    elif nu < 2.0:
        origin_kind = STABLE_FOCUS
    elif nu == 2.0:
        origin_kind = STABLE_DEGENERATE_NODE
    else:
        origin_kind = STABLE_NODE
    found = [Equilibrium(0.0, 0.0, origin_kind)]

    # discriminant test with relative slack: nu = 2/sqrt(d) entered through
    # sqrt arithmetic should still land on the degenerate branch
    disc = nu * nu - 4.0 / d
    if abs(disc) <= 1e-12 * max(nu * nu, 4.0 / d):
        found.append(Equilibrium(-nu / 2.0, 1.0 / d, SADDLE_NODE))
    elif disc > 0.0:
        h = math.sqrt(disc)
        found.append(Equilibrium(-(nu - h) / 2.0, 1.0 / d, SADDLE))
        found.append(Equilibrium(-(nu + h) / 2.0, 1.0 / d, UNSTABLE_NODE))
    return found


def _phi_axis(G: float, d: int) -> float:
    return phase_invariant(0.0, G, d)


def _bisect_axis(lo: float, hi: float, c_d: float, d: int,
                 tol: float = 1e-10) -> float:
    flo = _phi_axis(lo, d) - c_d
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _phi_axis(mid, d) - c_d
        if (flo <= 0.0) == (fm <= 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _f_squared_on_curve(G: float, c_d: float, d: int) -> float:
    w = 1.0 - d * G
    if d == 2:
        return c_d * w - 0.5 * (math.log(w) * w + 1.0)
    return (c_d * (d - 2) * w ** (2.0 / d) + 2.0 * G - 1.0) / (d - 2)


def _f_plus_by_maximization(c_d: float, g_minus: float, g_plus: float,
                            d: int) -> float:
    if g_plus - g_minus < 1e-14:
        return 0.0
    # near-critical curves reach F^2 ~ 1e200; the maximizer's internal
    # arithmetic then overflows harmlessly
    with np.errstate(over="ignore", invalid="ignore"):
        res = minimize_scalar(lambda G: -_f_squared_on_curve(G, c_d, d),
                              bounds=(g_minus, g_plus), method="bounded",
                              options={"xatol": 1e-12})
    return math.sqrt(max(0.0, -res.fun))


def phase_curve_geometry(F0: float, G0: float, params: ModelParams,
                         fp_form: str = "sqrt") -> PhaseCurveGeometry:
    """Level-set constants of the curve Phi = Phi(G0, F0).

    g_minus and g_plus are the axis crossings found by bracketed bisection;
    m_minus/m_plus bound the integrating factor S(t) along any trajectory
    that starts on or inside the curve; f_plus estimates max |F|; j_plus
    bounds the oscillator coefficient J.

    fp_form selects the f_plus reading for d > 2: "sqrt" (default) takes
    the square root of the extremum expression, "literal" stores the raw
    expression itself.
    """
    d, nu = params.d, params.nu
    if fp_form not in ("sqrt", "literal"):
        raise ValueError(f"unknown fp_form {fp_form!r}")
    w0 = 1.0 - d * G0
    if w0 <= 0.0:
        raise ValueError("geometry requires G0 < 1/d")
    c_d = phase_invariant(F0, G0, d)

    if F0 == 0.0 and G0 == 0.0:
        return PhaseCurveGeometry(c_d, 0.0, 0.0, 0.0, 1.0, 1.0,
                                  1.0 - 0.25 * nu * nu)

    # right crossing: the initial point itself when it sits on the axis
    if F0 == 0.0 and G0 > 0.0:
        g_plus = G0
    else:
        eps = 0.5 / d
        hi = 1.0 / d - eps
        while _phi_axis(hi, d) - c_d < 0.0:
            eps *= 0.5
            hi = 1.0 / d - eps
            if eps < 1e-300:
                raise ValueError("no sign change found for g_plus")
        lo = 0.0
        g_plus = _bisect_axis(lo, hi, c_d, d) if hi > 0.0 else 0.0

    if F0 == 0.0 and G0 < 0.0:
        g_minus = G0
    else:
        lo = -abs(G0) - 0.1
        width = 0.2
        while True:
            try:
                crossed = _phi_axis(lo, d) - c_d >= 0.0
            except OverflowError:
                # axis value still below c_d at the edge of float range:
                # the level set never returns to the F = 0 axis
                raise ValueError("no sign change found for g_minus") from None
            if crossed:
                break
            width *= 2.0
            lo -= width
            if width > 1e300:
                raise ValueError("no sign change found for g_minus")
        g_minus = _bisect_axis(lo, 0.0, c_d, d)

    m_plus = ((1.0 - d * g_minus) / w0) ** ((d + 2.0) / (2.0 * d))
    m_minus = ((1.0 - d * g_plus) / w0) ** ((d + 2.0) / (2.0 * d))

    if d > 2:
        expr = (((d - 2) * c_d) ** ((d - 2.0) / d) - 1.0) / d
        if fp_form == "sqrt":
            f_plus = math.sqrt(max(0.0, expr))
        else:
            f_plus = expr
    else:
        f_plus = _f_plus_by_maximization(c_d, g_minus, g_plus, d)

    delta = 1.0 if d == 3 else 0.0
    j_plus = (1.0 - 0.25 * nu * nu - 0.5 * (d + 2) * g_minus
              + nu * (d - 2) * f_plus
              + (1.0 - delta) * 0.5 * (d - 2) * (d - 4) * f_plus ** 2)
    return PhaseCurveGeometry(c_d, g_minus, g_plus, f_plus,
                              m_minus, m_plus, j_plus)
