"""Radial initial-data profiles and the quantities derived from them.

A profile supplies the initial velocity slope F0(r) and field slope G0(r)
along each characteristic, plus the radial-derivative terms

    u0 = r * F0'(r),    v0 = r * G0'(r),

which seed the derivative oscillator: H(0) = u0 and
Hdot(0) = ((d-2)/2 * F0 - nu/2) * u0 - v0.

Two families are provided: the Gaussian pulse G0 = a*exp(-r^2/2) with
F0 = 0, and tabulated profiles interpolated monotonically from a file.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .core import ModelParams


def _monotone_hermite(x, y):
    """Cubic Hermite interpolant with monotonicity-limited derivatives.

    Node derivatives come from an ordinary cubic spline (third-order
    accurate, unlike the harmonic-mean estimate, which carries an O(1)
    relative bias beside critical points of the data) and are then run
    through the Fritsch-Carlson limiter, so the result never overshoots
    monotone data.
    """
    s = np.diff(y) / np.diff(x)
    d = CubicSpline(x, y).derivative()(x)
    n = len(y)
    for i in range(n):
        sl = s[i - 1] if i > 0 else s[0]
        sr = s[i] if i < n - 1 else s[-1]
        if sl * sr <= 0.0 and 0 < i < n - 1:
            d[i] = 0.0
            continue
        ref = sl if sl != 0.0 else sr
        lim = 3.0 * min(abs(sl), abs(sr))
        if d[i] * ref < 0.0:
            d[i] = 0.0
        elif abs(d[i]) > lim:
            d[i] = math.copysign(lim, ref)
    return CubicHermiteSpline(x, y, d)


@dataclass(frozen=True)
class DerivedInitials:
    u0: float
    v0: float
    h0: float
    h1: float


class GaussianPulse:
    """Pulse with E0 = a*x*exp(-|x|^2/2) and zero initial velocity."""

    def __init__(self, a: float):
        if not (math.isfinite(a) and a > 0):
            raise ValueError("gaussian amplitude a must be finite and > 0")
        self.a = float(a)

    def evaluate(self, r: float):
        if r < 0:
            raise ValueError("r must be >= 0")
        g = self.a * math.exp(-0.5 * r * r)
        return 0.0, g, 0.0, -r * r * g

    def check_params(self, params: ModelParams):
        # subcritical initial field everywhere: a < 1/d
        if not self.a < 1.0 / params.d:
            raise ValueError(
                f"gaussian amplitude a={self.a} must be < 1/d = {1.0 / params.d}")

    def __repr__(self):
        return f"GaussianPulse(a={self.a})"


class TabulatedPulse:
    """Profile interpolated from sampled (r, F0, G0) triples.

    Monotone cubic interpolation keeps u0 and v0 free of interpolation
    overshoot near pulse flanks. Radii past the last sample evaluate to
    zero (with a warning); radii below the first sample are an error.
    """

    def __init__(self, r, F0, G0):
        r = np.asarray(r, dtype=float)
        F0 = np.asarray(F0, dtype=float)
        G0 = np.asarray(G0, dtype=float)
        if r.ndim != 1 or r.shape != F0.shape or r.shape != G0.shape:
            raise ValueError("r, F0, G0 must be 1-d arrays of equal length")
        if r.size < 2:
            raise ValueError("need at least two samples")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise ValueError("r must be strictly increasing and >= 0")
        self.r = r
        self._f = _monotone_hermite(r, F0)
        self._g = _monotone_hermite(r, G0)
        self._df = self._f.derivative()
        self._dg = self._g.derivative()

    @classmethod
    def from_file(cls, path):
        """Load `r,F0,G0` rows (or `r,G0`, implying F0 = 0); header required."""
        with open(path) as fh:
            header = fh.readline().strip().lower()
            names = [c.strip() for c in header.replace(",", " ").split()]
            if names not in (["r", "f0", "g0"], ["r", "g0"]):
                raise ValueError(
                    f"expected header 'r,F0,G0' or 'r,G0', got {header!r}")
            rows = [[float(x) for x in line.replace(",", " ").split()]
                    for line in fh if line.strip()]
        data = np.array(rows, dtype=float)
        if data.shape[1] != len(names):
            raise ValueError("row width does not match header")
        if len(names) == 2:
            return cls(data[:, 0], np.zeros(len(data)), data[:, 1])
        return cls(data[:, 0], data[:, 1], data[:, 2])

    def evaluate(self, r: float):
        if r < 0:
            raise ValueError("r must be >= 0")
        if r < self.r[0]:
            raise ValueError(f"r={r} below tabulated range [{self.r[0]}, {self.r[-1]}]")
        if r > self.r[-1]:
            warnings.warn(f"r={r} beyond tabulated range; profile clamped to zero",
                          stacklevel=2)
            return 0.0, 0.0, 0.0, 0.0
        return (float(self._f(r)), float(self._g(r)),
                r * float(self._df(r)), r * float(self._dg(r)))

    def check_params(self, params: ModelParams):
        pass

    def __repr__(self):
        return (f"TabulatedPulse({len(self.r)} samples on "
                f"[{self.r[0]:g}, {self.r[-1]:g}])")


def evaluate(profile, r: float):
    """Profile data (F0, G0, u0, v0) at radius r."""
    return profile.evaluate(r)


def derived_initials(profile, r: float, params: ModelParams,
                     h1_form: str = "h0eq") -> DerivedInitials:
    """Oscillator seeds (u0, v0, h0, h1) at radius r.

    h1_form picks the initial-slope convention: "h0eq" (default) uses
    h1 = ((d-2)/2*F0 - nu/2)*u0 - v0, which reproduces Z(0) = a*r^2*e^{-r^2/2}
    for the gaussian pulse; "theorem2" is the variant without the u0 factor
    on the bracket, kept for comparison.
    """
    profile.check_params(params)
    F0, G0, u0, v0 = profile.evaluate(r)
    bracket = 0.5 * (params.d - 2) * F0 - 0.5 * params.nu
    if h1_form == "h0eq":
        h1 = bracket * u0 - v0
    elif h1_form == "theorem2":
        h1 = bracket - v0
    else:
        raise ValueError(f"unknown h1_form {h1_form!r}")
    return DerivedInitials(u0=u0, v0=v0, h0=u0, h1=h1)


def initial_state(profile, r: float, params: ModelParams,
                  h1_form: str = "h0eq") -> np.ndarray:
    """Characteristic state (F, G, calF, H, Z, Q) at t = 0."""
    profile.check_params(params)
    F0, G0, _, _ = profile.evaluate(r)
    ini = derived_initials(profile, r, params, h1_form)
    return np.array([F0, G0, 0.0, ini.h0, ini.h1, 1.0])


def admissibility_violations(profile, r_values, params: ModelParams):
    """Radii where Div E0 = v0 + d*G0 >= 1, with the offending values.

    An empty list means the data is physically admissible (initial density
    positive) on the given grid.
    """
    bad = []
    for r in r_values:
        _, G0, _, v0 = profile.evaluate(r)
        div = v0 + params.d * G0
        if not div < 1.0:
            bad.append((float(r), float(div)))
    return bad


def load_profile(path):
    return TabulatedPulse.from_file(path)
