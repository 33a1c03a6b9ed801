"""Analytic certificates: smoothness without infinite horizons, blow-up
without waiting for it.

Three functionals of the initial data decide most cases outright.
F1 < 1 certifies global smoothness of a characteristic. F2(T) < 1
certifies smoothness up to a finite T even when F1 fails. F3 >= 1, for
data with the right derivative signs, asserts blow-up no later than
pi / sqrt(J+).

The last section cross-checks a blow-up certificate against the
integrator: the instance must actually blow up, and before its deadline.
"""
import numpy as np

import coldplasma as cp

# a small pulse under solid friction: F1 certifies it globally
params = cp.ModelParams(2, 0.8)
report = cp.theorem_two_report(cp.GaussianPulse(0.05), 1.0, params, T=10.0)
print(f"small pulse: F1 = {report.f1:.4f}  "
      f"({'certified global' if report.f1 < 1 else 'not decisive'})")

# four times the amplitude: F1 fails by a hair, but finite-horizon
# smoothness survives
report = cp.theorem_two_report(cp.GaussianPulse(0.2), 1.0, params, T=1.0)
print(f"larger pulse: F1 = {report.f1:.4f}, F2(T=1) = {report.f2_at_T:.4f}  "
      f"({'smooth on [0, 1]' if report.f2_at_T < 1 else 'not decisive'})")
if report.f3 is None:
    print(f"  F3 not applicable here: {report.f3_reason}")

# inward data with negative derivative seeds: F3 guarantees blow-up by a
# deadline, and the integrator confirms it happens earlier
r = np.linspace(0.5, 1.5, 11)
F0, G0, u0, v0 = (-0.2546561189106591, -0.0688535542086891,
                  -0.7247862162305978, 0.9263309828141075)
profile = cp.TabulatedPulse(r, F0 + u0 * (r - 1.0), G0 + v0 * (r - 1.0))
params = cp.ModelParams(2, 0.13691112589513593)

report = cp.theorem_two_report(profile, 1.0, params, T=1.0)
print(f"\ninward data: F3 = {report.f3:.4f}, "
      f"deadline pi/sqrt(J+) = {report.blowup_deadline:.4f}")

t_star, deadline = cp.verify_theorem_2c(profile, 1.0, params)
print(f"verified: blew up at t* = {t_star:.4f} <= {deadline:.4f}")
