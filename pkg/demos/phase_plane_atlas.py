"""Equilibria and conserved structure of the phase system.

The reduced dynamics live in the (F, G) plane. Without friction the
origin is a center and every subcritical orbit closes along a level set
of the invariant Phi; with friction the origin becomes a sink and Phi
turns into a Lyapunov function, strictly decreasing wherever F != 0.
Beyond a threshold friction a saddle and an extra node are born on the
supercritical side.
"""
import math

import numpy as np

import coldplasma as cp

D = 2

print(f"equilibria at d = {D}:")
for nu in (0.0, 1.0, math.sqrt(2.0), 1.5, 2.0, 3.0):
    eqs = cp.classify_equilibria(cp.ModelParams(D, nu))
    kinds = ", ".join(f"({e.F:+.3f}, {e.G:+.3f}) {e.kind}" for e in eqs)
    print(f"  nu = {nu:<6.4g} {kinds}")

geo = cp.phase_curve_geometry(0.0, 0.2, cp.ModelParams(D, 0.0))
print(f"\nlevel curve through (0, 0.2): G in [{geo.g_minus:.4f}, "
      f"{geo.g_plus:.4f}], max |F| = {geo.f_plus:.4f}")
print(f"integrating-factor bounds m- = {geo.m_minus:.4f}, "
      f"m+ = {geo.m_plus:.4f}, oscillator bound J+ = {geo.j_plus:.4f}")


def orbit(nu, t_end=40.0):
    params = cp.ModelParams(D, nu)
    system = cp.OdeSystem(2, lambda t, y: np.asarray(cp.rhs_phase(y[0], y[1],
                                                                  params)))
    return cp.integrate(system, [0.0, 0.2], (0.0, t_end))


for nu in (0.0, 0.3):
    run = orbit(nu)
    phi = np.array([cp.phase_invariant(F, G, D) for F, G in run.states])
    drift = np.max(np.abs(phi - phi[0]))
    worst_rise = np.max(np.diff(phi), initial=0.0)
    print(f"\nnu = {nu}: Phi drift {drift:.2e} over t <= 40, "
          f"largest single-step rise {worst_rise:.2e}")
    if nu > 0.0:
        # the decay rate vanishes where F does, so quote it at the
        # orbit point of fastest descent instead of the initial one
        k = int(np.argmax(np.abs(run.states[:, 0])))
        rate = cp.lyapunov_rate(run.states[k, 0], run.states[k, 1],
                                cp.ModelParams(D, nu))
        print(f"  Phi dropped {phi[0] - phi[-1]:.4f}; steepest descent "
              f"rate {rate:.4f} at (F, G) = ({run.states[k, 0]:+.3f}, "
              f"{run.states[k, 1]:+.3f})")
