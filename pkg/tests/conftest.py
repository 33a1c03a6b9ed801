"""Shared fixtures and reference integrators for the test suite."""
import numpy as np
import pytest
from scipy.integrate import solve_ivp

import coldplasma as cp

# shared control for oracle comparisons that need both solvers resolving
# the same curve, not just the same qualitative behavior
TIGHT = cp.StepControl(rel_tol=1e-12, abs_tol=1e-14)


def linear_profile(F0, G0, u0, v0, r0=1.0, lo=0.5, hi=1.5, n=11):
    """Tabulated pulse linear in r, so r*F0'(r0) = u0 and r*G0'(r0) = v0
    hold exactly at r0 = 1."""
    r = np.linspace(lo, hi, n)
    return cp.TabulatedPulse(r, F0 + (u0 / r0) * (r - r0),
                             G0 + (v0 / r0) * (r - r0))


def uv_reference(d, nu, y0, t_end):
    """Dense-output reference solution of the direct derivative system."""

    def rhs(t, y):
        F, G, u, v = y
        return [-F * F - G - nu * F, F - d * F * G,
                -u * u - 2.0 * u * F - v - nu * u,
                -u * v + (1.0 - d * G) * u - d * F * v]

    return solve_ivp(rhs, (0.0, t_end), y0, method="DOP853",
                     rtol=1e-13, atol=1e-15, dense_output=True).sol


def dlam_reference(d, nu, y0, t_end):
    """Dense-output reference for the divergence/eigenvalue companion."""

    def rhs(t, y):
        F, G, D, lam = y
        return [-F * F - G - nu * F, F - d * F * G,
                -D * D + 2.0 * (d - 1.0) * F * D - d * (d - 1.0) * F * F
                - lam - nu * D,
                D * (1.0 - lam)]

    return solve_ivp(rhs, (0.0, t_end), y0, method="DOP853",
                     rtol=1e-13, atol=1e-15, dense_output=True).sol


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger jit compilation once so timed tests measure physics only."""
    cp.simulate_characteristic(cp.GaussianPulse(0.1), 0.5,
                               cp.ModelParams(2, 0.5), horizon=1.0)
    return True
