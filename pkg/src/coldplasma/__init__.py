"""Numerical laboratory for collisional cold-plasma oscillations.

Radially symmetric electron oscillations reduce to ODE systems along
characteristics; this package integrates them, decides smoothness versus
finite-time blow-up, and searches for the critical friction and pulse
amplitude separating the two regimes.
"""

from .core import (CharacteristicState, Equilibrium, ModelParams,
                   PhaseCurveGeometry, classify_equilibria, j_coefficient,
                   lyapunov_rate, phase_curve_geometry, phase_invariant,
                   rhs_phase)
from .criteria import (BLOWUP, INCONCLUSIVE, SMOOTH_CERTIFIED,
                       SMOOTH_TO_HORIZON, SUPERCRITICAL_ESCAPE, BlowupVerdict,
                       TheoremTwoReport, certify_tail, default_horizon,
                       linearized_channels, phi_integral,
                       simulate_characteristic, theorem_two_report,
                       verify_theorem_2c)
from .integrator import (EventSpec, OdeSystem, StepControl, Trajectory,
                         integrate, integrate_compiled, pack_trajectory, step)
from .pulses import (DerivedInitials, GaussianPulse, TabulatedPulse,
                     admissibility_violations, derived_initials,
                     initial_state, load_profile)
from .sweep import (CriticalSearch, RGrid, RadiusOutcome, SweepResult,
                    Theorem3Scan, critical_a, critical_nu, decay_rate,
                    sweep_r, verify_theorem_3)

__version__ = "0.1.0"

__all__ = [
    "BLOWUP", "BlowupVerdict", "CharacteristicState", "CriticalSearch",
    "DerivedInitials", "Equilibrium", "EventSpec", "GaussianPulse",
    "INCONCLUSIVE", "ModelParams", "OdeSystem", "PhaseCurveGeometry",
    "RGrid", "RadiusOutcome", "SMOOTH_CERTIFIED", "SMOOTH_TO_HORIZON",
    "SUPERCRITICAL_ESCAPE", "StepControl", "SweepResult", "TabulatedPulse",
    "Theorem3Scan", "TheoremTwoReport", "Trajectory",
    "admissibility_violations", "certify_tail", "classify_equilibria",
    "critical_a", "critical_nu", "decay_rate", "default_horizon",
    "derived_initials", "initial_state", "integrate", "integrate_compiled",
    "j_coefficient", "linearized_channels", "load_profile", "lyapunov_rate",
    "pack_trajectory", "phase_curve_geometry", "phase_invariant",
    "phi_integral", "rhs_phase", "simulate_characteristic", "step",
    "sweep_r", "theorem_two_report", "verify_theorem_2c", "verify_theorem_3",
]
