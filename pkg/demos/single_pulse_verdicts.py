"""Verdicts for single density pulses, radius by radius.

Each radius of a radially symmetric pulse carries its own characteristic
system, so global smoothness is decided pointwise: either the solution
rings down (and the tail can be certified analytically once the remaining
oscillation is small enough), or the deformation gradient Q hits zero in
finite time and the density blows up there.

A modest pulse under real friction certifies everywhere. A near-critical
pulse under weak friction blows up at small radii, where the initial
field gradient is steepest, while the far tail of the same pulse stays
smooth.
"""
import coldplasma as cp

RADII = (0.05, 0.3, 1.0, 2.0)

CASES = (
    ("modest pulse, real friction", cp.GaussianPulse(0.30), cp.ModelParams(2, 0.4)),
    ("near-critical pulse, weak friction", cp.GaussianPulse(0.47), cp.ModelParams(2, 0.02)),
)

for label, pulse, params in CASES:
    print(f"\n{label}  (a={pulse.a}, d={params.d}, nu={params.nu})")
    print(f"  {'r':>5}  {'verdict':<20} detail")
    for r in RADII:
        _, v = cp.simulate_characteristic(pulse, r, params)
        if v.blew_up:
            detail = f"t* = {v.t_star:.4f}, dQ/dt there = {v.q_slope:.3f}" \
                if v.q_slope is not None else f"t* = {v.t_star:.4f}"
        elif v.status == cp.SMOOTH_CERTIFIED:
            detail = (f"min Q = {v.q_min:.3f}, tail bound "
                      f"{v.tail_bound:.2e} at t = {v.t_certified:g}")
        else:
            detail = f"min Q = {v.q_min:.3f} over [0, {v.horizon:g}]"
        print(f"  {r:5.2f}  {v.status:<20} {detail}")
