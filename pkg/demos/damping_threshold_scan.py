"""How much friction keeps a given pulse smooth everywhere.

Two complementary answers. The bisection finds the critical friction for
one pulse to a stated tolerance; the schedule scan walks an increasing
ladder of frictions and stops at the first one whose whole radial grid
comes back smooth, which is the cheap certificate that large enough
damping always wins.

The pulse here is nearly as large as the subcritical constraint allows
(a < 1/d), so the thresholds are close to their worst case.
"""
import coldplasma as cp

D = 2
PULSE = cp.GaussianPulse(0.499)
GRID = cp.RGrid(0.01, 0.11, 0.02)

search = cp.critical_nu(PULSE, D, GRID, bracket=(0.5, 2.0), tol=0.01)
print(f"critical friction for a={PULSE.a}: nu* = {search.result:.4f}")
print(f"bracket [{search.bracket[0]:.4f}, {search.bracket[1]:.4f}] "
      f"after {len(search.bracket_history)} probes")

scan = cp.verify_theorem_3(PULSE, D, GRID, nu_schedule=(0.25, 0.5, 1.0, 2.0))
print("\nschedule scan:")
for nu, verdict in scan.entries:
    print(f"  nu = {nu:<5g} ->  {verdict}")
if scan.satisfied:
    print(f"first all-smooth entry: nu = {scan.nu:g}")
else:
    print("schedule topped out without an all-smooth entry")
