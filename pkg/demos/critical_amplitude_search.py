"""Bisection for the largest pulse amplitude that stays smooth.

Amplitude is monotone for gaussian pulses: once some radius blows up,
every larger amplitude blows up too, so the threshold is a clean
bisection target. The search reports the largest amplitude verified
smooth on the whole grid, plus every probe it took, and the monotonicity
of those probes is audited after the fact.

A coarse radial grid keeps this demo quick; the headline searches in the
test suite run the default 600-point grid.
"""
import coldplasma as cp

D = 2
NU = 0.5
GRID = cp.RGrid(0.05, 0.8, 0.05)

search = cp.critical_a(D, NU, GRID, tol=2e-3)

print(f"critical amplitude at d={D}, nu={NU}: a* = {search.result:.6f}")
print(f"final bracket [{search.bracket[0]:.6f}, {search.bracket[1]:.6f}], "
      f"tol {search.tol:g}")
print("\nprobe history:")
for a, blew in search.bracket_history:
    print(f"  a = {a:.6f}  ->  {'blow-up' if blew else 'smooth'}")

blow = [a for a, b in search.bracket_history if b]
calm = [a for a, b in search.bracket_history if not b]
print(f"\nmonotone: every smooth probe ({max(calm):.6f} max) sits below "
      f"every blowing probe ({min(blow):.6f} min)")
