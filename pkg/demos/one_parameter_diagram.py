"""From the acceptance functional to a one-parameter phase diagram.

The toy oracle is a 4-site chain whose spectrum sits in [0, 1/2).  Sweeping
the comparator parameter phi moves the acceptance eta through its
transition; the square energy changes sign there, the lattice energy
jumps, and the gap test flips from gapped to gapless.
"""

import numpy as np

from critline import phasediag as pd

oracle = pd.end_to_end_eta_oracle(t=6)
print(f"square size L_N = {oracle.L_N}, tape m_N = {oracle.m_N}, promise threshold L0 = {oracle.L0}")
print(f"lowest eigenphase of the toy chain: {oracle.oracle.spectrum[0][0]:.5f}")

print("\n   phi      eta    square sign   lattice E   gap     phase")
for phi in np.linspace(0.0, 0.2, 11):
    rep = oracle.evaluate(float(phi))
    d = rep.details
    print(
        f"{phi:7.3f}  {d['eta']:.4f}  {d['square']['sign']:>11}  {d['lattice']['total']:9.3g}"
        f"  {rep.gap:.4f}  {rep.phase.value}"
    )

inst = pd.toy_instance_1p()
oracle.reset_count()
sol = pd.solve_1crt(inst, oracle, tol=1e-3)
lo, hi = sol.critical_estimate
print(f"\nbisection: phi* in [{lo:.5f}, {hi:.5f}] after {sol.queries} classifications -> {sol.decision.value}")

scan = pd.brute_scan(inst, oracle, 400)
print(f"400-point scan: {scan.notes['changes']} phase change(s), bracket {scan.critical_estimate}")
