"""The two-parameter diagram: a critical line in theta above a threshold in phi.

The observable-weighted functional subtracts theta from <B>.  When the low
energy states sit on B = 2 the critical line lands in [1.45, 1.65]; when
they sit on B = 1 it drops to [0.45, 0.65].  The promise rectangle
theta in [alpha1, beta1] then lies wholly in one phase.
"""

import numpy as np

from critline import phasediag as pd
from critline.eta import theta_thresholds, toy_two_param_oracle

for lam_star in (2, 1):
    hard = toy_two_param_oracle(lam_star)
    eo = pd.end_to_end_eta_oracle(hard, t=8, params=2)
    inst = pd.toy_instance_2p(hard)
    sol = pd.solve_2crt(inst, eo, tol=1e-3)
    lo, hi = theta_thresholds(hard)
    print(f"\nB-eigenvalue {lam_star}: band [{lo:.2f}, {hi:.2f}], decision {sol.decision.value}, {sol.queries} queries")
    print(f"  y in [{sol.critical_estimate[0]:.5f}, {sol.critical_estimate[1]:.5f}]")
    for phi in np.linspace(*sol.notes["S_kappa"], 3):
        a, b = pd.locate_critical_theta(eo, float(phi), 0.0, 2.0, 1e-3)
        print(f"  phi = {phi:.4f}: theta* in [{a:.4f}, {b:.4f}]")

    # coarse picture: A = gapless side, B = gapped side
    thetas = np.linspace(0, 2, 21)
    phis = np.linspace(0.0, 0.3, 13)
    print("  theta ->  " + "".join("|" if abs(th - 1.0) < 1e-9 else " " for th in thetas))
    for phi in phis:
        row = "".join("a" if eo.classify(float(phi), float(th)) is pd.Phase.A else "." for th in thetas)
        print(f"  {phi:6.3f}   {row}")
