"""Walk through phase estimation as a comparator.

Two single-qubit phase gates feed the comparator; the readout register
holds t bits of their phase difference.  The probability of reading a
label <= 0 is the quantity everything downstream is built on, so we look
at its shape, its window bounds and its behaviour under gate noise.
"""

import numpy as np

from critline import circuit as cs
from critline import qpe

t = 5
print(f"readout register: {t} qubits, labels {qpe.outcome_labels(t)[0]}..{qpe.outcome_labels(t)[-1]}")

# closed form against the simulated circuit for one offset
lam_a, lam_b = 0.41, 0.37
u_a = np.diag([1.0, np.exp(2j * np.pi * lam_a)])
u_b = np.diag([1.0, np.exp(2j * np.pi * lam_b)])
state = cs.phase_comparator(u_a, u_b, cs.StateVector.basis(1, 1), cs.StateVector.basis(1, 1), t)
print(f"\nP(label <= 0) circuit     {cs.low_outcome_probability(state, t):.12f}")
print(f"P(label <= 0) closed form {qpe.low_half_mass(t, lam_a - lam_b):.12f}")

# the transition: mass falls from ~1 to ~0 as the offset crosses one readout step
print("\noffset / 2^-t   low-half mass")
for frac in np.linspace(-0.5, 1.5, 9):
    xi = frac * 2.0**-t
    bar = "#" * int(40 * qpe.low_half_mass(t, xi))
    print(f"{frac:13.2f}   {qpe.low_half_mass(t, xi):.4f} {bar}")

# window ends
for tt in (4, 6, 8, 10):
    far = qpe.low_half_mass(tt, qpe.far_endpoint_offset(tt))
    near = qpe.low_half_mass(tt, qpe.near_endpoint_offset(tt))
    print(f"t={tt:2d}: far end {far:.4f}  near end {near:.4f}  (bound {qpe.PI2_OVER_24:.4f})")

# gate noise of size 2^-2t leaves the readout almost unchanged
noise = cs.NoiseSpec(2.0 ** (-2 * t), seed=1)
noisy = cs.phase_comparator(u_a, u_b, cs.StateVector.basis(1, 1), cs.StateVector.basis(1, 1), t, noise)
print(f"\nwith noise eps = 2^-{2 * t}: P(label <= 0) = {cs.low_outcome_probability(noisy, t):.6f}")
