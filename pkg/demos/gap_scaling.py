"""Finite-size gap test on the two reference chains.

The trivial chain keeps a unit gap at every size.  The critical XY chain
closes its gap like pi / L and fills the low window ever more densely;
the free-fermion closed form, dense diagonalization and matrix-free
Lanczos all agree where they overlap.
"""

import math

from critline import hamsim as hs
from critline import spectral as sp

crit = sp.GapCriterion((2.0,), (0.0, 0.5))

print("  L   closed gap   gap*L    max spacing   class")
for L in (8, 16, 32, 64):
    spec = sp.xy_spectrum(L, levels=4096, window=0.5)
    print(f"{L:3d}   {spec.gap:.6f}   {spec.gap * L:.4f}   {sp.max_spacing(spec, 0.5):.5f}     {sp.classify_gap(spec, crit, L).value}")
print(f"pi/2 = {math.pi / 2:.4f}")

print("\n  L   Lanczos gap   closed gap")
for L in (6, 10, 14):
    h = hs.ChainHamiltonian(2, L, hs.xy_two_site_term())
    w = sp.extremal_eigs(sp.chain_matvec(h), 2, dim=h.dim)
    print(f"{L:3d}   {w[1] - w[0]:.8f}    {sp.xy_gap(L):.8f}")

print("\ntrivial chain:", [sp.diagonalize(sp.trivial_chain(L)).gap for L in range(5, 11)])

chain = sp.guarded_chain(4, h_prime=0.2)
spec = sp.diagonalize(chain.matrix)
print(f"guarded 4-site chain, h' = 0.2: lowest levels {spec.eigenvalues[:4].round(4).tolist()}")
