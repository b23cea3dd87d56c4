"""
From device parameters to the coupling ratio
============================================

The effective coupling grows as the square root of pump power.  We evaluate
it for the bundled microring platforms, find the power at which each would
reach the blockade threshold, and build the resonance comb of a two-ring
photonic molecule that provides the equally spaced triplet.
"""

import math

from pmblockade.comb import MoleculeSpec, find_triplets
from pmblockade.materials import coupling_ratio, load_platforms, power_threshold

# %%
# Coupling ratio at 0.1, 1 and 10 W, with group velocity c/n.
for p in load_platforms():
    ratios = ", ".join(f"{coupling_ratio(p, P):.2e}" for P in (0.1, 1.0, 10.0))
    print(f"{p.name:8s} {ratios}   threshold power {power_threshold(p, 0.325):.3g} W")

# %%
# Rings of radius R and R/2: every even mode of the big ring splits into a
# doublet, odd modes stay bare, giving pump/seed/idler triplets.
spec = MoleculeSpec(n_eff=2.0, R=100e-6, J=2 * math.pi * 5e9, m_min=1, m_max=9)
for t in find_triplets(spec):
    print(f"m_s = {t.m_s}: branches {t.p_branch}{t.i_branch}, "
          f"mismatch {t.mismatch:.1e} rad/s, nearest other line {t.isolation / (2 * math.pi):.3g} Hz")
