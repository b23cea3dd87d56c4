"""
Photon blockade versus detuning
===============================

Steady-state seed occupation and g2(0) across the resonance, first without
nonlinearity (a plain Lorentzian, coherent light) and then with increasing
pump-dressed coupling.  Rates are in units of the seed linewidth.
"""

import numpy as np

from pmblockade import SystemParams, blockade_threshold, detuning_sweep
from pmblockade.observables import lorentzian_occupation, min_g2

# %%
# Weak seed drive, waveguide coupling half the linewidth, equal idler loss.
base = SystemParams(f_s=0.1, gamma=0.5, gamma_s=1.0, gamma_i=1.0)
grid = np.linspace(-3, 3, 13)

# %%
# Linear cavity: the solver must reproduce the Lorentzian and g2 = 1.
lin = detuning_sweep(base, grid, n_max=4)
print("max deviation from Lorentzian:",
      np.max(np.abs(np.array(lin.n_s) - lorentzian_occupation(grid))))

# %%
# Switching on the coupling digs an antibunching dip at resonance.
for g in (0.1, 0.2, 0.325, 0.5):
    delta, g2 = min_g2(base.with_(g_eff=g), n_max=4)
    print(f"g = {g:5.3f}: min g2 = {g2:.4f} at delta = {delta:+.3f}")

# %%
# The coupling where the dip first reaches g2 = 0.5.
res = blockade_threshold(base, target_g2=0.5, n_max=4)
print(f"blockade threshold: g = {res.g_threshold:.4f}")
