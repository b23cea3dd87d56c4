"""
Fock-space truncation and line splitting
========================================

At stronger seed drive more photons are stored and the truncated basis must
grow.  We watch the peak occupation settle as the idler cutoff n_max rises
(the seed keeps 2 n_max photons), then look at the split line shape.
This script runs in about ten seconds.
"""

import numpy as np

from pmblockade import SystemParams
from pmblockade.observables import count_local_maxima, peak_occupation_convergence, splitting_scan

p = SystemParams(f_s=1.0, g_eff=0.5)

# %%
# Peak occupation versus cutoff.  Converged means < 1 % change.
report = peak_occupation_convergence(p, rel_tol=1e-2, n_max_limit=7, grid=np.linspace(-3, 3, 13))
for row in report.as_rows():
    print(row)
print("converged at n_max =", report.final_n_max)

# %%
# Normalized occupation n_s / |F_s|^2 for a weak and a strong drive.
res = splitting_scan(p.with_(g_eff=1.0), [0.1, 1.5], np.linspace(-3, 3, 13), n_max=6)
for r in res:
    norm = r.normalized_occupation()
    print(f"F_s = {r.params['f_s']}: {count_local_maxima(norm)} peak(s)", np.round(norm, 3))
