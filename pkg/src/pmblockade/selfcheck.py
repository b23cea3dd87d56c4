"""Analytic-limit self tests run by ``pmblockade --check``."""
from __future__ import annotations

import math

import numpy as np

from . import comb, materials
from .dynamics import evolve
from .fock import SEED, build_basis, destroy, number_operator
from .liouvillian import LindbladModel, apply, dense_superoperator, vec
from .model import SystemParams, model_for
from .observables import detuning_sweep, lorentzian_occupation
from .steady import check_density_matrix, steady_state


def _linear_limit():
    p = SystemParams()
    grid = np.linspace(-3, 3, 31)
    res = detuning_sweep(p, grid, n_max=4)
    err = np.max(np.abs(np.array(res.n_s) - lorentzian_occupation(grid, p.f_s, p.gamma, p.gamma_s)))
    g2 = np.max(np.abs(np.array(res.g2) - 1))
    return err <= 1e-8 and g2 <= 1e-6, f"Lorentzian error {err:.2e}, |g2-1| {g2:.2e}"


def _matrix_free():
    _, m = model_for(SystemParams(g_eff=0.4, f_s=0.3, delta=0.2), 2)
    rng = np.random.default_rng(0)
    rho = rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim))
    err = np.max(np.abs(dense_superoperator(m) @ vec(rho) - vec(apply(m, rho))))
    return err <= 1e-13, f"apply vs dense superoperator {err:.2e}"


def _steady_valid():
    _, m = model_for(SystemParams(g_eff=0.5, f_s=0.5), 3)
    rho = steady_state(m)
    lam = check_density_matrix(rho)
    return True, f"steady state valid, min eigenvalue {lam:.2e}"


def _decay():
    a = destroy(1)
    m = LindbladModel(0 * a, [(a, 1.0)])
    rho0 = np.diag([0, 1]).astype(complex)
    t = np.linspace(0, 5, 11)
    tr = evolve(m, rho0, 5.0, 1e-12, t_eval=t)
    err = np.max(np.abs(tr.observable(number_operator(build_basis(1, 1), SEED)[:2, :2]) - np.exp(-t)))
    return err <= 1e-6, f"exponential decay error {err:.2e}"


def _triplets():
    spec = comb.MoleculeSpec(2.0, 100e-6, 2 * math.pi * 5e9, 1, 20)
    worst = max(abs(t.mismatch) / t.omega_s for t in comb.find_triplets(spec))
    return worst <= 1e-9, f"worst triplet mismatch {worst:.2e}"


def _power_scaling():
    worst = 0.0
    for p in materials.load_platforms():
        worst = max(worst, abs(materials.coupling_ratio(p, 1.0) / materials.coupling_ratio(p, 0.1) - math.sqrt(10)))
    return worst <= 1e-12, f"sqrt(10) power scaling error {worst:.2e}"


CHECKS = [("linear limit", _linear_limit), ("matrix-free generator", _matrix_free),
          ("steady-state validity", _steady_valid), ("decay law", _decay),
          ("triplet identity", _triplets), ("power scaling", _power_scaling)]


def run_checks(stream=None) -> bool:
    import sys

    stream = sys.stdout if stream is None else stream
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)
    return ok_all
