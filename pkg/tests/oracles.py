"""Independent reference implementations used only by the tests.

Everything here is built from explicit loops over Fock states and dense
numpy algebra, sharing no code with the package.
"""
import math

import numpy as np
import scipy.linalg as sla


def fock_states(n_max, seed_cutoff=None):
    seed_cutoff = 2 * n_max if seed_cutoff is None else seed_cutoff
    return [(ns, ni) for ni in range(n_max + 1) for ns in range(seed_cutoff + 1)]


def ladder(states, mode):
    """Dense lowering operator built element by element."""
    idx = {s: k for k, s in enumerate(states)}
    d = len(states)
    a = np.zeros((d, d), dtype=complex)
    for (ns, ni), col in idx.items():
        if mode == "seed" and ns > 0:
            a[idx[(ns - 1, ni)], col] = math.sqrt(ns)
        if mode == "idler" and ni > 0:
            a[idx[(ns, ni - 1)], col] = math.sqrt(ni)
    return a


def hamiltonian(states, delta, f_s, gamma, g):
    """Dense seed/idler Hamiltonian from its matrix elements."""
    a_s, a_i = ladder(states, "seed"), ladder(states, "idler")
    d = len(states)
    h = np.zeros((d, d), dtype=complex)
    for k, (ns, ni) in enumerate(states):
        h[k, k] = delta * (ns + 2 * ni)
    h += 1j * math.sqrt(gamma) * (f_s * a_s.conj().T - np.conj(f_s) * a_s)
    pair = a_s.conj().T @ a_s.conj().T @ a_i
    h += g * pair + np.conj(g) * pair.conj().T
    return h


def lindblad_rhs(h, jumps, rho):
    out = -1j * (h @ rho - rho @ h)
    for a, rate in jumps:
        ad = a.conj().T
        out += rate * (a @ rho @ ad - 0.5 * (ad @ a @ rho + rho @ ad @ a))
    return out


def superoperator(h, jumps):
    """Column-stacked generator assembled by acting on each matrix unit."""
    d = h.shape[0]
    sup = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for i in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            sup[:, i + d * j] = lindblad_rhs(h, jumps, e).reshape(-1, order="F")
    return sup


def null_space_state(sup):
    """Steady state from the dense null space (SVD), trace-normalized."""
    ns = sla.null_space(sup, rcond=1e-12)
    assert ns.shape[1] == 1, f"null space has dimension {ns.shape[1]}"
    d = int(round(math.sqrt(sup.shape[0])))
    rho = ns[:, 0].reshape(d, d, order="F")
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def propagate(sup, rho0, t):
    """``exp(L t) vec(rho0)`` via the dense matrix exponential."""
    d = rho0.shape[0]
    return (sla.expm(sup * t) @ rho0.reshape(-1, order="F")).reshape(d, d, order="F")


def seed_idler_oracle(n_max, delta=0.0, f_s=0.1, gamma=0.5, gamma_s=1.0, gamma_i=1.0, g=0.0):
    states = fock_states(n_max)
    h = hamiltonian(states, delta, f_s, gamma, g)
    jumps = [(ladder(states, "seed"), gamma_s), (ladder(states, "idler"), gamma_i)]
    return states, h, jumps


def trace_distance(a, b):
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))))


def lorentzian_occupation(delta, f_s, gamma, gamma_s):
    """Linear driven cavity: ``gamma |F|^2 / (delta^2 + (gamma_s/2)^2)``."""
    return gamma * abs(f_s) ** 2 / (np.asarray(delta) ** 2 + (gamma_s / 2) ** 2)


# Physical constants written out independently of scipy.constants.
HBAR = 6.62607015e-34 / (2 * math.pi)  # exact since the 2019 SI redefinition
C0 = 299792458.0


def coupling_ratio(gamma_nl, v_g, R, omega_s, Q0, P):
    gam = omega_s / Q0
    return gamma_nl * v_g**2 / (2 * math.pi * R) * math.sqrt(HBAR * omega_s * P / gam**3)
