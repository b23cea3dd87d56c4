"""Hamiltonians of the seed/idler subsystem and of the driven Kerr pump mode.

All rates are in units of the seed linewidth (``gamma_s = 1`` in the usual
setup) and hbar = 1, so Hamiltonian entries are angular rates.  Drive
amplitudes carry units of rate**0.5 and enter as ``i sqrt(gamma) (F a^dag - F* a)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .fock import IDLER, SEED, FockBasis, annihilator, build_basis, destroy, number_operator
from .liouvillian import LindbladModel


@dataclass(frozen=True)
class SystemParams:
    """Rates of the effective seed/idler model.

    Defaults are the standard blockade setting: ``gamma_i = gamma_s``,
    ``gamma / gamma_s = 0.5`` and ``f_s / sqrt(gamma_s) = 0.1``.
    """

    delta: float = 0.0
    f_s: complex = 0.1
    gamma: float = 0.5
    gamma_s: float = 1.0
    gamma_i: float = 1.0
    g_eff: float = 0.0
    gauge_phase: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.gamma_s < self.gamma:
            raise ValueError(
                f"gamma_s ({self.gamma_s}) must include the waveguide coupling gamma ({self.gamma})")
        if not self.gamma_i > 0:
            raise ValueError(f"gamma_i must be > 0, got {self.gamma_i}")
        if self.g_eff < 0:
            raise ValueError("g_eff must be non-negative; put the phase in gauge_phase")
        for name in ("delta", "gamma", "gamma_s", "gamma_i", "g_eff", "gauge_phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not cmath.isfinite(complex(self.f_s)):
            raise ValueError("f_s must be finite")

    @property
    def coupling(self) -> complex:
        """Complex nonlinear rate ``g_eff * exp(i gauge_phase)``."""
        return self.g_eff * cmath.exp(1j * self.gauge_phase)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FullModelParams(SystemParams):
    """Seed/idler model including self- and cross-phase modulation.

    ``idler_detuning`` replaces the ``2 * delta`` idler coefficient when the
    triplet is not exactly aligned.
    """

    g_ssss: float = 0.0
    g_iiii: float = 0.0
    g_sisi: float = 0.0
    idler_detuning: float | None = None

    def __post_init__(self):
        super().__post_init__()
        for name in ("g_ssss", "g_iiii", "g_sisi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.idler_detuning is not None and not math.isfinite(self.idler_detuning):
            raise ValueError("idler_detuning must be finite")


@dataclass(frozen=True)
class PumpParams:
    """Single driven Kerr mode (the pump resonance before elimination)."""

    pump_detuning: float = 0.0
    f_p: complex = 1.0
    gamma_wg: float = 0.5
    gamma_p: float = 1.0
    g_kerr: float = 0.0
    n_max_pump: int = 8

    def __post_init__(self):
        if not self.gamma_wg > 0:
            raise ValueError("gamma_wg must be > 0")
        if self.gamma_p < self.gamma_wg:
            raise ValueError("gamma_p must be >= gamma_wg")
        if int(self.n_max_pump) < 1:
            raise ValueError("n_max_pump must be >= 1")

    def linear_amplitude(self) -> complex:
        """Intracavity amplitude of the same mode without Kerr shift."""
        return math.sqrt(self.gamma_wg) * complex(self.f_p) / (
            1j * self.pump_detuning + self.gamma_p / 2)


def _drive(a: sp.csr_matrix, gamma: float, f: complex) -> sp.csr_matrix:
    ad = a.conj().T
    return 1j * math.sqrt(gamma) * (f * ad - np.conj(f) * a)


def effective_hamiltonian(basis: FockBasis, p: SystemParams) -> sp.csr_matrix:
    """H = delta (n_s + 2 n_i) + i sqrt(gamma) (F a_s^dag - F* a_s)
    + g (a_s^dag^2 a_i) + g* (a_i^dag a_s^2)."""
    a_s = annihilator(basis, SEED)
    a_i = annihilator(basis, IDLER)
    n_s = number_operator(basis, SEED)
    n_i = number_operator(basis, IDLER)
    g = p.coupling
    a_sd = a_s.conj().T
    pair = a_sd @ a_sd @ a_i
    h = p.delta * (n_s + 2 * n_i) + _drive(a_s, p.gamma, complex(p.f_s))
    h = h + g * pair + np.conj(g) * pair.conj().T
    return _finish(h)


def full_hamiltonian(basis: FockBasis, p: FullModelParams) -> sp.csr_matrix:
    """Effective Hamiltonian plus SPM/XPM terms and the optional idler detuning."""
    h = effective_hamiltonian(basis, p)
    a_s = annihilator(basis, SEED)
    a_i = annihilator(basis, IDLER)
    n_s = number_operator(basis, SEED)
    n_i = number_operator(basis, IDLER)
    h = h + p.g_ssss * (a_s.conj().T @ a_s.conj().T @ a_s @ a_s)
    h = h + p.g_iiii * (a_i.conj().T @ a_i.conj().T @ a_i @ a_i)
    h = h + p.g_sisi * (n_s @ n_i)
    if p.idler_detuning is not None:
        h = h + (p.idler_detuning - 2 * p.delta) * n_i
    return _finish(h)


def hamiltonian(basis: FockBasis, p: SystemParams) -> sp.csr_matrix:
    """Dispatch on the parameter type."""
    if isinstance(p, FullModelParams):
        return full_hamiltonian(basis, p)
    return effective_hamiltonian(basis, p)


def kerr_pump_hamiltonian(n_max_pump: int, p: PumpParams) -> sp.csr_matrix:
    """H = detuning n + g_kerr a^dag^2 a^2 + i sqrt(gamma) (F a^dag - F* a)."""
    if n_max_pump < 1:
        raise ValueError("n_max_pump must be >= 1")
    a = destroy(n_max_pump)
    n = np.arange(n_max_pump + 1, dtype=float)
    diag = sp.diags(p.pump_detuning * n + p.g_kerr * n * (n - 1), 0, format="csr", dtype=complex)
    return _finish(diag + _drive(a, p.gamma_wg, complex(p.f_p)))


def gauge_fix(g_complex: complex) -> tuple[float, float]:
    """Split a complex coupling into modulus and phase.

    The phase can be absorbed into the idler operator, so observables depend
    only on the modulus.
    """
    g_complex = complex(g_complex)
    return abs(g_complex), (cmath.phase(g_complex) if g_complex != 0 else 0.0)


def jump_operators(basis: FockBasis, p: SystemParams) -> list[tuple[sp.csr_matrix, float]]:
    """One-photon loss channels for seed and idler."""
    return [(annihilator(basis, SEED), p.gamma_s), (annihilator(basis, IDLER), p.gamma_i)]


def seed_idler_model(basis: FockBasis, p: SystemParams) -> LindbladModel:
    return LindbladModel(hamiltonian(basis, p), jump_operators(basis, p))


def model_for(p: SystemParams, n_max: int, seed_cutoff: int | None = None):
    """Convenience: basis plus Lindblad model for ``p``."""
    basis = build_basis(n_max, seed_cutoff)
    return basis, seed_idler_model(basis, p)


def kerr_pump_model(p: PumpParams, n_max_pump: int | None = None) -> LindbladModel:
    cutoff = p.n_max_pump if n_max_pump is None else n_max_pump
    return LindbladModel(kerr_pump_hamiltonian(cutoff, p), [(destroy(cutoff), p.gamma_p)])


def _finish(h) -> sp.csr_matrix:
    h = sp.csr_matrix(h, dtype=complex)
    h.sum_duplicates()
    h.eliminate_zeros()
    return h
