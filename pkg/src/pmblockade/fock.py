"""Truncated two-mode Fock space for the seed/idler pair.

Basis states are labelled ``(n_s, n_i)`` and flattened row-major with the
seed index varying fastest::

    index = n_s + (seed_cutoff + 1) * n_i

Operators are ``scipy.sparse.csr_matrix`` instances with duplicates merged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SEED = "seed"
IDLER = "idler"

#: Largest allowed density-matrix length ``dim**2`` (the superoperator side).
MAX_LIOUVILLE_DIM = 1_000_000


class TruncationError(ValueError):
    """Requested truncation cannot be represented within the size limit."""


@dataclass(frozen=True)
class FockBasis:
    """Asymmetrically truncated two-mode number basis.

    The seed mode keeps ``0..seed_cutoff`` photons and the idler mode keeps
    ``0..n_max``.  By default ``seed_cutoff = 2 * n_max`` because each idler
    photon is created from two seed photons.
    """

    n_max: int
    seed_cutoff: int
    states: tuple[tuple[int, int], ...] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return (self.seed_cutoff + 1) * (self.n_max + 1)

    @property
    def seed_dim(self) -> int:
        return self.seed_cutoff + 1

    @property
    def idler_dim(self) -> int:
        return self.n_max + 1

    def index(self, n_s: int, n_i: int) -> int:
        if not (0 <= n_s <= self.seed_cutoff and 0 <= n_i <= self.n_max):
            raise IndexError(f"state ({n_s}, {n_i}) outside truncation")
        return n_s + self.seed_dim * n_i

    def state(self, index: int) -> tuple[int, int]:
        return self.states[index]

    def seed_numbers(self) -> np.ndarray:
        return np.tile(np.arange(self.seed_dim), self.idler_dim)

    def idler_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.idler_dim), self.seed_dim)

    def basis_vector(self, n_s: int, n_i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n_s, n_i)] = 1.0
        return v

    def projector(self, n_s: int, n_i: int) -> np.ndarray:
        v = self.basis_vector(n_s, n_i)
        return np.outer(v, v.conj())


def build_basis(
    n_max: int,
    seed_cutoff: int | None = None,
    max_liouville_dim: int = MAX_LIOUVILLE_DIM,
) -> FockBasis:
    """Build the truncated basis.

    Parameters
    ----------
    n_max : int
        Idler photon cutoff.
    seed_cutoff : int, optional
        Seed photon cutoff, ``2 * n_max`` when omitted.
    max_liouville_dim : int
        Reject truncations with ``dim**2`` above this value.

    Raises
    ------
    TruncationError
        If the superoperator for this basis would exceed the size limit.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if seed_cutoff is None:
        seed_cutoff = 2 * n_max
    seed_cutoff = int(seed_cutoff)
    if seed_cutoff < 0:
        raise ValueError(f"seed_cutoff must be >= 0, got {seed_cutoff}")
    dim = (seed_cutoff + 1) * (n_max + 1)
    if dim * dim > max_liouville_dim:
        raise TruncationError(
            f"truncation n_max={n_max}, seed_cutoff={seed_cutoff} gives "
            f"dim**2={dim * dim} > limit {max_liouville_dim}"
        )
    states = tuple((n_s, n_i) for n_i in range(n_max + 1) for n_s in range(seed_cutoff + 1))
    return FockBasis(n_max=n_max, seed_cutoff=seed_cutoff, states=states)


def _single_mode_lowering(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1,
                    shape=(cutoff + 1, cutoff + 1), format="csr", dtype=complex)


def destroy(cutoff: int) -> sp.csr_matrix:
    """Single-mode annihilation operator on ``0..cutoff`` photons."""
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    return _single_mode_lowering(cutoff)


def _check_mode(mode: str) -> str:
    if mode not in (SEED, IDLER):
        raise ValueError(f"mode must be {SEED!r} or {IDLER!r}, got {mode!r}")
    return mode


def annihilator(basis: FockBasis, mode: str) -> sp.csr_matrix:
    """Annihilation operator of ``mode`` tensored with identity on the other mode."""
    _check_mode(mode)
    if mode == SEED:
        op = sp.kron(sp.identity(basis.idler_dim), _single_mode_lowering(basis.seed_cutoff))
    else:
        op = sp.kron(_single_mode_lowering(basis.n_max), sp.identity(basis.seed_dim))
    op = sp.csr_matrix(op, dtype=complex)
    op.sum_duplicates()
    op.eliminate_zeros()
    return op


def number_operator(basis: FockBasis, mode: str) -> sp.csr_matrix:
    """Diagonal photon-number operator of ``mode``."""
    _check_mode(mode)
    n = basis.seed_numbers() if mode == SEED else basis.idler_numbers()
    return sp.diags(n.astype(complex), 0, format="csr")


def adjoint(op: sp.spmatrix) -> sp.csr_matrix:
    return sp.csr_matrix(op.conj().T)


def commutator(a: sp.spmatrix, b: sp.spmatrix) -> sp.csr_matrix:
    out = sp.csr_matrix(a @ b - b @ a)
    out.eliminate_zeros()
    return out
