"""Lindblad generator: sparse vectorized superoperator and matrix-free action.

Vectorization is column stacking, ``vec(rho)[i + d*j] = rho[i, j]``, for which
``vec(A rho B) = (B.T kron A) vec(rho)``.  Use :func:`vec` / :func:`unvec`
rather than ``ravel`` so the order is never mixed up.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

#: Dense superoperators are only built up to this Hilbert-space dimension.
DENSE_DIM_LIMIT = 64


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus ``(jump_operator, rate)`` pairs."""

    hamiltonian: sp.csr_matrix
    jump_ops: list = field(default_factory=list)

    def __post_init__(self):
        h = self.hamiltonian
        if h.shape[0] != h.shape[1]:
            raise ValueError(f"hamiltonian must be square, got {h.shape}")
        for op, rate in self.jump_ops:
            if op.shape != h.shape:
                raise ValueError(f"jump operator shape {op.shape} != hamiltonian shape {h.shape}")
            if rate < 0:
                raise ValueError(f"decay rate must be >= 0, got {rate}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def effective_hamiltonian(self) -> sp.csr_matrix:
        """Non-Hermitian no-jump generator ``H - i/2 sum rate L^dag L``."""
        out = sp.csr_matrix(self.hamiltonian, dtype=complex)
        for op, rate in self.jump_ops:
            out = out - 0.5j * rate * (op.conj().T @ op)
        return sp.csr_matrix(out)

    def scale(self) -> float:
        """Cheap upper bound on the generator's operator norm."""
        s = 2 * _inf_norm(self.hamiltonian)
        for op, rate in self.jump_ops:
            s += 2 * rate * _inf_norm(op.conj().T @ op)
        return max(s, 1.0)


def _inf_norm(a) -> float:
    if a.nnz == 0:
        return 0.0
    return float(abs(a).sum(axis=1).max())


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(dim, dim, order="F")


def vectorize(model: LindbladModel) -> sp.csr_matrix:
    """Sparse ``dim**2 x dim**2`` Liouvillian acting on column-stacked rho."""
    d = model.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    h = model.hamiltonian
    sup = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for op, rate in model.jump_ops:
        if rate == 0:
            continue
        ada = op.conj().T @ op
        sup = sup + rate * (sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, ada) - 0.5 * sp.kron(ada.T, eye))
    sup = sp.csr_matrix(sup)
    sup.sum_duplicates()
    sup.eliminate_zeros()
    return sup


def dense_superoperator(model: LindbladModel) -> np.ndarray:
    if model.dim > DENSE_DIM_LIMIT:
        raise ValueError(f"dense superoperator refused for dim={model.dim} > {DENSE_DIM_LIMIT}")
    return vectorize(model).toarray()


def apply(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """Matrix-free ``L[rho]`` for a dense ``dim x dim`` array."""
    rho = np.asarray(rho)
    if rho.shape != (model.dim, model.dim):
        raise ValueError(f"rho shape {rho.shape} does not match model dim {model.dim}")
    h = model.hamiltonian
    # (rho H) computed as (H^T rho^T)^T keeps the sparse factor on the left
    out = -1j * (h @ rho - (h.T @ rho.T).T)
    for op, rate in model.jump_ops:
        if rate == 0:
            continue
        ad = op.conj().T
        ada = ad @ op
        a_rho = op @ rho
        out = out + rate * ((ad.T @ a_rho.T).T - 0.5 * (ada @ rho + (ada.T @ rho.T).T))
    return np.asarray(out)


def apply_vec(model: LindbladModel, v: np.ndarray) -> np.ndarray:
    return vec(apply(model, unvec(v, model.dim)))
