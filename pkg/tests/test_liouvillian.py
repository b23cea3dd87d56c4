import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

import oracles
from pmblockade.liouvillian import (LindbladModel, apply, apply_vec, dense_superoperator, unvec,
                                    vec, vectorize)
from pmblockade.model import SystemParams, model_for


def _random_matrix(d, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_vec_is_column_stacking():
    a = np.arange(6).reshape(2, 3)
    assert list(vec(a)) == [0, 3, 1, 4, 2, 5]
    b = _random_matrix(4, 0)
    assert np.array_equal(unvec(vec(b)), b)


def test_superoperator_matches_elementwise_oracle():
    p = SystemParams(delta=0.4, f_s=0.6, g_eff=0.9, gamma_i=0.8)
    _, m = model_for(p, 2)
    _, h, jumps = oracles.seed_idler_oracle(2, 0.4, 0.6, 0.5, 1.0, 0.8, 0.9)
    assert np.allclose(dense_superoperator(m), oracles.superoperator(h, jumps), atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 2), st.floats(0, 2), st.integers(0, 2**31))
def test_matrix_free_matches_sparse(delta, f, g, seed):
    _, m = model_for(SystemParams(delta=delta, f_s=f, g_eff=g), 2)
    rho = _random_matrix(m.dim, seed)
    assert np.max(np.abs(vectorize(m) @ vec(rho) - apply_vec(m, vec(rho)))) <= 1e-12


def test_trace_preserving_and_hermiticity_preserving():
    _, m = model_for(SystemParams(f_s=0.5, g_eff=0.7), 2)
    r = _random_matrix(m.dim, 3)
    r = r + r.conj().T
    out = apply(m, r)
    assert abs(np.trace(out)) < 1e-12
    assert np.allclose(out, out.conj().T, atol=1e-12)


def test_dense_refused_for_large_dim():
    _, m = model_for(SystemParams(), 6)
    with pytest.raises(ValueError):
        dense_superoperator(m)


def test_model_validation():
    h = sp.identity(3, format="csr")
    with pytest.raises(ValueError):
        LindbladModel(sp.csr_matrix((2, 3)))
    with pytest.raises(ValueError):
        LindbladModel(h, [(sp.identity(2, format="csr"), 1.0)])
    with pytest.raises(ValueError):
        LindbladModel(h, [(h, -1.0)])
    with pytest.raises(ValueError):
        apply(LindbladModel(h), np.zeros((2, 2)))


def test_effective_hamiltonian_and_scale():
    _, m = model_for(SystemParams(), 1)
    heff = m.effective_hamiltonian().toarray()
    anti = (heff - heff.conj().T) / 2j
    assert np.all(np.linalg.eigvalsh(anti) <= 1e-14)
    assert m.scale() >= 1
