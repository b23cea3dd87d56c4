import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

import oracles
from pmblockade.fock import SEED, build_basis
from pmblockade.liouvillian import LindbladModel
from pmblockade.model import PumpParams, SystemParams, gauge_fix, model_for
from pmblockade.observables import g2_zero, mean_occupation
from pmblockade.steady import (NonConvergenceError, SolverError, check_density_matrix,
                               convergence_loop, converge_truncation, pump_dressing,
                               pump_steady_state, residual_norm, steady_state, trace_distance)


@pytest.mark.parametrize("n_max", [1, 2, 3])
def test_direct_matches_null_space_oracle(n_max):
    p = SystemParams(delta=0.3, f_s=0.8, g_eff=0.7)
    _, m = model_for(p, n_max)
    ref = oracles.null_space_state(oracles.superoperator(*oracles.seed_idler_oracle(
        n_max, 0.3, 0.8, 0.5, 1.0, 1.0, 0.7)[1:]))
    assert trace_distance(steady_state(m, method="direct"), ref) < 1e-10


@pytest.mark.parametrize("n_max", [3, 5])
def test_iterative_matches_direct(n_max):
    _, m = model_for(SystemParams(delta=-0.4, f_s=1.2, g_eff=0.9), n_max)
    a = steady_state(m, method="direct")
    b = steady_state(m, method="iterative")
    assert trace_distance(a, b) < 1e-9


def test_steady_state_is_valid_density_matrix():
    _, m = model_for(SystemParams(f_s=1.0, g_eff=1.0), 4)
    rho = steady_state(m)
    check_density_matrix(rho)
    assert residual_norm(m, rho) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 1.5), st.floats(0, 1.5), st.floats(0.5, 2.0))
def test_residual_and_validity_property(delta, f, g, gi):
    _, m = model_for(SystemParams(delta=delta, f_s=f, g_eff=g, gamma_i=gi), 2)
    rho = steady_state(m)
    assert residual_norm(m, rho) <= 1e-10
    assert check_density_matrix(rho) >= -1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(-3.14, 3.14), st.floats(-2, 2))
def test_gauge_invariance(phase, delta):
    b = build_basis(2)
    base = SystemParams(delta=delta, f_s=0.6, g_eff=0.8)
    r0 = steady_state(model_for(base, 2)[1])
    r1 = steady_state(model_for(base.with_(gauge_phase=phase), 2)[1])
    for f in (mean_occupation, g2_zero):
        assert abs(f(r0, b, SEED) - f(r1, b, SEED)) < 1e-10


def test_no_decay_is_singular():
    # closed system: every diagonal state is stationary, trace row cannot fix it
    h = sp.csr_matrix(np.diag([0.0, 1.0, 2.0]).astype(complex))
    with pytest.raises(SolverError):
        steady_state(LindbladModel(h), method="direct")


def test_bad_arguments():
    _, m = model_for(SystemParams(), 1)
    with pytest.raises(ValueError):
        steady_state(m, tol=0)
    with pytest.raises(ValueError):
        steady_state(m, method="magic")
    with pytest.raises(ValueError):
        steady_state(m, trace_index=99)


def test_check_density_matrix_rejects():
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.1, -0.1]))


def test_convergence_at_zero_drive_is_immediate():
    _, _, report = converge_truncation(SystemParams(f_s=0.0, g_eff=0.5), ("n_s",), n_max_limit=4)
    assert report.converged and report.final_n_max == 2


def test_convergence_limit_reports_failure():
    _, _, report = converge_truncation(SystemParams(f_s=2.5, g_eff=0.5), ("n_s",), rel_tol=1e-6,
                                       n_max_limit=3)
    assert not report.converged
    with pytest.raises(NonConvergenceError):
        report.raise_if_not_converged()


def test_convergence_loop_validation():
    with pytest.raises(ValueError):
        convergence_loop(lambda n: ({}, None), 0.0, 1, 3)
    with pytest.raises(ValueError):
        convergence_loop(lambda n: ({}, None), 0.1, 3, 3)


def test_custom_observable_callable():
    def n_s(basis, rho):
        return mean_occupation(rho, basis, SEED)

    _, _, report = converge_truncation(SystemParams(f_s=0.5, g_eff=0.5), (n_s, "g2"), n_max_limit=6)
    assert report.converged
    assert {"n_s", "g2"} <= set(report.steps[-1].values)


def test_pump_linear_limit_is_coherent():
    p = PumpParams(pump_detuning=0.4, f_p=1.3, gamma_wg=0.5, gamma_p=1.0, g_kerr=0.0)
    alpha, n_p = pump_steady_state(p, tol=1e-9)
    lin = p.linear_amplitude()
    assert abs(alpha - lin) < 1e-8
    assert n_p == pytest.approx(abs(lin) ** 2, rel=1e-8)


def test_pump_kerr_reduces_occupation_on_resonance():
    p = PumpParams(f_p=1.5, g_kerr=0.5)
    _, n_kerr = pump_steady_state(p)
    assert n_kerr < abs(p.linear_amplitude()) ** 2


def test_pump_dressing_maps_to_coupling():
    p = PumpParams(f_p=1.0, g_kerr=0.0)
    d = pump_dressing(p, g_nl=0.2, g_psps=0.1, g_pipi=0.05)
    mod, phase = gauge_fix(0.2 * p.linear_amplitude())
    assert d.g_eff == pytest.approx(mod, rel=1e-8)
    assert d.xpm_s == pytest.approx(0.1 * d.n_p) and d.xpm_i == pytest.approx(0.05 * d.n_p)


def test_pump_cutoff_limit():
    with pytest.raises(NonConvergenceError):
        pump_steady_state(PumpParams(f_p=3.0), max_cutoff=20)
