import numpy as np
import pytest
import scipy.sparse as sp

import oracles
from pmblockade.dynamics import (DrivingProtocol, IntegrationError, evolve, evolve_fixed,
                                 protocol_a, protocol_b, protocol_trajectory, random_density_matrix,
                                 run_protocol)
from pmblockade.fock import build_basis, destroy
from pmblockade.liouvillian import LindbladModel
from pmblockade.model import SystemParams, model_for
from pmblockade.steady import steady_state, trace_distance


def test_exponential_decay():
    a = destroy(1)
    m = LindbladModel(sp.csr_matrix((2, 2), dtype=complex), [(a, 1.3)])
    t = np.linspace(0, 4, 9)
    tr = evolve(m, np.diag([0, 1]).astype(complex), 4.0, 1e-12, t_eval=t)
    assert np.max(np.abs(tr.observable(a.conj().T @ a) - np.exp(-1.3 * t))) <= 1e-6


def test_zero_generator_keeps_state():
    m = LindbladModel(sp.csr_matrix((3, 3), dtype=complex))
    rho0 = random_density_matrix(3, np.random.default_rng(0))
    tr = evolve(m, rho0, 5.0)
    assert np.array_equal(tr.final, rho0)


def test_matches_matrix_exponential():
    p = SystemParams(delta=0.2, f_s=0.7, g_eff=0.6)
    b, m = model_for(p, 2)
    _, h, jumps = oracles.seed_idler_oracle(2, 0.2, 0.7, 0.5, 1.0, 1.0, 0.6)
    rho0 = random_density_matrix(b.dim, np.random.default_rng(5))
    ref = oracles.propagate(oracles.superoperator(h, jumps), rho0, 3.0)
    assert trace_distance(evolve(m, rho0, 3.0, 1e-11).final, ref) < 1e-8


def test_fixed_step_rk4_agrees():
    b, m = model_for(SystemParams(f_s=0.5, g_eff=0.5), 1)
    rho0 = b.projector(0, 0)
    ref = evolve(m, rho0, 2.0, 1e-12).final
    assert trace_distance(evolve_fixed(m, rho0, 2.0, 0.01).final, ref) < 1e-8


def test_relaxation_from_vacuum():
    p = SystemParams(f_s=0.5, g_eff=0.8)
    b, m = model_for(p, 2)
    tr = evolve(m, b.projector(0, 0), 50.0, 1e-10, basis=b)
    assert trace_distance(tr.final, steady_state(m)) <= 1e-6
    assert tr.trace_drift.max() <= 1e-9
    assert tr.hermiticity_error.max() <= 1e-9


def test_trajectory_csv():
    b, m = model_for(SystemParams(f_s=0.3), 1)
    tr = evolve(m, b.projector(1, 0), 1.0, t_eval=[0.0, 0.5, 1.0], basis=b)
    lines = tr.to_csv({"a": 1}).splitlines()
    assert lines[1] == "time,n_s,n_i,g2,trace_drift"
    assert len(lines) == 5


def test_evolve_validation():
    b, m = model_for(SystemParams(), 1)
    r = b.projector(0, 0)
    with pytest.raises(ValueError):
        evolve(m, r, 0.0)
    with pytest.raises(ValueError):
        evolve(m, r, 1.0, t_eval=[0.5, 0.2])
    with pytest.raises(ValueError):
        evolve(m, r, 1.0, method="Euler")
    with pytest.raises(ValueError):
        evolve(m, np.eye(2), 1.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_step_underflow_raises():
    # a hugely stiff decay with a tiny tolerance cannot be resolved by an explicit method
    a = destroy(1)
    m = LindbladModel(sp.csr_matrix((2, 2), dtype=complex), [(a, 1e300)])
    with pytest.raises(IntegrationError, match="step"):
        evolve(m, np.diag([0, 1]).astype(complex), 1.0, 1e-10)


def test_protocol_validation():
    with pytest.raises(ValueError):
        DrivingProtocol(((1.0, True, False),))
    with pytest.raises(ValueError):
        DrivingProtocol(((2.0, True, False), (1.0, True, True)))
    with pytest.raises(ValueError):
        protocol_a().segments(10.0)
    assert protocol_a().label == "A" and protocol_b().label == "B"


def test_protocols_agree():
    p = SystemParams(f_s=0.5, g_eff=0.6)
    ra = run_protocol(p, protocol_a(2.0, 5.0), 60.0, n_max=2)
    rb = run_protocol(p, protocol_b(2.0, 5.0), 60.0, n_max=2)
    assert trace_distance(ra, rb) <= 1e-6


def test_single_segment_equals_evolve():
    p = SystemParams(f_s=0.4, g_eff=0.3)
    b, m = model_for(p, 2)
    proto = DrivingProtocol(((0.0, True, True),))
    direct = evolve(m, b.projector(0, 0), 5.0)
    assert trace_distance(run_protocol(p, proto, 5.0, n_max=2), direct.final) < 1e-12


def test_vacuum_stays_before_drive():
    p = SystemParams(f_s=0.4, g_eff=0.3)
    tr = protocol_trajectory(p, protocol_a(3.0, 6.0), 8.0, n_max=1, samples_per_segment=3)
    b = build_basis(1)
    assert np.allclose(tr.states[tr.times <= 3.0], b.projector(0, 0))


def test_xpm_shift_changes_state():
    p = SystemParams(f_s=0.5, g_eff=0.5)
    r0 = run_protocol(p, protocol_a(), 30.0, n_max=2)
    r1 = run_protocol(p, protocol_a(), 30.0, n_max=2, xpm_s=0.5, xpm_i=0.3)
    assert trace_distance(r0, r1) > 1e-3
