"""Photon blockade in a strongly driven photonic molecule.

Steady states of the effective two-mode chi(2) seed/idler model under a
Lindblad master equation, plus resonator-comb and material estimates.
"""
from .comb import MoleculeSpec, Triplet, find_triplets, molecule_spectrum
from .dynamics import (DrivingProtocol, IntegrationError, Trajectory, evolve, protocol_a,
                       protocol_b, run_protocol)
from .fock import FockBasis, TruncationError, annihilator, build_basis, number_operator
from .liouvillian import LindbladModel, apply, vectorize
from .materials import (MaterialPlatform, effective_coupling, load_platforms,
                        nonlinear_parameter, power_threshold)
from .model import (FullModelParams, PumpParams, SystemParams, effective_hamiltonian,
                    full_hamiltonian, gauge_fix, kerr_pump_hamiltonian, model_for)
from .observables import (SweepResult, blockade_threshold, detuning_sweep, g2_zero,
                          mean_occupation, splitting_scan)
from .steady import (ConvergenceReport, NonConvergenceError, SolverError, converge_truncation,
                     pump_steady_state, steady_state)

__version__ = "0.1.0"
