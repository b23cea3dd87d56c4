"""Time evolution of the master equation and piecewise-constant driving protocols.

The reduced model has no pump operator, so "pump on" means the nonlinear
coupling (and any pump-induced frequency shift of seed and idler) takes its
target value, and "pump off" means it vanishes.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import DOP853, RK45

from .fock import IDLER, SEED, FockBasis, build_basis, number_operator
from .liouvillian import LindbladModel, apply, unvec, vec
from .model import SystemParams, seed_idler_model
from .observables import UndefinedG2Error, g2_zero, mean_occupation

_METHODS = {"DOP853": DOP853, "RK45": RK45}


class IntegrationError(RuntimeError):
    """The adaptive integrator could not advance (typically step-size underflow)."""


@dataclass
class Trajectory:
    """Sampled solution of the master equation.

    ``states`` has shape ``(len(times), dim, dim)``.  ``stats`` holds the
    number of accepted steps and generator evaluations.
    """

    times: np.ndarray
    states: np.ndarray
    stats: dict = field(default_factory=dict)
    basis: FockBasis | None = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def trace_drift(self) -> np.ndarray:
        return np.abs(np.trace(self.states, axis1=1, axis2=2) - 1)

    @property
    def hermiticity_error(self) -> np.ndarray:
        return np.abs(self.states - self.states.conj().transpose(0, 2, 1)).max(axis=(1, 2))

    def observable(self, op) -> np.ndarray:
        """``Tr[op rho(t)]`` at every sample (real part)."""
        op = sp.csr_matrix(op)
        return np.array([np.real((op @ r).trace()) for r in self.states])

    def extend(self, other: "Trajectory") -> "Trajectory":
        """Concatenate a later segment, dropping its duplicated first sample."""
        stats = {k: self.stats.get(k, 0) + other.stats.get(k, 0) for k in set(self.stats) | set(other.stats)}
        return Trajectory(np.concatenate([self.times, other.times[1:]]),
                          np.concatenate([self.states, other.states[1:]]), stats, self.basis)

    def rows(self):
        if self.basis is None:
            raise ValueError("trajectory has no basis; observables are undefined")
        for t, r, drift in zip(self.times, self.states, self.trace_drift):
            ns = mean_occupation(r, self.basis, SEED)
            ni = mean_occupation(r, self.basis, IDLER)
            try:
                g2 = g2_zero(r, self.basis, SEED)
            except UndefinedG2Error:
                g2 = None
            yield float(t), ns, ni, g2, float(drift)

    def to_csv(self, config: dict | None = None) -> str:
        buf = io.StringIO()
        if config is not None:
            buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "n_s", "n_i", "g2", "trace_drift"])
        for row in self.rows():
            w.writerow(["null" if v is None else f"{v:.16e}" for v in row])
        return buf.getvalue()


def evolve(model: LindbladModel, rho0, t_final: float, tol: float = 1e-10, t_eval=None,
           method: str = "DOP853", t0: float = 0.0, basis: FockBasis | None = None) -> Trajectory:
    """Integrate ``d rho/dt = L[rho]`` from ``t0`` to ``t_final``.

    Parameters
    ----------
    model : LindbladModel
    rho0 : ndarray
        Initial density matrix.
    t_final : float
        End time, in inverse rate units.
    tol : float
        Relative tolerance of the embedded error estimate; the absolute
        tolerance is ``tol * 1e-2``.
    t_eval : array_like, optional
        Sample times within ``[t0, t_final]``.  Defaults to the end points.
    method : {"DOP853", "RK45"}

    Returns
    -------
    Trajectory
        The trace is not renormalized; inspect ``trace_drift``.

    Raises
    ------
    IntegrationError
        If the step size underflows.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    d = model.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 shape {rho0.shape} does not match model dim {d}")
    if not t_final > t0:
        raise ValueError("t_final must exceed the start time")
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(_METHODS)}")
    samples = np.array([t0, t_final]) if t_eval is None else np.asarray(t_eval, dtype=float)
    if samples.size == 0 or samples[0] < t0 or samples[-1] > t_final or np.any(np.diff(samples) <= 0):
        raise ValueError("t_eval must be strictly increasing within [t0, t_final]")

    def rhs(_t, y):
        return vec(apply(model, unvec(y, d)))

    solver = _METHODS[method](rhs, t0, vec(rho0).copy(), t_final, rtol=tol, atol=tol * 1e-2)
    out = np.empty((samples.size, d, d), dtype=complex)
    k = 0
    while k < samples.size and samples[k] <= t0:
        out[k] = rho0
        k += 1
    steps = 0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at t={solver.t:.6g} after {steps} steps: {msg}")
        steps += 1
        if k < samples.size and samples[k] <= solver.t:
            interp = solver.dense_output()
            while k < samples.size and samples[k] <= solver.t:
                y = solver.y if samples[k] == solver.t else interp(samples[k])
                out[k] = unvec(y, d)
                k += 1
    return Trajectory(samples, out, {"steps": steps, "nfev": solver.nfev}, basis)


def evolve_fixed(model: LindbladModel, rho0, t_final: float, dt: float,
                 basis: FockBasis | None = None) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta, sampled at every step.

    Deterministic reference for golden tests; no error control.
    """
    if not (t_final > 0 and dt > 0):
        raise ValueError("t_final and dt must be > 0")
    n = int(np.ceil(t_final / dt - 1e-12))
    h = t_final / n
    rho = np.asarray(rho0, dtype=complex)
    states = [rho]
    for _ in range(n):
        k1 = apply(model, rho)
        k2 = apply(model, rho + 0.5 * h * k1)
        k3 = apply(model, rho + 0.5 * h * k2)
        k4 = apply(model, rho + h * k3)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states.append(rho)
    return Trajectory(np.linspace(0, t_final, n + 1), np.array(states), {"steps": n, "nfev": 4 * n}, basis)


@dataclass(frozen=True)
class DrivingProtocol:
    """Ordered drive switches ``(time, pump_on, seed_on)``.

    Before the first switch both drives are off.  After the last switch both
    must be on, so all protocols share the same long-time regime.
    """

    schedule: tuple
    label: str = "custom"

    def __post_init__(self):
        sched = tuple((float(t), bool(p), bool(s)) for t, p, s in self.schedule)
        object.__setattr__(self, "schedule", sched)
        if not sched:
            raise ValueError("schedule must not be empty")
        times = [t for t, _, _ in sched]
        if times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("switch times must be non-negative and strictly increasing")
        if sched[-1][1:] != (True, True):
            raise ValueError("both drives must be on after the last switch")

    def segments(self, t_final: float):
        """``(start, stop, pump_on, seed_on)`` covering ``[0, t_final]``."""
        if t_final <= self.schedule[-1][0]:
            raise ValueError("t_final must be after the last switch")
        edges = [0.0] + [t for t, _, _ in self.schedule] + [t_final]
        states = [(False, False)] + [(p, s) for _, p, s in self.schedule]
        return [(a, b, p, s) for a, b, (p, s) in zip(edges, edges[1:], states) if b > a]


def protocol_a(t1: float = 5.0, tc: float = 20.0) -> DrivingProtocol:
    """Pump first, seed from ``tc``."""
    return DrivingProtocol(((t1, True, False), (tc, True, True)), "A")


def protocol_b(t1: float = 5.0, tc: float = 20.0) -> DrivingProtocol:
    """Seed first, pump from ``tc``."""
    return DrivingProtocol(((t1, False, True), (tc, True, True)), "B")


def drive_model(basis: FockBasis, p: SystemParams, pump_on: bool, seed_on: bool,
                xpm_s: float = 0.0, xpm_i: float = 0.0) -> LindbladModel:
    """Seed/idler model with the given drives switched on or off."""
    q = p.with_(g_eff=p.g_eff if pump_on else 0.0, f_s=p.f_s if seed_on else 0.0)
    m = seed_idler_model(basis, q)
    if pump_on and (xpm_s or xpm_i):
        shift = xpm_s * number_operator(basis, SEED) + xpm_i * number_operator(basis, IDLER)
        m = LindbladModel(sp.csr_matrix(m.hamiltonian + shift), m.jump_ops)
    return m


def protocol_trajectory(p: SystemParams, protocol: DrivingProtocol, t_final: float,
                        tol: float = 1e-10, n_max: int = 3, xpm_s: float = 0.0, xpm_i: float = 0.0,
                        rho0=None, samples_per_segment: int = 2) -> Trajectory:
    """Integrate every protocol segment in turn, starting from vacuum by default."""
    basis = build_basis(n_max)
    rho = basis.projector(0, 0).astype(complex) if rho0 is None else np.asarray(rho0, dtype=complex)
    traj = None
    for a, b, pump, seed in protocol.segments(t_final):
        m = drive_model(basis, p, pump, seed, xpm_s, xpm_i)
        seg = evolve(m, rho, b, tol, t_eval=np.linspace(a, b, max(samples_per_segment, 2)),
                     t0=a, basis=basis)
        traj = seg if traj is None else traj.extend(seg)
        rho = seg.final
    return traj


def run_protocol(p: SystemParams, protocol: DrivingProtocol, t_final: float, tol: float = 1e-10,
                 n_max: int = 3, xpm_s: float = 0.0, xpm_i: float = 0.0) -> np.ndarray:
    """Final density matrix after running ``protocol`` from vacuum."""
    return protocol_trajectory(p, protocol, t_final, tol, n_max, xpm_s, xpm_i).final


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``G G^dag / Tr`` with complex Gaussian ``G``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
