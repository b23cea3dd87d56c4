"""Steady states of the Lindblad generator.

The fixed point is obtained from the vectorized system with one diagonal
equation replaced by the trace condition ``sum_n rho_nn = 1``.  Small systems
are factorized directly (sparse LU); larger ones are solved with restarted
GMRES, right-preconditioned by the inverse of the no-jump part
``rho -> -i (H_eff rho - rho H_eff^dag)``.  That inverse is a Sylvester solve
done in the Schur basis of ``H_eff``, so each iteration costs a few dense
``dim x dim`` products instead of a factorization of the ``dim**2`` system.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg.lapack import ztrsyl

from .fock import IDLER, SEED, FockBasis, destroy
from .liouvillian import LindbladModel, apply, unvec, vec, vectorize
from .model import PumpParams, SystemParams, kerr_pump_model, model_for

log = logging.getLogger(__name__)

#: Above this Hilbert dimension ``method="auto"`` switches to GMRES.
DIRECT_DIM_LIMIT = 36
#: Direct factorization is still attempted as a fallback up to this dimension.
DIRECT_FALLBACK_DIM = 120

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


class SolverError(RuntimeError):
    """The steady-state linear solve failed or returned an invalid state."""


class NonConvergenceError(RuntimeError):
    """A truncation or cutoff loop hit its limit without stabilizing."""


def check_density_matrix(rho: np.ndarray, herm_tol: float = HERMITIAN_TOL,
                         trace_tol: float = TRACE_TOL, pos_tol: float = POSITIVITY_TOL) -> float:
    """Validate Hermiticity, unit trace and positivity; return the smallest eigenvalue."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace {tr} != 1")
    lam_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lam_min < -pos_tol:
        raise ValueError(f"density matrix not positive: min eigenvalue {lam_min:.3e}")
    return lam_min


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def residual_norm(model: LindbladModel, rho: np.ndarray) -> float:
    """Relative residual ``||L[rho]||_F / (scale * ||rho||_F)``."""
    return float(np.linalg.norm(apply(model, rho)) / (model.scale() * np.linalg.norm(rho)))


def steady_state(model: LindbladModel, tol: float = 1e-10, method: str = "auto",
                 trace_index: int = 0) -> np.ndarray:
    """Unique steady state of ``model`` as a dense Hermitian, unit-trace array.

    Parameters
    ----------
    model : LindbladModel
    tol : float
        Bound on :func:`residual_norm` of the returned state.
    method : {"auto", "direct", "iterative"}
    trace_index : int
        Basis state whose diagonal equation is traded for the trace
        condition.  The vacuum (index 0) carries most weight at weak drive.

    Raises
    ------
    SolverError
        Singular/ill-conditioned system, residual above ``tol``, or a
        result that is not a valid density matrix.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    d = model.dim
    if not 0 <= trace_index < d:
        raise ValueError(f"trace_index {trace_index} out of range for dim {d}")
    if method == "auto":
        method = "direct" if d <= DIRECT_DIM_LIMIT else "iterative"
    if method == "direct":
        rho = _solve_direct(model, trace_index)
    elif method == "iterative":
        try:
            rho = _solve_iterative(model, tol, trace_index)
        except SolverError:
            if d > DIRECT_FALLBACK_DIM:
                raise
            log.warning("GMRES failed at dim=%d, falling back to sparse LU", d)
            rho = _solve_direct(model, trace_index)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finalize(model, rho, tol)


def _finalize(model: LindbladModel, rho: np.ndarray, tol: float) -> np.ndarray:
    if not np.all(np.isfinite(rho)):
        raise SolverError("steady-state solve produced non-finite entries")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if not tr > 0:
        raise SolverError(f"steady-state trace {tr} is not positive")
    rho = rho / tr
    res = residual_norm(model, rho)
    if res > tol:
        raise SolverError(f"steady-state residual {res:.3e} exceeds tol {tol:.1e}")
    try:
        check_density_matrix(rho)
    except ValueError as exc:
        raise SolverError(str(exc)) from exc
    return rho


def _trace_row_system(model: LindbladModel, trace_index: int):
    d = model.dim
    sup = vectorize(model)
    row = trace_index * (d + 1)
    keep = np.ones(d * d)
    keep[row] = 0.0
    trow = sp.csr_matrix((np.ones(d), (np.full(d, row), np.arange(d) * (d + 1))), shape=sup.shape)
    a = sp.diags(keep) @ sup + trow
    b = np.zeros(d * d, dtype=complex)
    b[row] = 1.0
    return sp.csc_matrix(a), b


def _solve_direct(model: LindbladModel, trace_index: int) -> np.ndarray:
    a, b = _trace_row_system(model, trace_index)
    try:
        x = spla.splu(a).solve(b)
    except RuntimeError as exc:
        raise SolverError(f"trace-constrained Liouvillian is singular: {exc}") from exc
    return unvec(x, model.dim)


class _NoJumpInverse:
    """Applies the inverse of ``rho -> -i (H_eff rho - rho H_eff^dag)``."""

    def __init__(self, model: LindbladModel):
        heff = model.effective_hamiltonian().toarray()
        self.t, self.u = la.schur(heff, output="complex")
        self.uh = self.u.conj().T

    def __call__(self, y: np.ndarray) -> np.ndarray:
        # H_eff X - X H_eff^dag = i Y  <=>  T Z - Z T^dag = i U^dag Y U
        c = 1j * (self.uh @ y @ self.u)
        z, scale, info = ztrsyl(self.t, self.t, c, trana="N", tranb="C", isgn=-1)
        if info < 0:
            raise SolverError(f"ztrsyl argument error {info}")
        return (self.u @ z @ self.uh) / scale


def _solve_iterative(model: LindbladModel, tol: float, trace_index: int,
                     restart: int = 200, max_restarts: int = 15) -> np.ndarray:
    d = model.dim
    row = trace_index * (d + 1)
    precond = _NoJumpInverse(model)

    def matvec(y):
        x = precond(unvec(y, d))
        out = vec(apply(model, x))
        out[row] = np.trace(x)
        return out

    op = spla.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    b = np.zeros(d * d, dtype=complex)
    b[row] = 1.0
    # L has norm ~scale; tighten so the final relative residual meets tol
    y, info = spla.gmres(op, b, rtol=min(tol, 1e-8) * 1e-2, atol=0.0,
                         restart=restart, maxiter=max_restarts)
    if info != 0:
        x = precond(unvec(y, d))
        res = np.linalg.norm(apply(model, x)) / (model.scale() * max(np.linalg.norm(x), 1e-300))
        if not res <= tol:
            raise SolverError(f"GMRES did not converge (info={info}, residual {res:.3e})")
    return precond(unvec(y, d))


# --- truncation convergence ------------------------------------------------

@dataclass
class ConvergenceStep:
    n_max: int
    values: dict
    rel_change: dict | None


@dataclass
class ConvergenceReport:
    """Append-only record of an increasing-cutoff study."""

    rel_tol: float
    steps: list = field(default_factory=list)
    converged: bool = False
    final_n_max: int | None = None

    def append(self, step: ConvergenceStep) -> None:
        self.steps.append(step)

    def raise_if_not_converged(self) -> None:
        if not self.converged:
            last = self.steps[-1].n_max if self.steps else None
            raise NonConvergenceError(
                f"observables not stable to {self.rel_tol} up to n_max={last}")

    def as_rows(self) -> list[dict]:
        rows = []
        for s in self.steps:
            row = {"n_max": s.n_max}
            row.update(s.values)
            if s.rel_change:
                row.update({f"rel_change_{k}": v for k, v in s.rel_change.items()})
            rows.append(row)
        return rows


def relative_change(new: float, old: float, floor: float = 1e-14) -> float:
    return abs(new - old) / max(abs(new), floor)


def convergence_loop(evaluate: Callable[[int], tuple[dict, object]], rel_tol: float,
                     n_max_start: int, n_max_limit: int):
    """Increase ``n_max`` until every value in ``evaluate(n_max)[0]`` changes
    by less than ``rel_tol`` from the previous cutoff.

    Returns the payload of the last evaluation and the report.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be > 0")
    if n_max_start < 1:
        raise ValueError("n_max_start must be >= 1")
    if n_max_limit <= n_max_start:
        raise ValueError("n_max_limit must exceed n_max_start")
    report = ConvergenceReport(rel_tol=rel_tol)
    prev = None
    payload = None
    for n_max in range(n_max_start, n_max_limit + 1):
        values, payload = evaluate(n_max)
        change = None
        if prev is not None:
            change = {k: relative_change(values[k], prev[k]) for k in values}
        report.append(ConvergenceStep(n_max, dict(values), change))
        if change is not None and all(c < rel_tol for c in change.values()):
            report.converged = True
            report.final_n_max = n_max
            return payload, report
        prev = values
    report.final_n_max = n_max_limit
    log.warning("truncation did not converge to %g by n_max=%d", rel_tol, n_max_limit)
    return payload, report


def _state_observable(name: str) -> Callable[[FockBasis, np.ndarray], float]:
    from . import observables

    table = {
        "n_s": lambda b, r: observables.mean_occupation(r, b, SEED),
        "n_i": lambda b, r: observables.mean_occupation(r, b, IDLER),
        "g2": lambda b, r: observables.g2_zero(r, b, SEED),
    }
    if name not in table:
        raise ValueError(f"unknown observable {name!r}; choose from {sorted(table)}")
    return table[name]


def converge_truncation(params: SystemParams, observables: Iterable = ("n_s",),
                        rel_tol: float = 1e-2, n_max_start: int = 1, n_max_limit: int = 12,
                        tol: float = 1e-10, strict: bool = False):
    """Steady state at increasing ``n_max`` until the observables settle.

    ``observables`` holds names (``"n_s"``, ``"n_i"``, ``"g2"``) or callables
    ``f(basis, rho) -> float``.  Returns ``(rho, basis, report)``; with
    ``strict=True`` a failed study raises :class:`NonConvergenceError`.
    """
    funcs = {}
    for ob in observables:
        if callable(ob):
            funcs[getattr(ob, "__name__", repr(ob))] = ob
        else:
            funcs[ob] = _state_observable(ob)

    def evaluate(n_max):
        basis, model = model_for(params, n_max)
        rho = steady_state(model, tol)
        return {k: float(f(basis, rho)) for k, f in funcs.items()}, (rho, basis)

    (rho, basis), report = convergence_loop(evaluate, rel_tol, n_max_start, n_max_limit)
    if strict:
        report.raise_if_not_converged()
    return rho, basis, report


# --- pump mode ---------------------------------------------------------------

MAX_PUMP_CUTOFF = 1024


def initial_pump_cutoff(p: PumpParams) -> int:
    n_lin = abs(p.linear_amplitude()) ** 2
    return max(8, math.ceil(4 * n_lin) + 4, int(p.n_max_pump))


def pump_steady_state(p: PumpParams, tol: float = 1e-8,
                      max_cutoff: int = MAX_PUMP_CUTOFF) -> tuple[complex, float]:
    """Steady ``<a_p>`` and ``<n_p>`` of the driven Kerr pump mode.

    The cutoff starts at ``max(8, ceil(4 |alpha_lin|^2) + 4)`` and is doubled
    until both values change by less than ``tol`` (relative, floored at 1).
    """
    cutoff = initial_pump_cutoff(p)
    prev = None
    while cutoff <= max_cutoff:
        model = kerr_pump_model(p, cutoff)
        rho = steady_state(model, tol=min(1e-10, tol))
        a = destroy(cutoff)
        alpha = complex(np.trace(a @ rho))
        n_p = float(np.trace((a.conj().T @ a) @ rho).real)
        if prev is not None:
            d_alpha = abs(alpha - prev[0]) / max(1.0, abs(alpha))
            d_n = abs(n_p - prev[1]) / max(1.0, n_p)
            if d_alpha < tol and d_n < tol:
                return alpha, n_p
        prev = (alpha, n_p)
        cutoff *= 2
    raise NonConvergenceError(
        f"pump steady state not stable to {tol} below cutoff {max_cutoff}")


@dataclass(frozen=True)
class PumpDressing:
    """Seed/idler parameters induced by a steadily driven pump mode."""

    alpha_p: complex
    n_p: float
    g_eff: float
    gauge_phase: float
    xpm_s: float
    xpm_i: float


def pump_dressing(p: PumpParams, g_nl: float, g_psps: float = 0.0, g_pipi: float = 0.0,
                  tol: float = 1e-8) -> PumpDressing:
    """Effective coupling ``g_nl alpha_p`` and XPM shifts ``g_p.p. <n_p>``."""
    from .model import gauge_fix

    alpha, n_p = pump_steady_state(p, tol)
    g_eff, phase = gauge_fix(g_nl * alpha)
    return PumpDressing(alpha, n_p, g_eff, phase, g_psps * n_p, g_pipi * n_p)
