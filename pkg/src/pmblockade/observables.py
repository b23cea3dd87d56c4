"""Steady-state observables, detuning sweeps and derived searches."""
from __future__ import annotations

import dataclasses
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.signal import find_peaks

from .fock import IDLER, SEED, FockBasis, annihilator, number_operator
from .model import SystemParams, model_for
from .steady import (NonConvergenceError, SolverError, convergence_loop, converge_truncation,
                     residual_norm, steady_state)

log = logging.getLogger(__name__)

#: Below this occupation g2(0) is reported as undefined.
OCCUPATION_FLOOR = 1e-14
IMAG_DISCARD = 1e-10
IMAG_FAIL = 1e-8


class UndefinedG2Error(ArithmeticError):
    """Occupation too small for a meaningful normalized correlation."""


def _real_expectation(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_FAIL:
        raise FloatingPointError(f"{what} has imaginary part {value.imag:.3e}; state corrupted")
    if abs(value.imag) > IMAG_DISCARD:
        log.warning("%s: discarding imaginary residue %.3e", what, value.imag)
    return float(value.real)


def expectation(op, rho: np.ndarray) -> complex:
    return complex(np.sum(op.multiply(np.asarray(rho).T)) if hasattr(op, "multiply")
                   else np.trace(op @ rho))


def mean_occupation(rho: np.ndarray, basis: FockBasis, mode: str = SEED) -> float:
    """``Tr[a^dag a rho]`` for the chosen mode."""
    return _real_expectation(expectation(number_operator(basis, mode), rho), f"<n_{mode}>")


def g2_zero(rho: np.ndarray, basis: FockBasis, mode: str = SEED) -> float:
    """Equal-time ``Tr[a^dag a^dag a a rho] / Tr[a^dag a rho]^2``."""
    a = annihilator(basis, mode)
    ad = a.conj().T
    n = _real_expectation(expectation(ad @ a, rho), f"<n_{mode}>")
    if n < OCCUPATION_FLOOR:
        raise UndefinedG2Error(f"<n_{mode}> = {n:.3e} below floor {OCCUPATION_FLOOR}")
    pairs = _real_expectation(expectation(ad @ ad @ a @ a, rho), f"<a^dag^2 a^2>_{mode}")
    return max(pairs, 0.0) / n**2


def lorentzian_occupation(delta, f_s=0.1, gamma=0.5, gamma_s=1.0):
    """Linear-cavity occupation ``gamma |F|^2 / (delta^2 + (gamma_s/2)^2)``."""
    delta = np.asarray(delta, dtype=float)
    return gamma * abs(f_s) ** 2 / (delta**2 + (gamma_s / 2) ** 2)


def solve_point(params: SystemParams, n_max: int, tol: float = 1e-10) -> dict:
    """Steady state at one parameter point, reduced to the sweep observables."""
    basis, model = model_for(params, n_max)
    rho = steady_state(model, tol)
    n_s = mean_occupation(rho, basis, SEED)
    try:
        g2 = g2_zero(rho, basis, SEED)
    except UndefinedG2Error:
        g2 = None
    return {"n_s": n_s, "n_i": mean_occupation(rho, basis, IDLER), "g2": g2,
            "residual": residual_norm(model, rho), "rho": rho, "basis": basis}


@dataclass
class SweepResult:
    """Observables on a strictly monotone grid; failed points hold ``None``."""

    axis: str
    grid: np.ndarray
    n_s: list
    n_i: list
    g2: list
    residual: list
    n_max: int
    params: dict
    errors: list = field(default_factory=list)
    normalization: float = 1.0

    @property
    def failed(self) -> list[int]:
        return [k for k, e in enumerate(self.errors) if e is not None]

    def normalized_occupation(self) -> np.ndarray:
        return np.array([np.nan if v is None else v / self.normalization for v in self.n_s])

    def rows(self) -> list[dict]:
        return [{"axis": float(x), "n_s": ns, "n_i": ni, "g2": g, "residual": r, "n_max": self.n_max}
                for x, ns, ni, g, r in zip(self.grid, self.n_s, self.n_i, self.g2, self.residual)]

    def to_csv(self, config: dict | None = None) -> str:
        buf = io.StringIO()
        echo = {"axis": self.axis, "n_max": self.n_max, "params": self.params}
        if config:
            echo["config"] = config
        buf.write("# " + json.dumps(echo, sort_keys=True) + "\n")
        buf.write("axis,n_s,n_i,g2,residual,n_max\n")
        for row in self.rows():
            buf.write(",".join([_fmt(row["axis"]), _fmt(row["n_s"]), _fmt(row["n_i"]),
                                _fmt(row["g2"]), _fmt(row["residual"]), str(row["n_max"])]) + "\n")
        return buf.getvalue()

    def to_json(self, config: dict | None = None) -> str:
        doc = {"axis": self.axis, "n_max": self.n_max, "params": self.params,
               "normalization": self.normalization, "rows": self.rows(), "errors": self.errors}
        if config:
            doc["config"] = config
        return json.dumps(doc, indent=1, sort_keys=True)


def _fmt(v) -> str:
    return "null" if v is None else f"{v:.16e}"


def params_snapshot(params: SystemParams) -> dict:
    snap = dataclasses.asdict(params)
    for k, v in snap.items():
        if isinstance(v, complex):
            snap[k] = [v.real, v.imag]
    return snap


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def _map(fn, items, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def choose_n_max(params: SystemParams, grid, rel_tol: float = 1e-2, n_max_start: int = 1,
                 n_max_limit: int = 12, tol: float = 1e-10) -> int:
    """Converge the truncation at the grid point with the largest seed occupation."""
    grid = _check_grid(grid)
    probe = [solve_point(params.with_(delta=float(x)), n_max_start, tol)["n_s"] for x in grid]
    worst = float(grid[int(np.argmax(probe))])
    _, _, report = converge_truncation(params.with_(delta=worst), ("n_s",), rel_tol,
                                       n_max_start, n_max_limit, tol)
    report.raise_if_not_converged()
    return report.final_n_max


def detuning_sweep(params: SystemParams, grid, n_max: int | None = 4, auto_n_max: bool = False,
                   tol: float = 1e-10, threads: int = 1, rel_tol: float = 1e-2,
                   n_max_limit: int = 12) -> SweepResult:
    """Steady-state observables versus ``delta`` (in units of ``gamma_s``).

    With ``auto_n_max`` the cutoff is converged once at the worst-case point
    and then held fixed across the grid.  Solver failures are recorded per
    point and the sweep continues.
    """
    grid = _check_grid(grid)
    if auto_n_max or n_max is None:
        n_max = choose_n_max(params, grid, rel_tol, 1, n_max_limit, tol)

    def one(x):
        try:
            return solve_point(params.with_(delta=float(x)), n_max, tol), None
        except (SolverError, FloatingPointError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    out = _map(one, grid, threads)
    pts = [p for p, _ in out]
    return SweepResult(
        axis="delta", grid=grid,
        n_s=[None if p is None else p["n_s"] for p in pts],
        n_i=[None if p is None else p["n_i"] for p in pts],
        g2=[None if p is None else p["g2"] for p in pts],
        residual=[None if p is None else p["residual"] for p in pts],
        n_max=int(n_max), params=params_snapshot(params), errors=[e for _, e in out],
    )


def _refine(fun, grid, values, argbest, xatol):
    k = argbest
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    if hi <= lo:
        return grid[k], values[k]
    res = minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    if res.fun < values[k]:
        return float(res.x), float(res.fun)
    return float(grid[k]), float(values[k])


DEFAULT_DIP_GRID = np.linspace(-2.0, 2.0, 21)


def min_g2(params: SystemParams, n_max: int = 4, grid=DEFAULT_DIP_GRID, tol: float = 1e-10,
           xatol: float = 1e-4) -> tuple[float, float]:
    """``(delta, g2)`` at the antibunching dip: coarse grid, then bounded Brent refinement."""
    grid = _check_grid(grid)

    def f(x):
        return solve_point(params.with_(delta=float(x)), n_max, tol)["g2"]

    vals = np.array([f(x) for x in grid])
    return _refine(f, grid, vals, int(np.argmin(vals)), xatol)


def peak_occupation(params: SystemParams, n_max: int, grid=np.linspace(-3.0, 3.0, 25),
                    tol: float = 1e-10, xatol: float = 1e-4) -> tuple[float, float]:
    """``(delta, max <n_s>)`` over detuning."""
    grid = _check_grid(grid)

    def neg(x):
        return -solve_point(params.with_(delta=float(x)), n_max, tol)["n_s"]

    vals = np.array([neg(x) for x in grid])
    x, v = _refine(neg, grid, vals, int(np.argmin(vals)), xatol)
    return x, -v


def peak_occupation_convergence(params: SystemParams, rel_tol: float = 1e-2, n_max_start: int = 1,
                                n_max_limit: int = 12, grid=np.linspace(-3.0, 3.0, 25),
                                tol: float = 1e-10):
    """Truncation study of ``Max_delta <n_s>``; returns the report."""

    def evaluate(n_max):
        x, v = peak_occupation(params, n_max, grid, tol)
        return {"max_n_s": v}, x

    _, report = convergence_loop(evaluate, rel_tol, n_max_start, n_max_limit)
    return report


@dataclass
class ThresholdResult:
    g_threshold: float
    degenerate: bool = False
    evaluations: list = field(default_factory=list)


def blockade_threshold(params: SystemParams, target_g2: float = 0.5, bracket=(0.05, 1.0),
                       n_max: int = 4, xtol: float = 1e-3, tol: float = 1e-10,
                       grid=DEFAULT_DIP_GRID) -> ThresholdResult:
    """Smallest ``g_eff`` at which ``min_delta g2(0)`` reaches ``target_g2`` (bisection).

    A target of 1 is degenerate (the linear cavity already sits there): the
    lower bracket edge is returned with ``degenerate=True``.
    """
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise ValueError("bracket must satisfy 0 <= lo < hi")
    if target_g2 >= 1.0:
        return ThresholdResult(lo, degenerate=True)
    if not target_g2 > 0:
        raise ValueError("target_g2 must lie in (0, 1)")
    evals = []

    def f(g):
        _, g2 = min_g2(params.with_(g_eff=float(g)), n_max, grid, tol)
        evals.append((float(g), g2))
        return g2 - target_g2

    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise ValueError(
            f"no sign change of min g2 - {target_g2} on [{lo}, {hi}] ({f_lo:+.3e}, {f_hi:+.3e})")
    g = bisect(f, lo, hi, xtol=xtol)
    return ThresholdResult(float(g), False, evals)


def count_local_maxima(values, rel_prominence: float = 1e-3) -> int:
    """Interior local maxima with prominence above ``rel_prominence * max``."""
    y = np.asarray(values, dtype=float)
    if y.size < 3 or not np.all(np.isfinite(y)):
        raise ValueError("need at least three finite values")
    peaks, _ = find_peaks(y, prominence=rel_prominence * np.max(np.abs(y)))
    return int(len(peaks))


def splitting_scan(params: SystemParams, f_s_grid, delta_grid, n_max: int = 10,
                   tol: float = 1e-10, threads: int = 1) -> list[SweepResult]:
    """One detuning sweep per seed amplitude, normalized by ``|F_s|^2 / gamma_s``."""
    f_s_grid = list(f_s_grid)
    if not f_s_grid:
        raise ValueError("f_s grid must be nonempty")
    out = []
    for f in f_s_grid:
        if f == 0:
            raise ValueError("normalization needs a nonzero seed amplitude")
        res = detuning_sweep(params.with_(f_s=f), delta_grid, n_max=n_max, tol=tol, threads=threads)
        res.normalization = abs(f) ** 2 / params.gamma_s
        out.append(res)
    return out


__all__ = [
    "NonConvergenceError", "SweepResult", "ThresholdResult", "UndefinedG2Error",
    "blockade_threshold", "choose_n_max", "count_local_maxima", "detuning_sweep", "g2_zero",
    "lorentzian_occupation", "mean_occupation", "min_g2", "peak_occupation",
    "peak_occupation_convergence", "solve_point", "splitting_scan",
]
