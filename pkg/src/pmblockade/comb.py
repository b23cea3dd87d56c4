"""Resonance comb of a two-ring photonic molecule (large ring R, small ring R/2).

Every second mode of the large ring coincides with a mode of the small
ring; the coincident pairs hybridize into doublets ``w_bar -/+ J`` while the
modes in between stay bare.  A bare mode flanked by two doublets gives two
equally spaced triplets: ``(w_p^-, w_s, w_i^+)`` and ``(w_p^+, w_s, w_i^-)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

C_LIGHT = 299_792_458.0  # m/s

TRIPLET_REL_TOL = 1e-9


@dataclass(frozen=True)
class MoleculeSpec:
    """Two evanescently coupled rings.

    ``n_eff`` is a number or a callable ``m -> n_eff(m)`` (dispersion hook,
    not validated).  ``J`` is the inter-ring coupling in rad/s.
    """

    n_eff: float | Callable[[int], float]
    R: float
    J: float
    m_min: int = 1
    m_max: int = 40
    radius_ratio: float = 0.5

    def __post_init__(self):
        if not callable(self.n_eff) and not self.n_eff > 1:
            raise ValueError("n_eff must be > 1")
        if not self.R > 0:
            raise ValueError("R must be > 0")
        if self.J < 0:
            raise ValueError("J must be >= 0")
        if not 0 < self.m_min <= self.m_max:
            raise ValueError("azimuthal range must be positive and nonempty")

    def index(self, m: int) -> float:
        return float(self.n_eff(m)) if callable(self.n_eff) else float(self.n_eff)


@dataclass(frozen=True)
class Triplet:
    omega_p: float
    omega_s: float
    omega_i: float
    p_branch: str
    i_branch: str
    m_s: int
    isolated: bool = True
    isolation: float | None = None

    @property
    def mismatch(self) -> float:
        return self.omega_p + self.omega_i - 2 * self.omega_s

    def as_dict(self) -> dict:
        out = {"m_s": self.m_s, "p_branch": self.p_branch, "i_branch": self.i_branch,
               "isolated": self.isolated, "isolation_rad_s": self.isolation}
        for name in ("omega_p", "omega_s", "omega_i"):
            w = getattr(self, name)
            out[f"{name}_rad_s"] = w
            out[f"{name.replace('omega', 'f')}_hz"] = w / (2 * math.pi)
        return out


def free_spectral_range(n_eff: float, R: float) -> float:
    return C_LIGHT / (n_eff * R)


def ring_resonances(n_eff, R: float, m_range) -> list[tuple[int, float]]:
    """``[(m, m c / (n_eff R)), ...]`` in rad/s."""
    ms = list(m_range)
    if not ms or min(ms) <= 0:
        raise ValueError("m_range must be nonempty and positive")
    out = []
    for m in ms:
        n = n_eff(m) if callable(n_eff) else n_eff
        out.append((m, m * C_LIGHT / (n * R)))
    return out


def hybridize(omega_bar: float, J: float) -> tuple[float, float]:
    """Doublet ``(omega_bar - J, omega_bar + J)``."""
    if J < 0:
        raise ValueError("J must be >= 0")
    return omega_bar - J, omega_bar + J


def molecule_spectrum(spec: MoleculeSpec) -> list[tuple[float, str, int]]:
    """All resonances as ``(omega, label, m)`` with label ``'-'``, ``'+'`` or ``'0'`` (bare)."""
    _require_half(spec)
    lines = []
    for m, w in ring_resonances(spec.index, spec.R, range(spec.m_min, spec.m_max + 1)):
        if m % 2 == 0:
            lo, hi = hybridize(w, spec.J)
            lines += [(lo, "-", m), (hi, "+", m)]
        else:
            lines.append((w, "0", m))
    return sorted(lines)


def _require_half(spec: MoleculeSpec) -> None:
    if not math.isclose(spec.radius_ratio, 0.5):
        raise NotImplementedError("only the commensurate ratio 1/2 is supported")


def find_triplets(spec: MoleculeSpec) -> list[Triplet]:
    """Both equally spaced triplets around every bare mode flanked by doublets."""
    _require_half(spec)
    res = dict(ring_resonances(spec.index, spec.R, range(spec.m_min, spec.m_max + 1)))
    spectrum = molecule_spectrum(spec)
    out = []
    for m_s in sorted(res):
        if m_s % 2 == 0 or (m_s - 1) not in res or (m_s + 1) not in res:
            continue
        w_s = res[m_s]
        p_lo, p_hi = hybridize(res[m_s - 1], spec.J)
        i_lo, i_hi = hybridize(res[m_s + 1], spec.J)
        for w_p, w_i, bp, bi in ((p_lo, i_hi, "-", "+"), (p_hi, i_lo, "+", "-")):
            t = Triplet(w_p, w_s, w_i, bp, bi, m_s, isolated=spec.J > 0,
                        isolation=_isolation((w_p, w_s, w_i), spectrum))
            if not callable(spec.n_eff) and abs(t.mismatch) > TRIPLET_REL_TOL * w_s:
                raise ArithmeticError(f"triplet at m={m_s} violates 2 w_s = w_p + w_i")
            out.append(t)
    return out


def _isolation(members, spectrum) -> float:
    """Distance from the triplet to the nearest resonance that is not a member."""
    others = [w for w, _, _ in spectrum if all(abs(w - m) > 1e-12 * m for m in members)]
    if not others:
        return math.inf
    return min(abs(o - m) for o in others for m in members)


def comb_json(spec: MoleculeSpec) -> str:
    lines = [{"omega_rad_s": w, "f_hz": w / (2 * math.pi), "branch": b, "m": m}
             for w, b, m in molecule_spectrum(spec)]
    doc = {"spec": {"n_eff": spec.index(spec.m_min) if callable(spec.n_eff) else spec.n_eff,
                    "R_m": spec.R, "J_rad_s": spec.J, "m_min": spec.m_min, "m_max": spec.m_max},
           "resonances": lines,
           "triplets": [t.as_dict() for t in find_triplets(spec)]}
    return json.dumps(doc, indent=1)
