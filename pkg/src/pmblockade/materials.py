"""Estimate the pump-dressed seed/idler coupling for real microring platforms.

The ratio of the effective nonlinear rate to the seed linewidth is

    g_eff / Gamma_s = (gamma_nl v_g**2 / (2 pi R)) * sqrt(hbar omega_s P / Gamma_s**3)

with Gamma_s = omega_s / Q0 (intrinsic linewidth) and the pump amplitude
|alpha_p| = sqrt(P / (hbar omega_s Gamma_s)).  The group velocity defaults to
c/n; measured values can be supplied per platform.
"""
from __future__ import annotations

import configparser
import logging
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT, hbar as HBAR

log = logging.getLogger(__name__)

OMEGA_TELECOM = 2 * math.pi * 193e12  # rad/s
CROSS_CHECK_RTOL = 0.05
BLOCKADE_RATIO = 0.325

_REQUIRED = ("n", "n2", "Q0", "R", "gamma_nl")
_OPTIONAL = ("v_g", "A_eff", "omega_s")
_REF_KEYS = {"ref_0.1W": 0.1, "ref_1W": 1.0, "ref_10W": 10.0}


class PlatformFileError(ValueError):
    """Schema violation in a platform data file."""


@dataclass(frozen=True)
class MaterialPlatform:
    """Microring device parameters in SI units.

    Parameters
    ----------
    name : str
    n : float
        Linear refractive index.
    n2 : float
        Nonlinear index, m^2/W.
    Q0 : float
        Intrinsic quality factor.
    R : float
        Ring radius, m.
    gamma_nl : float, optional
        Nonlinear parameter, 1/(W m).  Computed from ``n2`` and ``A_eff`` when
        omitted.
    v_g : float, optional
        Group velocity, m/s.  Defaults to ``c / n``.
    A_eff : float, optional
        Effective mode area, m^2.
    omega_s : float
        Working angular frequency, rad/s.
    """

    name: str
    n: float
    n2: float
    Q0: float
    R: float
    gamma_nl: float | None = None
    v_g: float | None = None
    A_eff: float | None = None
    omega_s: float = OMEGA_TELECOM
    geometry: str = "ring"
    source: str = ""
    reference: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for key in ("n", "n2", "Q0", "R", "omega_s", "gamma_nl", "v_g", "A_eff"):
            value = getattr(self, key)
            if value is None:
                continue
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{self.name}: {key} must be finite and > 0, got {value}")
        if self.gamma_nl is None:
            if self.A_eff is None:
                raise ValueError(f"{self.name}: need gamma_nl or A_eff")
            object.__setattr__(self, "gamma_nl", nonlinear_parameter(self.n2, self.A_eff, self.omega_s))
        if self.v_g is None:
            object.__setattr__(self, "v_g", C_LIGHT / self.n)

    @property
    def linewidth(self) -> float:
        """Intrinsic seed linewidth ``omega_s / Q0`` in rad/s."""
        return self.omega_s / self.Q0

    def cross_check(self, rtol: float = CROSS_CHECK_RTOL) -> float | None:
        """Relative mismatch between ``gamma_nl`` and ``omega_s n2 / (A_eff c)``.

        Returns None when ``A_eff`` is absent.  Logs a warning above ``rtol``.
        """
        if self.A_eff is None:
            return None
        expect = nonlinear_parameter(self.n2, self.A_eff, self.omega_s)
        mismatch = abs(self.gamma_nl - expect) / expect
        if mismatch > rtol:
            log.warning("%s: gamma_nl=%g disagrees with n2/A_eff estimate %g (%.1f%%)",
                        self.name, self.gamma_nl, expect, 100 * mismatch)
        return mismatch

    def with_(self, **changes) -> "MaterialPlatform":
        return replace(self, **changes)


def nonlinear_parameter(n2, A_eff, omega_s=OMEGA_TELECOM):
    """Waveguide nonlinear parameter ``omega_s n2 / (A_eff c)`` in 1/(W m)."""
    return omega_s * n2 / (A_eff * C_LIGHT)


def effective_coupling(p: MaterialPlatform, P):
    """Coupling ratio at pump power ``P`` (W, scalar or array).

    Returns
    -------
    ratio : float or ndarray
        ``g_eff / Gamma_s``.
    bare : float
        Single-photon ratio ``g_nl / Gamma_s`` (independent of power).
    alpha : float or ndarray
        Intracavity pump amplitude ``sqrt(P / (hbar omega_s Gamma_s))``.
    """
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("pump power must be >= 0")
    gam = p.linewidth
    bare = HBAR * p.omega_s * p.v_g**2 * p.gamma_nl / (2 * math.pi * p.R * gam)
    alpha = np.sqrt(P / (HBAR * p.omega_s * gam))
    ratio = bare * alpha
    if ratio.ndim == 0:
        return float(ratio), bare, float(alpha)
    return ratio, bare, alpha


def coupling_ratio(p: MaterialPlatform, P):
    return effective_coupling(p, P)[0]


def power_threshold(p: MaterialPlatform, target: float = BLOCKADE_RATIO) -> float:
    """Pump power (W) at which the coupling ratio reaches ``target``."""
    if not target > 0:
        raise ValueError("target ratio must be > 0")
    gam = p.linewidth
    k = p.gamma_nl * p.v_g**2 / (2 * math.pi * p.R)
    return (target / k) ** 2 * gam**3 / (HBAR * p.omega_s)


def bundled_path() -> Path:
    return Path(str(resources.files("pmblockade").joinpath("data/platforms.ini")))


def load_platforms(path=None, include_nonring: bool = False) -> list[MaterialPlatform]:
    """Read platforms from an INI file (the bundled table when ``path`` is None).

    Raises
    ------
    PlatformFileError
        Missing or malformed fields, reported with section and key.
    """
    path = bundled_path() if path is None else Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise PlatformFileError(f"{path}: {exc}") from exc
    if not parser.sections():
        log.warning("%s: no platform records", path)
        return []
    out = []
    for name in parser.sections():
        sec = parser[name]
        geometry = sec.get("geometry", "ring").strip()
        kw = {}
        for key in _REQUIRED + _OPTIONAL:
            if key not in sec:
                if key in _REQUIRED:
                    raise PlatformFileError(f"{path} [{name}]: missing field {key!r}")
                continue
            kw[key] = _number(path, name, key, sec[key])
        ref = {P: _number(path, name, key, sec[key]) for key, P in _REF_KEYS.items() if key in sec}
        try:
            plat = MaterialPlatform(name=name, geometry=geometry, source=sec.get("source", ""),
                                    reference=ref, **kw)
        except ValueError as exc:
            raise PlatformFileError(f"{path} [{name}]: {exc}") from exc
        plat.cross_check()
        if geometry != "ring" and not include_nonring:
            continue
        out.append(plat)
    return out


def _number(path, section, key, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise PlatformFileError(f"{path} [{section}]: field {key!r} is not a number: {text!r}") from None


def power_grid(p_min: float = 1e-6, p_max: float = 10.0, num: int = 61) -> np.ndarray:
    """Log-spaced pump powers in W."""
    if not 0 < p_min < p_max:
        raise ValueError("need 0 < p_min < p_max")
    return np.logspace(math.log10(p_min), math.log10(p_max), num)


def coupling_curves(platforms, powers) -> list[tuple[str, float, float]]:
    """Rows ``(platform, P, ratio)`` for every platform and power."""
    powers = np.asarray(powers, dtype=float)
    rows = []
    for p in platforms:
        ratios = np.atleast_1d(coupling_ratio(p, powers))
        rows += [(p.name, float(P), float(r)) for P, r in zip(powers, ratios)]
    return rows


def ranking(platforms, P: float = 0.1) -> list[str]:
    """Platform names sorted by coupling ratio at power ``P``, strongest first."""
    return [p.name for p in sorted(platforms, key=lambda p: -coupling_ratio(p, P))]
