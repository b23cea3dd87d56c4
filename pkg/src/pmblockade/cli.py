"""Command-line front end.

Rates are in units of the seed linewidth; only ``materials`` works in SI.
Outputs go to ``--out`` (``-`` for stdout) or, by default, to
``$PMBLOCKADE_OUT_DIR/<subcommand>.<format>`` (current directory when unset).
Every file embeds the resolved configuration.

Exit codes: 0 success, 1 failed ``--check``, 2 configuration error,
3 solver failure, 4 truncation not converged.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comb, materials
from .dynamics import IntegrationError, protocol_a, protocol_b, protocol_trajectory
from .model import SystemParams
from .observables import (blockade_threshold, count_local_maxima, detuning_sweep,
                          peak_occupation_convergence, splitting_scan)
from .steady import NonConvergenceError, SolverError, converge_truncation, trace_distance

OUT_DIR_ENV = "PMBLOCKADE_OUT_DIR"
SUBCOMMANDS = ("sweep", "threshold", "converge", "protocol", "splitting", "materials", "comb")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

log = logging.getLogger("pmblockade")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved run description; serializes to JSON and back unchanged."""

    subcommand: str
    delta: float = 0.0
    f_s: float = 0.1
    g_nl: float = 0.0
    gamma_ratio: float = 0.5
    gamma_i_ratio: float = 1.0
    delta_grid: tuple = (-3.0, 3.0, 121)
    n_max: int | None = None
    auto_n_max: bool = False
    tol: float = 1e-10
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        self.delta_grid = tuple(self.delta_grid)
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if not self.tol > 0:
            raise ConfigError("--tol must be > 0")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError("--nmax must be >= 1")

    def params(self) -> SystemParams:
        try:
            return SystemParams(delta=self.delta, f_s=self.f_s, gamma=self.gamma_ratio,
                                gamma_s=1.0, gamma_i=self.gamma_i_ratio, g_eff=self.g_nl)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> np.ndarray:
        lo, hi, n = self.delta_grid
        return np.linspace(lo, hi, int(n))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["delta_grid"] = list(self.delta_grid)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def parse_grid(text: str) -> tuple:
    """``lo:hi:n`` -> ``(lo, hi, n)`` with ``lo < hi`` and ``n >= 2``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi and n >= 2):
        raise argparse.ArgumentTypeError(f"grid needs finite lo < hi and n >= 2, got {text!r}")
    return lo, hi, n


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model (rates in units of the seed linewidth)")
    g.add_argument("--delta", type=float, default=0.0, help="detuning for single-point runs")
    g.add_argument("--fs", dest="f_s", type=float, default=0.1, help="seed drive amplitude")
    g.add_argument("--gnl", dest="g_nl", type=float, default=0.0, help="effective nonlinear coupling")
    g.add_argument("--gamma-ratio", type=float, default=0.5, help="waveguide coupling / seed linewidth")
    g.add_argument("--gamma-i-ratio", type=float, default=1.0, help="idler / seed linewidth")
    s = common.add_argument_group("numerics and output")
    s.add_argument("--delta-grid", type=parse_grid, default=(-3.0, 3.0, 121), metavar="LO:HI:N")
    s.add_argument("--nmax", dest="n_max", type=int, default=None, help="idler cutoff (seed uses 2x)")
    s.add_argument("--auto-nmax", action="store_true", help="converge the cutoff automatically")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", default=None, help="output file, '-' for stdout")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=0, help="RNG seed for randomized runs")

    p = argparse.ArgumentParser(prog="pmblockade", description=__doc__.splitlines()[0])
    p.add_argument("--check", action="store_true", help="run the analytic self-test suite and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand")

    sub.add_parser("sweep", parents=[common], help="steady-state observables versus detuning")

    t = sub.add_parser("threshold", parents=[common], help="coupling where min g2(0) hits a target")
    t.add_argument("--target", type=float, default=0.5)
    t.add_argument("--bracket", type=_floats, default=[0.05, 1.0], metavar="LO,HI")
    t.add_argument("--xtol", type=float, default=1e-3)
    t.set_defaults(delta_grid=(-2.0, 2.0, 21))

    c = sub.add_parser("converge", parents=[common], help="truncation convergence study")
    c.add_argument("--observable", choices=("peak", "n_s", "n_i", "g2"), default="peak",
                   help="'peak' tracks the maximum occupation over the detuning grid")
    c.add_argument("--rel-tol", type=float, default=1e-2)
    c.add_argument("--nmax-limit", type=int, default=12)

    r = sub.add_parser("protocol", parents=[common], help="time evolution under driving protocols")
    r.add_argument("--label", choices=("A", "B", "both"), default="both")
    r.add_argument("--t1", type=float, default=5.0)
    r.add_argument("--tc", type=float, default=20.0)
    r.add_argument("--t-final", type=float, default=100.0)
    r.add_argument("--samples", type=int, default=51, help="samples per protocol segment")
    r.add_argument("--xpm-s", type=float, default=0.0, help="pump-induced seed shift")
    r.add_argument("--xpm-i", type=float, default=0.0, help="pump-induced idler shift")

    sp_ = sub.add_parser("splitting", parents=[common], help="normalized occupation versus seed drive")
    sp_.add_argument("--fs-list", type=_floats, default=[0.1, 2.5], metavar="F1,F2,...")

    m = sub.add_parser("materials", parents=[common], help="coupling estimates for microring platforms")
    m.add_argument("--power", type=_floats, default=[0.1, 1.0, 10.0], metavar="P1,P2,...",
                   help="pump powers in W")
    m.add_argument("--curves", action="store_true", help="log-spaced 1 uW..10 W curves instead")
    m.add_argument("--platforms", default=None, help="platform INI file (default: bundled)")
    m.add_argument("--target", type=float, default=materials.BLOCKADE_RATIO,
                   help="coupling ratio for the power-threshold column")

    k = sub.add_parser("comb", parents=[common], help="resonances and triplets of a two-ring molecule")
    k.add_argument("--n-eff", type=float, default=2.0)
    k.add_argument("--radius", type=float, default=100e-6, help="large-ring radius, m")
    k.add_argument("--coupling", type=float, default=2 * math.pi * 5e9, help="inter-ring J, rad/s")
    k.add_argument("--m-min", type=int, default=1)
    k.add_argument("--m-max", type=int, default=20)
    return p


_COMMON = {f.name for f in dataclasses.fields(RunConfig)} - {"subcommand", "options"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    d.pop("check", None)
    d.pop("verbose", None)
    sub = d.pop("subcommand")
    common = {k: d.pop(k) for k in list(d) if k in _COMMON}
    common["delta_grid"] = tuple(common["delta_grid"])
    return RunConfig(subcommand=sub, options=d, **common)


# --- output ----------------------------------------------------------------

def output_path(cfg: RunConfig) -> str:
    if cfg.out is not None:
        return cfg.out
    return str(Path(os.environ.get(OUT_DIR_ENV, ".")) / f"{cfg.subcommand}.{cfg.format}")


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".",
                               prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def render_table(cfg: RunConfig, columns: list[str], rows: list[dict], extra: dict | None = None) -> str:
    echo = {"config": cfg.to_dict()}
    if extra:
        echo.update(extra)
    if cfg.format == "json":
        echo["rows"] = rows
        return json.dumps(echo, indent=1, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(echo, sort_keys=True, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    raise TypeError(f"not serializable: {type(o).__name__}")


# --- subcommands -----------------------------------------------------------

def _n_max(cfg: RunConfig, default: int) -> int:
    return default if cfg.n_max is None else cfg.n_max


def cmd_sweep(cfg: RunConfig):
    res = detuning_sweep(cfg.params(), cfg.grid(), n_max=_n_max(cfg, 4), auto_n_max=cfg.auto_n_max,
                         tol=cfg.tol, threads=cfg.threads)
    text = res.to_json(cfg.to_dict()) + "\n" if cfg.format == "json" else res.to_csv(cfg.to_dict())
    g2 = [v for v in res.g2 if v is not None]
    ns = [v for v in res.n_s if v is not None]
    summary = (f"sweep: {len(res.grid)} points, max n_s={max(ns):.6g}, "
               f"min g2={min(g2) if g2 else float('nan'):.6g}, failed={len(res.failed)}, n_max={res.n_max}")
    if res.failed:
        raise SolverError(f"{len(res.failed)} sweep points failed; first: {res.errors[res.failed[0]]}")
    return text, summary


def cmd_threshold(cfg: RunConfig):
    o = cfg.options
    if len(o["bracket"]) != 2:
        raise ConfigError("--bracket needs two values")
    n_max = _n_max(cfg, 4)
    res = blockade_threshold(cfg.params(), o["target"], tuple(o["bracket"]), n_max=n_max,
                             xtol=o["xtol"], tol=cfg.tol, grid=cfg.grid())
    rows = [{"g_nl": g, "min_g2": v} for g, v in res.evaluations]
    text = render_table(cfg, ["g_nl", "min_g2"], rows,
                        {"g_threshold": res.g_threshold, "degenerate": res.degenerate})
    return text, f"threshold: g_nl={res.g_threshold:.6g} for min g2={o['target']}, n_max={n_max}"


def cmd_converge(cfg: RunConfig):
    o = cfg.options
    p = cfg.params()
    if o["observable"] == "peak":
        report = peak_occupation_convergence(p, o["rel_tol"], 1, o["nmax_limit"], cfg.grid(), cfg.tol)
    else:
        _, _, report = converge_truncation(p, (o["observable"],), o["rel_tol"], 1, o["nmax_limit"], cfg.tol)
    rows = report.as_rows()
    cols = list(dict.fromkeys(k for r in rows for k in r))
    text = render_table(cfg, cols, rows, {"converged": report.converged, "final_n_max": report.final_n_max})
    summary = f"converge: {o['observable']} converged={report.converged}, n_max={report.final_n_max}"
    return text, summary, report


def cmd_protocol(cfg: RunConfig):
    o = cfg.options
    p = cfg.params()
    n_max = _n_max(cfg, 3)
    protos = {"A": protocol_a(o["t1"], o["tc"]), "B": protocol_b(o["t1"], o["tc"])}
    labels = ["A", "B"] if o["label"] == "both" else [o["label"]]
    rows, finals = [], {}
    for lab in labels:
        tr = protocol_trajectory(p, protos[lab], o["t_final"], cfg.tol, n_max, o["xpm_s"], o["xpm_i"],
                                 samples_per_segment=o["samples"])
        finals[lab] = tr.final
        for t, ns, ni, g2, drift in tr.rows():
            rows.append({"protocol": lab, "time": t, "n_s": ns, "n_i": ni, "g2": g2, "trace_drift": drift})
    extra = {}
    summary = f"protocol: {','.join(labels)} to t={o['t_final']}, n_max={n_max}"
    if len(finals) == 2:
        extra["trace_distance_AB"] = trace_distance(finals["A"], finals["B"])
        summary += f", trace distance A-B={extra['trace_distance_AB']:.3e}"
    text = render_table(cfg, ["protocol", "time", "n_s", "n_i", "g2", "trace_drift"], rows, extra)
    return text, summary


def cmd_splitting(cfg: RunConfig):
    n_max = _n_max(cfg, 10)
    results = splitting_scan(cfg.params(), cfg.options["fs_list"], cfg.grid(), n_max, cfg.tol, cfg.threads)
    rows, peaks = [], {}
    for res in results:
        f = res.params["f_s"]
        norm = res.normalized_occupation()
        peaks[str(f)] = count_local_maxima(norm) if np.all(np.isfinite(norm)) else None
        rows += [{"f_s": f, "delta": float(x), "n_s_normalized": float(v)} for x, v in zip(res.grid, norm)]
    text = render_table(cfg, ["f_s", "delta", "n_s_normalized"], rows, {"local_maxima": peaks})
    summary = "splitting: local maxima " + ", ".join(f"f_s={k}: {v}" for k, v in peaks.items()) + f", n_max={n_max}"
    return text, summary


def cmd_materials(cfg: RunConfig):
    o = cfg.options
    try:
        plats = materials.load_platforms(o["platforms"])
    except (OSError, materials.PlatformFileError) as exc:
        raise ConfigError(str(exc)) from exc
    if o["curves"]:
        rows = [{"platform": n, "P_p": P, "ratio": r}
                for n, P, r in materials.coupling_curves(plats, materials.power_grid())]
        text = render_table(cfg, ["platform", "P_p", "ratio"], rows)
        return text, f"materials: {len(plats)} platforms x {len(rows) // max(len(plats), 1)} powers"
    powers = o["power"]
    if not powers or any(P < 0 for P in powers):
        raise ConfigError("--power needs non-negative values")
    rows = []
    for p in plats:
        for P in powers:
            ratio, bare, alpha = materials.effective_coupling(p, P)
            rows.append({"platform": p.name, "P_p": P, "ratio": ratio, "reference": p.reference.get(P),
                         "g_nl_ratio": bare, "alpha_p": alpha, "v_g": p.v_g,
                         "P_threshold": materials.power_threshold(p, o["target"])})
    cols = ["platform", "P_p", "ratio", "reference", "g_nl_ratio", "alpha_p", "v_g", "P_threshold"]
    text = render_table(cfg, cols, rows, {"ranking": materials.ranking(plats, powers[0])})
    best = max(rows, key=lambda r: r["ratio"])
    return text, f"materials: {len(plats)} platforms, strongest {best['platform']} ratio={best['ratio']:.3g} at {best['P_p']} W"


def cmd_comb(cfg: RunConfig):
    o = cfg.options
    try:
        spec = comb.MoleculeSpec(o["n_eff"], o["radius"], o["coupling"], o["m_min"], o["m_max"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = json.loads(comb.comb_json(spec))
    if cfg.format == "json":
        doc["config"] = cfg.to_dict()
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        text = render_table(cfg, ["m", "branch", "omega_rad_s", "f_hz"], doc["resonances"],
                            {"triplets": doc["triplets"]})
    return text, f"comb: {len(doc['resonances'])} resonances, {len(doc['triplets'])} triplets"


COMMANDS = {"sweep": cmd_sweep, "threshold": cmd_threshold, "converge": cmd_converge,
            "protocol": cmd_protocol, "splitting": cmd_splitting, "materials": cmd_materials,
            "comb": cmd_comb}


def run(cfg: RunConfig) -> int:
    """Execute a resolved configuration; returns the exit code."""
    t0 = time.perf_counter()
    try:
        out = COMMANDS[cfg.subcommand](cfg)
        text, summary = out[0], out[1]
        path = output_path(cfg)
        write_atomic(path, text)
    except ConfigError as exc:
        print(f"pmblockade: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"pmblockade: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"pmblockade: not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SolverError, IntegrationError, FloatingPointError) as exc:
        print(f"pmblockade: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"pmblockade: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stream = sys.stderr if path == "-" else sys.stdout
    print(f"{summary}, {time.perf_counter() - t0:.2f} s -> {path}", file=stream)
    if len(out) > 2 and not out[2].converged:
        return EXIT_CONVERGENCE
    return EXIT_OK


def _join_grid_values(argv: list[str]) -> list[str]:
    # "-3:3:121" looks like an option to argparse; glue it to its flag
    out, it = [], iter(argv)
    for a in it:
        if a in ("--delta-grid",):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = parser.parse_args(_join_grid_values(argv))
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if ns.check:
        from .selfcheck import run_checks
        return EXIT_OK if run_checks() else EXIT_CHECK
    if ns.subcommand is None:
        parser.print_usage(sys.stderr)
        print("pmblockade: error: a subcommand or --check is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"pmblockade: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
