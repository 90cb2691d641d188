"""Command-line front end.

Subcommands: ``trajectory``, ``curve``, ``spectrum``, ``oscillator``, ``verify``.
Exit codes: 0 ok, 1 verification failure, 2 regime or precondition
violation, 3 domain escape during integration, 64 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import classical, quantum
from .model import ChartError, RationalK, RegimeError, SystemParams, cartesian_from_polar
from .presets import PRESETS
from .verify import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_REGIME, EXIT_ESCAPE, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_k(text: str) -> RationalK:
    try:
        return RationalK.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return val


@dataclass
class RunConfig:
    mode: str
    params: Optional[SystemParams] = None
    E: Optional[float] = None
    A: Optional[float] = None
    delta1: float = 0.0
    delta2: float = 0.0
    t_max: Optional[float] = None
    dt_out: Optional[float] = None
    rel_tol: float = 1e-10
    seed: int = 0
    out: Optional[str] = None
    svg: Optional[str] = None

    def __post_init__(self):
        if self.t_max is not None and not self.t_max > 0:
            raise UsageError("t_max must be positive")
        if self.dt_out is not None and not self.dt_out > 0:
            raise UsageError("dt_out must be positive")
        if not 1e-13 <= self.rel_tol <= 1e-6:
            raise UsageError("rel_tol must lie in [1e-13, 1e-6]")


# -- output helpers -----------------------------------------------------------

def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def csv_text(header: Sequence[str], columns: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def svg_polyline(x, y, size: int = 480, pad: int = 12) -> str:
    """Minimal static SVG with one polyline; y grows upwards."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    span = max(np.ptp(x), np.ptp(y), 1e-300)
    scale = (size - 2 * pad) / span
    px = pad + (x - x.min()) * scale
    py = size - pad - (y - y.min()) * scale
    pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n'
            f'<polyline fill="none" stroke="black" stroke-width="1" points="{pts}"/>\n'
            "</svg>\n")


# -- commands -----------------------------------------------------------------

def _system_from_args(args, preset=None) -> SystemParams:
    vals = {}
    for name in ("k", "alpha", "beta", "omega"):
        given = getattr(args, name, None)
        if given is not None:
            vals[name] = given
        elif preset is not None:
            vals[name] = getattr(preset.params, name)
        else:
            raise UsageError(f"--{name} is required without --preset")
    return SystemParams(**vals)


def _classical_config(args) -> RunConfig:
    preset = PRESETS[args.preset] if args.preset else None
    params = _system_from_args(args, preset)

    def pick(name, default=None):
        given = getattr(args, name, None)
        if given is not None:
            return given
        return getattr(preset, name) if preset is not None else default

    energy, sep = pick("E"), pick("A")
    if energy is None or sep is None:
        raise UsageError("--E and --A are required without --preset")
    t_max = getattr(args, "t_max", None)
    if t_max is None:
        t_max = params.k.q * math.pi / (2 * params.omega)
    return RunConfig(mode=args.command, params=params, E=energy, A=sep,
                     delta1=pick("delta1", 0.0), delta2=pick("delta2", 0.0), t_max=t_max,
                     dt_out=getattr(args, "dt_out", None), rel_tol=getattr(args, "rel_tol", 1e-10),
                     out=args.out, svg=getattr(args, "svg", None))


def cmd_trajectory(cfg: RunConfig) -> int:
    params = cfg.params
    consts = classical.curve_constants(params, cfg.E, cfg.A, cfg.delta1, cfg.delta2)
    start = classical.initial_point(params, consts)
    dt_out = cfg.dt_out if cfg.dt_out is not None else cfg.t_max / 2000
    traj = classical.integrate(params, start, cfg.t_max, rel_tol=cfg.rel_tol, dt_out=dt_out,
                               consts=consts)
    rho, sigma, prho, psigma = traj.states.T
    u, v, _, _ = cartesian_from_polar(rho, sigma, prho, psigma)
    header = ["t", "u", "v", "rho", "sigma", "p_rho", "p_sigma", "H", "A_phase", "L",
              "curve_residual"]
    emit(cfg.out, csv_text(header, [traj.t, u, v, rho, sigma, prho, psigma, traj.H,
                                    traj.A_phase, traj.L, traj.curve_residual]))
    if cfg.svg:
        write_atomic(cfg.svg, svg_polyline(u, v))
    if traj.escaped:
        print(f"domain escape at t = {traj.escape_time}: rho or sigma reached 0",
              file=sys.stderr)
        return EXIT_ESCAPE
    return EXIT_OK


def cmd_curve(cfg: RunConfig, samples: int) -> int:
    consts = classical.curve_constants(cfg.params, cfg.E, cfg.A, cfg.delta1, cfg.delta2)
    c = classical.implicit_curve(cfg.params, consts, samples)
    header = ["theta", "Z", "W", "rho", "sigma", "u", "v"]
    emit(cfg.out, csv_text(header, [c[h] for h in header]))
    if cfg.svg:
        write_atomic(cfg.svg, svg_polyline(c["u"], c["v"]))
    return EXIT_OK


def spectrum_rows(spec: quantum.SpectrumData):
    levels = sorted(spec.levels, key=lambda lv: (lv.n, lv.m))
    rows = []
    for lv in levels:
        partners = [f"{o.m}:{o.n}" for o in levels
                    if (o.m, o.n) != (lv.m, lv.n)
                    and math.isclose(o.E_mn, lv.E_mn, rel_tol=1e-12, abs_tol=1e-12)]
        rows.append((lv, " ".join(partners)))
    return rows


def cmd_spectrum(params: SystemParams, m_max: int, out: Optional[str]) -> int:
    spec = quantum.spectrum(params, m_max=m_max)
    rows = spectrum_rows(spec)
    header = ["n", "m", "A_n", "sqrt_minus_A_n", "E_mn", "degenerate_with"]
    cols = [[str(lv.n) for lv, _ in rows], [str(lv.m) for lv, _ in rows],
            [lv.A_n for lv, _ in rows], [lv.lam for lv, _ in rows],
            [lv.E_mn for lv, _ in rows], [d for _, d in rows]]
    emit(out, csv_text(header, cols))
    return EXIT_OK


def cmd_oscillator(a: float, b: float, omega: float, t_max: float, dt_out: float,
                   out: Optional[str]) -> int:
    n = int(math.floor(t_max / dt_out + 1e-9))
    t = dt_out * np.arange(n + 1)
    s = classical.oscillator_trajectory(a, b, omega, t)
    energy = s.energy_phase
    sep = (s.v * s.p_u + s.u * s.p_v) ** 2
    header = ["t", "u", "v", "p_u", "p_v", "rho", "sigma", "p_rho", "p_sigma", "E", "A"]
    emit(out, csv_text(header, [s.t, s.u, s.v, s.p_u, s.p_v, s.rho, s.sigma, s.p_rho,
                                s.p_sigma, energy, sep]))
    want = (omega * a * b) ** 2
    ok = ~s.singular
    chart_sep = s.separation_phase[ok]
    bad = (np.abs(sep - want) > 1e-9 * max(1.0, want)).any() or \
        (np.abs(chart_sep - want) > 1e-9 * max(1.0, want)).any()
    if bad:
        print("oscillator check failed: A differs from omega^2 a^2 b^2", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(names, seed: int, json_path: Optional[str], workers: int) -> int:
    reports = run_suites(names, seed=seed, workers=workers)
    for r in reports:
        status = "PASS" if r["pass"] else "FAIL"
        extra = f"  ({r['error']})" if "error" in r else ""
        print(f"{status} {r['suite']:<11} cases={r['cases']:<5} max_error={r['max_error']:.3g}{extra}")
    if json_path:
        clean = [{k: r[k] for k in ("suite", "cases", "max_error", "pass")} for r in reports]
        for r in clean:
            if not math.isfinite(r["max_error"]):
                r["max_error"] = None
        write_atomic(json_path, json.dumps(clean, indent=2) + "\n")
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_VERIFY


# -- argument parsing ---------------------------------------------------------

def _add_system(p, required=False):
    p.add_argument("--k", type=_parse_k, required=required, help="k as p/q or an integer")
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--beta", type=float, required=required)
    p.add_argument("--omega", type=_positive, required=required)


def _add_orbit(p):
    p.add_argument("--preset", choices=sorted(PRESETS), help="figure parameter set")
    _add_system(p)
    p.add_argument("--E", type=float, help="energy")
    p.add_argument("--A", type=float, help="separation constant")
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta2", type=float)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg", help="optional SVG polyline of (u, v)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="e11super", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trajectory", help="integrate one bounded orbit")
    _add_orbit(p)
    p.add_argument("--t-max", type=_positive, help="default: q pi / (2 omega)")
    p.add_argument("--dt-out", type=_positive, help="sample spacing (default t_max/2000)")
    p.add_argument("--rel-tol", type=float, default=1e-10)

    p = sub.add_parser("curve", help="closed orbit from the implicit curve, no integration")
    _add_orbit(p)
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("spectrum", help="bound-state table")
    _add_system(p, required=True)
    p.add_argument("--m-max", type=int, default=3)
    p.add_argument("--out")

    p = sub.add_parser("oscillator", help="closed-form free oscillator samples")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--omega", type=_positive, required=True)
    p.add_argument("--t-max", type=_positive, required=True)
    p.add_argument("--dt-out", type=_positive, required=True)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", action="append", choices=["all", *SUITES],
                   help="suite to run; repeatable (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write the JSON report here")
    p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("trajectory", "curve"):
            cfg = _classical_config(args)
            if args.command == "trajectory":
                return cmd_trajectory(cfg)
            return cmd_curve(cfg, args.samples)
        if args.command == "spectrum":
            if args.m_max < 0:
                raise UsageError("--m-max must be non-negative")
            params = SystemParams(args.k, args.alpha, args.beta, args.omega)
            return cmd_spectrum(params, args.m_max, args.out)
        if args.command == "oscillator":
            return cmd_oscillator(args.a, args.b, args.omega, args.t_max, args.dt_out, args.out)
        names = args.suite or ["all"]
        names = list(SUITES) if "all" in names else list(dict.fromkeys(names))
        return cmd_verify(names, args.seed, args.json, args.workers)
    except UsageError as exc:
        print(f"e11super: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RegimeError, ChartError) as exc:
        print(f"e11super: precondition violated: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except classical.DomainEscape as exc:
        print(f"e11super: domain escape: {exc}", file=sys.stderr)
        return EXIT_ESCAPE


if __name__ == "__main__":
    sys.exit(main())
