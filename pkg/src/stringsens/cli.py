"""Command-line front end.

Subcommands take a configuration file (flat ``key = value`` document, see
``parse_config``) and emit JSON reports on stdout or CSV/SVG files:

* ``bound``      -- H-infinity lower-bound report for the loop.
* ``stability``  -- gain-interval stability report.
* ``sweep``      -- frequency sweeps of the network sensitivity (CSV, and
  optionally a self-contained SVG plot).
* ``integral``   -- Bode-type sensitivity integrals, one per network size.
* ``verify``     -- cross-method agreement suite; exits 0 iff the three
  evaluation routes agree.

Exit codes: 0 success, 1 analysis refused (a precondition of the requested
analysis fails), 2 bad input.  All diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, NearPoleError, PremiseError, StringSensError
from .limits import bode_integral, hinf_lower_bound, stable_for_all_gains
from .rational import RationalTF
from .sensitivity import (
    FrequencyGrid,
    sensitivity_eigenproduct,
    sensitivity_linsolve,
    sensitivity_mobius,
    sweep,
)
from .svgplot import write_sweep_svg

_DEFAULTS = {
    "omega_min": 1e-2,
    "omega_max": 1e2,
    "points_per_decade": 2000,
    "scale": "log",
    "cluster_tol": 1e-6,
    "axis_tol": 1e-7,
    "quad_tol": 1e-6,
}

_LIST_KEYS = ("plant_num", "plant_den", "controller_num", "controller_den", "n_values")
_SCALAR_KEYS = ("omega_min", "omega_max", "points_per_decade",
                "cluster_tol", "axis_tol", "quad_tol")
_STRING_KEYS = ("scale",)
_KNOWN_KEYS = set(_LIST_KEYS) | set(_SCALAR_KEYS) | set(_STRING_KEYS)


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated analysis inputs: loop coefficients (ascending powers),
    network sizes, frequency grid, and tolerances."""

    plant_num: tuple
    plant_den: tuple
    controller_num: tuple
    controller_den: tuple
    n_values: tuple
    omega_min: float
    omega_max: float
    points_per_decade: int
    scale: str
    cluster_tol: float
    axis_tol: float
    quad_tol: float

    def loop(self) -> RationalTF:
        plant = RationalTF(list(self.plant_num), list(self.plant_den), self.cluster_tol)
        ctrl = RationalTF(list(self.controller_num), list(self.controller_den), self.cluster_tol)
        return plant * ctrl

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.omega_min, self.omega_max,
                             self.points_per_decade, self.scale)


def _parse_number(tok: str, key: str, line_no: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}': '{tok}' is not a number",
                          key=key, line=line_no) from None


def _parse_value(raw: str, key: str, line_no: int):
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigError(f"line {line_no}: key '{key}': unterminated list",
                              key=key, line=line_no)
        body = raw[1:-1].strip()
        if not body:
            return []
        return [_parse_number(tok.strip(), key, line_no) for tok in body.split(",")]
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if key in _STRING_KEYS:
        return raw
    return _parse_number(raw, key, line_no)


def parse_config(text: str) -> AnalysisConfig:
    """Parse the flat key = value configuration document.

    Lines are ``key = value`` with ``#`` comments; values are numbers,
    ``[a, b, c]`` lists of numbers, or bare words.  Coefficient lists are
    in ascending powers of s (coeffs[k] multiplies s^k).
    """
    table = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}",
                              line=line_no)
        key, _, rest = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key '{key}'", key=key, line=line_no)
        if key in table:
            raise ConfigError(f"line {line_no}: duplicate key '{key}'", key=key, line=line_no)
        table[key] = _parse_value(rest, key, line_no)

    for key in _LIST_KEYS:
        if key not in table:
            raise ConfigError(f"missing required key '{key}'", key=key)
        if not isinstance(table[key], list) or not table[key]:
            raise ConfigError(f"key '{key}' must be a nonempty list of numbers", key=key)
    for key, default in _DEFAULTS.items():
        table.setdefault(key, default)

    n_values = [int(v) for v in table["n_values"]]
    if any(abs(v - n) > 0 for v, n in zip(table["n_values"], n_values)):
        raise ConfigError("n_values must be integers", key="n_values")
    if any(n < 1 for n in n_values):
        raise ConfigError("n_values must be positive", key="n_values")
    if sorted(n_values) != n_values:
        raise ConfigError("n_values must be ascending", key="n_values")

    for key in ("cluster_tol", "axis_tol", "quad_tol"):
        if table[key] <= 0:
            raise ConfigError(f"key '{key}' must be positive", key=key)
    if not table["omega_min"] < table["omega_max"]:
        raise ConfigError("omega_min must be below omega_max", key="omega_min")
    if table["scale"] not in ("log", "linear"):
        raise ConfigError("scale must be 'log' or 'linear'", key="scale")

    return AnalysisConfig(
        plant_num=tuple(table["plant_num"]),
        plant_den=tuple(table["plant_den"]),
        controller_num=tuple(table["controller_num"]),
        controller_den=tuple(table["controller_den"]),
        n_values=tuple(n_values),
        omega_min=float(table["omega_min"]),
        omega_max=float(table["omega_max"]),
        points_per_decade=int(table["points_per_decade"]),
        scale=str(table["scale"]),
        cluster_tol=float(table["cluster_tol"]),
        axis_tol=float(table["axis_tol"]),
        quad_tol=float(table["quad_tol"]),
    )


def load_config(path: str) -> AnalysisConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# JSON serialization helpers
# ---------------------------------------------------------------------------

def _json_number(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def _json_complex(z):
    if z is None:
        return None
    z = complex(z)
    return {"real": z.real, "imag": z.imag}


def bound_report_dict(rep) -> dict:
    pair = None
    if rep.laurent_pair is not None:
        pair = {"leading": _json_complex(rep.laurent_pair[0]),
                "next": _json_complex(rep.laurent_pair[1])}
    return {
        "verdict": rep.verdict,
        "bound_value": _json_number(rep.bound_value),
        "bound_db": _json_number(rep.bound_db),
        "contributing_pole": _json_complex(rep.contributing_pole),
        "multiplicity": rep.multiplicity,
        "laurent_pair": pair,
        "reason": rep.reason,
        "axis_margin": _json_number(rep.axis_margin),
    }


def stability_report_dict(rep) -> dict:
    return {
        "stable_all_gains": rep.stable_all_gains,
        "critical_gains": [{"k": c.k, "omega": c.omega, "boundary": c.boundary}
                           for c in rep.critical_gains],
        "tested_gains": [{"k": k, "stable": ok} for k, ok in rep.tested_gains],
        "gain_interval": list(rep.gain_interval),
    }


def integral_report_dict(rep) -> dict:
    return {
        "n": rep.n,
        "value": rep.value,
        "error_estimate": rep.error_estimate,
        "split_points": list(rep.split_points),
        "truncation_freq": rep.truncation_freq,
        "tail_estimate": rep.tail_estimate,
    }


def _emit_json(obj, stream=None) -> None:
    stream = stream or sys.stdout
    json.dump(obj, stream, indent=2, sort_keys=True)
    stream.write("\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_bound(cfg: AnalysisConfig, args) -> int:
    rep = hinf_lower_bound(cfg.loop(), axis_tol=cfg.axis_tol)
    _emit_json(bound_report_dict(rep))
    return 0


def cmd_stability(cfg: AnalysisConfig, args) -> int:
    rep = stable_for_all_gains(cfg.loop())
    _emit_json(stability_report_dict(rep))
    return 0


def write_sweep_csv(path: str, sweeps) -> None:
    """CSV with one row per frequency: omega, then re/im/ln|S| triplets per
    network size.  Values are shortest round-trip decimals (<= 17
    significant digits), so parsing the file recovers them bit for bit."""
    header = ["omega"]
    for sw in sweeps:
        header += [f"re_S{sw.n}", f"im_S{sw.n}", f"ln_abs_S{sw.n}"]
    lines = [",".join(header)]
    count = len(sweeps[0].omegas)
    for i in range(count):
        row = [repr(float(sweeps[0].omegas[i]))]
        for sw in sweeps:
            v = sw.values[i]
            row += [repr(float(v.real)), repr(float(v.imag)),
                    repr(float(sw.log_mags[i]))]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sidecar(path: str, cfg: AnalysisConfig, command: str) -> None:
    meta = {
        "tool": "stringsens",
        "version": __version__,
        "command": command,
        "config": {
            "plant_num": list(cfg.plant_num),
            "plant_den": list(cfg.plant_den),
            "controller_num": list(cfg.controller_num),
            "controller_den": list(cfg.controller_den),
            "n_values": list(cfg.n_values),
        },
    }
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_sweep(cfg: AnalysisConfig, args) -> int:
    loop = cfg.loop()
    grid = cfg.grid()
    method = args.method
    sweeps = [sweep(loop, n, grid, method=method) for n in cfg.n_values]
    emitted = False
    if args.out:
        write_sweep_csv(args.out, sweeps)
        _sidecar(args.out, cfg, "sweep")
        emitted = True
        if args.svg:
            stem, ext = os.path.splitext(args.out)
            svg_path = (stem if ext else args.out) + ".svg"
            write_sweep_svg(svg_path, sweeps, title="network sensitivity sweep")
    if args.json or not emitted:
        payload = []
        for sw in sweeps:
            payload.append({
                "n": sw.n,
                "method": sw.method,
                "fallback_count": sw.fallback_count,
                "gap_count": sw.gap_count,
                "omega": [float(w) for w in sw.omegas],
                "re": [_json_number(float(v.real)) for v in sw.values],
                "im": [_json_number(float(v.imag)) for v in sw.values],
                "ln_abs": [_json_number(float(m)) for m in sw.log_mags],
            })
        _emit_json(payload)
    return 0


def cmd_integral(cfg: AnalysisConfig, args) -> int:
    loop = cfg.loop()
    tol = args.tol if args.tol is not None else cfg.quad_tol
    reports = [bode_integral(loop, n, tol=tol) for n in cfg.n_values]
    _emit_json([integral_report_dict(r) for r in reports])
    return 0


def cmd_verify(cfg: AnalysisConfig, args) -> int:
    loop = cfg.loop()
    rng = np.random.default_rng(0)
    worst = 0.0
    points = 0
    lo, hi = math.log10(cfg.omega_min), math.log10(cfg.omega_max)
    for n in cfg.n_values:
        omegas = 10.0 ** rng.uniform(lo, hi, size=args.points)
        for w in omegas:
            s = 1j * float(w)
            try:
                ref = sensitivity_linsolve(loop, n, s)
                others = [sensitivity_eigenproduct(loop, n, s)]
                try:
                    others.append(sensitivity_mobius(loop, n, s))
                except StringSensError:
                    pass  # guard band: the closed form declines this point
            except StringSensError:
                continue
            scale = max(abs(ref), 1e-300)
            for v in others:
                worst = max(worst, abs(v - ref) / scale)
            points += 1
    ok = worst <= 1e-7 and points > 0
    _emit_json({"agreement_points": points, "max_relative_deviation": worst,
                "tolerance": 1e-7, "pass": ok})
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stringsens",
        description="Sensitivity limits for string networks of identical agents.")
    parser.add_argument("--version", action="version", version=f"stringsens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the analysis configuration file")
        p.add_argument("--json", action="store_true", help="force JSON on stdout")
        p.add_argument("--tol", type=float, default=None,
                       help="override the quadrature tolerance")
        p.set_defaults(func=func)
        return p

    add("bound", cmd_bound, "H-infinity lower bound from the loop's CRHP poles")
    add("stability", cmd_stability, "stability of 1/(1+k PC) over the gain interval (0,4)")
    p_sweep = add("sweep", cmd_sweep, "frequency sweep of the network sensitivity")
    p_sweep.add_argument("--out", default=None, help="CSV output path")
    p_sweep.add_argument("--svg", action="store_true",
                         help="also write a self-contained SVG next to the CSV")
    p_sweep.add_argument("--method", default="auto",
                         choices=("auto", "mobius", "eigenproduct", "linsolve"))
    add("integral", cmd_integral, "Bode-type sensitivity integral per network size")
    p_verify = add("verify", cmd_verify, "cross-method agreement suite")
    p_verify.add_argument("--points", type=int, default=50,
                          help="random frequencies per network size")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"stringsens: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"stringsens: config error: {exc}", file=sys.stderr)
        return 2
    except (PremiseError, DomainError, NearPoleError) as exc:
        print(f"stringsens: analysis refused: {exc}", file=sys.stderr)
        return 1
    except StringSensError as exc:
        print(f"stringsens: analysis failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"stringsens: i/o error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
