"""Command-line interface.

Subcommands:
  steady    solve the drive-only operating point, print a JSON report
  spectrum  probe-response spectrum on a detuning grid, CSV output
  delay     same spectrum with a group-delay summary appended
  sweep     scan one or two config parameters, one observable per point
  validate  physical-regime checks for a config, JSON report

Exit codes: 0 success, 1 numerical failure (no convergence, singular or
ill-conditioned solve), 2 configuration or I/O failure.
"""

from __future__ import annotations

import argparse
import contextlib
import copy
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (ConvergenceError, GridError, InvalidParameterError,
                     NearSingularError, PhaseIllConditionedError,
                     UnknownPathError)
from .linear_response import build_drift_matrix, stability_check
from .observables import (ResponseSpectrum, extract_features, fano_threshold,
                          sweep_spectrum, _thread_count)
from .params import load_config, set_config_path, validate_config
from .steadystate import solve_steady_state

CSV_HEADER = "delta_over_omega_d,re_eout,im_eout,re_T,im_T,phase_rad,tau_us"
_FLOAT = "%.17g"

OBSERVABLE_COLUMNS = {
    "peak_tau": "peak_tau_us",
    "min_tau": "min_tau_us",
    "n_dips": "n_dips",
    "window_width": "window_width_over_omega_d",
}


@dataclass(frozen=True)
class Preset:
    """A named figure configuration: base-config overrides plus a grid.

    overrides maps dotted config paths to values in config-file units (Hz);
    grid is (min, max, n_points) with min/max in units of omega_d1.
    """

    name: str
    description: str
    overrides: dict
    grid: tuple[float, float, int]
    note: str | None = None


def _data_json(name: str):
    path = resources.files("magnomech.data").joinpath(name)
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def preset_names() -> list[str]:
    return sorted(_data_json("presets.json"))


def load_preset(name: str) -> Preset:
    table = _data_json("presets.json")
    if name not in table:
        raise InvalidParameterError(
            f"unknown preset {name!r}; available: {', '.join(sorted(table))}")
    entry = table[name]
    g = entry["grid"]
    return Preset(name=name, description=entry["description"],
                  overrides=dict(entry["overrides"]),
                  grid=(float(g[0]), float(g[1]), int(g[2])),
                  note=entry.get("note"))


def base_config_dict() -> dict:
    return _data_json("base_config.json")


def preset_config_dict(preset: Preset) -> dict:
    raw = base_config_dict()
    for path, value in preset.overrides.items():
        set_config_path(raw, path, value)
    return raw


def _parse_range(text: str, what: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise GridError(f"{what} must look like min:max:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise GridError(f"bad {what} {text!r}: {exc}") from None
    if n < 1:
        raise GridError(f"{what} needs at least one point, got n={n}")
    if n > 1 and not lo < hi:
        raise GridError(f"{what} needs min < max for n>1, got {text!r}")
    return lo, hi, n


def _parse_vary(text: str) -> tuple[str, np.ndarray]:
    if "=" not in text:
        raise InvalidParameterError(
            f"--vary must look like path=min:max:n, got {text!r}")
    path, rng = text.split("=", 1)
    lo, hi, n = _parse_range(rng, f"range for {path}")
    return path.strip(), np.linspace(lo, hi, n)


def _resolve_config(args) -> tuple[dict, tuple[float, float, int]]:
    """Raw config dict plus the delta grid (in omega_d1 units)."""
    grid = (0.0, 2.0, 2001)
    if args.preset is not None:
        preset = load_preset(args.preset)
        raw = preset_config_dict(preset)
        grid = preset.grid
    elif args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        raise InvalidParameterError("provide --preset or --config")
    if getattr(args, "lam_over_kappa", None) is not None:
        raw.setdefault("opa", {})
        raw["opa"]["lambda"] = args.lam_over_kappa * raw["cavity"]["kappa_c"]
    if getattr(args, "grid", None) is not None:
        grid = _parse_range(args.grid, "--grid")
    return raw, grid


def _grid_rads(config, grid) -> tuple[float, float, int]:
    od1 = config.spheres[0].omega_d
    return grid[0] * od1, grid[1] * od1, grid[2]


def _complex_dict(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_csv(fh, spectrum: ResponseSpectrum, invocation: str,
               trailing_comments: tuple[str, ...] = ()) -> None:
    fh.write(f"# {invocation}\n")
    fh.write(CSV_HEADER + "\n")
    x = spectrum.delta_over_omega_d
    for i in range(x.size):
        row = (x[i], spectrum.eout[i].real, spectrum.eout[i].imag,
               spectrum.T[i].real, spectrum.T[i].imag, spectrum.phase[i],
               spectrum.tau[i] * 1e6)
        fh.write(",".join(_FLOAT % v for v in row) + "\n")
    for comment in trailing_comments:
        fh.write(f"# {comment}\n")


def _engine_pair(config, steady, grid_rads):
    closed = sweep_spectrum(config, "closed", grid_rads, steady)
    oracle = sweep_spectrum(config, "oracle", grid_rads, steady)
    num = np.abs(closed.eout - oracle.eout)
    den = np.maximum(np.maximum(np.abs(closed.eout), np.abs(oracle.eout)),
                     1e-300)
    return closed, float((num / den).max())


def _features_dict(spectrum: ResponseSpectrum) -> dict:
    feats = extract_features(spectrum)
    od1 = spectrum.omega_d1
    return {
        "n_peaks": feats.n_peaks,
        "n_dips": feats.n_dips,
        "peaks": [{"delta_over_omega_d": d / od1, "height": h}
                  for d, h in feats.peaks],
        "dips": [{"delta_over_omega_d": d / od1, "depth": depth,
                  "width_over_omega_d": w / od1, "asymmetry": a}
                 for (d, depth), w, a in zip(feats.dips, feats.window_widths,
                                             feats.asymmetry)],
        "max_abs_asymmetry": feats.max_abs_asymmetry,
        "fano_threshold": fano_threshold(),
    }


def _delay_summary(spectrum: ResponseSpectrum) -> dict:
    i_max = int(np.argmax(spectrum.tau))
    i_min = int(np.argmin(spectrum.tau))
    x = spectrum.delta_over_omega_d
    return {
        "peak_tau_us": float(spectrum.tau[i_max] * 1e6),
        "peak_at_delta_over_omega_d": float(x[i_max]),
        "min_tau_us": float(spectrum.tau[i_min] * 1e6),
        "min_at_delta_over_omega_d": float(x[i_min]),
    }


def _dump_json(obj, fh=None) -> None:
    (fh or sys.stdout).write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def cmd_steady(args, invocation: str) -> int:
    raw, _ = _resolve_config(args)
    config = load_config(raw)
    steady = solve_steady_state(config)
    report = validate_config(config, steady)
    out = {
        "c_s": _complex_dict(steady.c_s),
        "n_1s": _complex_dict(steady.n_1s),
        "n_2s": _complex_dict(steady.n_2s),
        "abs_c_s": abs(steady.c_s),
        "abs_n_1s": abs(steady.n_1s),
        "abs_n_2s": abs(steady.n_2s),
        "x_1s": steady.x_1s,
        "x_2s": steady.x_2s,
        "Delta_bar_n1": steady.Delta_bar_n1,
        "Delta_bar_n2": steady.Delta_bar_n2,
        "residual": steady.residual,
        "iterations": steady.iterations,
        "validity": report.as_dict(),
        "all_pass": report.all_pass,
    }
    with _open_out(args.out) as fh:
        _dump_json(out, fh)
    return 0


def cmd_validate(args, invocation: str) -> int:
    raw, _ = _resolve_config(args)
    config = load_config(raw)
    steady = solve_steady_state(config)
    report = validate_config(config, steady)
    with _open_out(args.out) as fh:
        _dump_json({"validity": report.as_dict(), "all_pass": report.all_pass},
                   fh)
    return 0


def _spectrum_common(args, invocation: str, delay_summary: bool) -> int:
    raw, grid = _resolve_config(args)
    config = load_config(raw)
    steady = solve_steady_state(config)
    grid_rads = _grid_rads(config, grid)
    comments: list[str] = []
    if args.engine == "both":
        spectrum, rel = _engine_pair(config, steady, grid_rads)
        comments.append(f"max_rel_diff = {rel:.3e}")
    else:
        spectrum = sweep_spectrum(config, args.engine, grid_rads, steady)
    summary = _delay_summary(spectrum)
    if delay_summary:
        comments.append(
            "peak_tau_us = {0} at delta_over_omega_d = {1}".format(
                _FLOAT % summary["peak_tau_us"],
                _FLOAT % summary["peak_at_delta_over_omega_d"]))
        comments.append(
            "min_tau_us = {0} at delta_over_omega_d = {1}".format(
                _FLOAT % summary["min_tau_us"],
                _FLOAT % summary["min_at_delta_over_omega_d"]))

    wrote_file = args.out is not None
    if wrote_file or not args.features:
        with _open_out(args.out) as fh:
            _write_csv(fh, spectrum, invocation, tuple(comments))
    if args.features:
        _dump_json(_features_dict(spectrum))
    elif delay_summary and wrote_file:
        _dump_json(summary)
    return 0


def cmd_spectrum(args, invocation: str) -> int:
    return _spectrum_common(args, invocation, delay_summary=False)


def cmd_delay(args, invocation: str) -> int:
    return _spectrum_common(args, invocation, delay_summary=True)


def cmd_sweep(args, invocation: str) -> int:
    raw, grid = _resolve_config(args)
    path1, values1 = _parse_vary(args.vary)
    vary2 = _parse_vary(args.vary2) if args.vary2 else None
    if args.engine not in ("closed", "oracle"):
        raise InvalidParameterError(
            "sweep needs a single engine (closed or oracle)")

    if vary2 is None:
        points = [(v1, None) for v1 in values1]
    else:
        points = [(v1, v2) for v1 in values1 for v2 in vary2[1]]

    def run_point(point):
        v1, v2 = point
        raw_i = copy.deepcopy(raw)
        set_config_path(raw_i, path1, float(v1))
        if v2 is not None:
            set_config_path(raw_i, vary2[0], float(v2))
        config = load_config(raw_i)
        steady = solve_steady_state(config)
        stable = stability_check(build_drift_matrix(config, steady)).stable
        spectrum = sweep_spectrum(config, args.engine,
                                  _grid_rads(config, grid), steady)
        if args.observable == "peak_tau":
            value = float(spectrum.tau.max()) * 1e6
        elif args.observable == "min_tau":
            value = float(spectrum.tau.min()) * 1e6
        elif args.observable == "n_dips":
            value = float(extract_features(spectrum).n_dips)
        else:  # window_width: widest transparency window on the grid
            widths = extract_features(spectrum).window_widths
            value = max(widths, default=0.0) / spectrum.omega_d1
        return value, stable

    workers = _thread_count()
    if workers == 1 or len(points) == 1:
        results = [run_point(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_point, points))

    obs_col = OBSERVABLE_COLUMNS[args.observable]
    with _open_out(args.out) as fh:
        fh.write(f"# {invocation}\n")
        if vary2 is None:
            fh.write(f"{path1},{obs_col},stable\n")
            for (v1, _), (value, stable) in zip(points, results):
                fh.write(",".join((_FLOAT % v1, _FLOAT % value,
                                   str(stable).lower())) + "\n")
        else:
            fh.write(f"{path1},{vary2[0]},{obs_col},stable\n")
            for (v1, v2), (value, stable) in zip(points, results):
                fh.write(",".join((_FLOAT % v1, _FLOAT % v2, _FLOAT % value,
                                   str(stable).lower())) + "\n")
    return 0


def _add_common(sub, engine_choices=("closed", "oracle", "both")) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--preset", help="named figure preset "
                                      "(see `magnomech spectrum --help`)")
    sub.add_argument("--engine", choices=list(engine_choices),
                     default="closed", help="response evaluator")
    sub.add_argument("--out", help="output file (default: stdout)")
    sub.add_argument("--grid", help="delta grid min:max:n in omega_d1 units")
    sub.add_argument("--lambda", dest="lam_over_kappa", type=float,
                     help="override OPA gain, in units of kappa_c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnomech",
        description="Probe response of an OPA-assisted cavity with two "
                    "magnomechanical spheres")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("steady", help="solve and report the operating point")
    p.add_argument("--config")
    p.add_argument("--preset")
    p.add_argument("--out")
    p.add_argument("--lambda", dest="lam_over_kappa", type=float)
    p.set_defaults(func=cmd_steady)

    p = subs.add_parser("spectrum",
                        help="absorption/dispersion/transmission CSV")
    _add_common(p)
    p.add_argument("--features", action="store_true",
                   help="print extracted peaks/dips as JSON")
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("delay", help="spectrum plus group-delay summary")
    _add_common(p)
    p.add_argument("--features", action="store_true")
    p.set_defaults(func=cmd_delay)

    p = subs.add_parser("sweep", help="scan config parameters")
    _add_common(p, engine_choices=("closed", "oracle"))
    p.add_argument("--vary", required=True, metavar="PATH=MIN:MAX:N",
                   help="parameter range, values in config-file units (Hz)")
    p.add_argument("--vary2", metavar="PATH=MIN:MAX:N",
                   help="second parameter for a 2-D sweep")
    p.add_argument("--observable", required=True,
                   choices=sorted(OBSERVABLE_COLUMNS),
                   help="scalar reported per sweep point")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("validate", help="physical-regime checks as JSON")
    p.add_argument("--config")
    p.add_argument("--preset")
    p.add_argument("--out")
    p.add_argument("--lambda", dest="lam_over_kappa", type=float)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    invocation = "magnomech " + " ".join(argv)
    try:
        return args.func(args, invocation)
    except (ConvergenceError, NearSingularError, PhaseIllConditionedError,
            np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvalidParameterError, GridError, UnknownPathError, OSError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
