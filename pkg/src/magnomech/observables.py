"""Probe-field observables and spectral feature extraction.

The intracavity sideband amplitude c_minus determines everything measured at
the output port: eps_out = 2 kappa_c c_minus / eps_p (real part absorption,
imaginary part dispersion), the transmission T = 1 - eps_out, its phase, and
the group delay tau = Im[(1/T) dT/ddelta]. Spectra can be produced by either
engine: "closed" evaluates the eliminated scalar formula, "oracle" solves the
full 10x10 sideband system. The two must agree; keeping both wired in is the
point.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.signal import find_peaks

from .errors import (FeatureExtractionWarning, GridError,
                     InvalidParameterError, PhaseIllConditionedError)
from .linear_response import build_drift_matrix, c_minus_grid
from .params import SystemConfig
from .response_closed import c_minus_closed
from .steadystate import SteadyState, solve_steady_state

DEFAULT_STEP_FACTOR = 1e-5     # group-delay stencil, in units of omega_d1
DEFAULT_GRID_POINTS = 2001
_T_FLOOR = 1e-12               # |T| below this: phase is meaningless
_CHUNK = 256                   # fixed grid chunk, independent of worker count
ENGINES = ("closed", "oracle")

PROMINENCE_FRACTION = 0.01     # extrema must rise 1% of the absorption max


@dataclass(frozen=True)
class ResponseSpectrum:
    """Observables on a probe-detuning grid.

    tau holds the Richardson-extrapolated group delay; tau_coarse the plain
    central difference at the unrefined step, kept for convergence checks.
    """

    delta_grid: np.ndarray
    eout: np.ndarray
    T: np.ndarray
    phase: np.ndarray
    tau: np.ndarray
    tau_coarse: np.ndarray
    engine: str
    omega_d1: float

    def __post_init__(self):
        for arr in (self.delta_grid, self.eout, self.T, self.phase,
                    self.tau, self.tau_coarse):
            arr.setflags(write=False)

    @property
    def absorption(self) -> np.ndarray:
        return self.eout.real

    @property
    def dispersion(self) -> np.ndarray:
        return self.eout.imag

    @property
    def delta_over_omega_d(self) -> np.ndarray:
        return self.delta_grid / self.omega_d1


@dataclass(frozen=True)
class SpectralFeatures:
    """Extrema of the absorption spectrum Re[eps_out].

    peaks and dips are (delta, value) pairs; value is the peak height for
    peaks and the dip depth (below the lower flanking peak) for dips.
    window_widths and asymmetry align with dips: full width at half depth,
    and (h_R - h_L)/(h_R + h_L) of the flank heights above the dip floor.
    """

    peaks: tuple[tuple[float, float], ...]
    dips: tuple[tuple[float, float], ...]
    window_widths: tuple[float, ...]
    asymmetry: tuple[float, ...]

    @property
    def n_peaks(self) -> int:
        return len(self.peaks)

    @property
    def n_dips(self) -> int:
        return len(self.dips)

    @property
    def max_abs_asymmetry(self) -> float:
        return max((abs(a) for a in self.asymmetry), default=0.0)


class GroupDelay(NamedTuple):
    tau: float          # central difference at the given step
    richardson: float   # (4 tau(h/2) - tau(h)) / 3
    step: float


def output_field(c_minus, eps_p: float, kappa_c: float):
    """eps_out = 2 kappa_c c_minus / eps_p (works on scalars and arrays)."""
    if eps_p <= 0.0:
        raise InvalidParameterError("eps_p must be positive")
    return 2.0 * kappa_c * c_minus / eps_p


def transmission(eout):
    return 1.0 - eout


def _c_minus_evaluator(config: SystemConfig, steady: SteadyState,
                       engine: str) -> Callable[[np.ndarray], np.ndarray]:
    if engine == "closed":
        return lambda deltas: c_minus_closed(config, steady, deltas)
    if engine == "oracle":
        drift = build_drift_matrix(config, steady)
        eps_p = config.drive.eps_p
        return lambda deltas: c_minus_grid(drift, deltas, eps_p)
    raise InvalidParameterError(
        f"unknown engine {engine!r}; expected one of {ENGINES}")


def transmission_evaluator(config: SystemConfig, steady: SteadyState,
                           engine: str = "closed") -> Callable:
    """Callable T(delta) for scalars or arrays, on the chosen engine."""
    cm = _c_minus_evaluator(config, steady, engine)
    kc, eps_p = config.kappa_c, config.drive.eps_p

    def T_at(delta):
        return transmission(output_field(cm(np.asarray(delta, dtype=float)),
                                         eps_p, kc))
    return T_at


def group_delay(transmission_at: Callable, delta: float,
                step: float) -> GroupDelay:
    """tau = Im[(1/T) dT/ddelta] at one point, by central difference.

    Evaluates T at delta and delta +/- step, +/- step/2; raises if any of
    those transmissions is too small for the phase to be well conditioned.
    """
    if step <= 0.0:
        raise InvalidParameterError("step must be positive")
    pts = np.array([delta, delta + step, delta - step,
                    delta + 0.5 * step, delta - 0.5 * step])
    T = np.asarray(transmission_at(pts), dtype=complex)
    if np.min(np.abs(T)) < _T_FLOOR:
        raise PhaseIllConditionedError(
            f"|T| < {_T_FLOOR:g} near delta={delta:.6e}; "
            "group delay is ill-defined at a transmission zero")
    tau_h = float(((T[1] - T[2]) / (2.0 * step * T[0])).imag)
    tau_h2 = float(((T[3] - T[4]) / (step * T[0])).imag)
    return GroupDelay(tau=tau_h, richardson=(4.0 * tau_h2 - tau_h) / 3.0,
                      step=step)


def _thread_count() -> int:
    raw = os.environ.get("MAGNOMECH_THREADS", "").strip()
    if raw:
        n = int(raw)
        if n < 1:
            raise InvalidParameterError("MAGNOMECH_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def sweep_spectrum(config: SystemConfig, engine: str = "closed",
                   grid: Sequence[float] | None = None,
                   steady: SteadyState | None = None,
                   step: float | None = None) -> ResponseSpectrum:
    """Evaluate the full observable set on a probe-detuning grid.

    grid is (delta_min, delta_max, n_points) in rad/s; the default spans
    [0, 2 omega_d1] with 2001 points. Work is split into fixed-size chunks
    handed to a thread pool (size from MAGNOMECH_THREADS); chunking and
    assembly order are independent of the worker count, so results are
    bit-for-bit reproducible. tau at every grid point comes from the
    pointwise evaluator with an off-grid stencil, so even a 2-point grid
    gets full-accuracy central differences.
    """
    omega_d1 = config.spheres[0].omega_d
    if grid is None:
        grid = (0.0, 2.0 * omega_d1, DEFAULT_GRID_POINTS)
    dmin, dmax, n_points = float(grid[0]), float(grid[1]), int(grid[2])
    if n_points < 2:
        raise GridError(f"n_points must be >= 2, got {n_points}")
    if not dmin < dmax:
        raise GridError(f"need delta_min < delta_max, got [{dmin}, {dmax}]")
    if steady is None:
        steady = solve_steady_state(config)
    cm = _c_minus_evaluator(config, steady, engine)
    h = DEFAULT_STEP_FACTOR * omega_d1 if step is None else float(step)

    deltas = np.linspace(dmin, dmax, n_points)
    offsets = (0.0, h, -h, 0.5 * h, -0.5 * h)

    def run_chunk(lo: int, hi: int) -> list[np.ndarray]:
        d = deltas[lo:hi]
        try:
            return [np.asarray(cm(d + off)) for off in offsets]
        except Exception as exc:
            exc.args = (f"grid points [{lo}:{hi}]: {exc}",) + exc.args[1:]
            raise

    spans = [(lo, min(lo + _CHUNK, n_points))
             for lo in range(0, n_points, _CHUNK)]
    workers = _thread_count()
    if workers == 1 or len(spans) == 1:
        results = [run_chunk(lo, hi) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: run_chunk(*s), spans))

    stencil = [np.concatenate([r[k] for r in results]) for k in range(5)]
    kc, eps_p = config.kappa_c, config.drive.eps_p
    eout = output_field(stencil[0], eps_p, kc)
    T = transmission(eout)
    T_stencil = [transmission(output_field(s, eps_p, kc)) for s in stencil[1:]]
    with np.errstate(divide="ignore", invalid="ignore"):
        tau_h = ((T_stencil[0] - T_stencil[1]) / (2.0 * h * T)).imag
        tau_h2 = ((T_stencil[2] - T_stencil[3]) / (h * T)).imag
    return ResponseSpectrum(
        delta_grid=deltas, eout=eout, T=T,
        phase=np.unwrap(np.angle(T)),
        tau=(4.0 * tau_h2 - tau_h) / 3.0, tau_coarse=tau_h,
        engine=engine, omega_d1=omega_d1)


def _half_depth_crossing(x, a, i_dip, level, flank, direction):
    """March from the dip toward one flank until a crosses level."""
    k = i_dip
    while k != flank:
        nxt = k + direction
        if a[nxt] >= level:
            # linear interpolation between samples k and nxt
            frac = (level - a[k]) / (a[nxt] - a[k])
            return x[k] + frac * (x[nxt] - x[k])
        k = nxt
    return x[flank]


def extract_features(spectrum: ResponseSpectrum) -> SpectralFeatures:
    """Locate absorption peaks and transparency dips with their shapes.

    Extrema need a prominence of at least 1% of the absorption maximum.
    Peaks and dips are forced to alternate (of two same-kind neighbours the
    stronger survives). Dip depth is measured from the lower flanking peak,
    width at half that depth, and the asymmetry compares the two flank
    heights above the dip floor.
    """
    a = spectrum.absorption
    x = spectrum.delta_grid
    ref = float(a.max())
    if ref <= 0.0:
        ref = float(a.max() - a.min())
    prominence = PROMINENCE_FRACTION * ref

    peak_idx, _ = find_peaks(a, prominence=prominence)
    dip_idx, _ = find_peaks(-a, prominence=prominence)
    if a[0] > a[1] or a[-1] > a[-2]:
        warnings.warn("absorption still rising at a grid boundary; a peak "
                      "may be clipped, widen the grid",
                      FeatureExtractionWarning, stacklevel=2)

    events: list[tuple[int, str]] = sorted(
        [(int(i), "peak") for i in peak_idx] + [(int(i), "dip") for i in dip_idx])
    if any(b - a_ < 3 for (a_, _), (b, _) in zip(events, events[1:])):
        warnings.warn("adjacent extrema are separated by fewer than 3 grid "
                      "points; refine the grid",
                      FeatureExtractionWarning, stacklevel=2)
    cleaned: list[tuple[int, str]] = []
    for idx, kind in events:
        if cleaned and cleaned[-1][1] == kind:
            prev = cleaned[-1][0]
            better = (a[idx] > a[prev]) if kind == "peak" else (a[idx] < a[prev])
            if better:
                cleaned[-1] = (idx, kind)
        else:
            cleaned.append((idx, kind))

    peaks = tuple((float(x[i]), float(a[i])) for i, k in cleaned if k == "peak")
    dips: list[tuple[float, float]] = []
    widths: list[float] = []
    asym: list[float] = []
    for pos, (idx, kind) in enumerate(cleaned):
        if kind != "dip":
            continue
        left = cleaned[pos - 1][0] if pos > 0 else 0
        right = cleaned[pos + 1][0] if pos + 1 < len(cleaned) else a.size - 1
        h_left = float(a[left] - a[idx])
        h_right = float(a[right] - a[idx])
        depth = min(h_left, h_right)
        level = a[idx] + 0.5 * depth
        lo = _half_depth_crossing(x, a, idx, level, left, -1)
        hi = _half_depth_crossing(x, a, idx, level, right, +1)
        dips.append((float(x[idx]), depth))
        widths.append(float(hi - lo))
        total = h_left + h_right
        asym.append((h_right - h_left) / total if total > 0.0 else 0.0)

    return SpectralFeatures(peaks=peaks, dips=tuple(dips),
                            window_widths=tuple(widths),
                            asymmetry=tuple(asym))


def fano_threshold() -> float:
    """Frozen asymmetry level separating Fano dips from symmetric ones.

    Generated once by scripts/freeze_fano_threshold.py (geometric mean of
    the strongest asymmetry in the detuned preset and the strongest in the
    resonant one) and stored with the package data.
    """
    path = resources.files("magnomech.data").joinpath("fano_threshold.json")
    with path.open("r", encoding="utf-8") as fh:
        return float(json.load(fh)["threshold"])
