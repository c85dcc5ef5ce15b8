"""Parameter model: unit conventions, derived quantities, physical validation.

Config files state plain frequencies in hertz (the omega/2pi numbers usually
quoted for these systems); the loader multiplies by 2*pi exactly once, so
every frequency-like attribute on the dataclasses below is angular (rad/s).
Magnetic fields are tesla, lengths meters, phases radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

from .errors import InvalidParameterError, UnknownPathError

TWO_PI = 2.0 * math.pi
HBAR = 1.054571817e-34  # J s

# Bare magnomechanical rate used to synthesize magnon amplitudes when the
# effective coupling is given directly (rad/s).
R0_REFERENCE = TWO_PI * 0.2


@dataclass(frozen=True)
class PhysicalConstants:
    """Material constants for YIG spheres."""

    gamma_r: float = TWO_PI * 28.0e9  # gyromagnetic ratio, rad/s/T
    nu: float = 4.22e27               # spin density, 1/m^3
    s: float = 2.5                    # ground-state spin of Fe3+
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("gamma_r", "nu", "s", "hbar"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"constants.{name} must be positive")


@dataclass(frozen=True)
class SphereParams:
    """One YIG sphere: magnon mode, phonon mode, and their couplings.

    Exactly one of R0 (bare magnomechanical rate, microscopic mode) or R_eff
    (drive-enhanced effective rate, as figure-style parameter sets quote it)
    must be set. Couplings may be zero; damping rates must be positive.
    """

    omega_n: float          # magnon frequency, rad/s
    kappa_n: float          # magnon dissipation, rad/s
    r: float                # magnon-cavity coupling, rad/s
    omega_d: float          # phonon frequency, rad/s
    gamma_d: float          # phonon damping, rad/s
    R0: Optional[float] = None
    R_eff: Optional[float] = None
    diameter: Optional[float] = None  # m, required for microscopic mode

    def __post_init__(self):
        if (self.R0 is None) == (self.R_eff is None):
            raise InvalidParameterError("set exactly one of R0 / R_eff per sphere")
        for name in ("omega_n", "kappa_n", "omega_d", "gamma_d"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"sphere {name} must be positive")
        # couplings may vanish (decoupled mode) but not be negative
        if self.r < 0:
            raise InvalidParameterError("sphere r must be >= 0")
        coupling = self.R0 if self.R0 is not None else self.R_eff
        if coupling < 0:
            raise InvalidParameterError("sphere R0/R_eff must be >= 0")
        if self.diameter is not None and self.diameter <= 0:
            raise InvalidParameterError("sphere diameter must be positive")


@dataclass(frozen=True)
class DriveParams:
    """Strong control drive (a magnetic field on one magnon) plus the probe."""

    B: float = 0.0                 # drive field amplitude, T
    omega_0: float = 0.0           # drive frequency, rad/s
    target_sphere: int = 1         # the control field only drives magnon n_1
    eps_p: float = 1.0             # probe amplitude; observables are eps_p-free

    def __post_init__(self):
        if self.B < 0:
            raise InvalidParameterError("drive.B must be >= 0")
        if self.omega_0 <= 0:
            raise InvalidParameterError("drive.omega_0 must be positive")
        if self.target_sphere not in (1, 2):
            raise InvalidParameterError("drive.target_sphere must be 1 or 2")
        if self.eps_p <= 0:
            raise InvalidParameterError("drive.eps_p must be positive")


@dataclass(frozen=True)
class OpaParams:
    """Degenerate parametric amplifier: gain and pump phase."""

    lam: float = 0.0    # gain, rad/s
    theta: float = 0.0  # pump phase, rad, stored in [0, 2*pi)

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameterError("opa.lambda must be >= 0")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class DetuningOverrides:
    """Direct detuning values that take precedence over frequency differences."""

    delta_c: Optional[float] = None
    delta_n1: Optional[float] = None
    delta_n2: Optional[float] = None


@dataclass(frozen=True)
class SystemConfig:
    """Complete physical description of the cavity + two spheres + OPA."""

    omega_c: float   # cavity frequency, rad/s
    kappa_c: float   # cavity decay rate, rad/s
    spheres: tuple[SphereParams, SphereParams]
    drive: DriveParams
    opa: OpaParams
    overrides: DetuningOverrides = DetuningOverrides()
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self):
        if self.omega_c <= 0 or self.kappa_c <= 0:
            raise InvalidParameterError("omega_c and kappa_c must be positive")
        if len(self.spheres) != 2:
            raise InvalidParameterError("exactly two spheres required")
        modes = {s.R0 is not None for s in self.spheres}
        if len(modes) != 1:
            raise InvalidParameterError(
                "spheres must share one coupling parameterization (both R0 or both R_eff)"
            )

    @property
    def coupling_mode(self) -> str:
        return "microscopic" if self.spheres[0].R0 is not None else "effective"

    def rabi(self, sphere_index: int) -> float:
        """Drive Rabi frequency for sphere 1 or 2 (zero off the target)."""
        if sphere_index != self.drive.target_sphere:
            return 0.0
        sp = self.spheres[sphere_index - 1]
        if sp.diameter is None:
            raise InvalidParameterError("diameter required to derive the Rabi frequency")
        N = spin_count(sp.diameter, self.constants.nu)
        return rabi_frequency(self.drive.B, N, self.constants.gamma_r)


class Detunings(NamedTuple):
    Delta_c: float
    Delta_n1: float
    Delta_n2: float
    delta: float


def spin_count(diameter: float, nu: float) -> float:
    """Number of spins in a sphere: nu * (pi/6) d^3."""
    if diameter <= 0:
        raise InvalidParameterError("diameter must be positive")
    return nu * (math.pi / 6.0) * diameter**3


def rabi_frequency(B: float, N: float, gamma_r: float) -> float:
    """Drive Rabi frequency (sqrt(5)/4) * gamma_r * sqrt(N) * B.

    The sqrt(5) is sqrt(2s) for the s = 5/2 ground state.
    """
    if N <= 0:
        raise InvalidParameterError("spin count N must be positive")
    if B < 0:
        raise InvalidParameterError("drive field B must be >= 0")
    return (math.sqrt(5.0) / 4.0) * gamma_r * math.sqrt(N) * B


def probe_amplitude(P_p: float, omega_p: float, kappa_c: float) -> float:
    """Probe amplitude from probe power: sqrt(2 kappa_c P / (hbar omega_p))."""
    if P_p < 0 or omega_p <= 0 or kappa_c <= 0:
        raise InvalidParameterError("probe power, frequency and kappa_c must be positive")
    return math.sqrt(2.0 * kappa_c * P_p / (HBAR * omega_p))


def detunings(config: SystemConfig, omega_p: float) -> Detunings:
    """Drive-frame detunings; overrides win over frequency differences."""
    ov = config.overrides
    w0 = config.drive.omega_0
    d_c = ov.delta_c if ov.delta_c is not None else config.omega_c - w0
    d_n1 = ov.delta_n1 if ov.delta_n1 is not None else config.spheres[0].omega_n - w0
    d_n2 = ov.delta_n2 if ov.delta_n2 is not None else config.spheres[1].omega_n - w0
    return Detunings(d_c, d_n1, d_n2, omega_p - w0)


def kerr_coefficient(diameter: float) -> float:
    """Kerr nonlinearity K(d), scaled from 2*pi*1e-10 rad/s at d = 1 mm by 1/volume."""
    if diameter <= 0:
        raise InvalidParameterError("diameter must be positive")
    return TWO_PI * 1.0e-10 * (1.0e-3 / diameter) ** 3


@dataclass(frozen=True)
class ValidityEntry:
    name: str
    flag: str  # "pass" or "warn"
    detail: dict


@dataclass(frozen=True)
class ValidityReport:
    entries: tuple[ValidityEntry, ...]

    @property
    def all_pass(self) -> bool:
        return all(e.flag == "pass" for e in self.entries)

    def as_dict(self) -> dict:
        return {
            e.name: {"flag": e.flag, **e.detail} for e in self.entries
        }


# "much greater than" in the regime checks, operationalized as a ratio
HIERARCHY_FACTOR = 10.0


def validate_config(config: SystemConfig, steady) -> ValidityReport:
    """Advisory physical-regime checks; flags pass/warn, never raises.

    (a) the Kerr term K|n_1s|^3 must stay below the Rabi frequency,
    (b) magnon occupation |n_js|^2 must stay well below 2sN,
    (c) detunings must dominate the dissipation rates.
    """
    entries = []
    consts = config.constants

    sp1 = config.spheres[0]
    target = config.spheres[config.drive.target_sphere - 1]
    omega = (config.rabi(config.drive.target_sphere)
             if target.diameter is not None else 0.0)
    if sp1.diameter is not None:
        K = kerr_coefficient(sp1.diameter)
        term = K * abs(steady.n_1s) ** 3
        ok = term == 0.0 or term < omega
        entries.append(ValidityEntry(
            "kerr", "pass" if ok else "warn",
            {"K_rad_s": K, "kerr_term_rad_s": term, "rabi_rad_s": omega},
        ))
    else:
        entries.append(ValidityEntry(
            "kerr", "warn", {"reason": "sphere diameter unset; Kerr scale unknown"},
        ))

    for j, (sp, n_s) in enumerate(
        zip(config.spheres, (steady.n_1s, steady.n_2s)), start=1
    ):
        if sp.diameter is None:
            entries.append(ValidityEntry(
                f"occupation_{j}", "warn", {"reason": "diameter unset"},
            ))
            continue
        N = spin_count(sp.diameter, consts.nu)
        bound = 2.0 * consts.s * N  # 5N for s = 5/2
        occ = abs(n_s) ** 2
        ok = occ == 0.0 or bound / occ >= HIERARCHY_FACTOR
        entries.append(ValidityEntry(
            f"occupation_{j}", "pass" if ok else "warn",
            {"n_sq": occ, "bound_2sN": bound},
        ))

    dets = (abs(detunings(config, config.drive.omega_0).Delta_c),
            abs(steady.Delta_bar_n1), abs(steady.Delta_bar_n2))
    rates = (config.kappa_c, config.spheres[0].kappa_n, config.spheres[1].kappa_n)
    ratio = min(dets) / max(rates)
    entries.append(ValidityEntry(
        "hierarchy", "pass" if ratio >= HIERARCHY_FACTOR else "warn",
        {"min_detuning_over_max_rate": ratio},
    ))
    return ValidityReport(tuple(entries))


# ---------------------------------------------------------------------------
# JSON ingestion. Frequency-like keys are converted Hz -> rad/s here and
# nowhere else; serialization divides back out.
# ---------------------------------------------------------------------------

_SPHERE_FREQ_KEYS = ("omega_n", "kappa_n", "r", "omega_d", "gamma_d", "R0", "R_eff")


def _get(d: dict, key: str, default=None):
    return d[key] if key in d else default


def load_config(source) -> SystemConfig:
    """Build a SystemConfig from a JSON file path or an already-parsed dict."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        raw = source
    try:
        cav = raw["cavity"]
        spheres_raw = raw["spheres"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"config missing required section: {exc}") from exc
    if not isinstance(spheres_raw, list) or len(spheres_raw) != 2:
        raise InvalidParameterError("config needs a 'spheres' array of exactly 2")

    spheres = []
    for sd in spheres_raw:
        kw = {}
        for key in _SPHERE_FREQ_KEYS:
            if key in sd and sd[key] is not None:
                kw[key] = TWO_PI * float(sd[key])
        if "diameter" in sd and sd["diameter"] is not None:
            kw["diameter"] = float(sd["diameter"])
        spheres.append(SphereParams(**kw))

    drive_raw = _get(raw, "drive", {})
    drive = DriveParams(
        B=float(_get(drive_raw, "B", 0.0)),
        omega_0=TWO_PI * float(_get(drive_raw, "omega_0", cav["omega_c"])),
        target_sphere=int(_get(drive_raw, "target_sphere", 1)),
        eps_p=float(_get(drive_raw, "eps_p", 1.0)),
    )
    opa_raw = _get(raw, "opa", {})
    opa = OpaParams(
        lam=TWO_PI * float(_get(opa_raw, "lambda", 0.0)),
        theta=float(_get(opa_raw, "theta", 0.0)),
    )
    ov_raw = _get(raw, "detuning_overrides", {})
    overrides = DetuningOverrides(**{
        k: TWO_PI * float(ov_raw[k])
        for k in ("delta_c", "delta_n1", "delta_n2") if ov_raw.get(k) is not None
    })
    consts_raw = _get(raw, "constants", {})
    constants = PhysicalConstants(**{
        **({"gamma_r": TWO_PI * float(consts_raw["gamma_r"])}
           if "gamma_r" in consts_raw else {}),
        **({"nu": float(consts_raw["nu"])} if "nu" in consts_raw else {}),
        **({"s": float(consts_raw["s"])} if "s" in consts_raw else {}),
    })
    return SystemConfig(
        omega_c=TWO_PI * float(cav["omega_c"]),
        kappa_c=TWO_PI * float(cav["kappa_c"]),
        spheres=(spheres[0], spheres[1]),
        drive=drive,
        opa=opa,
        overrides=overrides,
        constants=constants,
    )


def config_to_dict(config: SystemConfig) -> dict:
    """Serialize back to the Hz-valued JSON schema (inverse of load_config)."""
    spheres = []
    for sp in config.spheres:
        sd = {
            "omega_n": sp.omega_n / TWO_PI,
            "kappa_n": sp.kappa_n / TWO_PI,
            "r": sp.r / TWO_PI,
            "omega_d": sp.omega_d / TWO_PI,
            "gamma_d": sp.gamma_d / TWO_PI,
        }
        if sp.R0 is not None:
            sd["R0"] = sp.R0 / TWO_PI
        if sp.R_eff is not None:
            sd["R_eff"] = sp.R_eff / TWO_PI
        if sp.diameter is not None:
            sd["diameter"] = sp.diameter
        spheres.append(sd)
    out = {
        "cavity": {"omega_c": config.omega_c / TWO_PI,
                   "kappa_c": config.kappa_c / TWO_PI},
        "spheres": spheres,
        "drive": {"B": config.drive.B,
                  "omega_0": config.drive.omega_0 / TWO_PI,
                  "target_sphere": config.drive.target_sphere,
                  "eps_p": config.drive.eps_p},
        "opa": {"lambda": config.opa.lam / TWO_PI, "theta": config.opa.theta},
    }
    ov = config.overrides
    ov_out = {k: getattr(ov, k) / TWO_PI
              for k in ("delta_c", "delta_n1", "delta_n2")
              if getattr(ov, k) is not None}
    if ov_out:
        out["detuning_overrides"] = ov_out
    out["constants"] = {"gamma_r": config.constants.gamma_r / TWO_PI,
                        "nu": config.constants.nu,
                        "s": config.constants.s}
    return out


def numeric_paths(d: dict, prefix: str = "") -> list[str]:
    """All dotted paths to numeric leaves of a config dict, sorted."""
    paths = []
    if isinstance(d, dict):
        items = d.items()
    elif isinstance(d, list):
        items = ((str(i), v) for i, v in enumerate(d))
    else:
        return paths
    for key, val in items:
        dotted = f"{prefix}{key}"
        if isinstance(val, bool):
            continue
        if isinstance(val, (int, float)):
            paths.append(dotted)
        elif isinstance(val, (dict, list)):
            paths.extend(numeric_paths(val, dotted + "."))
    return sorted(paths)


# On a sphere, the two coupling keys are exclusive: assigning one drops the other.
_COUPLING_SIBLING = {"R0": "R_eff", "R_eff": "R0"}


def set_config_path(raw: dict, path: str, value: float) -> None:
    """Assign a numeric leaf addressed by a dotted path, in place.

    May introduce a missing leaf only where the schema allows it (a sphere's
    alternate coupling key or a detuning override); anything else must already
    exist, otherwise the error lists every valid path.
    """
    parts = path.split(".")
    node = raw
    try:
        if (len(parts) == 2 and parts[0] == "detuning_overrides"
                and parts[0] not in raw):
            raw[parts[0]] = {}
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        leaf = parts[-1]
        creatable = leaf in _COUPLING_SIBLING or (
            len(parts) == 2 and parts[0] == "detuning_overrides"
        )
        if isinstance(node, list):
            node[int(leaf)] = value
        else:
            if leaf not in node and not creatable:
                raise KeyError(leaf)
            node[leaf] = value
            sibling = _COUPLING_SIBLING.get(leaf)
            if sibling is not None:
                node.pop(sibling, None)
    except (KeyError, IndexError, ValueError, TypeError):
        raise UnknownPathError(path, numeric_paths(raw)) from None
