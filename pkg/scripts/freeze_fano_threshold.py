#!/usr/bin/env python3
"""Derive and freeze the Fano-asymmetry threshold.

The detuned preset (fig4b) produces strongly asymmetric dips, the resonant
one (fig4c) nearly symmetric dips. The threshold separating the two regimes
is pinned as the geometric mean of the largest |asymmetry| in each, computed
with the oracle engine, and written to src/magnomech/data/fano_threshold.json.
Rerun this script only when the extraction algorithm changes; tests treat the
stored value as a frozen regression constant.
"""

import json
import math
import pathlib

from magnomech import extract_features, load_config, solve_steady_state, sweep_spectrum
from magnomech.cli import load_preset, preset_config_dict


def max_abs_asymmetry(preset_name: str) -> float:
    preset = load_preset(preset_name)
    config = load_config(preset_config_dict(preset))
    steady = solve_steady_state(config)
    od1 = config.spheres[0].omega_d
    grid = (preset.grid[0] * od1, preset.grid[1] * od1, preset.grid[2])
    spectrum = sweep_spectrum(config, "oracle", grid, steady)
    return extract_features(spectrum).max_abs_asymmetry


def main() -> None:
    detuned = max_abs_asymmetry("fig4b")
    resonant = max_abs_asymmetry("fig4c")
    threshold = math.sqrt(detuned * resonant)
    out = {
        "threshold": threshold,
        "detuned_max_abs_asymmetry": detuned,
        "resonant_max_abs_asymmetry": resonant,
        "source": "scripts/freeze_fano_threshold.py (oracle engine, "
                  "fig4b vs fig4c presets, geometric mean)",
    }
    path = (pathlib.Path(__file__).resolve().parent.parent
            / "src" / "magnomech" / "data" / "fano_threshold.json")
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(f"wrote {path}")
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
