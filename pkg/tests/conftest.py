"""Shared fixtures: presets, solved operating points, cached spectra."""

from __future__ import annotations

import copy
import json
from importlib import resources
from types import SimpleNamespace

import pytest

from magnomech import load_config, solve_steady_state, sweep_spectrum
from magnomech.cli import load_preset, preset_config_dict


def _read_data(name: str):
    path = resources.files("magnomech.data").joinpath(name)
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def base_raw_master():
    return _read_data("base_config.json")


@pytest.fixture
def base_raw(base_raw_master):
    """Mutable copy of the checked-in microscopic base config."""
    return copy.deepcopy(base_raw_master)


@pytest.fixture(scope="session")
def base_config(base_raw_master):
    return load_config(base_raw_master)


@pytest.fixture(scope="session")
def base_steady(base_config):
    return solve_steady_state(base_config)


@pytest.fixture(scope="session")
def bundle():
    """bundle(name) -> preset, loaded config, solved steady state."""
    cache: dict[str, SimpleNamespace] = {}

    def get(name: str) -> SimpleNamespace:
        if name not in cache:
            preset = load_preset(name)
            config = load_config(preset_config_dict(preset))
            cache[name] = SimpleNamespace(
                preset=preset, config=config,
                steady=solve_steady_state(config))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def spectrum_of(bundle):
    """spectrum_of(name, engine, n_points) with the preset's grid."""
    cache = {}

    def get(name: str, engine: str = "closed", n_points: int | None = None):
        key = (name, engine, n_points)
        if key not in cache:
            b = bundle(name)
            od1 = b.config.spheres[0].omega_d
            lo, hi, n = b.preset.grid
            grid = (lo * od1, hi * od1, n_points or n)
            cache[key] = sweep_spectrum(b.config, engine, grid, b.steady)
        return cache[key]

    return get
