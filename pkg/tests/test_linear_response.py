"""Fluctuation dynamics: drift structure, probe solve, stability."""

import math

import numpy as np
import pytest

from magnomech import (BASIS, CONJUGATION_PERMUTATION, build_drift_matrix,
                       c_minus_grid, load_config, phonon_response,
                       solve_fluctuations, solve_steady_state,
                       stability_check)

TWO_PI = 2.0 * math.pi


def test_basis_and_permutation_shape():
    assert len(BASIS) == 10
    perm = list(CONJUGATION_PERMUTATION)
    # applying the conjugation swap twice is the identity
    assert [perm[perm[i]] for i in range(10)] == list(range(10))


def test_drift_matrix_conjugate_symmetry(base_config, base_steady):
    A = build_drift_matrix(base_config, base_steady).A
    perm = list(CONJUGATION_PERMUTATION)
    assert np.array_equal(A[perm][:, perm], A.conj())
    assert not A.flags.writeable


def test_solution_satisfies_linear_system(bundle):
    b = bundle("fig3b")
    drift = build_drift_matrix(b.config, b.steady)
    delta = 0.97 * b.config.spheres[0].omega_d
    sol = solve_fluctuations(drift, delta, eps_p=1.0)
    M = -1j * delta * np.eye(10) - drift.A
    rhs = np.zeros(10, dtype=complex)
    rhs[0] = 1.0
    residual = np.abs(M @ sol.u_minus - rhs).max()
    assert residual <= 1e-10 * np.abs(sol.u_minus).max() * np.abs(M).max()


def test_conjugate_companion_solution(bundle):
    # conjugating the -delta sideband and swapping each mode with its
    # partner solves the +delta system driven through the dc* slot
    b = bundle("fig3a")
    drift = build_drift_matrix(b.config, b.steady)
    delta = 1.02 * b.config.spheres[0].omega_d
    u = solve_fluctuations(drift, delta).u_minus
    perm = list(CONJUGATION_PERMUTATION)

    M_plus = 1j * delta * np.eye(10) - drift.A
    rhs = np.zeros(10, dtype=complex)
    rhs[1] = 1.0
    v = np.linalg.solve(M_plus, rhs)
    assert np.abs(v - u.conj()[perm]).max() <= 1e-10 * np.abs(v).max()


def test_grid_solver_matches_pointwise(bundle):
    b = bundle("fig2c")
    drift = build_drift_matrix(b.config, b.steady)
    deltas = np.linspace(0.0, 2.0, 17) * b.config.spheres[0].omega_d
    grid_vals = c_minus_grid(drift, deltas)
    point_vals = np.array([solve_fluctuations(drift, d).c_minus
                           for d in deltas])
    assert np.abs(grid_vals - point_vals).max() <= \
        1e-12 * np.abs(point_vals).max()


def test_bare_cavity_amplitude_analytic():
    raw = {
        "cavity": {"omega_c": 1.0e10, "kappa_c": 2.1e6},
        "spheres": [
            {"omega_n": 1.0e10, "kappa_n": 1.0e5, "r": 0.0,
             "omega_d": 1.0e7, "gamma_d": 100.0, "R_eff": 0.0},
            {"omega_n": 1.0e10, "kappa_n": 1.0e5, "r": 0.0,
             "omega_d": 1.0e7, "gamma_d": 100.0, "R_eff": 0.0},
        ],
        "opa": {"lambda": 0.0, "theta": 0.0},
        "detuning_overrides": {"delta_c": 1.0e7, "delta_n1": 1.0e7,
                               "delta_n2": 1.0e7},
    }
    config = load_config(raw)
    steady = solve_steady_state(config)
    drift = build_drift_matrix(config, steady)
    kc, Dc = config.kappa_c, TWO_PI * 1e7
    for frac in (0.5, 1.0, 1.37):
        delta = frac * config.spheres[0].omega_d
        got = solve_fluctuations(drift, delta).c_minus
        want = 1.0 / (kc + 1j * (Dc - delta))
        assert got == pytest.approx(want, rel=1e-12)


def test_phonon_response_consistency(bundle):
    b = bundle("fig4b")
    drift = build_drift_matrix(b.config, b.steady)
    for frac in (0.45, 0.95, 1.5):
        delta = frac * b.config.spheres[0].omega_d
        sol = solve_fluctuations(drift, delta)
        x1_pred, x2_pred = phonon_response(b.config, b.steady, sol)
        scale = np.abs(sol.u_minus).max()
        assert abs(sol.u_minus[6] - x1_pred) <= 1e-9 * scale
        assert abs(sol.u_minus[8] - x2_pred) <= 1e-9 * scale


def test_presets_are_stable(bundle):
    for name in ("fig2a", "fig2d", "fig3b", "fig4b", "fig5b", "fig6"):
        b = bundle(name)
        report = stability_check(build_drift_matrix(b.config, b.steady))
        assert report.stable, name
        assert report.max_real < 0.0
        assert report.eigenvalues.shape == (10,)


def test_large_opa_gain_destabilizes(bundle):
    # with 4 lambda^2 > kappa_c^2 + Delta_c^2 the cavity pair acquires a
    # growing quadrature; the checker must flag it instead of hiding it
    from magnomech.cli import load_preset, preset_config_dict
    raw = preset_config_dict(load_preset("fig6"))
    raw["opa"]["lambda"] = 3.0 * raw["cavity"]["kappa_c"]
    config = load_config(raw)
    steady = solve_steady_state(config)
    report = stability_check(build_drift_matrix(config, steady))
    assert not report.stable
    assert report.max_real > 0.0


def test_decoupled_cavity_eigenvalues(base_raw):
    for sp in base_raw["spheres"]:
        sp["r"] = 0.0
        sp["R_eff"] = sp.pop("R0") * 0.0
    base_raw["drive"]["B"] = 0.0
    config = load_config(base_raw)
    steady = solve_steady_state(config)
    ev = stability_check(build_drift_matrix(config, steady)).eigenvalues
    kc, Dc = config.kappa_c, TWO_PI * 1e7
    expected = complex(-kc, -Dc)
    assert min(abs(ev - expected)) <= 1e-9 * abs(expected)
