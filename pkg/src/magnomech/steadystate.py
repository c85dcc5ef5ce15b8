"""Mean-field steady state of the driven cavity + two-sphere system.

The drive alone (no probe) fixes complex amplitudes c_s, n_js and static
phonon displacements x_js. The magnon equations contain the magnetostrictive
shift R_0j * x_js, which itself depends on |n_js|^2, so the solver iterates.
The cavity equation couples c_s to c_s* through the parametric gain and is
solved exactly as a 2x2 real system inside every iteration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConvergenceError, InvalidParameterError
from .params import R0_REFERENCE, SystemConfig, detunings

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
DEFAULT_DAMPING = 0.5


@dataclass(frozen=True)
class SteadyState:
    """Converged mean amplitudes and the shifted magnon detunings.

    In effective-coupling mode this is a synthesized operating point: the
    magnon amplitudes are chosen so that the requested effective rates come
    out exactly, x_js is reported as zero (its shift is considered absorbed
    into the configured detunings), and residual/iterations are zero.
    """

    c_s: complex
    n_1s: complex
    n_2s: complex
    x_1s: float
    x_2s: float
    Delta_bar_n1: float
    Delta_bar_n2: float
    residual: float
    iterations: int


class EffectiveCouplings(NamedTuple):
    R_1: complex
    R_2: complex
    R_11: complex  # R_1 / sqrt(2), the rate the closed-form response uses
    R_22: complex


def _solve_cavity(kappa_c, Delta_c, lam, theta, rhs):
    """Solve (kappa_c + i Delta_c) c - 2 lam e^{i theta} c* = rhs for c."""
    ct, st = math.cos(theta), math.sin(theta)
    a11 = kappa_c - 2.0 * lam * ct
    a12 = -(Delta_c + 2.0 * lam * st)
    a21 = Delta_c - 2.0 * lam * st
    a22 = kappa_c + 2.0 * lam * ct
    det = a11 * a22 - a12 * a21  # = kappa_c^2 + Delta_c^2 - 4 lam^2
    if det == 0.0:
        raise ConvergenceError("parametric gain at the cavity instability threshold")
    br, bi = rhs.real, rhs.imag
    return complex((a22 * br - a12 * bi) / det, (a11 * bi - a21 * br) / det)


def _relative_change(new, old):
    scale = max(abs(new), abs(old), 1.0)
    return abs(new - old) / scale


def _iterate(config: SystemConfig, damping: float, tol: float, max_iter: int):
    sp1, sp2 = config.spheres
    dts = detunings(config, config.drive.omega_0)
    kc, Dc = config.kappa_c, dts.Delta_c
    lam, theta = config.opa.lam, config.opa.theta
    Omega1 = config.rabi(1)
    Omega2 = config.rabi(2)

    c = 0j
    n1 = 0j
    n2 = 0j
    x1 = 0.0
    x2 = 0.0
    for it in range(1, max_iter + 1):
        Dbar1 = dts.Delta_n1 + sp1.R0 * x1
        Dbar2 = dts.Delta_n2 + sp2.R0 * x2
        n1_t = (-1j * sp1.r * c + Omega1) / (sp1.kappa_n + 1j * Dbar1)
        n2_t = (-1j * sp2.r * c + Omega2) / (sp2.kappa_n + 1j * Dbar2)
        c_t = _solve_cavity(kc, Dc, lam, theta,
                            -1j * sp1.r * n1_t - 1j * sp2.r * n2_t)
        x1_t = -sp1.R0 * abs(n1_t) ** 2 / sp1.omega_d
        x2_t = -sp2.R0 * abs(n2_t) ** 2 / sp2.omega_d

        c_n = c + damping * (c_t - c)
        n1_n = n1 + damping * (n1_t - n1)
        n2_n = n2 + damping * (n2_t - n2)
        x1_n = x1 + damping * (x1_t - x1)
        x2_n = x2 + damping * (x2_t - x2)
        change = max(_relative_change(c_n, c), _relative_change(n1_n, n1),
                     _relative_change(n2_n, n2), _relative_change(x1_n, x1),
                     _relative_change(x2_n, x2))
        c, n1, n2, x1, x2 = c_n, n1_n, n2_n, x1_n, x2_n
        if change < tol:
            return c, n1, n2, x1, x2, it, change
    return None, None, None, None, None, max_iter, change


def _residuals(config, dts, c, n1, n2, x1, x2):
    sp1, sp2 = config.spheres
    kc, Dc = config.kappa_c, dts.Delta_c
    lam, theta = config.opa.lam, config.opa.theta
    Omega1, Omega2 = config.rabi(1), config.rabi(2)
    Dbar1 = dts.Delta_n1 + sp1.R0 * x1
    Dbar2 = dts.Delta_n2 + sp2.R0 * x2
    ph = cmath.exp(1j * theta)

    def rel(lhs_terms):
        num = abs(sum(lhs_terms))
        den = sum(abs(t) for t in lhs_terms) or 1.0
        return num / den

    res = [
        rel([(kc + 1j * Dc) * c, 1j * sp1.r * n1, 1j * sp2.r * n2,
             -2.0 * lam * ph * c.conjugate()]),
        rel([(sp1.kappa_n + 1j * Dbar1) * n1, 1j * sp1.r * c, -Omega1]),
        rel([(sp2.kappa_n + 1j * Dbar2) * n2, 1j * sp2.r * c, -Omega2]),
        rel([x1 * sp1.omega_d, sp1.R0 * abs(n1) ** 2]),
        rel([x2 * sp2.omega_d, sp2.R0 * abs(n2) ** 2]),
    ]
    return max(res), Dbar1, Dbar2


def solve_steady_state(config: SystemConfig, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER) -> SteadyState:
    """Find the drive-only operating point.

    Microscopic mode runs a damped fixed-point iteration (damping 0.5,
    halved once on non-convergence before giving up). Effective mode
    synthesizes the operating point directly from the configured rates.
    """
    dts = detunings(config, config.drive.omega_0)
    sp1, sp2 = config.spheres

    if config.coupling_mode == "effective":
        # n_js = -i R_j / (sqrt(2) R0_ref), so that R0_ref * n_js = -i R_j/sqrt(2)
        # and the requested R_j is real positive by construction.
        n1 = -1j * sp1.R_eff / (math.sqrt(2.0) * R0_REFERENCE)
        n2 = -1j * sp2.R_eff / (math.sqrt(2.0) * R0_REFERENCE)
        c = _solve_cavity(config.kappa_c, dts.Delta_c, config.opa.lam,
                          config.opa.theta,
                          -1j * sp1.r * n1 - 1j * sp2.r * n2)
        return SteadyState(c_s=c, n_1s=n1, n_2s=n2, x_1s=0.0, x_2s=0.0,
                           Delta_bar_n1=dts.Delta_n1, Delta_bar_n2=dts.Delta_n2,
                           residual=0.0, iterations=0)

    if sp1.omega_d == 0.0 or sp2.omega_d == 0.0:
        raise InvalidParameterError("omega_d must be nonzero (x_js divides by it)")

    damping = DEFAULT_DAMPING
    c, n1, n2, x1, x2, iters, change = _iterate(config, damping, tol, max_iter)
    if c is None:
        # one retry at gentler damping before reporting failure
        damping *= 0.5
        c, n1, n2, x1, x2, iters2, change = _iterate(config, damping, tol, max_iter)
        iters += iters2
        if c is None:
            raise ConvergenceError(
                f"steady state not converged after {iters} iterations "
                f"(last relative change {change:.3e})",
                residual=change, iterations=iters)

    residual, Dbar1, Dbar2 = _residuals(config, dts, c, n1, n2, x1, x2)
    return SteadyState(c_s=c, n_1s=n1, n_2s=n2, x_1s=x1, x_2s=x2,
                       Delta_bar_n1=Dbar1, Delta_bar_n2=Dbar2,
                       residual=residual, iterations=iters)


def iterate_once(config: SystemConfig, state: SteadyState) -> SteadyState:
    """Apply a single fixed-point update to a solved state (microscopic mode).

    Used to verify that a converged state is actually a fixed point.
    """
    sp1, sp2 = config.spheres
    dts = detunings(config, config.drive.omega_0)
    Dbar1 = dts.Delta_n1 + sp1.R0 * state.x_1s
    Dbar2 = dts.Delta_n2 + sp2.R0 * state.x_2s
    n1 = (-1j * sp1.r * state.c_s + config.rabi(1)) / (sp1.kappa_n + 1j * Dbar1)
    n2 = (-1j * sp2.r * state.c_s + config.rabi(2)) / (sp2.kappa_n + 1j * Dbar2)
    c = _solve_cavity(config.kappa_c, dts.Delta_c, config.opa.lam,
                      config.opa.theta, -1j * sp1.r * n1 - 1j * sp2.r * n2)
    x1 = -sp1.R0 * abs(n1) ** 2 / sp1.omega_d
    x2 = -sp2.R0 * abs(n2) ** 2 / sp2.omega_d
    residual, Dbar1, Dbar2 = _residuals(config, dts, c, n1, n2, x1, x2)
    return SteadyState(c_s=c, n_1s=n1, n_2s=n2, x_1s=x1, x_2s=x2,
                       Delta_bar_n1=Dbar1, Delta_bar_n2=Dbar2,
                       residual=residual, iterations=state.iterations + 1)


def effective_couplings(config: SystemConfig, steady: SteadyState) -> EffectiveCouplings:
    """Drive-enhanced magnomechanical rates R_j = i sqrt(2) R_0j n_js.

    Also returns R_jj = R_j / sqrt(2); the product R_0j * n_js = -i R_jj is
    the only combination the linearized dynamics see.
    """
    if config.coupling_mode == "microscopic":
        R01, R02 = config.spheres[0].R0, config.spheres[1].R0
    else:
        R01 = R02 = R0_REFERENCE
    root2 = math.sqrt(2.0)
    R1 = 1j * root2 * R01 * steady.n_1s
    R2 = 1j * root2 * R02 * steady.n_2s
    return EffectiveCouplings(R1, R2, R1 / root2, R2 / root2)


def coupling_products(config: SystemConfig, steady: SteadyState) -> tuple[complex, complex]:
    """The linearization couplings g_j = R_0j * n_js = -i R_jj."""
    eff = effective_couplings(config, steady)
    return -1j * eff.R_11, -1j * eff.R_22
