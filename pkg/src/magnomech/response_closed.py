"""Closed-form intracavity probe amplitude.

Eliminating the nine companion fluctuation variables from the sideband
system collapses it to a single expression for c_minus built from a ladder
of scalar coefficients. This evaluates orders of magnitude faster than the
10x10 solve and serves as an independent cross-check of it.

The elimination is carried out keeping the magnomechanical rates complex:
wherever a squared rate appears it is one of |R_jj|^2, R_jj^2 or
conj(R_jj)^2 depending on which pair of variables was eliminated. For real
rates the three coincide and the ladder reduces to its familiar form.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .params import SystemConfig, detunings
from .steadystate import SteadyState, effective_couplings


@dataclass(frozen=True)
class CoefficientLadder:
    """Every intermediate of the elimination at one probe detuning delta.

    alpha/alpha1 are the cavity sideband denominators, alpha2..alpha5 the
    magnon ones, alpha6/alpha8 the mechanical response denominators of
    spheres 1 and 2. The single-letter fields are the nested elimination
    coefficients; eta/sigma/chi/beta/varsigma/varrho feed the final formula

        c_minus = eta chi varsigma eps_p /
                  (alpha eta chi varsigma + i r1 sigma chi varsigma
                   + i r2 beta eta varsigma
                   - 2 varrho eta chi lam e^{i theta}).
    """

    delta: float
    alpha: complex
    alpha1: complex
    alpha2: complex
    alpha3: complex
    alpha4: complex
    alpha5: complex
    alpha6: complex
    alpha8: complex
    A: complex
    B: complex
    C: complex
    D: complex
    E: complex
    F: complex
    G: complex
    K: complex
    L: complex
    M: complex
    N: complex
    O: complex
    P: complex
    Q: complex
    R: complex
    U: complex
    eta: complex
    sigma: complex
    chi: complex
    beta: complex
    varsigma: complex
    varrho: complex
    c_minus: complex


def _ladder(config: SystemConfig, steady: SteadyState, delta):
    """Vectorized ladder evaluation; delta may be a scalar or an array."""
    sp1, sp2 = config.spheres
    dts = detunings(config, config.drive.omega_0)
    kc, Dc = config.kappa_c, dts.Delta_c
    kn1, kn2 = sp1.kappa_n, sp2.kappa_n
    Dn1, Dn2 = steady.Delta_bar_n1, steady.Delta_bar_n2
    od1, od2 = sp1.omega_d, sp2.omega_d
    gd1, gd2 = sp1.gamma_d, sp2.gamma_d
    r1, r2 = sp1.r, sp2.r
    lam, theta = config.opa.lam, config.opa.theta
    eps_p = config.drive.eps_p

    eff = effective_couplings(config, steady)
    R11, R22 = eff.R_11, eff.R_22
    p1, q1, qb1 = abs(R11) ** 2, R11 ** 2, R11.conjugate() ** 2
    p2, q2, qb2 = abs(R22) ** 2, R22 ** 2, R22.conjugate() ** 2
    e_m = 2.0 * lam * cmath.exp(-1j * theta)

    d = np.asarray(delta, dtype=float)

    al = kc + 1j * (Dc - d)
    a1 = kc - 1j * (Dc + d)
    a2 = kn1 + 1j * (Dn1 - d)
    a3 = kn1 - 1j * (Dn1 + d)
    a4 = kn2 + 1j * (Dn2 - d)
    a5 = kn2 - 1j * (Dn2 + d)
    a6 = od1 - d / od1 * (1j * gd1 + d)
    a8 = od2 - d / od2 * (1j * gd2 + d)

    A_ = 1.0 + p2 / (1j * a4 * a8)
    B_ = 1.0 - p2 / (1j * a5 * a8 * A_)
    C_ = r2 * qb2 / (a4 * a5 * a8 * A_)
    D_ = 1.0 + r2 ** 2 / (a1 * a5 * B_)
    E_ = 1j * r2 * C_ / (a1 * B_) + e_m / a1
    F_ = 1.0 + r1 ** 2 / (a1 * a3 * D_) - p1 / (1j * a3 * a6)
    G_ = 1j * r1 * E_ / (a3 * D_)
    K_ = qb1 / (1j * a3 * a6)
    eta = 1.0 + p1 / (1j * a2 * a6) + K_ * q1 / (1j * a2 * a6 * F_)
    sigma = G_ * q1 / (1j * a2 * a6 * F_) - 1j * r1 / a2

    L_ = 1.0 + p1 / (1j * a2 * a6)
    M_ = 1.0 - p1 / (1j * a3 * a6 * L_)
    N_ = r1 * qb1 / (a2 * a3 * a6 * L_)
    O_ = 1.0 + r1 ** 2 / (a1 * a3 * M_)
    P_ = 1j * r1 * N_ / (a1 * M_) + e_m / a1
    Q_ = 1.0 + r2 ** 2 / (a1 * a5 * O_) - p2 / (1j * a5 * a8)
    R_ = 1j * r2 * P_ / (a5 * O_)
    U_ = qb2 / (1j * a5 * a8)
    chi = 1.0 + p2 / (1j * a4 * a8) + U_ * q2 / (1j * a4 * a8 * Q_)
    beta = R_ * q2 / (1j * a4 * a8 * Q_) - 1j * r2 / a4

    varsigma = 1.0 + r1 ** 2 / (a1 * a3 * M_) + r2 ** 2 / (a1 * a5 * B_)
    varrho = 1j * r1 * N_ / (a1 * M_) + 1j * r2 * C_ / (a1 * B_) + e_m / a1

    num = eta * chi * varsigma * eps_p
    den = (al * eta * chi * varsigma
           + 1j * r1 * sigma * chi * varsigma
           + 1j * r2 * beta * eta * varsigma
           - 2.0 * varrho * eta * chi * lam * cmath.exp(1j * theta))
    c_minus = num / den
    return {
        "alpha": al, "alpha1": a1, "alpha2": a2, "alpha3": a3,
        "alpha4": a4, "alpha5": a5, "alpha6": a6, "alpha8": a8,
        "A": A_, "B": B_, "C": C_, "D": D_, "E": E_, "F": F_, "G": G_,
        "K": K_, "L": L_, "M": M_, "N": N_, "O": O_, "P": P_, "Q": Q_,
        "R": R_, "U": U_, "eta": eta, "sigma": sigma, "chi": chi,
        "beta": beta, "varsigma": varsigma, "varrho": varrho,
        "c_minus": c_minus,
    }


def build_ladder(config: SystemConfig, steady: SteadyState,
                 delta: float) -> CoefficientLadder:
    """Evaluate the full coefficient ladder at one probe detuning."""
    vals = _ladder(config, steady, float(delta))
    broadcast = {k: complex(v) if isinstance(v, np.ndarray) else complex(v)
                 for k, v in vals.items()}
    return CoefficientLadder(delta=float(delta), **broadcast)


def c_minus_closed(config: SystemConfig, steady: SteadyState, delta):
    """Closed-form c_minus; delta may be a float or an ndarray."""
    out = _ladder(config, steady, delta)["c_minus"]
    if np.isscalar(delta) or np.asarray(delta).ndim == 0:
        return complex(out)
    return np.asarray(out)
