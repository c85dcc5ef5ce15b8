"""Linearized fluctuation dynamics around the steady state.

Fluctuations are stacked as
    u = (dc, dc*, dn1, dn1*, dn2, dn2*, dx1, dy1, dx2, dy2)
and obey du/dt = A u + inputs. A weak probe at detuning delta (from the
drive) excites the e^{-i delta t} component u_minus, which satisfies the
linear system (-i delta I - A) u_minus = b with b = eps_p in the dc slot.
The first entry of u_minus is the intracavity probe amplitude c_minus.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NearSingularError
from .params import SystemConfig, detunings
from .steadystate import SteadyState, coupling_products

BASIS = ("dc", "dc*", "dn1", "dn1*", "dn2", "dn2*", "dx1", "dy1", "dx2", "dy2")

# index swap dc <-> dc*, dn1 <-> dn1*, dn2 <-> dn2* (quadratures untouched);
# conjugating a solution and applying it maps the -delta sideband onto +delta
CONJUGATION_PERMUTATION = (1, 0, 3, 2, 5, 4, 6, 7, 8, 9)

_PIVOT_RATIO_LIMIT = 1e12


@dataclass(frozen=True)
class DriftMatrix:
    A: np.ndarray
    Delta_c: float
    Delta_bar_n1: float
    Delta_bar_n2: float

    def __post_init__(self):
        self.A.setflags(write=False)


@dataclass(frozen=True)
class FluctuationSolution:
    delta: float
    u_minus: np.ndarray
    c_minus: complex = field(init=False)

    def __post_init__(self):
        self.u_minus.setflags(write=False)
        object.__setattr__(self, "c_minus", complex(self.u_minus[0]))


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real: float
    stable: bool


def build_drift_matrix(config: SystemConfig, steady: SteadyState) -> DriftMatrix:
    """Assemble the 10x10 drift matrix in the BASIS ordering."""
    sp1, sp2 = config.spheres
    dts = detunings(config, config.drive.omega_0)
    kc, Dc = config.kappa_c, dts.Delta_c
    lam, theta = config.opa.lam, config.opa.theta
    g1, g2 = coupling_products(config, steady)
    Dbar1, Dbar2 = steady.Delta_bar_n1, steady.Delta_bar_n2
    gain = 2.0 * lam * cmath.exp(1j * theta)

    A = np.zeros((10, 10), dtype=complex)
    # cavity pair
    A[0, 0] = -(kc + 1j * Dc)
    A[0, 1] = gain
    A[0, 2] = -1j * sp1.r
    A[0, 4] = -1j * sp2.r
    A[1, 1] = -(kc - 1j * Dc)
    A[1, 0] = gain.conjugate()
    A[1, 3] = 1j * sp1.r
    A[1, 5] = 1j * sp2.r
    # magnon pairs
    A[2, 2] = -(sp1.kappa_n + 1j * Dbar1)
    A[2, 6] = -1j * g1
    A[2, 0] = -1j * sp1.r
    A[3, 3] = -(sp1.kappa_n - 1j * Dbar1)
    A[3, 6] = 1j * g1.conjugate()
    A[3, 1] = 1j * sp1.r
    A[4, 4] = -(sp2.kappa_n + 1j * Dbar2)
    A[4, 8] = -1j * g2
    A[4, 0] = -1j * sp2.r
    A[5, 5] = -(sp2.kappa_n - 1j * Dbar2)
    A[5, 8] = 1j * g2.conjugate()
    A[5, 1] = 1j * sp2.r
    # phonon quadratures
    A[6, 7] = sp1.omega_d
    A[7, 6] = -sp1.omega_d
    A[7, 7] = -sp1.gamma_d
    A[7, 2] = -g1.conjugate()
    A[7, 3] = -g1
    A[8, 9] = sp2.omega_d
    A[9, 8] = -sp2.omega_d
    A[9, 9] = -sp2.gamma_d
    A[9, 4] = -g2.conjugate()
    A[9, 5] = -g2
    return DriftMatrix(A=A, Delta_c=Dc, Delta_bar_n1=Dbar1, Delta_bar_n2=Dbar2)


def probe_vector(eps_p: float) -> np.ndarray:
    b = np.zeros(10, dtype=complex)
    b[0] = eps_p
    return b


def solve_fluctuations(drift: DriftMatrix, delta: float,
                       eps_p: float = 1.0) -> FluctuationSolution:
    """Solve (-i delta I - A) u = b at a single probe detuning.

    Uses an LU factorization and rejects solutions whose pivot spread
    indicates the system is effectively singular at this detuning.
    """
    M = -1j * delta * np.eye(10, dtype=complex) - drift.A
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    diag = np.abs(np.diag(lu))
    dmin = diag.min()
    if dmin == 0.0 or diag.max() / dmin > _PIVOT_RATIO_LIMIT:
        raise NearSingularError(
            f"fluctuation system ill-conditioned at delta={delta:.6e} "
            f"(pivot ratio {diag.max() / max(dmin, 1e-300):.3e})")
    u = scipy.linalg.lu_solve((lu, piv), probe_vector(eps_p), check_finite=False)
    return FluctuationSolution(delta=delta, u_minus=u)


def c_minus_grid(drift: DriftMatrix, deltas: np.ndarray,
                 eps_p: float = 1.0) -> np.ndarray:
    """Vectorized c_minus over a detuning array (one batched LU solve)."""
    deltas = np.asarray(deltas, dtype=float)
    eye = np.eye(10, dtype=complex)
    M = -1j * deltas[:, None, None] * eye - drift.A
    u = np.linalg.solve(M, probe_vector(eps_p)[:, None])
    return u[:, 0, 0]


def phonon_response(config: SystemConfig, steady: SteadyState,
                    solution: FluctuationSolution) -> tuple[complex, complex]:
    """Predicted displacement sidebands x_{j-} from the magnon sidebands.

    Eliminating the quadrature pair of sphere j gives
        x_{j-} = -omega_dj (g_j* n_{j-} + g_j n*_{j-})
                 / (omega_dj^2 - delta^2 - i gamma_dj delta),
    which must agree with the dx_j entries of the solved vector.
    """
    g1, g2 = coupling_products(config, steady)
    d = solution.delta
    u = solution.u_minus
    out = []
    for g, sp, (i_n, i_nd) in ((g1, config.spheres[0], (2, 3)),
                               (g2, config.spheres[1], (4, 5))):
        den = sp.omega_d ** 2 - d ** 2 - 1j * sp.gamma_d * d
        out.append(-sp.omega_d * (g.conjugate() * u[i_n] + g * u[i_nd]) / den)
    return out[0], out[1]


def stability_check(drift: DriftMatrix) -> StabilityReport:
    """Eigenvalue test: stable iff every eigenvalue of A has Re < 0."""
    ev = np.linalg.eigvals(drift.A)
    max_real = float(ev.real.max())
    return StabilityReport(eigenvalues=ev, max_real=max_real,
                           stable=bool(max_real < 0.0))
