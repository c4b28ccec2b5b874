"""Linear stability of steady states.

Fluctuations are written in quadratures ``dq_n = sqrt(2) Re d(alpha_n)``,
``dp_n = sqrt(2) Im d(alpha_n)`` and ordered as
``[dq_1, dp_1, ..., dq_N, dp_N, dX, dY]``. ``dZ`` is removed with the
spin-length constraint, ``X dX + Y dY + Z dZ = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure, NotSteady, ZeroZ
from .meanfield import make_rhs
from .model import SystemParams, ring_matrix, validate
from .states import SteadySolution

STEADY_TOL = 1e-8
ZERO_Z_EPS = 1e-12


@dataclass
class StabilityMatrix:
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class StabilityVerdict:
    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool

    def to_dict(self) -> dict:
        return {"max_real_part": self.max_real_part, "stable": self.stable}


def build_matrix(solution: SteadySolution, params: SystemParams,
                 steady_tol: float = STEADY_TOL) -> StabilityMatrix:
    p = validate(params)
    st = solution.state
    n = p.n_cavities
    if abs(st.z) < ZERO_Z_EPS:
        raise ZeroZ("Z = 0: the spin constraint cannot be solved for dZ", Z=st.z)
    resid = float(np.linalg.norm(make_rhs(p)(0.0, st.to_vector())))
    if resid >= steady_tol:
        raise NotSteady("state is not a fixed point", residual=resid)

    g, kappa, om = p.coupling, p.cavity_loss, p.omega_emitter
    h = ring_matrix(p)
    s = 2.0 * st.alphas.real.sum()          # sum_n (alpha_n + alpha_n^*)
    iq = 2 * np.arange(n)
    ip = iq + 1
    ix, iy = 2 * n, 2 * n + 1
    m = np.zeros((2 * n + 2, 2 * n + 2))
    m[np.ix_(iq, ip)] = h
    m[np.ix_(ip, iq)] = -h
    m[iq, iq] = -kappa
    m[ip, ip] = -kappa
    m[ip, ix] = -2 * math.sqrt(2) * g
    m[ix, iy] = -om
    m[iy, ix] = om + 2 * g * s * st.x / st.z
    m[iy, iy] = 2 * g * s * st.y / st.z
    m[iy, iq] = -2 * math.sqrt(2) * g * st.z
    if not np.all(np.isfinite(m)):
        raise EigenFailure("stability matrix has non-finite entries")
    return StabilityMatrix(m)


def eigenvalues(matrix) -> np.ndarray:
    """All eigenvalues, sorted by descending real part."""
    m = matrix.matrix if isinstance(matrix, StabilityMatrix) else np.asarray(matrix)
    if not np.all(np.isfinite(m)):
        raise EigenFailure("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigensolver did not converge: {exc}") from exc
    order = np.lexsort((-ev.imag, -ev.real))
    return ev[order]


def classify(solution: SteadySolution, params: SystemParams,
             tol_stability: float = 1e-8) -> StabilityVerdict:
    ev = eigenvalues(build_matrix(solution, params))
    mr = float(ev.real.max())
    return StabilityVerdict(ev, mr, mr <= tol_stability)


def annotate(solution: SteadySolution, params: SystemParams,
             tol_stability: float = 1e-8) -> SteadySolution:
    """Copy of ``solution`` with its stability field filled in."""
    v = classify(solution, params, tol_stability)
    return solution.replace(stability="stable" if v.stable else "unstable")
