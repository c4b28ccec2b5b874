"""Gaussian fluctuations around a mean-field steady state.

The collective spin is mapped to a boson ``b = beta sqrt(N) + d`` and each cavity
to ``a_n = alpha_n sqrt(N) + c_n``. To quadratic order the fluctuations obey

    H_fl = sum_n [w_n c_n^+ c_n + J (c_{n+1}^+ c_n + h.c.)] + Omega~ d^+ d
           + sum_n [G1 (c_n^+ d + c_n d) + G3_n d^+ d^+ + h.c.]

with cavity loss ``kappa`` on every ``c_n`` and no emitter loss.

Two independent routes give the steady second moments:

* quadratures: drift ``A`` from the symplectic form times the Hessian of
  ``H_fl``; the covariance solves ``A S + S A^T + D = 0``;
* correlators: Heisenberg equations for ``(c, d, c^+, d^+)`` built from
  commutators; the symmetrized moments are integrated in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import BetaOverflow, Diverged, MarginalDrift, NoConvergence, ZAtHalf
from .model import SystemParams, ring_matrix, validate
from .ode import dopri5_steps
from .states import SteadySolution

MARGINAL_EPS = 1e-10
DIVERGENCE_CAP = 1e6


@dataclass
class HPCoefficients:
    omega_tilde: float
    gamma1: complex
    gamma3: np.ndarray
    beta: complex
    b1: float


def hp_coefficients(solution: SteadySolution, params: SystemParams) -> HPCoefficients:
    p = validate(params)
    st = solution.state
    if 0.5 - st.z <= 1e-15:
        raise ZAtHalf("beta has a pole at Z = 1/2", Z=st.z)
    beta = (st.x - 1j * st.y) / math.sqrt(0.5 - st.z)
    b2 = abs(beta) ** 2
    if b2 >= 1:
        raise BetaOverflow("|beta| >= 1", beta=[beta.real, beta.imag])
    b1 = math.sqrt(1 - b2)
    g = p.coupling
    re_a = st.alphas.real
    omega_tilde = p.omega_emitter - g * re_a.sum() * beta.real * (4 - 3 * b2) / b1 ** 3
    gamma1 = g * (1 - b2 - beta.real * np.conj(beta)) / b1
    gamma3 = -g * re_a * (beta.real * beta ** 2 + 2 * beta * (1 - b2)) / (2 * b1 ** 3)
    return HPCoefficients(float(omega_tilde), complex(gamma1), np.asarray(gamma3, complex),
                          complex(beta), b1)


def _bogoliubov_blocks(coeffs: HPCoefficients, p: SystemParams):
    """Normal (``eps``) and anomalous (``lam``) coefficient matrices over modes (c_1..c_N, d)."""
    n = p.n_cavities
    m = n + 1
    eps = np.zeros((m, m), complex)
    eps[:n, :n] = ring_matrix(p)
    eps[:n, n] = coeffs.gamma1
    eps[n, :n] = np.conj(coeffs.gamma1)
    eps[n, n] = coeffs.omega_tilde
    lam = np.zeros((m, m), complex)      # coefficient of (1/2) a_i^+ a_j^+
    lam[:n, n] = np.conj(coeffs.gamma1)
    lam[n, :n] = np.conj(coeffs.gamma1)
    lam[n, n] = 2 * coeffs.gamma3.sum()
    return eps, lam


def _interleave(m: int) -> np.ndarray:
    """Permutation from (x_1..x_m, p_1..p_m) to (x_1, p_1, ..., x_m, p_m)."""
    return np.ravel(np.column_stack([np.arange(m), np.arange(m) + m]))


def assemble_linear_dynamics(coeffs: HPCoefficients, params: SystemParams) -> tuple:
    """Drift ``A`` and diffusion ``D`` over quadratures ``(x_c1, p_c1, ..., x_d, p_d)``.

    Convention: ``c = (x + i p)/sqrt(2)``, vacuum covariance ``I/2``.
    """
    p = validate(params)
    n = p.n_cavities
    m = n + 1
    eps, lam = _bogoliubov_blocks(coeffs, p)
    # Hessian of the classical Hamiltonian h(x, p)
    hr = np.block([[eps.real + lam.real, -eps.imag + lam.imag],
                   [eps.imag + lam.imag, eps.real - lam.real]])
    symp = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
    a = symp @ hr
    loss = np.r_[np.full(n, p.cavity_loss), 0.0]
    a -= np.diag(np.r_[loss, loss])
    d = np.diag(np.r_[loss, loss])
    perm = _interleave(m)
    return a[np.ix_(perm, perm)], d[np.ix_(perm, perm)]


@dataclass
class CovarianceBlock:
    """Symmetric quadrature covariance ``S_ij = <{r_i, r_j}>/2`` of the fluctuations."""

    matrix: np.ndarray
    n_cavities: int
    method: str = "lyapunov"

    def occupations(self) -> np.ndarray:
        """``<x^+ x>`` for every mode, cavities first, emitter last."""
        s = self.matrix
        diag = np.diag(s)
        return (diag[0::2] + diag[1::2] - 1.0) / 2.0

    def photon_numbers(self) -> np.ndarray:
        return self.occupations()[: self.n_cavities]

    def uncertainty_min_eig(self) -> float:
        """Smallest eigenvalue of ``S + i Omega/2`` (non-negative for a physical state)."""
        m = self.matrix.shape[0] // 2
        omega = np.kron(np.eye(m), np.array([[0.0, 1.0], [-1.0, 0.0]]))
        return float(np.linalg.eigvalsh(self.matrix + 0.5j * omega).min())


def steady_covariance(a: np.ndarray, d: np.ndarray, n_cavities: Optional[int] = None) -> CovarianceBlock:
    """Direct solve of ``A S + S A^T + D = 0`` (one step of residual refinement)."""
    ev = np.linalg.eigvals(a)
    worst = ev[np.argmax(ev.real)]
    if worst.real >= -MARGINAL_EPS:
        raise MarginalDrift("drift has an eigenvalue at or beyond the imaginary axis",
                            eigenvalue=[float(worst.real), float(worst.imag)])
    s = solve_continuous_lyapunov(a, -d)
    r = a @ s + s @ a.T + d
    s = s + solve_continuous_lyapunov(a, -r)
    s = 0.5 * (s + s.T)
    n = a.shape[0] // 2 - 1 if n_cavities is None else n_cavities
    return CovarianceBlock(s, n, "lyapunov")


def lyapunov_residual(a, d, cov: CovarianceBlock) -> float:
    s = cov.matrix
    return float(np.linalg.norm(a @ s + s @ a.T + d))


def correlator_drift(coeffs: HPCoefficients, params: SystemParams) -> np.ndarray:
    """Heisenberg drift ``L`` with ``dv/dt = L v`` for ``v = (c_1..c_N, d, c_1^+..c_N^+, d^+)``."""
    p = validate(params)
    n = p.n_cavities
    m = n + 1
    g1, g1c = coeffs.gamma1, np.conj(coeffs.gamma1)
    el = np.zeros((2 * m, 2 * m), complex)
    # dc_n/dt = -i [c_n, H] - kappa c_n
    el[:n, :n] = -1j * ring_matrix(p) - p.cavity_loss * np.eye(n)
    el[:n, n] = -1j * g1
    el[:n, m + n] = -1j * g1c
    # dd/dt = -i [d, H]
    el[n, :n] = -1j * g1c
    el[n, m:m + n] = -1j * g1c
    el[n, n] = -1j * coeffs.omega_tilde
    el[n, m + n] = -2j * coeffs.gamma3.sum()
    el[m:, m:] = np.conj(el[:m, :m])
    el[m:, :m] = np.conj(el[:m, m:])
    return el


def integrate_correlators(coeffs: HPCoefficients, params: SystemParams,
                          t_max: float = 1e4, rtol: float = 1e-10, atol: float = 1e-12,
                          settle_tol: float = 1e-8, window: float = 50.0,
                          cap: float = DIVERGENCE_CAP) -> np.ndarray:
    """Photon numbers from time-integrating the symmetrized correlators from vacuum.

    Stops once the relative rate of change stays below ``settle_tol`` for
    ``window`` time units. Raises ``Diverged`` when an occupation exceeds
    ``cap`` and ``NoConvergence`` when neither happens by ``t_max``.
    """
    p = validate(params)
    n = p.n_cavities
    m = n + 1
    el = correlator_drift(coeffs, p)
    dm = np.zeros((2 * m, 2 * m), complex)
    for j in range(n):
        dm[j, m + j] = dm[m + j, j] = p.cavity_loss
    s0 = np.zeros((2 * m, 2 * m), complex)
    for j in range(m):
        s0[j, m + j] = s0[m + j, j] = 0.5
    size = (2 * m) ** 2

    def pack(s):
        return np.concatenate([s.real.ravel(), s.imag.ravel()])

    def unpack(y):
        return (y[:size] + 1j * y[size:]).reshape(2 * m, 2 * m)

    def f(t, y):
        s = unpack(y)
        return pack(el @ s + s @ el.T + dm)

    def photons(s):
        return np.array([s[m + j, j].real - 0.5 for j in range(n)])

    calm_since = None
    for t, y, fy in dopri5_steps(f, 0.0, pack(s0), t_max, rtol=rtol, atol=atol):
        s = unpack(y)
        nc = photons(s)
        if np.any(np.abs(nc) > cap):
            raise Diverged("photon-number fluctuations exceed the cap", t=t, cap=cap)
        if np.linalg.norm(fy) <= settle_tol * max(1.0, np.linalg.norm(y)):
            calm_since = t if calm_since is None else calm_since
            if t - calm_since >= window:
                return nc
        else:
            calm_since = None
    raise NoConvergence("correlators did not settle", t=t_max, photons=photons(unpack(y)).tolist())


def photon_number_fluctuations(solution: SteadySolution, params: SystemParams,
                               cap: float = DIVERGENCE_CAP, t_max: float = 1e4) -> np.ndarray:
    """Steady ``<c_n^+ c_n>`` for each cavity.

    Uses the direct Lyapunov solve; if the drift is marginal, falls back to
    integrating the correlators. ``Diverged`` marks values above ``cap``.
    """
    p = validate(params)
    coeffs = hp_coefficients(solution, p)
    a, d = assemble_linear_dynamics(coeffs, p)
    try:
        nc = steady_covariance(a, d, p.n_cavities).photon_numbers()
    except MarginalDrift:
        nc = integrate_correlators(coeffs, p, t_max=t_max, cap=cap)
    if not np.all(np.isfinite(nc)) or np.any(nc > cap):
        raise Diverged("photon-number fluctuations exceed the cap", cap=cap,
                       values=[float(v) for v in nc])
    # clip rounding-level negatives only
    return np.where(nc > -1e-10, np.maximum(nc, 0.0), nc)
