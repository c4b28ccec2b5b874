"""Closed-form steady states, critical couplings and phase classification.

Equal cavity frequencies (any ring size) use the symmetric solution; the
three-cavity ring with arbitrary frequencies uses the response amplitudes
``alpha_tilde``, defined through ``alpha_n = g X alpha_tilde_n``.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    FrequencyCollapse,
    NoRoot,
    NoTransition,
    RingSizeUnsupported,
    SingularDenominator,
)
from .model import SystemParams, validate, with_delta
from .states import MeanFieldState, Phase, SteadySolution

SINGULAR_EPS = 1e-12


def _effective_freq(p: SystemParams) -> float:
    """``w_c + 2J`` for equal cavities; raises on collapse."""
    if not p.is_symmetric:
        raise ValueError("cavity frequencies are not all equal")
    wj = p.cavity_freqs[0] + 2 * p.hopping
    if wj == 0:
        raise FrequencyCollapse("w_c + 2J vanishes", omega_c=p.cavity_freqs[0], hopping=p.hopping)
    return wj


def _symmetric_bracket(p: SystemParams) -> float:
    wj = _effective_freq(p)
    return wj + p.cavity_loss ** 2 / wj


def g_c_symmetric(params: SystemParams) -> float:
    """Critical coupling for equal cavity frequencies and ``N_c`` cavities."""
    p = validate(params)
    val = p.omega_emitter / p.n_cavities * _symmetric_bracket(p)
    if val <= 0:
        raise NoTransition("no superradiant phase for this w_c + 2J", bracket=val)
    return 0.5 * math.sqrt(val)


def normal_solution(params: SystemParams, below_critical: bool = False) -> SteadySolution:
    p = validate(params)
    return SteadySolution(MeanFieldState.normal(p.n_cavities), Phase.NORMAL, 0,
                          below_critical=below_critical)


def steady_symmetric(params: SystemParams, branch: int = 1) -> SteadySolution:
    """Superradiant state for equal cavity frequencies.

    The sign of ``A`` follows from ``X = 4 g Z A / Omega``, so the returned
    state is an exact fixed point. For ``g <= g_c`` the normal state is
    returned with ``below_critical`` set.
    """
    p = validate(params)
    _check_branch(branch)
    if p.coupling <= g_c_symmetric(p):
        return normal_solution(p, below_critical=True)
    om, g, kappa, nc = p.omega_emitter, p.coupling, p.cavity_loss, p.n_cavities
    wj = _effective_freq(p)
    z = -om / (8 * nc * g * g) * _symmetric_bracket(p)
    x = branch * math.sqrt(0.25 - z * z)
    a = om * x / (4 * g * z)
    b = kappa * a / wj
    alphas = np.full(nc, (a + 1j * b) / nc)
    return SteadySolution(MeanFieldState(alphas, x, 0.0, z), Phase.SUPERRADIANT, branch,
                          aux={"A": a, "B": b})


def alpha_tilde(params: SystemParams) -> np.ndarray:
    """Response amplitudes of the three-cavity ring (``alpha_n = g X alpha_tilde_n``)."""
    p = validate(params)
    if p.n_cavities != 3:
        raise RingSizeUnsupported("closed form exists only for three cavities",
                                  n_cavities=p.n_cavities)
    w = p.freqs
    j, kappa = p.hopping, p.cavity_loss
    u = j + 1j * kappa
    den = (2 * j ** 3 + j ** 2 * (3j * kappa - w.sum())
           + 1j * (kappa + 1j * w[0]) * (kappa + 1j * w[1]) * (kappa + 1j * w[2]))
    if abs(den) < SINGULAR_EPS:
        raise SingularDenominator("resonance: response denominator vanishes",
                                  denominator=[den.real, den.imag], freqs=w.tolist())
    return np.array([-2 * (u - w[(n - 1) % 3]) * (u - w[(n + 1) % 3]) / den for n in range(3)])


def g_c_asymmetric(params: SystemParams) -> float:
    """Common critical coupling of the three-cavity ring."""
    p = validate(params)
    s = 2 * alpha_tilde(p).real.sum()
    if s >= 0:
        raise NoTransition("sum of response amplitudes is non-negative; no superradiant phase",
                           sum=s)
    return math.sqrt(-p.omega_emitter / s)


def steady_asymmetric(params: SystemParams, branch: int = 1) -> SteadySolution:
    """Superradiant state of the three-cavity ring with arbitrary frequencies."""
    p = validate(params)
    _check_branch(branch)
    at = alpha_tilde(p)
    g, om = p.coupling, p.omega_emitter
    if 2 * at.real.sum() >= 0 or g <= g_c_asymmetric(p):
        return normal_solution(p, below_critical=True)
    a_tilde = g * at.real.sum()
    z = om / (4 * g * a_tilde)
    x = branch * math.sqrt(0.25 - z * z)
    return SteadySolution(MeanFieldState(g * x * at, x, 0.0, z), Phase.SUPERRADIANT, branch,
                          aux={"alpha_tilde": at, "A_tilde": a_tilde})


def g_c(params: SystemParams) -> float:
    """Critical coupling, picking the symmetric or three-cavity formula."""
    p = validate(params)
    if p.is_symmetric:
        return g_c_symmetric(p)
    return g_c_asymmetric(p)


def steady_state(params: SystemParams, branch: int = 1) -> SteadySolution:
    """Analytic steady state appropriate for ``params`` (normal below threshold)."""
    p = validate(params)
    if p.is_symmetric:
        return steady_symmetric(p, branch)
    return steady_asymmetric(p, branch)


def classify_phase(params: SystemParams) -> Phase:
    """Superradiant iff ``g > g_c``; the boundary itself counts as normal."""
    p = validate(params)
    try:
        gc = g_c(p)
    except NoTransition:
        return Phase.NORMAL
    return Phase.SUPERRADIANT if p.coupling > gc else Phase.NORMAL


def critical_delta(params: SystemParams, g: Optional[float] = None,
                   delta_max: float = 10.0, n_scan: int = 4000,
                   rtol: float = 1e-10) -> float:
    """Smallest ladder step where the superradiant phase ends at coupling ``g``.

    Solves ``Omega + g^2 * sum_n (alpha_tilde_n + c.c.) = 0`` in the step of
    the ladder ``w_n = w_1 + (n - 1) * step``, keeping ``w_1`` fixed.
    """
    p = validate(params)
    g = p.coupling if g is None else g
    om = p.omega_emitter

    def balance(delta):
        return om + g * g * 2 * alpha_tilde(with_delta(p, delta)).real.sum()

    f0 = balance(0.0)
    if f0 >= 0:
        raise NoRoot("coupling is not above threshold at zero detuning", g=g, balance=f0)
    grid = np.linspace(0.0, delta_max, n_scan + 1)
    prev_d, prev_f = 0.0, f0
    for d in grid[1:]:
        try:
            fd = balance(d)
        except SingularDenominator:
            continue
        if fd >= 0:
            return brentq(balance, prev_d, d, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps))
        prev_d, prev_f = d, fd
    raise NoRoot("no phase boundary within the search interval", g=g, delta_max=delta_max)


def _check_branch(branch: int):
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
