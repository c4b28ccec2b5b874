"""Dormand-Prince 5(4) integrator with PI step-size control.

Written out explicitly (rather than wrapping scipy) so that step rejection,
underflow and non-finite detection follow the error contract of this package,
and so callers can stream accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import NonFiniteState, StepSizeUnderflow

# Butcher tableau (Hairer, Norsett & Wanner, DOPRI5)
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4
_A_ROWS = [np.array(row) for row in A]

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BETA = 0.04            # PI controller memory
ALPHA = 0.2 - 0.75 * BETA


@dataclass
class StepStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    h_min: float = np.inf
    h_max: float = 0.0

    def as_dict(self) -> dict:
        return {"n_accepted": self.n_accepted, "n_rejected": self.n_rejected,
                "n_rhs": self.n_rhs, "h_min": float(self.h_min), "h_max": float(self.h_max)}


def _initial_step(f, t0, y0, f0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5_steps(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    h0: Optional[float] = None,
    max_step: float = np.inf,
    stops: Sequence[float] = (),
    stats: Optional[StepStats] = None,
) -> Iterator[tuple]:
    """Yield ``(t, y, f(t, y))`` after every accepted step up to ``t_end``.

    ``stops`` are times the integrator must land on exactly (output times);
    the step is clipped to reach them without disturbing the controller.
    """
    if stats is None:
        stats = StepStats()
    y = np.array(y0, dtype=float)
    t = float(t0)
    fy = f(t, y)
    stats.n_rhs += 1
    if not np.all(np.isfinite(fy)):
        raise NonFiniteState("non-finite derivative at initial state", t=t)
    h = h0 if h0 is not None else _initial_step(f, t, y, fy, rtol, atol)
    stats.n_rhs += 1
    h = min(h, max_step)
    stops = sorted(s for s in stops if t < s < t_end) + [t_end]
    stop_idx = 0
    err_prev = 1e-4
    k = np.empty((7, y.size))

    while t < t_end:
        target = stops[stop_idx]
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepSizeUnderflow("step size underflow", t=t, h=h)
        clipped = t + h >= target
        h_try = target - t if clipped else h

        k[0] = fy
        for i in range(1, 7):
            k[i] = f(t + C[i] * h_try, y + h_try * (_A_ROWS[i] @ k[:i]))
        stats.n_rhs += 6
        y_new = y + h_try * (B5 @ k)
        f_new = k[6].copy()  # FSAL
        err_vec = h_try * (E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / scale) ** 2))

        if not np.isfinite(err):
            if not np.all(np.isfinite(y_new)) and h_try < 1e-8:
                raise NonFiniteState("state became non-finite", t=t)
            h = h_try * MIN_FACTOR
            stats.n_rejected += 1
            continue

        if err <= 1.0:
            if not np.all(np.isfinite(f_new)):
                raise NonFiniteState("derivative became non-finite", t=t + h_try)
            err = max(err, 1e-10)
            factor = SAFETY * err ** (-ALPHA) * err_prev ** BETA
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            err_prev = err
            t = target if clipped else t + h_try
            y, fy = y_new, f_new
            stats.n_accepted += 1
            stats.h_min = min(stats.h_min, h_try)
            stats.h_max = max(stats.h_max, h_try)
            if clipped:
                stop_idx += 1
                # keep the controller's own proposal when the step was shortened
                h = min(max(h, h_try * factor), max_step)
            else:
                h = min(h_try * factor, max_step)
            yield t, y, fy
        else:
            factor = max(MIN_FACTOR, SAFETY * err ** (-ALPHA))
            h = h_try * factor
            stats.n_rejected += 1
