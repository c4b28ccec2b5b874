"""Mean-field equations of motion and time integration.

The equations close on the scaled cavity coherences alpha_n and the collective
spin (X, Y, Z)::

    d alpha_n/dt = -i [w_n alpha_n + J (alpha_{n-1} + alpha_{n+1}) + 2 g X] - kappa alpha_n
    dX/dt = -Omega Y
    dY/dt = Omega X - Z * sum_n 2 g (alpha_n + alpha_n^*)
    dZ/dt = Y * sum_n 2 g (alpha_n + alpha_n^*)

with periodic indexing on the ring.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NoConvergence
from .model import SystemParams, ring_matrix, validate
from .ode import StepStats, dopri5_steps
from .states import MeanFieldState, Phase, SteadySolution

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
DEFAULT_Z0 = -0.499

# thresholds for labelling an evolved fixed point
_ORDER_EPS = 1e-6


def make_rhs(params: SystemParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Return ``f(t, y)`` on the flat state vector for a fixed parameter set."""
    p = validate(params)
    n = p.n_cavities
    h = ring_matrix(p)
    om, g, kappa = p.omega_emitter, p.coupling, p.cavity_loss

    def f(t, y):
        ar, ai = y[:n], y[n:2 * n]
        x, yy, z = y[2 * n], y[2 * n + 1], y[2 * n + 2]
        s = 4.0 * g * ar.sum()
        out = np.empty_like(y)
        out[:n] = h @ ai - kappa * ar
        out[n:2 * n] = -(h @ ar) - 2.0 * g * x - kappa * ai
        out[2 * n] = -om * yy
        out[2 * n + 1] = om * x - z * s
        out[2 * n + 2] = yy * s
        return out

    return f


def rhs(state: MeanFieldState, params: SystemParams) -> MeanFieldState:
    """Time derivative of ``state``, packed as a MeanFieldState."""
    p = validate(params)
    d = make_rhs(p)(0.0, state.to_vector())
    return MeanFieldState.from_vector(d, p.n_cavities)


def rhs_norm(state: MeanFieldState, params: SystemParams) -> float:
    return float(np.linalg.norm(make_rhs(params)(0.0, state.to_vector())))


@dataclass
class Trajectory:
    """Recorded mean-field trajectory; ``states`` rows use the flat vector layout."""

    times: np.ndarray
    states: np.ndarray
    params: SystemParams
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    @property
    def n_cavities(self) -> int:
        return self.params.n_cavities

    @property
    def alphas(self) -> np.ndarray:
        n = self.n_cavities
        return self.states[:, :n] + 1j * self.states[:, n:2 * n]

    @property
    def x(self):
        return self.states[:, 2 * self.n_cavities]

    @property
    def y(self):
        return self.states[:, 2 * self.n_cavities + 1]

    @property
    def z(self):
        return self.states[:, 2 * self.n_cavities + 2]

    def state(self, i: int) -> MeanFieldState:
        return MeanFieldState.from_vector(self.states[i], self.n_cavities)

    @property
    def final(self) -> MeanFieldState:
        return self.state(-1)

    def spin_norm_drift(self) -> np.ndarray:
        return np.abs(self.x ** 2 + self.y ** 2 + self.z ** 2 - 0.25)

    def csv_header(self) -> list:
        n = self.n_cavities
        return (["t"] + [f"re_alpha_{i + 1}" for i in range(n)]
                + [f"im_alpha_{i + 1}" for i in range(n)] + ["X", "Y", "Z"])

    def to_csv(self, fh=None) -> Optional[str]:
        """Write CSV (one comment line with the parameter set, then a header row).

        Returns the text when ``fh`` is None.
        """
        buf = io.StringIO() if fh is None else fh
        buf.write("# params: " + json.dumps(self.params.to_dict(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header())
        for t, row in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        return buf.getvalue() if fh is None else None


def integrate(
    state0: MeanFieldState,
    params: SystemParams,
    t_end: float,
    tol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    t_eval: Optional[Sequence[float]] = None,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate from ``t = 0`` to ``t_end``.

    Every accepted step is recorded unless ``t_eval`` is given, in which case
    the integrator lands exactly on those times and records only them (plus
    ``t = 0``). No renormalization of the spin length is performed.
    """
    if tol <= 0 or t_end <= 0:
        raise ValueError("tol and t_end must be positive")
    p = validate(params)
    if state0.n_cavities != p.n_cavities:
        raise ValueError("state and params disagree on the number of cavities")
    f = make_rhs(p)
    stats = StepStats()
    y0 = state0.to_vector()
    times, rows = [0.0], [y0.copy()]
    wanted = None
    if t_eval is not None:
        wanted = set(float(t) for t in t_eval if 0 < t <= t_end)
    for t, y, _ in dopri5_steps(f, 0.0, y0, t_end, rtol=tol, atol=atol, max_step=max_step,
                                stops=sorted(wanted) if wanted else (), stats=stats):
        if wanted is None or t in wanted:
            times.append(t)
            rows.append(y.copy())
    traj = Trajectory(np.array(times), np.array(rows), p,
                      {"rtol": tol, "atol": atol, **stats.as_dict()})
    traj.metadata["max_spin_norm_drift"] = float(traj.spin_norm_drift().max())
    return traj


def label_state(state: MeanFieldState) -> tuple:
    """``(phase, branch)`` for a fixed point reached by evolution."""
    if np.max(np.abs(state.alphas)) < _ORDER_EPS and abs(state.x) < _ORDER_EPS:
        if state.z > 0:
            return Phase.INVERTED, 0
        return Phase.NORMAL, 0
    return Phase.SUPERRADIANT, int(np.sign(state.x)) or 0


def evolve_to_steady(
    params: SystemParams,
    seed: Optional[MeanFieldState] = None,
    x_sign: int = 1,
    z0: float = DEFAULT_Z0,
    tol_derivative: float = 1e-10,
    window: float = 10.0,
    t_max: float = 2e4,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SteadySolution:
    """Run the dynamics until ``|rhs| < tol_derivative`` holds for ``window`` time units.

    The default seed has empty cavities, ``Y = 0``, ``Z = z0`` and the sign of
    ``X`` given by ``x_sign``; by parity, flipping ``x_sign`` yields the
    mirrored trajectory. Raises ``NoConvergence`` (with the final residual)
    if the criterion is not met by ``t_max``.
    """
    if tol_derivative <= 0 or window <= 0:
        raise ValueError("convergence tolerances must be positive")
    p = validate(params)
    if seed is None:
        seed = MeanFieldState.seed(p.n_cavities, z0, x_sign)
    f = make_rhs(p)
    y0 = seed.to_vector()
    f0 = f(0.0, y0)
    if not np.any(f0):
        # exact fixed point, e.g. Z0 = +-1/2 with empty cavities
        return _evolved(seed, 0.0, 0.0)

    calm_since = 0.0 if np.linalg.norm(f0) < tol_derivative else None
    last = (0.0, y0, float(np.linalg.norm(f0)))
    for t, y, fy in dopri5_steps(f, 0.0, y0, t_max, rtol=rtol, atol=atol):
        r = float(np.linalg.norm(fy))
        last = (t, y, r)
        if r < tol_derivative:
            if calm_since is None:
                calm_since = t
            elif t - calm_since >= window:
                return _evolved(MeanFieldState.from_vector(y, p.n_cavities), t, r)
        else:
            calm_since = None
    t, y, r = last
    raise NoConvergence("no steady state reached", t=t, residual=r,
                        state=MeanFieldState.from_vector(y, p.n_cavities).to_dict())


def _evolved(state: MeanFieldState, t: float, residual: float) -> SteadySolution:
    phase, branch = label_state(state)
    return SteadySolution(state, phase, branch, provenance="evolved",
                          aux={"t_converged": t, "residual": residual})
