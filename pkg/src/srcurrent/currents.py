"""Photon currents at mean-field level and the node balance audit.

All currents are per emitter (divided by N). A positive bond current
``I_{n,n+1}`` means net flow from cavity n to cavity n+1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .meanfield import make_rhs
from .model import SystemParams, validate
from .states import MeanFieldState, SteadySolution

STEADY_TOL = 1e-8


def _state(obj) -> MeanFieldState:
    return obj.state if isinstance(obj, SteadySolution) else obj


def bond_current(state, params: SystemParams, n: int) -> float:
    """``<i J (a_n^+ a_{n+1} - h.c.)>/N`` for 0-based bond index ``n``."""
    p = validate(params)
    return float(bond_currents(state, p)[n])


def bond_currents(state, params: SystemParams) -> np.ndarray:
    p = validate(params)
    a = _state(state).alphas
    re, im = a.real, a.imag
    # 2J Im(a_n a_{n+1}^*) in real arithmetic so that equal amplitudes cancel exactly
    return 2 * p.hopping * (im * np.roll(re, -1) - re * np.roll(im, -1))


def total_current(state, params: SystemParams) -> float:
    return float(bond_currents(state, params).sum())


def spin_cavity_currents(state, params: SystemParams, n: int) -> tuple:
    """Rotating (``I_s``) and counter-rotating (``I_s^c``) emitter-to-cavity currents."""
    rw, crw = _spin_currents(state, params)
    return float(rw[n]), float(crw[n])


def _spin_currents(state, params):
    p = validate(params)
    st = _state(state)
    re, im, g = st.alphas.real, st.alphas.imag, p.coupling
    # i g [a S+ - a^* S-] and i g [a S- - a^* S+] with S+- = X +- iY
    rw = -2 * g * (im * st.x + re * st.y)
    crw = -2 * g * (im * st.x - re * st.y)
    return rw, crw


def dissipation_current(state, params: SystemParams, n: int) -> float:
    p = validate(params)
    return float(2 * p.cavity_loss * abs(_state(state).alphas[n]) ** 2)


@dataclass
class CurrentReport:
    bond: list
    total: float
    spin_rw: list
    spin_crw: list
    dissipation: list
    kirchhoff_residuals: list
    spin_node_residuals: list
    steady: bool
    rhs_residual: float
    violations: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.steady and not self.violations

    def to_dict(self) -> dict:
        return {
            "bond": self.bond, "total": self.total,
            "spin_rw": self.spin_rw, "spin_crw": self.spin_crw,
            "dissipation": self.dissipation,
            "kirchhoff_residuals": self.kirchhoff_residuals,
            "spin_node_residuals": self.spin_node_residuals,
            "steady": self.steady, "rhs_residual": self.rhs_residual,
            "violations": self.violations, "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """One row per cavity node, then a ``total`` row."""
        buf = io.StringIO()
        buf.write("# params: " + json.dumps(self.params, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "bond_out", "spin_rw", "spin_crw", "dissipation",
                    "kirchhoff_residual", "spin_node_residual"])
        for i in range(len(self.bond)):
            w.writerow([i + 1, repr(self.bond[i]), repr(self.spin_rw[i]), repr(self.spin_crw[i]),
                        repr(self.dissipation[i]), repr(self.kirchhoff_residuals[i]),
                        repr(self.spin_node_residuals[i])])
        w.writerow(["total", repr(self.total), repr(float(sum(self.spin_rw))),
                    repr(float(sum(self.spin_crw))), repr(float(sum(self.dissipation))),
                    repr(float(sum(self.kirchhoff_residuals))),
                    repr(float(sum(self.spin_node_residuals)))])
        return buf.getvalue()


def kirchhoff_audit(solution: Union[SteadySolution, MeanFieldState], params: SystemParams,
                    tol: float = 1e-8) -> CurrentReport:
    """All currents plus node residuals.

    The cavity-node residual ``I_{n-1,n} - I_{n,n+1} + I_s + I_s^c - I_d``
    equals ``d|alpha_n|^2/dt`` for any state, so off a fixed point the
    residuals are reported but not flagged.
    """
    p = validate(params)
    st = _state(solution)
    bond = bond_currents(st, p)
    rw, crw = _spin_currents(st, p)
    diss = 2 * p.cavity_loss * np.abs(st.alphas) ** 2
    node = np.roll(bond, 1) - bond + rw + crw - diss
    spin_node = rw - crw
    resid = float(np.linalg.norm(make_rhs(p)(0.0, st.to_vector())))
    steady = resid < STEADY_TOL
    violations = []
    if steady:
        violations = ([f"cavity {i + 1}" for i in np.flatnonzero(np.abs(node) > tol)]
                      + [f"spin {i + 1}" for i in np.flatnonzero(np.abs(spin_node) > tol)])
    return CurrentReport(
        bond=bond.tolist(), total=float(bond.sum()),
        spin_rw=rw.tolist(), spin_crw=crw.tolist(), dissipation=diss.tolist(),
        kirchhoff_residuals=node.tolist(), spin_node_residuals=spin_node.tolist(),
        steady=steady, rhs_residual=resid, violations=violations, params=p.to_dict(),
    )
