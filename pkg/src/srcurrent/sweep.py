"""Grid evaluation of scalar observables over one or two parameter axes.

Cells are independent. They are split into contiguous blocks over a process
pool and written back by index, so the grid does not depend on the worker
count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import steady_state
from .currents import _spin_currents, bond_currents
from .errors import Diverged, SRCurrentError
from .fluctuations import photon_number_fluctuations
from .meanfield import evolve_to_steady
from .model import DetuningLadder, SystemParams, delta_of, expand_ladder, validate
from .stability import classify
from .states import Phase

AXIS_NAMES = ("g", "kappa", "delta", "J", "omega_c")
OBSERVABLES = ("alpha_re", "alpha_im", "alpha_abs", "total_current", "bond_current",
               "spin_current", "photon_fluct", "phase_label", "max_real_eig")
_INDEXED = {"alpha_re", "alpha_im", "alpha_abs", "bond_current", "spin_current", "photon_fluct"}


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.count < 1:
            raise ValueError("axis count must be >= 1")
        if self.count >= 2 and not self.min < self.max:
            raise ValueError("axis needs min < max")

    @property
    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.count)

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """``name:min:max:count``, e.g. ``g:0:0.6:61``."""
        parts = text.strip().split(":")
        if len(parts) != 4:
            raise ValueError(f"axis spec {text!r} is not name:min:max:count")
        return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "count": self.count}


def parse_observable(text: str) -> tuple:
    """``'bond_current(2)'`` or ``'bond_current:2'`` -> ``('bond_current', 1)`` (0-based)."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:[(:]\s*(\d+)\s*\)?)?\s*", text)
    if not m or m.group(1) not in OBSERVABLES:
        raise ValueError(f"unknown observable {text!r}; expected one of {OBSERVABLES}")
    name, idx = m.group(1), m.group(2)
    if idx is not None and name not in _INDEXED:
        raise ValueError(f"observable {name} takes no cavity index")
    k = int(idx) - 1 if idx is not None else 0
    if k < 0:
        raise ValueError("cavity index is 1-based")
    return name, k


@dataclass
class PhaseDiagram:
    """Grid of observable values; with two axes, ``values[i, j]`` is at (axis0[i], axis1[j])."""

    axes: list
    observable: str
    values: np.ndarray
    status: np.ndarray
    base_params: dict
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return tuple(a.count for a in self.axes)

    def equals(self, other: "PhaseDiagram") -> bool:
        return (self.axes == other.axes and self.observable == other.observable
                and self.values.shape == other.values.shape
                and np.array_equal(self.values, other.values, equal_nan=True)
                and np.array_equal(self.status, other.status)
                and self.base_params == other.base_params)


def apply_axis(params: SystemParams, name: str, value: float) -> SystemParams:
    if name == "g":
        return params.replace(coupling=value)
    if name == "kappa":
        return params.replace(cavity_loss=value)
    if name == "J":
        return params.replace(hopping=value)
    base, step = params.cavity_freqs[0], delta_of(params)
    if name == "delta":
        step = value
    else:
        base = value
    return params.replace(cavity_freqs=tuple(expand_ladder(DetuningLadder(base, step),
                                                           params.n_cavities)))


def _solve(p: SystemParams, path: str):
    if path == "evolve" or (path == "auto" and not (p.is_symmetric or p.n_cavities == 3)):
        sol = evolve_to_steady(p)
        if sol.branch == -1:
            # report on the X > 0 branch, as the analytic path does
            sol = sol.replace(state=sol.state.negated(), branch=1)
        return sol
    return steady_state(p, branch=1)


def evaluate_cell(params: SystemParams, observable: str, path: str = "auto") -> tuple:
    """``(value, status)`` for one parameter point; errors become a status string."""
    name, k = parse_observable(observable)
    try:
        p = validate(params)
        sol = _solve(p, path)
        st = sol.state
        status = "ok" if sol.phase == Phase.SUPERRADIANT else "normal-phase"
        if name == "alpha_re":
            v = st.alphas[k].real
        elif name == "alpha_im":
            v = st.alphas[k].imag
        elif name == "alpha_abs":
            v = abs(st.alphas[k])
        elif name == "total_current":
            v = bond_currents(st, p).sum()
        elif name == "bond_current":
            v = bond_currents(st, p)[k]
        elif name == "spin_current":
            v = _spin_currents(st, p)[0][k]
        elif name == "phase_label":
            v = 1.0 if sol.phase == Phase.SUPERRADIANT else 0.0
        elif name == "max_real_eig":
            v = classify(sol, p).max_real_part
        else:
            try:
                v = photon_number_fluctuations(sol, p)[k]
            except Diverged:
                return math.nan, "diverged"
        return float(v), status
    except SRCurrentError as exc:
        return math.nan, type(exc).__name__
    except (ValueError, ArithmeticError) as exc:
        return math.nan, type(exc).__name__


def _cell_params(base: SystemParams, axes: Sequence[AxisSpec], index: tuple) -> SystemParams:
    p = base
    for ax, i in zip(axes, index):
        p = apply_axis(p, ax.name, float(ax.values[i]))
    return p


def _run_block(base, axes, observable, path, indices):
    return [evaluate_cell(_cell_params(base, axes, idx), observable, path) for idx in indices]


def run_sweep(base_params: SystemParams, axes: Sequence[AxisSpec], observable: str,
              workers: int = 1, path: str = "auto") -> PhaseDiagram:
    axes = list(axes)
    if not 1 <= len(axes) <= 2:
        raise ValueError("one or two axes are supported")
    parse_observable(observable)
    if path not in ("auto", "analytic", "evolve"):
        raise ValueError(f"unknown path {path!r}")
    base = validate(base_params)
    shape = tuple(a.count for a in axes)
    indices = list(np.ndindex(*shape))
    workers = max(1, min(workers, len(indices)))
    if workers == 1:
        results = _run_block(base, axes, observable, path, indices)
    else:
        blocks = np.array_split(np.arange(len(indices)), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, base, axes, observable, path,
                                   [indices[i] for i in b]) for b in blocks]
            results = [r for fut in futures for r in fut.result()]
    values = np.array([r[0] for r in results], dtype=float).reshape(shape)
    status = np.array([r[1] for r in results], dtype=object).reshape(shape)
    return PhaseDiagram(axes, observable, values, status, base.to_dict(),
                        {"path": path, "version": __version__})


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", t)


def to_json_dict(diagram: PhaseDiagram) -> dict:
    return {
        "axes": [a.to_dict() for a in diagram.axes],
        "observable": diagram.observable,
        "shape": list(diagram.shape),
        "values": [None if math.isnan(v) else float(v) for v in diagram.values.ravel()],
        "status": [str(s) for s in diagram.status.ravel()],
        "metadata": {"params": diagram.base_params, "created": _timestamp(), **diagram.metadata},
    }


def from_json_dict(d: dict) -> PhaseDiagram:
    axes = [AxisSpec(**a) for a in d["axes"]]
    shape = tuple(d["shape"])
    values = np.array([math.nan if v is None else v for v in d["values"]], float).reshape(shape)
    status = np.array(d["status"], dtype=object).reshape(shape)
    meta = dict(d["metadata"])
    params = meta.pop("params")
    meta.pop("created", None)
    return PhaseDiagram(axes, d["observable"], values, status, params, meta)


def csv_rows(diagram: PhaseDiagram) -> list:
    header = [a.name for a in diagram.axes] + [diagram.observable, "status"]
    rows = [header]
    grids = [a.values for a in diagram.axes]
    for idx in np.ndindex(*diagram.shape):
        v = diagram.values[idx]
        rows.append([repr(float(g[i])) for g, i in zip(grids, idx)]
                    + ["" if math.isnan(v) else repr(float(v)), str(diagram.status[idx])])
    return rows


def csv_text(diagram: PhaseDiagram) -> str:
    """CSV rows preceded by a ``# params:`` comment line."""
    buf = io.StringIO()
    buf.write("# params: " + json.dumps(diagram.base_params, sort_keys=True) + "\n")
    csv.writer(buf, lineterminator="\n").writerows(csv_rows(diagram))
    return buf.getvalue()


def export(diagram: PhaseDiagram, fmt: str, path) -> Path:
    """Write ``diagram`` as ``csv`` or ``json``; IO errors name the path."""
    path = Path(path)
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                fh.write(csv_text(diagram))
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump(to_json_dict(diagram), fh, indent=1)
        else:
            raise ValueError(f"unknown export format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def load_json(path) -> PhaseDiagram:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
