"""State containers shared by the dynamics, closed-form and analysis modules."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class Phase(str, Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"
    # alpha = 0 with the spin fully inverted; only reachable by seeding Z = +1/2
    INVERTED = "inverted"


@dataclass
class MeanFieldState:
    """Scaled cavity coherences ``alphas`` and collective spin ``(x, y, z)``.

    The flat vector layout used by the integrator is
    ``[Re a_1..a_N, Im a_1..a_N, X, Y, Z]``.
    """

    alphas: np.ndarray
    x: float
    y: float
    z: float

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex)
        self.x, self.y, self.z = float(self.x), float(self.y), float(self.z)

    @property
    def n_cavities(self) -> int:
        return self.alphas.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.alphas.real, self.alphas.imag, [self.x, self.y, self.z]])

    @classmethod
    def from_vector(cls, v, n_cavities: Optional[int] = None) -> "MeanFieldState":
        v = np.asarray(v, dtype=float)
        n = (v.size - 3) // 2 if n_cavities is None else n_cavities
        return cls(v[:n] + 1j * v[n:2 * n], v[2 * n], v[2 * n + 1], v[2 * n + 2])

    @classmethod
    def normal(cls, n_cavities: int) -> "MeanFieldState":
        return cls(np.zeros(n_cavities, complex), 0.0, 0.0, -0.5)

    @classmethod
    def seed(cls, n_cavities: int, z0: float = -0.499, x_sign: int = 1) -> "MeanFieldState":
        """Empty cavities, ``Y = 0`` and the spin tilted so that ``X = x_sign * sqrt(1/4 - z0^2)``."""
        if not -0.5 <= z0 <= 0.5:
            raise ValueError(f"z0 must lie in [-1/2, 1/2], got {z0}")
        x = np.sqrt(max(0.25 - z0 * z0, 0.0))
        return cls(np.zeros(n_cavities, complex), np.copysign(x, x_sign) if x else 0.0, 0.0, z0)

    def negated(self) -> "MeanFieldState":
        """Image under the parity map (alpha, X, Y, Z) -> (-alpha, -X, -Y, Z)."""
        return MeanFieldState(-self.alphas, -self.x, -self.y, self.z)

    @property
    def spin_norm_defect(self) -> float:
        return self.x ** 2 + self.y ** 2 + self.z ** 2 - 0.25

    def to_dict(self) -> dict:
        return {
            "alpha_re": self.alphas.real.tolist(),
            "alpha_im": self.alphas.imag.tolist(),
            "X": self.x, "Y": self.y, "Z": self.z,
        }


@dataclass
class SteadySolution:
    """A steady state with its phase, Z2 branch, origin and stability tag.

    ``aux`` holds the closed-form intermediates (``A``, ``B`` for equal
    cavities; ``alpha_tilde``, ``A_tilde`` for the three-cavity ladder).
    """

    state: MeanFieldState
    phase: Phase
    branch: int = 0
    provenance: str = "analytic"
    stability: str = "unknown"
    aux: dict = field(default_factory=dict)
    below_critical: bool = False

    def replace(self, **changes) -> "SteadySolution":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        aux = {}
        for k, v in self.aux.items():
            if isinstance(v, np.ndarray) and np.iscomplexobj(v):
                aux[k] = {"re": v.real.tolist(), "im": v.imag.tolist()}
            elif isinstance(v, np.ndarray):
                aux[k] = v.tolist()
            else:
                aux[k] = v
        return {
            "phase": self.phase.value,
            "branch": {1: "+", -1: "-"}.get(self.branch, "none"),
            "provenance": self.provenance,
            "stability": self.stability,
            "below_critical": self.below_critical,
            **self.state.to_dict(),
            "aux": aux,
        }
