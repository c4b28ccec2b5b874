"""Parameter model for a ring of lossy cavities sharing one emitter ensemble.

All frequencies are handled in units of the emitter frequency Omega. ``validate``
rescales any consistent input so that ``omega_emitter == 1`` and keeps the
original scale in ``omega_scale`` for absolute reporting.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmitterLossUnsupported,
    NegativeLoss,
    NonPositiveFrequency,
    ParameterError,
    RingTooSmall,
)

MIN_CAVITIES = 3


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the spin-cavity ring.

    ``cavity_freqs`` is stored as a tuple so instances stay hashable and can
    be shared between worker processes.
    """

    cavity_freqs: tuple
    hopping: float
    coupling: float
    cavity_loss: float = 0.0
    omega_emitter: float = 1.0
    emitter_loss: float = 0.0
    n_cavities: Optional[int] = None
    n_emitters: Optional[int] = None
    omega_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "cavity_freqs", tuple(float(w) for w in self.cavity_freqs))
        if self.n_cavities is None:
            object.__setattr__(self, "n_cavities", len(self.cavity_freqs))

    @property
    def freqs(self) -> np.ndarray:
        return np.asarray(self.cavity_freqs, dtype=float)

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.cavity_freqs)) == 1

    def replace(self, **changes) -> "SystemParams":
        if "cavity_freqs" in changes and "n_cavities" not in changes:
            changes["n_cavities"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["cavity_freqs"] = list(self.cavity_freqs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        return cls(**d)


@dataclass(frozen=True)
class DetuningLadder:
    """Equally spaced cavity frequencies ``base + (n - 1) * step``."""

    base: float
    step: float = 0.0


def expand_ladder(ladder: DetuningLadder, n_cavities: int = 3) -> list:
    if n_cavities < MIN_CAVITIES:
        raise RingTooSmall(f"ring needs at least {MIN_CAVITIES} cavities, got {n_cavities}",
                           n_cavities=n_cavities)
    return [ladder.base + n * ladder.step for n in range(n_cavities)]


def ladder_params(omega_c: float, delta: float, hopping: float, coupling: float,
                  cavity_loss: float = 0.0, n_cavities: int = 3, **kw) -> SystemParams:
    """Convenience constructor for the detuned-ladder parameter family."""
    freqs = expand_ladder(DetuningLadder(omega_c, delta), n_cavities)
    return validate(SystemParams(cavity_freqs=freqs, hopping=hopping, coupling=coupling,
                                 cavity_loss=cavity_loss, **kw))


def validate(params: SystemParams) -> SystemParams:
    """Check invariants and return a copy normalized to ``omega_emitter == 1``.

    Idempotent: validating an already validated object returns an equal one.
    """
    p = params
    values = [p.omega_emitter, p.hopping, p.coupling, p.cavity_loss, p.emitter_loss,
              p.omega_scale, *p.cavity_freqs]
    if not all(math.isfinite(v) for v in values):
        raise ParameterError("parameters must be finite")
    if p.n_cavities != len(p.cavity_freqs):
        raise ParameterError(
            f"n_cavities={p.n_cavities} but {len(p.cavity_freqs)} cavity frequencies given",
            n_cavities=p.n_cavities)
    if p.n_cavities < MIN_CAVITIES:
        raise RingTooSmall(f"ring needs at least {MIN_CAVITIES} cavities, got {p.n_cavities}",
                           n_cavities=p.n_cavities)
    if p.omega_emitter <= 0:
        raise NonPositiveFrequency("emitter frequency must be positive", value=p.omega_emitter)
    bad = [w for w in p.cavity_freqs if w <= 0]
    if bad:
        raise NonPositiveFrequency("cavity frequencies must be positive", values=bad)
    if p.omega_scale <= 0:
        raise NonPositiveFrequency("omega_scale must be positive", value=p.omega_scale)
    if p.cavity_loss < 0:
        raise NegativeLoss("cavity loss must be non-negative", value=p.cavity_loss)
    if p.emitter_loss < 0:
        raise NegativeLoss("emitter loss must be non-negative", value=p.emitter_loss)
    if p.emitter_loss != 0:
        raise EmitterLossUnsupported("only emitter_loss = 0 is supported", value=p.emitter_loss)
    if p.coupling < 0:
        raise ParameterError("coupling must be non-negative", value=p.coupling)
    if p.n_emitters is not None and p.n_emitters < 1:
        raise ParameterError("n_emitters must be >= 1", value=p.n_emitters)

    s = p.omega_emitter
    if s == 1.0:
        return p
    return dataclasses.replace(
        p,
        cavity_freqs=tuple(w / s for w in p.cavity_freqs),
        hopping=p.hopping / s,
        coupling=p.coupling / s,
        cavity_loss=p.cavity_loss / s,
        emitter_loss=p.emitter_loss / s,
        omega_emitter=1.0,
        omega_scale=p.omega_scale * s,
    )


def ring_matrix(params: SystemParams) -> np.ndarray:
    """Real symmetric tight-binding matrix ``diag(w_n) + J * adjacency`` with wrap."""
    n = params.n_cavities
    shift = np.roll(np.eye(n), 1, axis=0)
    return np.diag(params.freqs) + params.hopping * (shift + shift.T)


def delta_of(params: SystemParams) -> float:
    """Ladder step of ``params``; raises if the frequencies are not a ladder."""
    w = params.freqs
    steps = np.diff(w)
    if not np.allclose(steps, steps[0], rtol=0, atol=1e-12):
        raise ParameterError("cavity frequencies are not an equally spaced ladder")
    return float(steps[0])


def with_delta(params: SystemParams, delta: float) -> SystemParams:
    """Re-expand the ladder at a new step, keeping the base frequency."""
    return params.replace(cavity_freqs=tuple(expand_ladder(
        DetuningLadder(params.cavity_freqs[0], delta), params.n_cavities)))


def make_params(freqs: Sequence[float], hopping: float, coupling: float,
                cavity_loss: float = 0.0, **kw) -> SystemParams:
    return validate(SystemParams(cavity_freqs=tuple(freqs), hopping=hopping,
                                 coupling=coupling, cavity_loss=cavity_loss, **kw))
