"""Discrete-time leaky integrate-and-fire (LIF) and leaky integrator (LI) neurons.

One step maps ``(v, i)`` to::

    v' = (v + i) * exp(-dt / tau_m)
    i' = i * exp(-dt / tau_s) + weighted_input

so an input reaches the membrane potential one step after it arrives.
``li_step(..., current_first=True)`` instead lets the input join the current
before the membrane update, ``v' = (v + i') * exp(-dt / tau_m)``. A LIF
neuron spikes when ``v' > v_th`` (strictly) and is then reset to ``v_rest``.
The LI neuron never spikes; its potential is its output.

All functions work elementwise on scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "LifParams",
    "LifState",
    "LiState",
    "lif_step",
    "li_step",
    "reset",
    "lif_run",
    "min_firing_drive",
]


@dataclass(frozen=True)
class LifParams:
    tau_m: float = 1.0  # ms
    tau_s: float = 1.0  # ms
    dt: float = 1.0  # ms
    v_th: float = 1.0
    v_rest: float = 0.0

    def __post_init__(self):
        if not (self.tau_m > 0 and self.tau_s > 0 and self.dt > 0):
            raise ValueError("tau_m, tau_s and dt must be positive")

    @property
    def decay_m(self) -> float:
        return math.exp(-self.dt / self.tau_m)

    @property
    def decay_s(self) -> float:
        return math.exp(-self.dt / self.tau_s)


class LifState(NamedTuple):
    v: np.ndarray | float
    i: np.ndarray | float

    @classmethod
    def zeros(cls, shape=(), params: LifParams | None = None):
        v_rest = 0.0 if params is None else params.v_rest
        return cls(np.full(shape, v_rest, dtype=float), np.zeros(shape))


class LiState(NamedTuple):
    v: np.ndarray | float
    i: np.ndarray | float

    @classmethod
    def zeros(cls, shape=(), params: LifParams | None = None):
        v_rest = 0.0 if params is None else params.v_rest
        return cls(np.full(shape, v_rest, dtype=float), np.zeros(shape))


def lif_step(state: LifState, params: LifParams, weighted_input) -> tuple[LifState, np.ndarray | bool]:
    v_new = (state.v + state.i) * params.decay_m
    i_new = state.i * params.decay_s + weighted_input
    spiked = v_new > params.v_th
    v_new = np.where(spiked, params.v_rest, v_new)
    if np.ndim(v_new) == 0:
        return LifState(float(v_new), i_new), bool(spiked)
    return LifState(v_new, i_new), spiked


def li_step(state: LiState, params: LifParams, weighted_input, current_first: bool = False) -> LiState:
    i_new = state.i * params.decay_s + weighted_input
    if current_first:
        return LiState((state.v + i_new) * params.decay_m, i_new)
    return LiState((state.v + state.i) * params.decay_m, i_new)


def reset(state, params: LifParams | None = None):
    """Return a state of the same type and shape at rest with zero current."""
    v_rest = 0.0 if params is None else params.v_rest
    v = np.full(np.shape(state.v), v_rest, dtype=float)
    i = np.zeros(np.shape(state.i))
    if v.ndim == 0:
        return type(state)(float(v), float(i))
    return type(state)(v, i)


def lif_run(state: LifState, params: LifParams, drive, steps: int) -> tuple[LifState, np.ndarray]:
    """Apply a constant ``drive`` for ``steps`` steps; also return spike counts."""
    count = np.zeros(np.shape(np.broadcast_arrays(state.v, drive)[0]), dtype=np.int64)
    for _ in range(steps):
        state, spiked = lif_step(state, params, drive)
        count = count + spiked
    return state, count


def min_firing_drive(params: LifParams, steps: int) -> float:
    """Smallest constant drive that makes a resting neuron fire within ``steps`` steps.

    From rest (``v = i = 0``) the potential after ``k`` steps is
    ``drive * c_k`` with ``c_k`` increasing in ``k`` while no spike occurs, so
    the neuron fires iff ``drive * c_steps > v_th``. The bound is exclusive.
    Returns ``inf`` when ``steps`` is too short to fire at all (``c_steps = 0``).
    Only defined for ``v_rest = 0``.
    """
    if params.v_rest != 0.0:
        raise ValueError("min_firing_drive assumes v_rest = 0")
    v, i = 0.0, 0.0
    for _ in range(steps):
        v, i = (v + i) * params.decay_m, i * params.decay_s + 1.0
    return math.inf if v <= 0.0 else params.v_th / v
