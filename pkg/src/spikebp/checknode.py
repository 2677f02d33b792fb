"""Check-node update rules.

Single-message functions take the *extrinsic* inputs of one outgoing message
on the last axis (the set M(j) without the target) and return that message.
The ``*_rows`` helpers compute every outgoing message of a check at once from
a full row of incoming messages; rows may be padded with ``+inf``, which acts
as a neutral input for all rules.

Signs follow ``x < 0``; an exact zero counts as positive. Every rule that
sees a zero magnitude returns a zero message anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neurons import LifParams, LifState, LiState, li_step, lif_step, min_firing_drive

__all__ = [
    "MAG_MAX",
    "spa_cn_update",
    "ms_cn_update",
    "oms_cn_update",
    "nms_cn_update",
    "extrinsic_min_sign",
    "spa_rows",
    "ScnuConfig",
    "scnu_raw",
    "scnu_functional",
    "SnnScnuState",
    "scnu_snn_raw",
    "scnu_snn",
    "snn_rows",
    "resolvable_margin",
    "li_memory",
]

MAG_MAX = 30.0
# largest double below 1; keeps atanh finite
_TANH_GUARD = np.nextafter(1.0, 0.0)


def _sign_of_product(x, axis=-1):
    parity = np.logical_xor.reduce(x < 0, axis=axis)
    return np.where(parity, -1.0, 1.0)


def spa_cn_update(inputs) -> np.ndarray:
    """Sum-product (tanh rule) message from the extrinsic inputs."""
    x = np.asarray(inputs, dtype=float)
    if x.shape[-1] == 0:
        raise ValueError("empty extrinsic set")
    t = np.tanh(np.minimum(np.abs(x), MAG_MAX) / 2.0)
    p = np.minimum(np.prod(t, axis=-1), _TANH_GUARD)
    alpha = np.clip(2.0 * np.arctanh(p), 0.0, MAG_MAX)
    return alpha * _sign_of_product(x)


def ms_cn_update(inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.shape[-1] == 0:
        raise ValueError("empty extrinsic set")
    return np.abs(x).min(axis=-1) * _sign_of_product(x)


def oms_cn_update(inputs, offset: float) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.shape[-1] == 0:
        raise ValueError("empty extrinsic set")
    return np.maximum(np.abs(x).min(axis=-1) - offset, 0.0) * _sign_of_product(x)


def nms_cn_update(inputs, scale: float) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.shape[-1] == 0:
        raise ValueError("empty extrinsic set")
    return scale * np.abs(x).min(axis=-1) * _sign_of_product(x)


def extrinsic_min_sign(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per position of ``rows[..., d]``: min magnitude and sign product of the others."""
    mags = np.abs(rows)
    neg = rows < 0
    parity = np.logical_xor.reduce(neg, axis=-1, keepdims=True)
    beta = np.where(parity ^ neg, -1.0, 1.0)

    idx = np.argmin(mags, axis=-1)[..., None]
    min1 = np.take_along_axis(mags, idx, axis=-1)
    np.put_along_axis(mags, idx, np.inf, axis=-1)
    min2 = mags.min(axis=-1, keepdims=True)
    ext = np.where(np.arange(rows.shape[-1]) == idx, min2, min1)
    return ext, beta


def spa_rows(rows: np.ndarray) -> np.ndarray:
    mags = np.abs(rows)
    t = np.tanh(np.minimum(mags, MAG_MAX) / 2.0)
    t[np.isinf(mags)] = 1.0  # padding
    ones = np.ones(t.shape[:-1] + (1,))
    before = np.cumprod(np.concatenate([ones, t[..., :-1]], axis=-1), axis=-1)
    after = np.cumprod(np.concatenate([ones, t[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    p = np.minimum(before * after, _TANH_GUARD)
    alpha = np.clip(2.0 * np.arctanh(p), 0.0, MAG_MAX)
    _, beta = extrinsic_min_sign(rows)
    return alpha * beta


# ---------------------------------------------------------------------------
# Spiking check-node update (SCNU)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScnuConfig:
    """Parameters of the spiking check-node update.

    Level ``l`` (1-based) has threshold ``l * theta1`` and amplitude ``theta2``.
    ``levels=1`` is the single-threshold update, larger values the
    multi-level one.

    The emulation backend feeds ``gain * (threshold - |input|)`` into one LIF
    neuron per input and level for ``substeps`` steps; a combining LIF neuron
    per level fires if any extrinsic input neuron fired. ``stateful=False``
    resets these inner neurons every decoding iteration.

    ``li_readout`` sets when a new staircase value shows up in the LI output:
    ``"immediate"`` in the same iteration (current updated first), or
    ``"delayed"`` one iteration later (plain :func:`~spikebp.neurons.li_step`).
    """

    levels: int = 1
    theta1: float = 1.0
    theta2: float = 1.0
    li_params: LifParams = field(default_factory=LifParams)
    lif_params: LifParams = field(default_factory=LifParams)
    backend: str = "functional"
    substeps: int = 3
    gain: float = 10.0
    stateful: bool = False
    combine_weight: float | None = None
    li_readout: str = "immediate"

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if not (self.theta1 > 0 and self.theta2 > 0):
            raise ValueError("theta1 and theta2 must be positive")
        if self.backend not in ("functional", "snn"):
            raise ValueError(f"unknown SCNU backend {self.backend!r}")
        if self.li_readout not in ("immediate", "delayed"):
            raise ValueError(f"unknown li_readout {self.li_readout!r}")
        if self.substeps < 1 or self.gain <= 0:
            raise ValueError("substeps must be >= 1 and gain positive")

    @classmethod
    def coupled(cls, levels: int, theta1: float, gamma: float = 1.0, **kwargs) -> "ScnuConfig":
        """theta2 tied to theta1 through ``theta2 = gamma * theta1``."""
        return cls(levels=levels, theta1=theta1, theta2=gamma * theta1, **kwargs)

    @property
    def gamma(self) -> float:
        return self.theta2 / self.theta1

    @property
    def thresholds(self) -> np.ndarray:
        return np.arange(1, self.levels + 1) * self.theta1

    @property
    def amplitudes(self) -> np.ndarray:
        return np.full(self.levels, self.theta2)

    @property
    def output_table(self) -> np.ndarray:
        """Magnitude when ``k`` levels are active, for k = 0..L (``k * theta2``)."""
        return self.theta2 * np.arange(self.levels + 1)

    @property
    def weight_to_combiner(self) -> float:
        if self.combine_weight is not None:
            return self.combine_weight
        # one incoming spike lifts the resting combiner to 2*v_th a step later
        return 2.0 * self.lif_params.v_th / self.lif_params.decay_m


def resolvable_margin(config: ScnuConfig) -> float:
    """Input distance from a threshold beyond which the emulation is exact.

    An input neuron fires within ``substeps`` steps iff its drive exceeds
    ``min_firing_drive``; dividing by the gain maps that back to LLR units.
    Inputs more than this margin below a threshold fire, inputs above never
    do, so only the band ``[l*theta1 - margin, l*theta1]`` can disagree with
    the closed-form staircase.
    """
    return min_firing_drive(config.lif_params, config.substeps) / config.gain


def li_memory(state: LiState, config: ScnuConfig, raw) -> LiState:
    return li_step(state, config.li_params, raw, current_first=config.li_readout == "immediate")


def scnu_raw(min_mag, sign, config: ScnuConfig) -> np.ndarray:
    """Staircase output before the LI memory: ``sign * theta2 * #{l : min_mag > l*theta1}``."""
    count = np.searchsorted(config.thresholds, min_mag, side="left")
    return sign * config.output_table[count]


def scnu_functional(min_mag, sign, config: ScnuConfig, li_state: LiState) -> tuple[np.ndarray, LiState]:
    raw = scnu_raw(min_mag, sign, config)
    li_state = li_memory(li_state, config, raw)
    return li_state.v, li_state


@dataclass
class SnnScnuState:
    """Inner neurons (one per input and level), combiners and LI memory."""

    inputs: LifState
    combine: LifState
    li: LiState

    @classmethod
    def zeros(cls, batch_shape, n_inputs: int, config: ScnuConfig) -> "SnnScnuState":
        return cls(
            LifState.zeros(tuple(batch_shape) + (n_inputs, config.levels)),
            LifState.zeros(tuple(batch_shape) + (config.levels,)),
            LiState.zeros(tuple(batch_shape)),
        )


def _level_activity(mags, config, inputs, combine, rowwise):
    """Run the input and combining neurons; True where a level stays silent."""
    p = config.lif_params
    w = config.weight_to_combiner
    drive = config.gain * (config.thresholds - np.minimum(mags, 1e12)[..., None])
    fired = np.zeros(np.shape(combine.v), dtype=bool)
    for step in range(config.substeps + 1):
        # the extra step lets a spike from the last substep reach the combiner
        if step < config.substeps:
            inputs, spk = lif_step(inputs, p, drive)
            spk = spk.astype(float)
            total = spk.sum(axis=-2, keepdims=rowwise)
            incoming = total - spk if rowwise else total
        else:
            incoming = 0.0
        combine, cspk = lif_step(combine, p, w * incoming)
        fired |= cspk
    return ~fired, inputs, combine


def _sum_levels(active, config):
    # equal amplitudes: count the silent levels, same float result as scnu_raw
    return config.output_table[np.count_nonzero(active, axis=-1)]


def scnu_snn_raw(mags, config: ScnuConfig, state: SnnScnuState | None = None):
    """Emulated staircase magnitude for extrinsic magnitudes ``mags[..., k]``.

    Returns ``(raw_magnitude, state')``; without ``state`` the inner neurons
    start from rest.
    """
    mags = np.asarray(mags, dtype=float)
    if state is None:
        state = SnnScnuState.zeros(mags.shape[:-1], mags.shape[-1], config)
    active, inputs, combine = _level_activity(mags, config, state.inputs, state.combine, rowwise=False)
    return _sum_levels(active, config), SnnScnuState(inputs, combine, state.li)


def scnu_snn(mags, sign, config: ScnuConfig, state: SnnScnuState | None = None):
    """Full emulated SCNU: staircase, sign, then one LI memory step."""
    raw, state = scnu_snn_raw(mags, config, state)
    li = li_memory(state.li, config, sign * raw)
    return li.v, SnnScnuState(state.inputs, state.combine, li)


def snn_rows(mags_rows, config: ScnuConfig, inputs: LifState, combine: LifState):
    """Row-wise emulation: every position of ``mags_rows[..., d]`` is a target.

    Input neurons of one check see the same drive in every SCNU of that
    check, so they are shared (shape ``(..., d, L)``); each target keeps its
    own combiners (also ``(..., d, L)``) fed by all input spikes but its own.
    """
    active, inputs, combine = _level_activity(mags_rows, config, inputs, combine, rowwise=True)
    return _sum_levels(active, config), inputs, combine
