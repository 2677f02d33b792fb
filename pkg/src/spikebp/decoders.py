"""Flooding-schedule message passing over a :class:`~spikebp.codes.TannerGraph`.

All decoders share one loop::

    v2c <- channel LLRs on every edge
    repeat `iterations` times:
        c2v <- check update of v2c        (all checks at once)
        v2c <- channel + extrinsic sum    (all variables at once)
    output = channel + sum of all c2v;  bit = 1 iff output <= 0

Only the check update differs between algorithms. The spiking variants
(``elena``, ``ml-elena``) additionally pass each check message through an LI
neuron per edge; that memory is cleared after every decode call.

Decoding is vectorised over a leading batch axis; each row of the batch is
decoded independently and gives the same result as decoding it alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .checknode import (
    ScnuConfig,
    extrinsic_min_sign,
    li_memory,
    scnu_raw,
    snn_rows,
    spa_rows,
)
from .codes import TannerGraph, syndrome
from .neurons import LifState, LiState

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "GraphDegeneracyError",
    "DecoderConfig",
    "DecodeResult",
    "ScnuState",
    "Decoder",
    "decode",
    "vn_update",
    "output_llr",
    "hard_decision",
]

ALGORITHMS = ("spa", "ms", "oms", "nms", "elena", "ml-elena")
DEFAULT_NMS_LAMBDA = 0.75
DEFAULT_OMS_OFFSET = 0.5


class ConfigError(ValueError):
    pass


class GraphDegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    algorithm: str
    iterations: int = 20
    nms_lambda: float | None = None
    oms_offset: float | None = None
    scnu: ScnuConfig | None = None
    early_stop: bool = False

    def __post_init__(self):
        alg = self.algorithm
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")
        # 0 iterations is allowed: hard decision on the channel LLRs
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.nms_lambda is not None and alg != "nms":
            raise ConfigError("nms_lambda only applies to nms")
        if self.oms_offset is not None and alg != "oms":
            raise ConfigError("oms_offset only applies to oms")
        if alg == "nms":
            lam = DEFAULT_NMS_LAMBDA if self.nms_lambda is None else self.nms_lambda
            if not (0.0 < lam <= 1.0):
                raise ConfigError(f"nms_lambda must lie in (0, 1], got {lam}")
            object.__setattr__(self, "nms_lambda", float(lam))
        if alg == "oms":
            off = DEFAULT_OMS_OFFSET if self.oms_offset is None else self.oms_offset
            if off < 0:
                raise ConfigError("oms_offset must be >= 0")
            object.__setattr__(self, "oms_offset", float(off))
        if alg in ("elena", "ml-elena"):
            if self.scnu is None:
                raise ConfigError(f"{alg} needs an ScnuConfig")
            if alg == "elena" and self.scnu.levels != 1:
                raise ConfigError("elena is the single-level SCNU; use ml-elena for levels > 1")
        elif self.scnu is not None:
            raise ConfigError(f"scnu settings do not apply to {alg}")

    @property
    def label(self) -> str:
        if self.algorithm == "nms":
            return f"nms(lambda={self.nms_lambda:g})"
        if self.algorithm == "oms":
            return f"oms(offset={self.oms_offset:g})"
        if self.scnu is not None:
            s = self.scnu
            return f"{self.algorithm}(L={s.levels},theta1={s.theta1:g},theta2={s.theta2:g})"
        return self.algorithm


@dataclass
class DecodeResult:
    bits: np.ndarray
    output_llr: np.ndarray
    iterations_run: np.ndarray
    converged: np.ndarray


@dataclass
class ScnuState:
    """Per-edge LI memory plus, for the emulation backend, inner LIF neurons."""

    li: LiState
    inputs: LifState | None = None
    combine: LifState | None = None

    @classmethod
    def zeros(cls, batch_shape, graph: TannerGraph, config: ScnuConfig) -> "ScnuState":
        batch_shape = tuple(batch_shape)
        li = LiState.zeros(batch_shape + (graph.n_edges,))
        if config.backend != "snn":
            return cls(li)
        inner = batch_shape + graph.cn_table.shape + (config.levels,)
        return cls(li, LifState.zeros(inner), LifState.zeros(inner))

    def is_reset(self) -> bool:
        parts = [self.li, self.inputs, self.combine]
        return all(not np.any(p.v) and not np.any(p.i) for p in parts if p is not None)

    def take(self, rows) -> "ScnuState":
        pick = lambda s: None if s is None else type(s)(s.v[rows], s.i[rows])
        return ScnuState(pick(self.li), pick(self.inputs), pick(self.combine))


def vn_update(channel_llr: float, incoming, target: int) -> float:
    """Variable-to-check message: channel LLR plus all incoming but ``target``."""
    incoming = np.asarray(incoming, dtype=float)
    return channel_llr + np.delete(incoming, target).sum()


def output_llr(channel_llr, incoming) -> np.ndarray:
    return channel_llr + np.sum(incoming, axis=-1)


def hard_decision(llr) -> np.ndarray:
    """1 where the LLR is <= 0 (a zero LLR decides for 1)."""
    return (np.asarray(llr) <= 0).astype(np.uint8)


class Decoder:
    """Reusable decoder bound to one graph and configuration.

    Holds the SCNU state of the most recent call in :attr:`state`; it is
    reset to rest after every :meth:`decode`.
    """

    def __init__(self, graph: TannerGraph, config: DecoderConfig):
        if np.any(graph.cn_degrees < 2):
            raise GraphDegeneracyError("check nodes of degree < 2 have no extrinsic inputs")
        if np.any(graph.vn_degrees < 1):
            raise GraphDegeneracyError("variable nodes of degree 0 are not connected")
        self.graph = graph
        self.config = config
        self.state: ScnuState | None = None

        self._regular_rows = bool(np.all(graph.cn_degrees == graph.cn_degrees[0]))
        self._cn_table = graph.cn_table
        self._cn_mask = self._cn_table < graph.n_edges
        self._edge_vn = graph.edge_vn
        self._vn_sum = sp.csr_matrix(
            (np.ones(graph.n_edges), (graph.edge_vn, np.arange(graph.n_edges))),
            shape=(graph.n_vns, graph.n_edges),
        )

    def clone(self) -> "Decoder":
        return Decoder(self.graph, self.config)

    # -- message layout -----------------------------------------------------

    def _rows(self, v2c):
        if self._regular_rows:
            return v2c.reshape(v2c.shape[:-1] + self._cn_table.shape)
        pad = np.full(v2c.shape[:-1] + (1,), np.inf)
        return np.concatenate([v2c, pad], axis=-1)[..., self._cn_table]

    def _unrows(self, rows):
        if self._regular_rows:
            return rows.reshape(rows.shape[:-2] + (-1,))
        return rows[..., self._cn_mask]

    def _vn_total(self, llr, c2v):
        return llr + (self._vn_sum @ c2v.T).T

    # -- half iterations ------------------------------------------------------

    def new_state(self, batch_shape) -> ScnuState | None:
        if self.config.scnu is None:
            return None
        return ScnuState.zeros(batch_shape, self.graph, self.config.scnu)

    def check_update(self, v2c, state: ScnuState | None = None):
        """All check-to-variable messages from ``v2c`` (shape ``(..., E)``).

        Returns ``(c2v, state')``. For the spiking decoders ``state`` carries
        the neuron memory; pass ``None`` to start from rest.
        """
        cfg = self.config
        v2c = np.asarray(v2c, dtype=float)
        rows = self._rows(v2c)
        alg = cfg.algorithm
        if alg == "spa":
            return self._unrows(spa_rows(rows)), None

        ext, beta = extrinsic_min_sign(rows)
        if alg == "ms":
            return self._unrows(beta * ext), None
        if alg == "nms":
            return self._unrows(beta * (cfg.nms_lambda * ext)), None
        if alg == "oms":
            return self._unrows(beta * np.maximum(ext - cfg.oms_offset, 0.0)), None

        scnu = cfg.scnu
        if state is None:
            state = self.new_state(v2c.shape[:-1])
        inputs, combine = state.inputs, state.combine
        if scnu.backend == "functional":
            raw = scnu_raw(ext, beta, scnu)
        else:
            if not scnu.stateful:
                inputs, combine = LifState.zeros(inputs.v.shape), LifState.zeros(combine.v.shape)
            mag, inputs, combine = snn_rows(np.abs(rows), scnu, inputs, combine)
            raw = beta * mag
        li = li_memory(state.li, scnu, self._unrows(raw))
        return li.v, ScnuState(li, inputs, combine)

    def variable_update(self, llr, c2v):
        """Returns ``(v2c, output_llr)`` for channel ``llr`` and messages ``c2v``."""
        total = self._vn_total(llr, c2v)
        return total[..., self._edge_vn] - c2v, total

    # -- full decode ------------------------------------------------------------

    def decode(self, llr) -> DecodeResult:
        """Decode one word (shape ``(N,)``) or a batch (shape ``(B, N)``).

        ``llr`` may also be a :class:`~spikebp.channel.ReceivedWord`.
        """
        llr = np.asarray(getattr(llr, "llr", llr), dtype=float)
        single = llr.ndim == 1
        if llr.shape[-1] != self.graph.n_vns:
            raise ValueError(f"expected {self.graph.n_vns} LLRs, got {llr.shape[-1]}")
        llr = llr.reshape(-1, self.graph.n_vns)
        batch = llr.shape[0]

        out_llr = llr.copy()
        iters = np.zeros(batch, dtype=np.int64)
        done = np.zeros(batch, dtype=bool)

        active = np.arange(batch)
        a_llr = llr
        v2c = llr[:, self._edge_vn]
        state = self.new_state((batch,))
        if self.config.early_stop:
            done = ~np.any(syndrome(self.graph, hard_decision(llr)), axis=-1)
            active = np.flatnonzero(~done)
            a_llr, v2c = llr[active], v2c[active]
            state = state.take(active) if state is not None else None

        for it in range(1, self.config.iterations + 1):
            if active.size == 0:
                break
            c2v, state = self.check_update(v2c, state)
            v2c, total = self.variable_update(a_llr, c2v)
            out_llr[active] = total
            iters[active] = it
            if self.config.early_stop:
                ok = ~np.any(syndrome(self.graph, hard_decision(total)), axis=-1)
                if ok.any():
                    done[active[ok]] = True
                    keep = ~ok
                    active, a_llr, v2c = active[keep], a_llr[keep], v2c[keep]
                    state = state.take(keep) if state is not None else None

        bits = hard_decision(out_llr)
        converged = ~np.any(syndrome(self.graph, bits), axis=-1)
        # memory cleared after every word
        self.state = self.new_state((batch,))
        if single:
            return DecodeResult(bits[0], out_llr[0], int(iters[0]), bool(converged[0]))
        return DecodeResult(bits, out_llr, iters, converged)


def decode(graph: TannerGraph, llr, config: DecoderConfig) -> DecodeResult:
    return Decoder(graph, config).decode(llr)

