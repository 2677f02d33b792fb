"""Monte Carlo BER/FER estimation with reproducible, worker-independent seeding.

Codeword ``c`` at operating point ``ebn0`` always sees the noise drawn from
``codeword_rng(master_seed, key(ebn0), c)``. Codewords are simulated in fixed
batches and the stopping rule is checked only at batch boundaries, in batch
order, so the result of a point does not depend on how many workers ran it.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.stats import binomtest

from .channel import ChannelParams, codeword_rng
from .codes import CodeSpec, TannerGraph, construct_regular_code, read_alist
from .decoders import ConfigError, Decoder, DecoderConfig

__all__ = [
    "CodeSource",
    "SimConfig",
    "BerPoint",
    "wilson_interval",
    "ebn0_key",
    "simulate_codewords",
    "run_ber_point",
    "iter_curve",
    "run_curve",
    "write_csv",
    "write_json",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = [
    "ebn0_db", "bits", "bit_errors", "ber", "wilson_low", "wilson_high",
    "frames", "frame_errors", "fer", "decoder", "code", "seed",
]


@dataclass(frozen=True)
class CodeSource:
    """Either constructor parameters or an alist path, plus the declared ``k``."""

    n: int | None = None
    dv: int | None = None
    dc: int | None = None
    seed: int = 1
    alist: str | None = None
    k: int | None = None

    def __post_init__(self):
        constructed = None not in (self.n, self.dv, self.dc)
        if constructed == (self.alist is not None):
            raise ConfigError("code source needs either (n, dv, dc) or an alist path, not both")

    def build(self) -> TannerGraph:
        return _build_graph(self)

    def spec(self) -> CodeSpec:
        return CodeSpec.for_graph(self.build(), self.k)

    @property
    def label(self) -> str:
        if self.alist is not None:
            return os.path.basename(self.alist)
        return f"regular({self.n},{self.dv},{self.dc},seed={self.seed})"


@lru_cache(maxsize=8)
def _build_graph(src: CodeSource) -> TannerGraph:
    if src.alist is not None:
        return read_alist(src.alist)
    return construct_regular_code(src.n, src.dv, src.dc, seed=src.seed)


@dataclass(frozen=True)
class SimConfig:
    """One BER experiment. ``design_ebn0_db=None`` means matched reliability."""

    code: CodeSource
    decoder: DecoderConfig
    ebn0_grid: tuple[float, ...]
    design_ebn0_db: float | None = None
    min_bit_errors: int = 100
    min_codewords: int = 0
    max_codewords: int = 100_000
    batch_size: int = 64
    master_seed: int = 0
    workers: int = 1
    rate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "ebn0_grid", tuple(float(x) for x in self.ebn0_grid))
        if not self.ebn0_grid:
            raise ConfigError("ebn0_grid is empty")
        if self.min_bit_errors < 1:
            raise ConfigError("min_bit_errors must be >= 1")
        if self.max_codewords < 1 or self.batch_size < 1 or self.workers < 1:
            raise ConfigError("max_codewords, batch_size and workers must be >= 1")

    @property
    def reliability_mode(self) -> str:
        return "matched" if self.design_ebn0_db is None else "fixed"

    def code_rate(self) -> float:
        return self.rate if self.rate is not None else self.code.spec().rate

    def channel(self, ebn0_db: float) -> ChannelParams:
        return ChannelParams(ebn0_db, self.code_rate(), self.design_ebn0_db)

    def to_dict(self) -> dict:
        return _plain(self)


def _plain(obj):
    if is_dataclass(obj):
        return {k: _plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bits_sent: int
    bit_errors: int
    codewords_sent: int
    frame_errors: int
    ber: float = field(init=False)
    fer: float = field(init=False)
    wilson_low: float = field(init=False)
    wilson_high: float = field(init=False)

    def __post_init__(self):
        ber = self.bit_errors / self.bits_sent if self.bits_sent else 0.0
        fer = self.frame_errors / self.codewords_sent if self.codewords_sent else 0.0
        lo, hi = wilson_interval(self.bit_errors, self.bits_sent)
        object.__setattr__(self, "ber", ber)
        object.__setattr__(self, "fer", fer)
        object.__setattr__(self, "wilson_low", lo)
        object.__setattr__(self, "wilson_high", hi)


def ebn0_key(ebn0_db: float) -> int:
    """Seed component for an operating point: the bit pattern of the float."""
    return int(np.float64(ebn0_db).view(np.uint64))


def simulate_codewords(
    graph: TannerGraph,
    decoder: Decoder | DecoderConfig,
    channel: ChannelParams,
    master_seed: int,
    start: int,
    stop: int,
) -> tuple[int, int]:
    """Bit and frame errors over codeword indices ``[start, stop)``."""
    if isinstance(decoder, DecoderConfig):
        decoder = Decoder(graph, decoder)
    key = ebn0_key(channel.ebn0_db)
    n = graph.n_vns
    y = np.empty((stop - start, n))
    for row, c in enumerate(range(start, stop)):
        y[row] = codeword_rng(master_seed, key, c).standard_normal(n)
    y = 1.0 + channel.sigma * y
    res = decoder.decode(y * channel.lc)
    errors = res.bits.sum(axis=1, dtype=np.int64)
    return int(errors.sum()), int(np.count_nonzero(errors))


# state installed in each worker process
_worker: dict = {}


def _worker_init(graph, decoder_config):
    _worker["graph"] = graph
    _worker["decoder"] = Decoder(graph, decoder_config)


def _worker_batch(args):
    channel, master_seed, start, stop = args
    return simulate_codewords(_worker["graph"], _worker["decoder"], channel, master_seed, start, stop)


def _batches(config: SimConfig):
    for start in range(0, config.max_codewords, config.batch_size):
        yield start, min(start + config.batch_size, config.max_codewords)


def _done(config: SimConfig, codewords: int, bit_errors: int) -> bool:
    if codewords >= config.max_codewords:
        return True
    return bit_errors >= config.min_bit_errors and codewords >= config.min_codewords


def _run_point(config, ebn0_db, graph, decoder, pool) -> BerPoint:
    channel = config.channel(ebn0_db)
    bit_errors = frame_errors = codewords = 0
    batches = _batches(config)
    width = config.workers if pool is not None else 1
    finished = False
    while not finished:
        wave = [b for _, b in zip(range(width), batches)]
        if not wave:
            break
        jobs = [(channel, config.master_seed, s, e) for s, e in wave]
        if pool is None:
            results = (simulate_codewords(graph, decoder, *job) for job in jobs)
        else:
            results = pool.map(_worker_batch, jobs)
        for (s, e), (be, fe) in zip(wave, results):
            bit_errors += be
            frame_errors += fe
            codewords += e - s
            if _done(config, codewords, bit_errors):
                finished = True
                break
    point = BerPoint(ebn0_db, codewords * graph.n_vns, bit_errors, codewords, frame_errors)
    log.info("Eb/N0 %.3f dB: ber=%.3e (%d errors, %d words)", ebn0_db, point.ber, bit_errors, codewords)
    return point


def _pool(config: SimConfig, graph: TannerGraph):
    if config.workers <= 1:
        return None
    return ProcessPoolExecutor(
        max_workers=config.workers, initializer=_worker_init, initargs=(graph, config.decoder)
    )


def run_ber_point(config: SimConfig, ebn0_db: float, graph: TannerGraph | None = None) -> BerPoint:
    """Simulate one operating point until the stopping rule fires."""
    graph = config.code.build() if graph is None else graph
    decoder = Decoder(graph, config.decoder)
    pool = _pool(config, graph)
    try:
        return _run_point(config, ebn0_db, graph, decoder, pool)
    finally:
        if pool is not None:
            pool.shutdown()


def iter_curve(config: SimConfig, graph: TannerGraph | None = None) -> Iterator[BerPoint]:
    """Yield one :class:`BerPoint` per grid value as soon as it is finished."""
    graph = config.code.build() if graph is None else graph
    decoder = Decoder(graph, config.decoder)
    pool = _pool(config, graph)
    try:
        for ebn0 in config.ebn0_grid:
            yield _run_point(config, ebn0, graph, decoder, pool)
    finally:
        if pool is not None:
            pool.shutdown()


def run_curve(config: SimConfig, graph: TannerGraph | None = None) -> list[BerPoint]:
    return list(iter_curve(config, graph))


def write_csv(points: Sequence[BerPoint], path, decoder: str, code: str, seed: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in points:
            w.writerow([
                repr(p.ebn0_db), p.bits_sent, p.bit_errors, repr(p.ber), repr(p.wilson_low),
                repr(p.wilson_high), p.codewords_sent, p.frame_errors, repr(p.fer), decoder, code, seed,
            ])


def write_json(points: Sequence[BerPoint], config: SimConfig, path) -> None:
    payload = {"config": config.to_dict(), "points": [asdict(p) for p in points]}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
