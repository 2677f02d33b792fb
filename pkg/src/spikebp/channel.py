"""BPSK over the binary-input AWGN channel, all-zero codeword only.

Bit 0 maps to +1, so the transmitted all-zero word is a vector of ones and
channel LLRs are ``llr = lc * y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "ReceivedWord",
    "sigma_from_ebn0",
    "lc_for_design_point",
    "codeword_rng",
    "transmit_all_zero",
]


def _check_rate(rate: float) -> None:
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"invalid rate {rate!r}: must lie in (0, 1]")


def sigma_from_ebn0(ebn0_db: float, rate: float) -> float:
    """Noise std per real dimension for unit-energy BPSK, Es = rate * Eb."""
    _check_rate(rate)
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def lc_for_design_point(design_ebn0_db: float, rate: float) -> float:
    """Channel reliability 2/sigma^2 evaluated at a fixed design Eb/N0."""
    _check_rate(rate)
    return 4.0 * rate * 10.0 ** (design_ebn0_db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Operating point plus the LLR scale the receiver applies.

    With ``design_ebn0_db=None`` the reliability is matched to the actual
    noise (``lc = 2/sigma**2``); otherwise it stays at the design value.
    """

    ebn0_db: float
    rate: float
    design_ebn0_db: float | None = None

    def __post_init__(self):
        _check_rate(self.rate)

    @property
    def sigma(self) -> float:
        return sigma_from_ebn0(self.ebn0_db, self.rate)

    @property
    def lc(self) -> float:
        if self.design_ebn0_db is None:
            return 2.0 / self.sigma**2
        return lc_for_design_point(self.design_ebn0_db, self.rate)

    @property
    def reliability_mode(self) -> str:
        return "matched" if self.design_ebn0_db is None else "fixed"


@dataclass(frozen=True)
class ReceivedWord:
    y: np.ndarray
    llr: np.ndarray


def codeword_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for one codeword, keyed by (master_seed, *keys)."""
    return np.random.default_rng([int(master_seed), *map(int, keys)])


def transmit_all_zero(n: int, params: ChannelParams, seed=None) -> ReceivedWord:
    """Send the all-zero codeword of length ``n`` through the channel."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y = 1.0 + params.sigma * rng.standard_normal(n)
    return ReceivedWord(y=y, llr=y * params.lc)
