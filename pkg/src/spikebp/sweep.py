"""Threshold line search and SCNU transfer characteristics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .checknode import ScnuConfig, scnu_raw
from .decoders import ConfigError, DecoderConfig
from .simulation import BerPoint, SimConfig, run_ber_point

__all__ = [
    "SweepConfig",
    "SweepResult",
    "default_theta1_grid",
    "sweep_theta1",
    "characterize_scnu",
    "write_sweep_csv",
    "write_characteristic_csv",
]


def default_theta1_grid() -> tuple[float, ...]:
    """0.1, 0.2, ..., 4.0 (rounded so the values print cleanly)."""
    return tuple(round(0.1 * k, 10) for k in range(1, 41))


@dataclass(frozen=True)
class SweepConfig:
    """Line search over theta1 with ``theta2 = gamma * theta1``.

    ``base`` supplies the code, stopping rule and seed; its decoder provides
    the iteration count and any SCNU options other than the thresholds. The
    decoder reliability is fixed at ``design_ebn0_db`` and BER is measured at
    ``eval_ebn0_db`` (the design point unless given).
    """

    base: SimConfig
    design_ebn0_db: float
    theta1_grid: tuple[float, ...] = default_theta1_grid()
    gamma: float = 1.0
    levels: int = 8
    eval_ebn0_db: float | None = None

    def __post_init__(self):
        grid = tuple(float(t) for t in self.theta1_grid)
        object.__setattr__(self, "theta1_grid", grid)
        if not grid:
            raise ConfigError("theta1 grid is empty")
        if grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("theta1 grid must be positive and strictly increasing")
        if self.gamma <= 0 or self.levels < 1:
            raise ConfigError("gamma must be positive and levels >= 1")

    def decoder_for(self, theta1: float) -> DecoderConfig:
        base = self.base.decoder
        template = base.scnu if base.scnu is not None else ScnuConfig()
        scnu = replace(template, levels=self.levels, theta1=theta1, theta2=self.gamma * theta1)
        algorithm = "elena" if self.levels == 1 else "ml-elena"
        return DecoderConfig(algorithm, iterations=base.iterations, scnu=scnu, early_stop=base.early_stop)

    def sim_for(self, theta1: float) -> SimConfig:
        at = self.design_ebn0_db if self.eval_ebn0_db is None else self.eval_ebn0_db
        return replace(self.base, decoder=self.decoder_for(theta1), ebn0_grid=(at,),
                       design_ebn0_db=self.design_ebn0_db)


@dataclass(frozen=True)
class SweepResult:
    theta1: tuple[float, ...]
    theta2: tuple[float, ...]
    points: tuple[BerPoint, ...]
    best_index: int

    @property
    def best_theta1(self) -> float:
        return self.theta1[self.best_index]

    @property
    def best_theta2(self) -> float:
        return self.theta2[self.best_index]

    @property
    def best_point(self) -> BerPoint:
        return self.points[self.best_index]


def sweep_theta1(config: SweepConfig, graph=None) -> SweepResult:
    """Evaluate BER for each theta1; ties go to the smaller theta1."""
    graph = config.base.code.build() if graph is None else graph
    theta2, points = [], []
    for t1 in config.theta1_grid:
        sim = config.sim_for(t1)
        theta2.append(sim.decoder.scnu.theta2)
        points.append(run_ber_point(sim, sim.ebn0_grid[0], graph))
    bers = [p.ber for p in points]
    best = int(np.argmin(bers))  # first minimum = smallest theta1
    return SweepResult(config.theta1_grid, tuple(theta2), tuple(points), best)


def characterize_scnu(config: ScnuConfig, min_mag_grid) -> np.ndarray:
    """Staircase output (LI memory bypassed) for each minimum input magnitude.

    Returns an array with columns ``(min_mag, raw_output)``.
    """
    m = np.asarray(min_mag_grid, dtype=float)
    if m.size == 0:
        raise ValueError("empty magnitude grid")
    if np.any(m < 0):
        raise ValueError("magnitudes must be nonnegative")
    return np.column_stack([m, scnu_raw(m, 1.0, config)])


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta1", "theta2", "ber", "wilson_low", "wilson_high"])
        for t1, t2, p in zip(result.theta1, result.theta2, result.points):
            w.writerow([repr(t1), repr(t2), repr(p.ber), repr(p.wilson_low), repr(p.wilson_high)])


def write_characteristic_csv(table: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["min_mag", "raw_output"])
        for m, out in table:
            w.writerow([repr(float(m)), repr(float(out))])
