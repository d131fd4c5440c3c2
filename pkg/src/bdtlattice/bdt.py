"""Discrete Black-Derman-Toy short-rate lattice with constant coefficients.

The rate after ``n`` steps with ``k`` up-moves is ``r0 * c1**-n * c2**k``.
Nodes are never stored; every rate is evaluated from the closed form in log
space, so deep lattices neither overflow nor cost O(n^2) memory.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CalibrationInfeasibleError,
    DegenerateProbabilityError,
    InsufficientDataError,
    LatticeIndexError,
)
from .estimation import DELTA, BinomialMoments, simple_returns
from .marketdata import ObservationSeries


@dataclass(frozen=True)
class BdtCalibration:
    r0: float
    c1: float
    c2: float
    delta: float = DELTA
    rate_moments: BinomialMoments | None = None

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0!r}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError(f"c1 and c2 must be positive, got {self.c1!r}, {self.c2!r}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")

    @property
    def up_factor(self) -> float:
        """Gross one-step multiplier on an up-move, c2/c1."""
        return self.c2 / self.c1

    @property
    def down_factor(self) -> float:
        return 1.0 / self.c1

    def lattice(self, n_steps: int) -> "RateLattice":
        return RateLattice(self, n_steps)


def calibrate_bdt(rate_moments: BinomialMoments, r0: float) -> BdtCalibration:
    """Match the lattice's two one-step multipliers to the rate return moments."""
    p = rate_moments.p_up
    mean, std = rate_moments.mean_per_step, rate_moments.std_per_step
    if std > 0 and not 0.0 < p < 1.0:
        raise DegenerateProbabilityError(
            f"rate p_up={p!r} is degenerate for a positive standard deviation"
        )
    if std > 0:
        down = 1.0 + mean - math.sqrt(p / (1.0 - p)) * std
        up = 1.0 + mean + math.sqrt((1.0 - p) / p) * std
    else:
        down = up = 1.0 + mean
    if down <= 0:
        raise CalibrationInfeasibleError(f"down multiplier {down!r} is not positive")
    if not r0 > 0:
        raise CalibrationInfeasibleError(f"r0 must be positive, got {r0!r}")
    c1 = 1.0 / down
    return BdtCalibration(r0=r0, c1=c1, c2=up * c1, delta=rate_moments.delta,
                          rate_moments=rate_moments)


def moments_from_coefficients(c1: float, c2: float, p: float) -> tuple[float, float]:
    """Invert the calibration: per-step ``(mean, std)`` of rate returns given
    ``c1``, ``c2`` and the up probability ``p``."""
    if not 0.0 < p < 1.0:
        raise DegenerateProbabilityError(f"p={p!r} must lie strictly inside (0, 1)")
    up = c2 / c1 - 1.0
    down = 1.0 / c1 - 1.0
    mean = p * up + (1.0 - p) * down
    std = math.sqrt(p * (1.0 - p)) * (up - down)
    return mean, std


@dataclass(frozen=True)
class RateLattice:
    calibration: BdtCalibration
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be positive, got {self.n_steps!r}")

    @property
    def delta(self) -> float:
        return self.calibration.delta

    @property
    def log_r0(self) -> float:
        return math.log(self.calibration.r0)

    @property
    def log_c1(self) -> float:
        return math.log(self.calibration.c1)

    @property
    def log_c2(self) -> float:
        return math.log(self.calibration.c2)

    def rate_at(self, n: int, k: int) -> float:
        return rate_at(self, n, k)

    def rates(self, n: int) -> np.ndarray:
        """All rates of time slice ``n``, indexed by up-count ``k = 0..n``."""
        if not 0 <= n <= self.n_steps:
            raise LatticeIndexError(f"step {n} outside [0, {self.n_steps}]")
        k = np.arange(n + 1, dtype=float)
        return self.calibration.r0 * np.exp(k * self.log_c2 - n * self.log_c1)


def rate_at(lattice: RateLattice, n: int, k: int) -> float:
    if not 0 <= k <= n <= lattice.n_steps:
        raise LatticeIndexError(
            f"node (n={n}, k={k}) invalid for a lattice of {lattice.n_steps} steps"
        )
    return lattice.calibration.r0 * math.exp(k * lattice.log_c2 - n * lattice.log_c1)


@dataclass(frozen=True)
class PairedSeries:
    """Market and model values aligned by step; ``labels`` are dates or step numbers."""

    labels: tuple
    market: np.ndarray
    model: np.ndarray

    def to_csv(self) -> str:
        out = io.StringIO(newline="")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["date_or_step", "market", "model"])
        for label, m, v in zip(self.labels, self.market, self.model):
            label = label.isoformat() if hasattr(label, "isoformat") else label
            market = "" if m is None or (isinstance(m, float) and math.isnan(m)) else repr(float(m))
            writer.writerow([label, market, repr(float(v))])
        return out.getvalue()

    def records(self) -> list[dict]:
        rows = []
        for label, m, v in zip(self.labels, self.market, self.model):
            label = label.isoformat() if hasattr(label, "isoformat") else label
            rows.append({
                "date_or_step": label,
                "market": None if math.isnan(m) else float(m),
                "model": float(v),
            })
        return rows


def fitted_series(calibration: BdtCalibration, historical: ObservationSeries) -> PairedSeries:
    """Replay the observed up/down days through the lattice.

    Day ``n`` of the model sits at ``(n, H_n)`` where ``H_n`` counts strictly
    positive returns so far.  The replay is anchored at the first observation,
    so day 0 agrees with the market by construction.
    """
    if len(historical) < 2:
        raise InsufficientDataError("fitted series needs at least 2 observations")
    ups = np.concatenate([[0], np.cumsum(np.asarray(simple_returns(historical)) > 0)])
    n = np.arange(len(historical), dtype=float)
    log_growth = ups * math.log(calibration.c2) - n * math.log(calibration.c1)
    return PairedSeries(
        labels=historical.dates,
        market=np.asarray(historical.values, dtype=float),
        model=historical.first * np.exp(log_growth),
    )


def simulate_paths(calibration: BdtCalibration, n_steps: int, p_up: float,
                   n_paths: int = 1, seed: int | None = 0) -> np.ndarray:
    """Sample ``n_paths`` rate paths of length ``n_steps + 1`` from the lattice."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not 0.0 <= p_up <= 1.0:
        raise ValueError(f"p_up must lie in [0, 1], got {p_up!r}")
    rng = np.random.default_rng(seed)
    ups = rng.random((n_paths, n_steps)) < p_up
    k = np.concatenate([np.zeros((n_paths, 1)), np.cumsum(ups, axis=1)], axis=1)
    n = np.arange(n_steps + 1, dtype=float)
    return calibration.r0 * np.exp(k * math.log(calibration.c2) - n * math.log(calibration.c1))


def simulate_path(calibration: BdtCalibration, n_steps: int, p_up: float,
                  seed: int | None = 0) -> np.ndarray:
    return simulate_paths(calibration, n_steps, p_up, 1, seed)[0]


def path_to_series(path: np.ndarray) -> PairedSeries:
    """Wrap a simulated path for CSV export; the market column is left empty."""
    return PairedSeries(
        labels=tuple(range(len(path))),
        market=np.full(len(path), np.nan),
        model=np.asarray(path, dtype=float),
    )
