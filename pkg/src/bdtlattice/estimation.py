"""Simple returns and two-point (binomial) moment estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateProbabilityError, InsufficientDataError, ZeroValueError
from .marketdata import ObservationSeries

DELTA = 1.0 / 252.0


@dataclass(frozen=True)
class BinomialMoments:
    """Per-step return statistics of a series.

    ``mean_per_step`` is mu*delta and ``std_per_step`` is sigma*sqrt(delta);
    the properties expose the instantaneous (annualized) equivalents.
    """

    mean_per_step: float
    std_per_step: float
    p_up: float
    delta: float = DELTA
    n_obs: int = 1

    def __post_init__(self):
        if not self.std_per_step >= 0:
            raise ValueError(f"std_per_step must be >= 0, got {self.std_per_step!r}")
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError(f"p_up must lie in [0, 1], got {self.p_up!r}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if self.n_obs < 1:
            raise ValueError("n_obs must be >= 1")

    @property
    def mu(self) -> float:
        return self.mean_per_step / self.delta

    @property
    def sigma(self) -> float:
        return self.std_per_step / math.sqrt(self.delta)

    @property
    def nu(self) -> float:
        """sigma / sqrt(delta), so that ``nu * delta == std_per_step``."""
        return self.sigma / math.sqrt(self.delta)


@dataclass(frozen=True)
class UpDownFactors:
    u: float
    d: float


def simple_returns(series: ObservationSeries) -> list[float]:
    values = series.values
    out = []
    for i in range(len(values) - 1):
        if values[i] == 0:
            raise ZeroValueError(f"zero value on {series.dates[i].isoformat()}")
        out.append((values[i + 1] - values[i]) / values[i])
    return out


def estimate_moments(returns: Sequence[float], delta: float = DELTA) -> BinomialMoments:
    """Sample mean, sample (n-1) standard deviation and the fraction of strictly
    positive returns.  Zero returns count as down moves."""
    r = np.asarray(returns, dtype=float)
    if r.size == 0:
        raise InsufficientDataError("no returns to estimate from")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    std = float(r.std(ddof=1)) if r.size > 1 else 0.0
    return BinomialMoments(
        mean_per_step=float(r.mean()),
        std_per_step=std,
        p_up=int(np.count_nonzero(r > 0)) / r.size,
        delta=delta,
        n_obs=int(r.size),
    )


def solve_up_down(moments: BinomialMoments) -> UpDownFactors:
    """Instantaneous up/down rates matching the mean and ``nu`` of ``moments``."""
    mu, nu, p = moments.mu, moments.nu, moments.p_up
    if moments.std_per_step == 0:
        return UpDownFactors(mu, mu)
    if p <= 0.0 or p >= 1.0:
        raise DegenerateProbabilityError(
            f"p_up={p!r} cannot support a positive standard deviation"
        )
    return UpDownFactors(
        u=mu + math.sqrt((1 - p) / p) * nu,
        d=mu - math.sqrt(p / (1 - p)) * nu,
    )
