"""Zero-coupon bond pricing on the BDT lattice.

The lattice price discounts one step at a time with simple compounding,
``1 / (1 + R*delta)``, and weights the up/down children with a risk-neutral
probability tied to equity-market parameters.  Market prices use the
continuously-compounded yield, ``exp(-(T - t) * Y)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .bdt import RateLattice
from .errors import OracleSizeError, ProbabilityRangeError
from .marketdata import YieldCurve, yield_at

CLAMP_EPS = _kernels.CLAMP_EPS
ORACLE_MAX_STEPS = 20


@dataclass(frozen=True)
class EquityParams:
    """Instantaneous equity mean ``mu`` (per year), volatility ``sigma``
    (per sqrt-year) and natural up probability ``p``."""

    mu: float
    sigma: float
    p: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")

    def theta(self, rate: float) -> float:
        """Market price of risk against ``rate``."""
        return (self.mu - rate) / self.sigma


@dataclass(frozen=True)
class PricingPolicy:
    """``ptilde_out_of_range`` is ``"error"`` or ``"clamp"``; ``theta_rate``
    ``None`` uses each node's own rate, a float fixes it."""

    ptilde_out_of_range: str = "error"
    theta_rate: float | None = None

    def __post_init__(self):
        if self.ptilde_out_of_range not in ("error", "clamp"):
            raise ValueError(f"unknown out-of-range policy {self.ptilde_out_of_range!r}")
        if self.theta_rate is not None and not self.theta_rate > 0:
            raise ValueError(f"fixed theta rate must be positive, got {self.theta_rate!r}")

    @property
    def clamp(self) -> bool:
        return self.ptilde_out_of_range == "clamp"

    @classmethod
    def parse_theta_rate(cls, text: str) -> float | None:
        """``"node"`` -> ``None``; ``"fixed:0.0377"`` -> ``0.0377``."""
        if text == "node":
            return None
        if text.startswith("fixed:"):
            return float(text.split(":", 1)[1])
        raise ValueError(f"theta rate must be 'node' or 'fixed:<r>', got {text!r}")


@dataclass(frozen=True)
class PriceResult:
    price: float
    clamped_nodes: int = 0


def risk_neutral_prob(equity: EquityParams, rate: float, delta: float,
                      policy: PricingPolicy = PricingPolicy()) -> float:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    p = equity.p
    ptilde = p - equity.theta(rate) * math.sqrt(p * (1.0 - p) * delta)
    if 0.0 <= ptilde <= 1.0:
        return ptilde
    if policy.clamp:
        return min(max(ptilde, CLAMP_EPS), 1.0 - CLAMP_EPS)
    raise ProbabilityRangeError(ptilde)


def _check_steps(lattice: RateLattice, n_steps: int) -> None:
    if not 1 <= n_steps <= lattice.n_steps:
        raise ValueError(f"maturity_steps must lie in [1, {lattice.n_steps}], got {n_steps!r}")


def _lattice_args(lattice: RateLattice):
    return lattice.calibration.r0, lattice.log_c1, lattice.log_c2, lattice.delta


def price_zcb_detailed(lattice: RateLattice, equity: EquityParams, maturity_steps: int,
                       policy: PricingPolicy = PricingPolicy()) -> PriceResult:
    _check_steps(lattice, maturity_steps)
    if policy.theta_rate is not None:
        # one probability for the whole tree; range errors carry the root node
        try:
            ptilde = risk_neutral_prob(equity, policy.theta_rate, lattice.delta, policy)
        except ProbabilityRangeError as exc:
            raise ProbabilityRangeError(exc.value, (0, 0)) from None
        raw = equity.p - equity.theta(policy.theta_rate) * math.sqrt(
            equity.p * (1 - equity.p) * lattice.delta)
        clamped = 0 if 0.0 <= raw <= 1.0 else maturity_steps * (maturity_steps + 1) // 2
        price = _kernels.induct_const(*_lattice_args(lattice), maturity_steps, ptilde)
        return PriceResult(float(price), clamped)
    price, status, n, k, bad, clamped = _kernels.induct_equity(
        *_lattice_args(lattice), maturity_steps,
        equity.mu, equity.sigma, equity.p, policy.clamp)
    if status != _kernels.OK:
        raise ProbabilityRangeError(float(bad), (int(n), int(k)))
    return PriceResult(float(price), int(clamped))


def price_zcb(lattice: RateLattice, equity: EquityParams, maturity_steps: int,
              policy: PricingPolicy = PricingPolicy()) -> float:
    """Backward induction from a unit payoff with node-dependent probabilities.

    Peak working memory is one buffer of ``maturity_steps + 1`` floats.
    """
    return price_zcb_detailed(lattice, equity, maturity_steps, policy).price


def price_zcb_const(lattice: RateLattice, ptilde: float, maturity_steps: int) -> float:
    """Backward induction with the same risk-neutral probability at every node."""
    if not 0.0 <= ptilde <= 1.0:
        raise ValueError(f"ptilde must lie in [0, 1], got {ptilde!r}")
    _check_steps(lattice, maturity_steps)
    return float(_kernels.induct_const(*_lattice_args(lattice), maturity_steps, ptilde))


def price_zcb_fn(lattice: RateLattice, ptilde_fn: Callable[[int, int], float],
                 maturity_steps: int) -> float:
    """Backward induction with an arbitrary per-node probability ``ptilde_fn(n, k)``.

    Plain Python loop; meant for small trees and custom probability fields.
    """
    _check_steps(lattice, maturity_steps)
    buf = np.ones(maturity_steps + 1)
    delta = lattice.delta
    for n in range(maturity_steps - 1, -1, -1):
        rates = lattice.rates(n)
        for k in range(n + 1):
            pt = ptilde_fn(n, k)
            buf[k] = (pt * buf[k + 1] + (1.0 - pt) * buf[k]) / (1.0 + rates[k] * delta)
    return float(buf[0])


def price_zcb_oracle(lattice: RateLattice, ptilde_fn: Callable[[int, int], float],
                     maturity_steps: int) -> float:
    """Sum over all ``2**N`` up/down paths; independent check of the induction.

    Path rates are built by multiplying one-step factors from ``r0`` rather
    than from the closed form.
    """
    n_steps = maturity_steps
    if n_steps > ORACLE_MAX_STEPS:
        raise OracleSizeError(f"oracle limited to {ORACLE_MAX_STEPS} steps, got {n_steps}")
    _check_steps(lattice, n_steps)
    cal = lattice.calibration
    up_mult, down_mult = cal.c2 / cal.c1, 1.0 / cal.c1
    probs = {(n, k): ptilde_fn(n, k) for n in range(n_steps) for k in range(n + 1)}
    total = 0.0
    for path in itertools.product((0, 1), repeat=n_steps):
        weight = 1.0
        rate = cal.r0
        ups = 0
        for n, move in enumerate(path):
            pt = probs[(n, ups)]
            weight *= (pt if move else 1.0 - pt) / (1.0 + rate * cal.delta)
            rate *= up_mult if move else down_mult
            ups += move
        total += weight
    return total


def market_zcb_price(curve: YieldCurve, t: float, T: float) -> float:
    if not T > t >= 0:
        raise ValueError(f"need T > t >= 0, got t={t!r}, T={T!r}")
    tau = T - t
    return math.exp(-tau * yield_at(curve, tau))
