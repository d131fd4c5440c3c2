"""Implied equity-market parameters from zero-coupon bond prices.

For each maturity the constant risk-neutral probability that reproduces the
market price on the lattice is found by bisection; the relation
``ptilde = p - theta*sqrt(p(1-p)delta)`` is then solved for whichever of
``mu``, ``sigma`` or ``p`` is left free.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .bdt import BdtCalibration, RateLattice
from .bondpricer import EquityParams, market_zcb_price, price_zcb_const
from .errors import (
    BdtError,
    DegenerateProbabilityError,
    IndeterminateSigmaError,
    NonIdentifiableError,
    NumericDomainError,
    UnattainablePriceError,
    WrongBranchError,
)
from .estimation import DELTA
from .marketdata import YieldCurve
from .reporting import render_rows

MAX_ITER = 200
BRANCH_TOL = 1e-8

CSV_COLUMNS = ("maturity_years", "n_steps", "market_price", "ptilde", "implied_mu",
               "implied_sigma", "implied_p", "residual", "flags")


@dataclass(frozen=True)
class SolveResult:
    ptilde: float
    iterations: int
    residual: float
    flags: tuple[str, ...] = ()


def solve_ptilde(lattice: RateLattice, target_price: float, n_steps: int,
                 tol: float = 1e-12, xtol: float = 1e-13) -> SolveResult:
    """Bisect for the constant ``ptilde`` whose lattice price equals ``target_price``.

    The bracket is narrowed until it is narrower than ``xtol`` (or floats run
    out), so the returned probability is accurate even where the price is
    nearly flat in ``ptilde``.  ``residual`` is the signed price error at the
    returned value; a ``residual_above_tol`` flag is set if it exceeds ``tol``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if lattice.calibration.c2 == 1.0:
        raise NonIdentifiableError("c2 == 1: lattice price does not depend on ptilde")
    price0 = price_zcb_const(lattice, 0.0, n_steps)
    price1 = price_zcb_const(lattice, 1.0, n_steps)
    if price0 == price1:
        raise NonIdentifiableError(f"price is flat in ptilde over {n_steps} steps")
    if target_price == price0:
        return SolveResult(0.0, 0, 0.0, ("endpoint",))
    if target_price == price1:
        return SolveResult(1.0, 0, 0.0, ("endpoint",))
    low_price, high_price = min(price0, price1), max(price0, price1)
    if not low_price <= target_price <= high_price:
        raise UnattainablePriceError(target_price, low_price, high_price)

    increasing = price1 > price0
    lo, hi = 0.0, 1.0
    best, best_res = 0.0, price0 - target_price
    iterations = 0
    while iterations < MAX_ITER and hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        res = price_zcb_const(lattice, mid, n_steps) - target_price
        if abs(res) <= abs(best_res):
            best, best_res = mid, res
        if res == 0.0:
            break
        if (res < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    flags = () if abs(best_res) <= tol else ("residual_above_tol",)
    return SolveResult(best, iterations, best_res, flags)


def _root_scale(p: float, delta: float) -> float:
    if not 0.0 < p < 1.0:
        raise DegenerateProbabilityError(f"p={p!r} must lie strictly inside (0, 1)")
    return math.sqrt(p * (1.0 - p) * delta)


def implied_mu(ptilde: float, p: float, sigma: float, rate: float,
               delta: float = DELTA) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma * (p - ptilde) / _root_scale(p, delta) + rate


def implied_sigma(ptilde: float, p: float, mu: float, rate: float,
                  delta: float = DELTA) -> float:
    """Volatility consistent with ``ptilde``.  The result may be zero or negative
    when ``mu - rate`` and ``p - ptilde`` disagree in sign; callers decide
    whether to treat that as invalid."""
    scale = _root_scale(p, delta)
    if p == ptilde:
        raise IndeterminateSigmaError("p == ptilde: sigma is not identified")
    return (mu - rate) * scale / (p - ptilde)


@dataclass(frozen=True)
class ImpliedP:
    p: float
    branch: str
    minus_root: float
    plus_root: float
    minus_residual: float
    plus_residual: float
    flags: tuple[str, ...] = ()


def _eq_residual(p: float, ptilde: float, theta: float, delta: float) -> float:
    q = min(max(p, 0.0), 1.0)
    return p - theta * math.sqrt(q * (1.0 - q) * delta) - ptilde


def implied_p(ptilde: float, theta: float, delta: float = DELTA) -> ImpliedP:
    """Natural up probability from ``ptilde`` and the market price of risk.

    Both roots of the squared relation are computed.  The minus root is
    preferred; the plus root is used only when the minus root fails the
    unsquared round trip, which happens for ``theta > 0``.
    """
    if not 0.0 <= ptilde <= 1.0:
        raise ValueError(f"ptilde must lie in [0, 1], got {ptilde!r}")
    a = delta * theta * theta
    disc = a * (a + 4.0 * ptilde * (1.0 - ptilde))
    if disc < 0.0:
        if disc < -1e-15:
            raise NumericDomainError(f"negative discriminant {disc!r}")
        disc = 0.0
    root = math.sqrt(disc)
    denom = 2.0 * (1.0 + a)
    minus = ((2.0 * ptilde + a) - root) / denom
    plus = ((2.0 * ptilde + a) + root) / denom
    res_minus = _eq_residual(minus, ptilde, theta, delta)
    res_plus = _eq_residual(plus, ptilde, theta, delta)
    flags = []
    if 0.0 < plus < 1.0:
        flags.append("plus_in_unit_interval")
    if abs(res_minus) <= BRANCH_TOL:
        chosen, branch = minus, "minus"
    elif abs(res_plus) <= BRANCH_TOL:
        chosen, branch = plus, "plus"
        flags.append("plus_branch")
    else:
        raise WrongBranchError("neither root satisfies the round trip", (minus, plus))
    return ImpliedP(chosen, branch, minus, plus, res_minus, res_plus, tuple(flags))


@dataclass(frozen=True)
class ImpliedPoint:
    maturity: float
    n_steps: int
    market_price: float
    ptilde: float | None = None
    implied_mu: float | None = None
    implied_sigma: float | None = None
    implied_p: float | None = None
    iterations: int = 0
    residual: float | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def record(self) -> dict:
        return {
            "maturity_years": self.maturity,
            "n_steps": self.n_steps,
            "market_price": self.market_price,
            "ptilde": self.ptilde,
            "implied_mu": self.implied_mu,
            "implied_sigma": self.implied_sigma,
            "implied_p": self.implied_p,
            "residual": self.residual,
            "flags": ";".join(self.flags),
        }


def steps_for(maturity: float, delta: float = DELTA) -> int:
    return max(1, round(maturity / delta))


def _flag(exc: BaseException) -> str:
    return type(exc).__name__


def implied_point(lattice: RateLattice, curve: YieldCurve, baseline: EquityParams,
                  rate_for_theta: float, maturity: float, tol: float = 1e-12) -> ImpliedPoint:
    """One maturity of the sweep.  Domain failures become flags, not exceptions."""
    delta = lattice.delta
    n_steps = steps_for(maturity, delta)
    market = market_zcb_price(curve, 0.0, maturity)
    try:
        solved = solve_ptilde(lattice, market, n_steps, tol)
    except BdtError as exc:
        return ImpliedPoint(maturity, n_steps, market, flags=(_flag(exc),))
    flags = list(solved.flags)
    pt = solved.ptilde
    values = {}
    for name, fn in (
        ("mu", lambda: implied_mu(pt, baseline.p, baseline.sigma, rate_for_theta, delta)),
        ("sigma", lambda: implied_sigma(pt, baseline.p, baseline.mu, rate_for_theta, delta)),
        ("p", lambda: implied_p(pt, baseline.theta(rate_for_theta), delta)),
    ):
        try:
            values[name] = fn()
        except BdtError as exc:
            values[name] = None
            flags.append(f"{name}:{_flag(exc)}")
    if values["sigma"] is not None and values["sigma"] <= 0:
        flags.append("sigma_nonpositive")
    p_result = values["p"]
    if p_result is not None:
        flags.extend(f"p:{f}" for f in p_result.flags)
    return ImpliedPoint(
        maturity=maturity, n_steps=n_steps, market_price=market, ptilde=pt,
        implied_mu=values["mu"], implied_sigma=values["sigma"],
        implied_p=None if p_result is None else p_result.p,
        iterations=solved.iterations, residual=solved.residual, flags=tuple(flags),
    )


def build_implied_curves(curve: YieldCurve, calibration: BdtCalibration,
                         baseline: EquityParams, rate_for_theta: float,
                         grid: Sequence[float], tol: float = 1e-12,
                         workers: int = 1) -> list[ImpliedPoint]:
    """Sweep ``grid`` (years); result order follows ``grid`` for any ``workers``."""
    grid = [float(t) for t in grid]
    if not grid:
        raise ValueError("maturity grid is empty")
    lattice = calibration.lattice(max(steps_for(t, calibration.delta) for t in grid))

    def one(maturity):
        return implied_point(lattice, curve, baseline, rate_for_theta, maturity, tol)

    if workers <= 1:
        return [one(t) for t in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


def points_to_csv(points: Sequence[ImpliedPoint]) -> str:
    return render_rows([p.record() for p in points], CSV_COLUMNS, "csv")


def points_to_json(points: Sequence[ImpliedPoint]) -> str:
    return render_rows([p.record() for p in points], CSV_COLUMNS, "json")
