"""BDT short-rate lattice, zero-coupon bond pricing and implied equity parameters."""

from .bdt import (
    BdtCalibration,
    RateLattice,
    calibrate_bdt,
    fitted_series,
    moments_from_coefficients,
    rate_at,
    simulate_path,
    simulate_paths,
)
from .bondpricer import (
    EquityParams,
    PricingPolicy,
    market_zcb_price,
    price_zcb,
    price_zcb_const,
    price_zcb_fn,
    price_zcb_oracle,
    risk_neutral_prob,
)
from .errors import BdtError
from .estimation import DELTA, BinomialMoments, UpDownFactors, estimate_moments, simple_returns, solve_up_down
from .inversion import (
    ImpliedPoint,
    build_implied_curves,
    implied_mu,
    implied_p,
    implied_sigma,
    solve_ptilde,
)
from .marketdata import (
    CurveSchema,
    ObservationSeries,
    SeriesKind,
    SeriesSchema,
    YieldCurve,
    parse_series,
    parse_yield_curve,
    yield_at,
)

__version__ = "0.1.0"
