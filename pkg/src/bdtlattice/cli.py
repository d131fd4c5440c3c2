"""Command line front end: ``bdtlattice <command> [options]``.

Every command reads local CSV files and writes a CSV or JSON report to
``--out`` (stdout by default).  Domain errors exit with the code attached to
their exception class; usage errors exit with 2.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from fractions import Fraction

import click

from . import bdt, bondpricer, estimation, inversion, marketdata, reporting
from .errors import BdtError

GENERIC_VALUE_ERROR = 3
DEFAULT_GRID = "2/12,3/12,6/12,1,2,3,4,5,7,10,15,20,25,30"


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma list; fractions like
    ``2/12`` are accepted everywhere."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.BadParameter(f"expected start:stop:step, got {text!r}")
        start, stop, step = (Fraction(p) for p in parts)
        if step <= 0 or stop < start:
            raise click.BadParameter(f"empty or non-increasing range {text!r}")
        count = int((stop - start) / step)
        return [float(start + i * step) for i in range(count + 1)]
    try:
        values = [float(Fraction(v.strip())) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"cannot parse grid {text!r}") from None
    if not values:
        raise click.BadParameter("grid is empty")
    return values


class _Fraction(click.ParamType):
    name = "number"

    def convert(self, value, param, ctx):
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return float(Fraction(str(value)))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a number", param, ctx)


NUMBER = _Fraction()


def _load_config(ctx, param, path):
    """Fill ``ctx.default_map`` from a JSON file so explicit flags still win."""
    if path is None:
        return
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    shared = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    commands = {k: v for k, v in raw.items() if isinstance(v, dict)}
    ctx.default_map = {
        name: {**shared, **commands.get(name, {})}
        for name in ("estimate", "calibrate", "fit", "price", "imply", "simulate")
    }


def _output_options(f):
    f = click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Output file (default: stdout).")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True, help="Output format.")(f)
    return f


def _series_options(f):
    for opt in reversed([
        click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
                     help="Dated CSV of rates or prices."),
        click.option("--date-column", default="date", show_default=True),
        click.option("--value-column", default=None,
                     help="Value column (price series default: Adj Close, then Close)."),
        click.option("--date-format", default=None, help="strptime format; ISO-8601 if omitted."),
        click.option("--percent", is_flag=True, help="Divide input values by 100."),
        click.option("--sort-dates", is_flag=True, help="Sort rows by date before validation."),
        click.option("--delta", type=NUMBER, default=estimation.DELTA, show_default=True,
                     help="Years per step."),
    ]):
        f = opt(f)
    return f


def _lattice_options(f):
    for opt in reversed([
        click.option("--r0", type=float, default=None,
                     help="Initial short rate (default: last observation of --input)."),
        click.option("--c1", type=float, default=None, help="Lattice coefficient c1."),
        click.option("--c2", type=float, default=None, help="Lattice coefficient c2."),
    ]):
        f = opt(f)
    return f


def _equity_options(f):
    for opt in reversed([
        click.option("--equity", "equity_path", type=click.Path(exists=True, dir_okay=False),
                     help="Equity price CSV to estimate the baseline from."),
        click.option("--equity-date-column", default="date", show_default=True),
        click.option("--equity-value-column", default=None),
        click.option("--mu-per-step", type=float, default=None,
                     help="Baseline per-step mean return."),
        click.option("--sigma-per-step", type=float, default=None,
                     help="Baseline per-step standard deviation."),
        click.option("--p", "p_up", type=float, default=None, help="Baseline upturn probability."),
        click.option("--baseline-units", type=click.Choice(["annualized", "per-step"]),
                     default="annualized", show_default=True,
                     help="annualized: mu=mean/delta, sigma=std/sqrt(delta); "
                          "per-step: use the per-step numbers unchanged."),
    ]):
        f = opt(f)
    return f


def _policy_options(f):
    f = click.option("--ptilde-policy", type=click.Choice(["error", "clamp"]), default="error",
                     show_default=True, help="Out-of-range risk-neutral probability handling.")(f)
    f = click.option("--theta-rate", default="node", show_default=True,
                     help="Rate in the market price of risk: 'node' or 'fixed:<r>'.")(f)
    return f


def _guard(f):
    """Map domain errors to exit codes with a one-line message on stderr."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except BdtError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(exc.exit_code)
        except (ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(GENERIC_VALUE_ERROR)

    return wrapper


def _read_series(path, kind, date_column, value_column, date_format, percent, sort_dates):
    schema = marketdata.SeriesSchema(date_column, value_column, date_format, percent, sort_dates)
    with open(path, "rb") as fh:
        return marketdata.parse_series(fh, schema, kind)


def _emit(text, out):
    reporting.write_text(text, out, click.get_text_stream("stdout"))


def _calibration(kw, require_input=False) -> bdt.BdtCalibration:
    delta = kw["delta"]
    if kw["c1"] is not None or kw["c2"] is not None:
        if kw["c1"] is None or kw["c2"] is None or kw["r0"] is None:
            raise click.UsageError("--c1, --c2 and --r0 must be given together")
        return bdt.BdtCalibration(kw["r0"], kw["c1"], kw["c2"], delta)
    if kw["input_path"] is None:
        raise click.UsageError("provide --input (rate CSV) or --c1/--c2/--r0")
    series = _read_series(kw["input_path"], "rate", kw["date_column"], kw["value_column"],
                          kw["date_format"], kw["percent"], kw["sort_dates"])
    moments = estimation.estimate_moments(estimation.simple_returns(series), delta)
    r0 = kw["r0"] if kw["r0"] is not None else series.last
    return bdt.calibrate_bdt(moments, r0)


def _baseline(kw) -> tuple[bondpricer.EquityParams, dict]:
    delta = kw["delta"]
    if kw["equity_path"] is not None:
        series = _read_series(kw["equity_path"], "price", kw["equity_date_column"],
                              kw["equity_value_column"], None, False, False)
        m = estimation.estimate_moments(estimation.simple_returns(series), delta)
        mean, std, p, source = m.mean_per_step, m.std_per_step, m.p_up, series.source_column
    else:
        mean, std, p = kw["mu_per_step"], kw["sigma_per_step"], kw["p_up"]
        if None in (mean, std, p):
            raise click.UsageError(
                "provide --equity or all of --mu-per-step, --sigma-per-step, --p")
        source = None
    if kw["baseline_units"] == "annualized":
        mu, sigma = mean / delta, std / math.sqrt(delta)
    else:
        mu, sigma = mean, std
    meta = {"baseline_units": kw["baseline_units"], "equity_price_column": source}
    return bondpricer.EquityParams(mu, sigma, p), meta


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=False,
              help="JSON config; top-level scalars apply to all commands, "
                   "objects keyed by command name apply to that command.")
def main():
    """Calibrate a BDT short-rate lattice, price zero-coupon bonds on it and
    invert market bond prices into implied equity parameters."""


@main.command()
@_series_options
@click.option("--kind", type=click.Choice(["rate", "price"]), default="price", show_default=True)
@_output_options
@_guard
def estimate(input_path, kind, fmt, out, **kw):
    """Binomial moments of a rate or price series."""
    if input_path is None:
        raise click.UsageError("--input is required")
    series = _read_series(input_path, kind, kw["date_column"], kw["value_column"],
                          kw["date_format"], kw["percent"], kw["sort_dates"])
    m = estimation.estimate_moments(estimation.simple_returns(series), kw["delta"])
    record = {
        "mean_per_step": m.mean_per_step, "std_per_step": m.std_per_step,
        "p_up": m.p_up, "n_obs": m.n_obs, "delta": m.delta,
        "mu": m.mu, "sigma": m.sigma, "nu": m.nu,
        "skipped_rows": series.skipped, "source_column": series.source_column,
    }
    _emit(reporting.render_record(record, fmt), out)


@main.command()
@_series_options
@click.option("--r0", type=float, default=None,
              help="Initial short rate (default: last observation).")
@_output_options
@_guard
def calibrate(fmt, out, **kw):
    """Fit c1 and c2 to the returns of a short-rate series."""
    kw.update(c1=None, c2=None)
    cal = _calibration(kw)
    m = cal.rate_moments
    record = {
        "r0": cal.r0, "c1": cal.c1, "c2": cal.c2, "delta": cal.delta,
        "up_factor": cal.up_factor, "down_factor": cal.down_factor,
        "rate_mean_per_step": m.mean_per_step, "rate_std_per_step": m.std_per_step,
        "rate_p_up": m.p_up, "n_obs": m.n_obs,
    }
    _emit(reporting.render_record(record, fmt), out)


def _write_plot_script(kind, plot_script, out):
    if plot_script is None:
        return
    if out is None:
        raise click.UsageError("--plot-script needs --out so the script knows its data file")
    reporting.write_text(reporting.plot_script(kind, out), plot_script, None)


_plot_option = click.option("--plot-script", type=click.Path(dir_okay=False), default=None,
                            help="Also write a matplotlib script that plots the output.")


@main.command()
@_series_options
@_lattice_options
@_output_options
@_plot_option
@_guard
def fit(fmt, out, plot_script, **kw):
    """Market vs model rates over the calibration window."""
    if kw["input_path"] is None:
        raise click.UsageError("--input is required")
    cal = _calibration(kw)
    series = _read_series(kw["input_path"], "rate", kw["date_column"], kw["value_column"],
                          kw["date_format"], kw["percent"], kw["sort_dates"])
    paired = bdt.fitted_series(cal, series)
    _emit(reporting.render_rows(paired.records(), ["date_or_step", "market", "model"], fmt), out)
    _write_plot_script("series", plot_script, out)


@main.command()
@_series_options
@_lattice_options
@_equity_options
@_policy_options
@click.option("--steps", type=int, default=None, help="Maturity in lattice steps.")
@click.option("--maturity", type=NUMBER, default=None, help="Maturity in years.")
@click.option("--ptilde", type=float, default=None,
              help="Price with this constant risk-neutral probability instead.")
@_output_options
@_guard
def price(fmt, out, steps, maturity, ptilde, theta_rate, ptilde_policy, **kw):
    """Zero-coupon bond price on the lattice."""
    if (steps is None) == (maturity is None):
        raise click.UsageError("give exactly one of --steps or --maturity")
    n_steps = steps if steps is not None else inversion.steps_for(maturity, kw["delta"])
    cal = _calibration(kw)
    lattice = cal.lattice(n_steps)
    record = {"maturity_steps": n_steps, "maturity_years": n_steps * cal.delta}
    if ptilde is not None:
        record.update(price=bondpricer.price_zcb_const(lattice, ptilde, n_steps),
                      ptilde=ptilde, clamped_nodes=0)
    else:
        equity, _ = _baseline(kw)
        policy = bondpricer.PricingPolicy(
            ptilde_policy, bondpricer.PricingPolicy.parse_theta_rate(theta_rate))
        result = bondpricer.price_zcb_detailed(lattice, equity, n_steps, policy)
        record.update(price=result.price, ptilde=None, clamped_nodes=result.clamped_nodes)
    _emit(reporting.render_record(record, fmt), out)


@main.command()
@_series_options
@_lattice_options
@_equity_options
@click.option("--yield-curve", "curve_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="CSV of maturity (years) and yield.")
@click.option("--maturity-column", default="maturity_years", show_default=True)
@click.option("--yield-column", default="yield", show_default=True)
@click.option("--curve-percent", is_flag=True, help="Yield column is quoted in percent.")
@click.option("--theta-rate", default=None,
              help="'fixed:<r>' (default: fixed at r0).  Node-dependent theta is not "
                   "available for the constant-probability inversion.")
@click.option("--grid", default=DEFAULT_GRID, show_default=True,
              help="Maturities in years: start:stop:step or a comma list.")
@click.option("--tol", type=float, default=1e-12, show_default=True,
              help="Price residual tolerance for the bisection.")
@click.option("--workers", type=int, default=os.cpu_count() or 1,
              help="Maturities solved concurrently.")
@_output_options
@_plot_option
@_guard
def imply(fmt, out, plot_script, curve_path, maturity_column, yield_column, curve_percent,
          theta_rate, grid, tol, workers, **kw):
    """Implied mean, volatility and upturn probability per maturity."""
    curve_schema = marketdata.CurveSchema(maturity_column, yield_column, curve_percent)
    with open(curve_path, "rb") as fh:
        curve = marketdata.parse_yield_curve(fh, curve_schema)
    cal = _calibration(kw)
    baseline, _ = _baseline(kw)
    if theta_rate is None:
        rate = cal.r0
    else:
        rate = bondpricer.PricingPolicy.parse_theta_rate(theta_rate)
        if rate is None:
            raise click.UsageError("imply needs a fixed theta rate: use 'fixed:<r>'")
    points = inversion.build_implied_curves(
        curve, cal, baseline, rate, parse_grid(grid), tol, workers=workers)
    text = (inversion.points_to_json(points) if fmt == "json"
            else inversion.points_to_csv(points))
    _emit(text, out)
    _write_plot_script("implied", plot_script, out)


@main.command()
@_series_options
@_lattice_options
@click.option("--steps", type=int, required=True, help="Number of steps to simulate.")
@click.option("--p-up", type=float, default=None,
              help="Up probability (default: the rate series' own p_up).")
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
@_plot_option
@_guard
def simulate(fmt, out, plot_script, steps, p_up, seed, **kw):
    """One simulated short-rate path."""
    cal = _calibration(kw)
    if p_up is None:
        if cal.rate_moments is None:
            raise click.UsageError("--p-up is required with explicit --c1/--c2")
        p_up = cal.rate_moments.p_up
    path = bdt.simulate_path(cal, steps, p_up, seed)
    paired = bdt.path_to_series(path)
    _emit(reporting.render_rows(paired.records(), ["date_or_step", "market", "model"], fmt), out)
    _write_plot_script("series", plot_script, out)


if __name__ == "__main__":
    main()
