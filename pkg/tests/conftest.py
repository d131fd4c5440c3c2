import datetime as dt
import math
from pathlib import Path

import numpy as np
import pytest

from bdtlattice import BdtCalibration, DELTA, EquityParams, parse_yield_curve

ROOT = Path(__file__).resolve().parents[1]
CURVE_PATH = ROOT / "data" / "yield_curve_2023-06-16.csv"

# reported values: R0, c1, c2 and the per-step SPY estimates
PAPER_R0, PAPER_C1, PAPER_C2 = 0.0377, 1.0236, 1.0464
SPY_MEAN, SPY_STD, SPY_P = 8.0037e-4, 0.0126, 0.4821

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def paper_calibration():
    return BdtCalibration(PAPER_R0, PAPER_C1, PAPER_C2, DELTA)


@pytest.fixture
def paper_curve():
    with open(CURVE_PATH, "rb") as fh:
        return parse_yield_curve(fh)


@pytest.fixture
def annualized_baseline():
    return EquityParams(SPY_MEAN / DELTA, SPY_STD / math.sqrt(DELTA), SPY_P)


def business_days(start: dt.date, count: int) -> list[dt.date]:
    days, d = [], start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def write_series_csv(path: Path, values, header=("date", "value"), start=dt.date(2022, 6, 15)):
    rows = [",".join(header)]
    for d, v in zip(business_days(start, len(values)), values):
        rows.append(f"{d.isoformat()},{v!r}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rate_csv(tmp_path):
    """253 synthetic daily 10y-like yields (decimal), seeded."""
    rng = np.random.default_rng(7)
    values = 0.033 * np.exp(np.cumsum(rng.normal(0.0003, 0.02, 253)))
    return write_series_csv(tmp_path / "rates.csv", [round(float(v), 6) for v in values])


@pytest.fixture
def spy_csv(tmp_path):
    rng = np.random.default_rng(11)
    close = 380 * np.exp(np.cumsum(rng.normal(0.0008, 0.0126, 253)))
    path = tmp_path / "spy.csv"
    lines = ["Date,Open,Close,Adj Close,Volume"]
    for d, c in zip(business_days(dt.date(2022, 6, 15), 253), close):
        lines.append(f"{d.isoformat()},{c:.4f},{c:.4f},{c * 0.99:.4f},1000")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
