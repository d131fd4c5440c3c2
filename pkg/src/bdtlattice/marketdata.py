"""CSV ingestion for observation series and zero-coupon yield curves.

Only local files are read; nothing here touches the network.
"""

from __future__ import annotations

import bisect
import csv
import datetime as dt
import enum
import io
import math
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

from .errors import (
    CsvParseError,
    ExtrapolationError,
    InsufficientDataError,
    OrderingError,
    SanityRangeError,
)

#: Preferred equity price columns, best first.
PRICE_COLUMNS = ("Adj Close", "Adj_Close", "adj_close", "Close", "close")

YIELD_RANGE = (-0.5, 1.0)


class SeriesKind(str, enum.Enum):
    RATE = "rate"
    PRICE = "price"
    YIELD = "yield"


@dataclass(frozen=True)
class SeriesSchema:
    """Column mapping for :func:`parse_series`.

    ``value_column=None`` means: for price series pick the first of
    :data:`PRICE_COLUMNS` present, otherwise use the second header column.
    ``date_format=None`` means ISO-8601.  ``percent`` divides every value by
    100.  ``sort`` reorders rows by date before validation, for vendors that
    publish newest-first.
    """

    date_column: str = "date"
    value_column: str | None = None
    date_format: str | None = None
    percent: bool = False
    sort: bool = False


@dataclass(frozen=True)
class CurveSchema:
    maturity_column: str = "maturity_years"
    yield_column: str = "yield"
    percent: bool = False
    as_of: dt.date | None = None


@dataclass(frozen=True)
class ObservationSeries:
    dates: tuple[dt.date, ...]
    values: tuple[float, ...]
    kind: SeriesKind
    # provenance only; excluded from equality so re-parsed output compares equal
    skipped: int = field(default=0, compare=False)
    source_column: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        if len(self.values) < 2:
            raise InsufficientDataError(
                f"need at least 2 observations, got {len(self.values)}"
            )
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise OrderingError(f"date {cur.isoformat()} does not follow {prev.isoformat()}")
        positive = self.kind in (SeriesKind.RATE, SeriesKind.PRICE)
        for d, v in zip(self.dates, self.values):
            if not math.isfinite(v):
                raise SanityRangeError(f"non-finite value on {d.isoformat()}")
            if positive and v <= 0:
                raise SanityRangeError(
                    f"{self.kind.value} series requires positive values; got {v!r} on {d.isoformat()}"
                )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def first(self) -> float:
        return self.values[0]

    @property
    def last(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class YieldCurve:
    """Continuously-compounded annual yields keyed by maturity in years."""

    maturities: tuple[float, ...]
    yields: tuple[float, ...]
    as_of: dt.date | None = None

    def __post_init__(self):
        if len(self.maturities) != len(self.yields):
            raise ValueError("maturities and yields differ in length")
        if not self.maturities:
            raise InsufficientDataError("yield curve has no points")
        if self.maturities[0] <= 0:
            raise OrderingError(f"maturity {self.maturities[0]!r} must be positive")
        for prev, cur in zip(self.maturities, self.maturities[1:]):
            if cur <= prev:
                raise OrderingError(f"maturity {cur!r} does not exceed {prev!r}")
        for m, y in zip(self.maturities, self.yields):
            if not math.isfinite(y):
                raise SanityRangeError(f"non-finite yield at maturity {m!r}")

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, float]], as_of=None) -> "YieldCurve":
        return cls(
            tuple(float(m) for m, _ in points), tuple(float(y) for _, y in points), as_of
        )

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.maturities, self.yields))

    @property
    def min_maturity(self) -> float:
        return self.maturities[0]

    @property
    def max_maturity(self) -> float:
        return self.maturities[-1]


def _text(source: BinaryIO | bytes | str) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
        if isinstance(raw, str):
            return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CsvParseError(f"input is not UTF-8: {exc}") from None


def _rows(source):
    """Yield ``(line_number, header, row)`` with malformed rows reported by line."""
    reader = csv.reader(io.StringIO(_text(source), newline=""), strict=True)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError("empty input; a header row is required", line=1) from None
    except csv.Error as exc:
        raise CsvParseError(str(exc), line=reader.line_num) from None
    header = [h.strip() for h in header]
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise CsvParseError(str(exc), line=reader.line_num) from None
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CsvParseError(
                f"expected {len(header)} fields, found {len(row)}", line=reader.line_num
            )
        yield reader.line_num, header, row


def _column(header: list[str], name: str) -> int:
    """Exact header match, else a unique case-insensitive one."""
    if name in header:
        return header.index(name)
    folded = [i for i, h in enumerate(header) if h.casefold() == name.casefold()]
    if len(folded) == 1:
        return folded[0]
    raise CsvParseError(f"column {name!r} not found in header {header!r}", line=1)


def _number(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _pick_value_column(header: list[str], schema: SeriesSchema, kind: SeriesKind) -> str:
    if schema.value_column is not None:
        return schema.value_column
    if kind is SeriesKind.PRICE:
        for name in PRICE_COLUMNS:
            if name in header:
                return name
    others = [h for h in header if h.casefold() != schema.date_column.casefold()]
    if not others:
        raise CsvParseError("no value column available", line=1)
    return others[0]


def parse_series(
    source: BinaryIO | bytes | str,
    schema: SeriesSchema = SeriesSchema(),
    kind: SeriesKind | str = SeriesKind.RATE,
) -> ObservationSeries:
    """Parse a dated CSV column into an :class:`ObservationSeries`.

    Rows whose value is empty, non-numeric or non-finite are skipped; the count
    is stored on the result as ``skipped`` and the chosen column as
    ``source_column``.
    """
    kind = SeriesKind(kind)
    dates: list[dt.date] = []
    values: list[float] = []
    skipped = 0
    value_column = None
    date_idx = value_idx = None
    for line, header, row in _rows(source):
        if value_column is None:
            value_column = _pick_value_column(header, schema, kind)
            date_idx = _column(header, schema.date_column)
            value_idx = _column(header, value_column)
        value = _number(row[value_idx])
        if value is None:
            skipped += 1
            continue
        raw_date = row[date_idx].strip()
        try:
            if schema.date_format is None:
                date = dt.date.fromisoformat(raw_date)
            else:
                date = dt.datetime.strptime(raw_date, schema.date_format).date()
        except ValueError:
            raise CsvParseError(f"unparseable date {raw_date!r}", line=line) from None
        dates.append(date)
        values.append(value / 100.0 if schema.percent else value)
    if len(values) < 2:
        raise InsufficientDataError(
            f"need at least 2 valid rows, found {len(values)} (skipped {skipped})"
        )
    if schema.sort:
        order = sorted(range(len(dates)), key=dates.__getitem__)
        dates = [dates[i] for i in order]
        values = [values[i] for i in order]
    return ObservationSeries(
        tuple(dates), tuple(values), kind, skipped=skipped, source_column=value_column
    )


def series_to_csv(series: ObservationSeries, value_column: str = "value") -> bytes:
    """Serialize with ``repr`` floats so :func:`parse_series` round-trips exactly."""
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", value_column])
    for d, v in zip(series.dates, series.values):
        writer.writerow([d.isoformat(), repr(v)])
    return out.getvalue().encode("utf-8")


def parse_yield_curve(
    source: BinaryIO | bytes | str, schema: CurveSchema = CurveSchema()
) -> YieldCurve:
    points = []
    m_idx = y_idx = None
    for line, header, row in _rows(source):
        if m_idx is None:
            m_idx = _column(header, schema.maturity_column)
            y_idx = _column(header, schema.yield_column)
        maturity = _number(row[m_idx])
        value = _number(row[y_idx])
        if maturity is None or value is None:
            raise CsvParseError("maturity and yield must be finite numbers", line=line)
        if schema.percent:
            value /= 100.0
        if not YIELD_RANGE[0] <= value <= YIELD_RANGE[1]:
            raise SanityRangeError(
                f"line {line}: yield {value!r} outside sanity range {list(YIELD_RANGE)}"
            )
        points.append((maturity, value))
    return YieldCurve.from_points(points, as_of=schema.as_of)


def yield_at(curve: YieldCurve, maturity: float) -> float:
    """Linearly interpolated yield; exact at quoted maturities, no extrapolation."""
    ms = curve.maturities
    if not ms[0] <= maturity <= ms[-1]:
        raise ExtrapolationError(
            f"maturity {maturity!r} outside quoted range [{ms[0]!r}, {ms[-1]!r}]"
        )
    i = bisect.bisect_left(ms, maturity)
    if ms[i] == maturity:
        return curve.yields[i]
    m0, m1 = ms[i - 1], ms[i]
    y0, y1 = curve.yields[i - 1], curve.yields[i]
    w = (maturity - m0) / (m1 - m0)
    return y0 + w * (y1 - y0)
