"""Delimited/JSON output and companion matplotlib scripts."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Mapping, Sequence


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_rows(rows: Sequence[Mapping], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: row.get(c) for c in columns} for row in rows], indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return out.getvalue()


def render_record(record: Mapping, fmt: str) -> str:
    """A single report: one-row CSV, or a JSON object."""
    if fmt == "json":
        return json.dumps(dict(record), indent=2) + "\n"
    return render_rows([record], list(record), fmt)


_HEADER = '''"""Plot {what} from {data}.  Generated by bdtlattice; edit freely."""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

data = sys.argv[1] if len(sys.argv) > 1 else {data!r}
'''

_SERIES = _HEADER + '''frame = pd.read_csv(data)
fig, ax = plt.subplots(figsize=(8, 4.5))
if frame["market"].notna().any():
    ax.plot(frame["date_or_step"], frame["market"], label="market")
ax.plot(frame["date_or_step"], frame["model"], label="model")
ax.set_xlabel("date / step")
ax.set_ylabel("short rate")
ax.legend()
fig.autofmt_xdate()
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
'''

_IMPLIED = _HEADER + '''frame = pd.read_csv(data)
panels = [("implied_mu", "implied mean return"),
          ("implied_sigma", "implied volatility"),
          ("implied_p", "implied upturn probability")]
for column, label in panels:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(frame["maturity_years"], frame[column], marker=".")
    ax.set_xlabel("maturity (years)")
    ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig({stem!r} + "_" + column + ".png", dpi=150)
    plt.close(fig)
'''


def plot_script(kind: str, data_path: str) -> str:
    """Source of a standalone script that plots the CSV at ``data_path``.

    ``kind`` is ``"series"`` (fit/simulate output) or ``"implied"``.
    """
    stem = data_path.rsplit(".", 1)[0]
    if kind == "series":
        return _SERIES.format(what="market vs model rates", data=data_path, png=stem + ".png")
    if kind == "implied":
        return _IMPLIED.format(what="implied equity parameters", data=data_path, stem=stem)
    raise ValueError(f"unknown plot kind {kind!r}")


def write_text(text: str, path: str | None, stream) -> None:
    if path is None:
        stream.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def records(points: Iterable) -> list[dict]:
    return [p.record() for p in points]
