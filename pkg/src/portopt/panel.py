"""Date-aligned close-price panels.

build_panel merges per-symbol daily series on date (outer join, missing cells
are NaN).  Downstream moment estimation needs a complete matrix, so the
default pipeline is filter_min_obs -> complete_cases, optionally followed by
to_returns.  Panels are value objects: every operation returns a new panel.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .errors import DomainError, EmptyPanel, IncompletePanel, InsufficientData
from .ingest import OhlcvRow

logger = logging.getLogger(__name__)

VALUE_KINDS = ("price", "simple_return", "log_return")


@dataclass
class PricePanel:
    """dates x symbols value matrix; NaN marks a missing cell."""

    dates: list[date]
    symbols: list[str]
    values: np.ndarray
    value_kind: str = "price"

    def __post_init__(self):
        if self.value_kind not in VALUE_KINDS:
            raise ValueError(f"unknown value_kind: {self.value_kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.dates), len(self.symbols)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.symbols)} symbols"
            )
        if len(set(self.dates)) != len(self.dates):
            raise ValueError("duplicate dates")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols")

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)

    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())


def build_panel(
    series: dict[str, list[OhlcvRow]],
    field: str = "close",
) -> PricePanel:
    """Merge per-symbol series into one panel keyed by the union of dates.

    Each series is sorted by date internally; duplicate dates within a series
    keep the last occurrence (counted and logged).  ``field`` selects which
    price column to take, ``close`` (default) or ``adjclose``.
    """
    if field not in ("close", "adjclose"):
        raise ValueError(f"unknown field: {field!r}")
    if not series:
        raise EmptyPanel("no input series")

    symbols = list(series.keys())
    per_symbol: dict[str, dict[date, float]] = {}
    dup_total = 0
    for sym in symbols:
        by_date: dict[date, float] = {}
        dups = 0
        for row in sorted(series[sym], key=lambda r: r.date):
            if row.date in by_date:
                dups += 1
            value = row.close if field == "close" else row.adj_close
            by_date[row.date] = math.nan if value is None else float(value)
        if dups:
            logger.info("%s: %d duplicate date(s), kept last", sym, dups)
            dup_total += dups
        per_symbol[sym] = by_date

    all_dates = sorted(set().union(*(d.keys() for d in per_symbol.values())))
    if not all_dates:
        raise EmptyPanel("no dated observations in any series")
    if dup_total:
        logger.info("panel build: %d duplicate date(s) across all series", dup_total)

    values = np.full((len(all_dates), len(symbols)), np.nan)
    date_index = {d: i for i, d in enumerate(all_dates)}
    for j, sym in enumerate(symbols):
        for d, v in per_symbol[sym].items():
            values[date_index[d], j] = v

    return PricePanel(dates=all_dates, symbols=symbols, values=values)


def filter_min_obs(p: PricePanel, min_obs: int = 1000) -> PricePanel:
    """Keep symbols with strictly more than min_obs non-missing cells.

    The default threshold of 1000 reproduces the classic "more than 1000
    observations" universe filter.
    """
    if min_obs < 0:
        raise ValueError("min_obs must be >= 0")
    counts = (~np.isnan(p.values)).sum(axis=0)
    keep = [j for j in range(p.n_symbols) if counts[j] > min_obs]
    if not keep:
        raise EmptyPanel(f"no symbol has more than {min_obs} observations")
    return PricePanel(
        dates=list(p.dates),
        symbols=[p.symbols[j] for j in keep],
        values=p.values[:, keep].copy(),
        value_kind=p.value_kind,
    )


def complete_cases(p: PricePanel) -> PricePanel:
    """Keep only dates where every symbol has a value (listwise deletion)."""
    full = ~np.isnan(p.values).any(axis=1)
    if not full.any():
        raise EmptyPanel("no date has observations for every symbol")
    return PricePanel(
        dates=[d for d, ok in zip(p.dates, full) if ok],
        symbols=list(p.symbols),
        values=p.values[full].copy(),
        value_kind=p.value_kind,
    )


def to_returns(p: PricePanel, kind: str = "simple_return") -> PricePanel:
    """Convert a complete price panel to per-period returns.

    simple: r_t = p_t / p_{t-1} - 1;  log: r_t = ln(p_t / p_{t-1}).
    The first date row is consumed.  Log returns require strictly positive
    prices; the offending symbol and date are named on failure.
    """
    if kind not in ("simple_return", "log_return"):
        raise ValueError(f"unknown return kind: {kind!r}")
    if p.value_kind != "price":
        raise ValueError(f"panel already holds {p.value_kind}, expected price")
    if p.has_missing():
        missing = int(np.isnan(p.values).sum())
        raise IncompletePanel(
            f"panel has {missing} missing cell(s); run complete_cases first"
        )
    if p.n_dates < 2:
        raise InsufficientData("need at least 2 dates to compute returns")

    if kind == "log_return":
        bad = np.argwhere(p.values <= 0.0)
        if bad.size:
            i, j = bad[0]
            raise DomainError(
                f"nonpositive price for {p.symbols[j]} on {p.dates[i]}: "
                f"{p.values[i, j]}"
            )
        out = np.log(p.values[1:] / p.values[:-1])
    else:
        out = p.values[1:] / p.values[:-1] - 1.0

    return PricePanel(
        dates=list(p.dates[1:]),
        symbols=list(p.symbols),
        values=out,
        value_kind=kind,
    )


# --- CSV interchange --------------------------------------------------------

def write_panel_csv(p: PricePanel, path) -> None:
    """First column Date (ISO), one column per symbol, empty cell = missing."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Date"] + list(p.symbols))
        for i, d in enumerate(p.dates):
            row = [d.isoformat()]
            for j in range(p.n_symbols):
                v = p.values[i, j]
                row.append("" if math.isnan(v) else f"{v:.12g}")
            w.writerow(row)


def read_panel_csv(path, value_kind: str = "price") -> PricePanel:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyPanel(f"{path}: empty panel file") from None
        if not header or header[0].strip().lower() != "date":
            raise EmptyPanel(f"{path}: first column must be Date")
        symbols = [h.strip() for h in header[1:]]
        dates: list[date] = []
        rows: list[list[float]] = []
        for rec in reader:
            if not rec or not rec[0].strip():
                continue
            dates.append(datetime.strptime(rec[0].strip(), "%Y-%m-%d").date())
            vals = []
            for j in range(len(symbols)):
                cell = rec[j + 1].strip() if j + 1 < len(rec) else ""
                vals.append(float(cell) if cell else math.nan)
            rows.append(vals)
    if not dates:
        raise EmptyPanel(f"{path}: no data rows")
    return PricePanel(
        dates=dates,
        symbols=symbols,
        values=np.array(rows, dtype=float),
        value_kind=value_kind,
    )
