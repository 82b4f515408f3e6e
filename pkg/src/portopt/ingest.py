"""Market-data ingestion: exchange symbol directories and per-ticker OHLCV files.

Two wire formats are supported:

* symbol directory: '|'-delimited text with a header line and an optional
  "File Creation Time" footer, as published by exchange symbol-directory feeds;
* price history: CSV with header ``Date,Open,High,Low,Close,Volume,Adj Close``
  (names matched case-insensitively, whitespace-tolerant).

Per-symbol sources are resolved from a URL/path template.  The historical
download endpoint this format came from is long defunct, so the fetcher is
template-driven with a local-fixture mode that lets the whole pipeline run
offline.  Note the {month} placeholder is ZERO-BASED (April -> 3), preserved
verbatim from the original URL scheme.
"""

from __future__ import annotations

import concurrent.futures
import logging
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from datetime import date, datetime

from .errors import (
    AllSourcesFailed,
    EmptyFile,
    EmptySeries,
    SchemaError,
    TemplateError,
)

logger = logging.getLogger(__name__)

OHLCV_COLUMNS = ("date", "open", "high", "low", "close", "volume", "adjclose")

# Placeholders understood by resolve_source.  {month} is zero-based; the
# start_* trio is optional and only substituted when a start date is given.
_KNOWN_PLACEHOLDERS = frozenset(
    {"symbol", "day", "month", "year", "start_day", "start_month", "start_year"}
)


@dataclass
class SymbolRecord:
    """One line of the exchange symbol directory."""

    symbol: str
    security_name: str = ""
    market_category: str = ""
    test_issue: str = ""
    financial_status: str = ""
    round_lot: str = ""

    def __post_init__(self):
        if not self.symbol:
            raise ValueError("symbol must be non-empty")
        if "|" in self.symbol or any(c.isspace() for c in self.symbol):
            raise ValueError(f"symbol contains '|' or whitespace: {self.symbol!r}")


@dataclass
class OhlcvRow:
    """One daily bar.  Fields other than date and close may be missing."""

    date: date
    open: float | None
    high: float | None
    low: float | None
    close: float
    volume: int | None
    adj_close: float | None


@dataclass
class DirectoryListing:
    """Parse result for a symbol directory: records plus skip accounting."""

    records: list[SymbolRecord]
    malformed: int = 0
    malformed_lines: list[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.records)


@dataclass
class OhlcvSeries:
    """Parse result for one price-history file."""

    rows: list[OhlcvRow]
    dropped: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class SourceTemplate:
    """Locator template for per-symbol data, e.g. ``fixtures/{symbol}.csv``.

    mode is ``local-fixture`` (template resolves to a filesystem path) or
    ``http`` (template resolves to a URL).
    """

    template: str
    mode: str = "local-fixture"

    def __post_init__(self):
        if self.mode not in ("local-fixture", "http"):
            raise ValueError(f"unknown mode: {self.mode!r}")
        if "{symbol}" not in self.template:
            raise ValueError("template must contain the {symbol} placeholder")


@dataclass
class FetchOutcome:
    symbol: str
    ok: bool
    rows: int = 0
    dropped: int = 0
    error: str = ""


@dataclass
class FetchReport:
    outcomes: list[FetchOutcome] = field(default_factory=list)

    @property
    def succeeded(self) -> list[str]:
        return [o.symbol for o in self.outcomes if o.ok]

    @property
    def skipped(self) -> list[str]:
        return [o.symbol for o in self.outcomes if not o.ok]


def _decode(raw: bytes | str) -> str:
    if isinstance(raw, bytes):
        return raw.decode("utf-8", errors="replace")
    return raw


def parse_symbol_directory(raw: bytes | str) -> DirectoryListing:
    """Parse a '|'-delimited symbol directory.

    The first line is a header and is skipped.  Short lines are tolerated:
    missing trailing fields become empty strings.  A footer line with fewer
    than two non-empty fields (the "File Creation Time" stamp) is skipped.
    Lines whose first field is empty or not a valid ticker are skipped and
    counted as malformed.

    Raises EmptyFile on empty input.
    """
    text = _decode(raw)
    if not text.strip():
        raise EmptyFile("symbol directory input is empty")

    lines = text.splitlines()
    records: list[SymbolRecord] = []
    malformed_lines: list[int] = []

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split("|")]
        non_empty = sum(1 for f in fields if f)
        if non_empty < 2:
            # footer stamp or a bare fragment; not a data line
            continue
        fields += [""] * (6 - len(fields))
        symbol = fields[0]
        if not symbol or "|" in symbol or any(c.isspace() for c in symbol):
            malformed_lines.append(lineno)
            continue
        records.append(
            SymbolRecord(
                symbol=symbol,
                security_name=fields[1],
                market_category=fields[2],
                test_issue=fields[3],
                financial_status=fields[4],
                round_lot=fields[5],
            )
        )

    if malformed_lines:
        logger.warning(
            "symbol directory: skipped %d malformed line(s): %s",
            len(malformed_lines),
            malformed_lines,
        )
    logger.info("symbol directory: %d record(s) parsed", len(records))
    return DirectoryListing(
        records=records,
        malformed=len(malformed_lines),
        malformed_lines=malformed_lines,
    )


def serialize_symbol_directory(records: list[SymbolRecord], header: str | None = None) -> str:
    """Inverse of parse_symbol_directory: pipe-delimited text with a header."""
    if header is None:
        header = (
            "Symbol|Security Name|Market Category|Test Issue|"
            "Financial Status|Round Lot Size"
        )
    lines = [header]
    for r in records:
        lines.append(
            "|".join(
                [r.symbol, r.security_name, r.market_category, r.test_issue,
                 r.financial_status, r.round_lot]
            )
        )
    return "\n".join(lines) + "\n"


def exclude_test_issues(records: list[SymbolRecord]) -> list[SymbolRecord]:
    """Default filter: drop records flagged as test issues (test_issue == 'Y')."""
    return [r for r in records if r.test_issue != "Y"]


def _parse_float(s: str) -> float | None:
    try:
        return float(s)
    except (TypeError, ValueError):
        return None


def parse_ohlcv_csv(raw: bytes | str) -> OhlcvSeries:
    """Parse a daily price-history CSV.

    The header row is required and matched by name (case-insensitive,
    whitespace stripped), so column order does not matter.  Rows whose date
    or close fail to parse are dropped and counted.  Bars where low/high do
    not bracket open/close are kept but reported as warnings.

    Raises SchemaError if required columns are missing, EmptySeries if no
    row parses.
    """
    text = _decode(raw)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptySeries("price history input is empty")

    header = [h.strip().lower().replace(" ", "").replace("_", "") for h in lines[0].split(",")]
    col = {name: i for i, name in enumerate(header)}
    missing = [c for c in OHLCV_COLUMNS if c not in col]
    if missing:
        raise SchemaError(f"price history header missing columns: {missing}")

    rows: list[OhlcvRow] = []
    dropped = 0
    warnings: list[str] = []

    for line in lines[1:]:
        fields = [f.strip() for f in line.split(",")]
        if len(fields) < len(header):
            fields += [""] * (len(header) - len(fields))
        try:
            d = datetime.strptime(fields[col["date"]], "%Y-%m-%d").date()
        except ValueError:
            dropped += 1
            continue
        close = _parse_float(fields[col["close"]])
        if close is None or close < 0:
            dropped += 1
            continue
        o = _parse_float(fields[col["open"]])
        h = _parse_float(fields[col["high"]])
        lo = _parse_float(fields[col["low"]])
        vol_f = _parse_float(fields[col["volume"]])
        row = OhlcvRow(
            date=d,
            open=o,
            high=h,
            low=lo,
            close=close,
            volume=int(vol_f) if vol_f is not None else None,
            adj_close=_parse_float(fields[col["adjclose"]]),
        )
        if o is not None and h is not None and lo is not None:
            if lo > min(o, close) or h < max(o, close):
                warnings.append(f"{d}: low/high do not bracket open/close")
        rows.append(row)

    if not rows:
        raise EmptySeries("price history contains no parseable rows")
    return OhlcvSeries(rows=rows, dropped=dropped, warnings=warnings)


def resolve_source(
    t: SourceTemplate,
    symbol: str,
    as_of: date,
    start: date | None = None,
) -> str:
    """Substitute template placeholders for one symbol.

    {month} and {start_month} are zero-based to match the original URL scheme
    (April resolves to 3).  Raises TemplateError on unknown placeholders.
    """
    if not symbol:
        raise ValueError("symbol must be non-empty")
    values = {
        "symbol": symbol,
        "day": str(as_of.day),
        "month": str(as_of.month - 1),
        "year": str(as_of.year),
    }
    if start is not None:
        values["start_day"] = str(start.day)
        values["start_month"] = str(start.month - 1)
        values["start_year"] = str(start.year)

    out = []
    i = 0
    tmpl = t.template
    while i < len(tmpl):
        c = tmpl[i]
        if c == "{":
            end = tmpl.find("}", i)
            if end < 0:
                raise TemplateError(f"unclosed placeholder at position {i}")
            name = tmpl[i + 1 : end]
            if name not in _KNOWN_PLACEHOLDERS:
                raise TemplateError(f"unknown placeholder {{{name}}}")
            if name not in values:
                raise TemplateError(
                    f"placeholder {{{name}}} requires a start date argument"
                )
            out.append(values[name])
            i = end + 1
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _fetch_one(
    t: SourceTemplate,
    symbol: str,
    as_of: date,
    start: date | None,
    timeout_ms: int,
    retries: int,
) -> OhlcvSeries:
    locator = resolve_source(t, symbol, as_of, start)
    if t.mode == "local-fixture":
        with open(locator, "rb") as f:
            return parse_ohlcv_csv(f.read())

    last_err: Exception | None = None
    for _ in range(retries + 1):
        try:
            with urllib.request.urlopen(locator, timeout=timeout_ms / 1000.0) as resp:
                return parse_ohlcv_csv(resp.read())
        except (urllib.error.URLError, OSError) as e:
            last_err = e
    raise last_err  # type: ignore[misc]


def fetch_all(
    symbols: list[str],
    t: SourceTemplate,
    as_of: date | None = None,
    start: date | None = None,
    timeout_ms: int = 10_000,
    retries: int = 2,
    max_parallel: int = 4,
) -> tuple[dict[str, list[OhlcvRow]], FetchReport]:
    """Fetch and parse price history for each symbol.

    Returns a map containing only the symbols whose fetch and parse both
    succeeded, plus a report with one outcome per requested symbol.  An empty
    symbol list yields an empty map; if every symbol fails, AllSourcesFailed
    is raised.
    """
    if as_of is None:
        as_of = date.today()
    report = FetchReport()
    if not symbols:
        return {}, report

    def task(sym: str) -> tuple[str, OhlcvSeries | None, str]:
        try:
            series = _fetch_one(t, sym, as_of, start, timeout_ms, retries)
            return sym, series, ""
        except (OSError, EmptySeries, SchemaError, TemplateError,
                urllib.error.URLError) as e:
            return sym, None, f"{type(e).__name__}: {e}"

    results: dict[str, OhlcvSeries] = {}
    errors: dict[str, str] = {}
    workers = max(1, min(max_parallel, len(symbols)))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        for sym, series, err in pool.map(task, symbols):
            if series is not None:
                results[sym] = series
            else:
                errors[sym] = err

    # preserve the request order in the report and the result map
    out: dict[str, list[OhlcvRow]] = {}
    for sym in symbols:
        if sym in results:
            series = results[sym]
            out[sym] = series.rows
            report.outcomes.append(
                FetchOutcome(symbol=sym, ok=True, rows=len(series.rows),
                             dropped=series.dropped)
            )
        else:
            report.outcomes.append(
                FetchOutcome(symbol=sym, ok=False, error=errors[sym])
            )
            logger.warning("fetch skipped %s: %s", sym, errors[sym])

    if not out:
        raise AllSourcesFailed(
            f"all {len(symbols)} symbol(s) failed: "
            + "; ".join(f"{o.symbol}={o.error}" for o in report.outcomes)
        )
    return out, report
