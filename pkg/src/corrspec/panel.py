"""Price-panel ingestion, history filtering, and industry metadata."""

from __future__ import annotations

import csv
import datetime as dt
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

# Top-level CSRC industry scheme (22 codes), used when no explicit scheme is given.
CSRC_CODES: tuple[str, ...] = (
    "A", "B", "C0", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C99",
    "D", "E", "F", "G", "H", "I", "J", "K", "L", "M",
)

UNKNOWN_CODE = "UNK"


@dataclass(frozen=True)
class PriceRecord:
    """One raw closing-price observation."""

    date: dt.date
    asset_id: str
    price: float


@dataclass
class PricePanel:
    """Date-aligned price matrix with an observation mask.

    ``prices[t, i]`` is the price of ``assets[i]`` on ``dates[t]`` after gap
    filling; ``observed[t, i]`` is True only where a raw record existed.
    """

    dates: list[dt.date]
    assets: list[str]
    prices: np.ndarray
    observed: np.ndarray

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)


def ingest_prices(records: Iterable[PriceRecord]) -> PricePanel:
    """Align raw records on the union calendar and fill gaps.

    Interior gaps carry the asset's last observed price forward and are
    marked unobserved.  Days before an asset's first observation carry that
    first price (the matrix must stay positive for log returns) and are also
    marked unobserved; window-level operations treat such an asset as
    unusable in any window that starts before its first observation.
    """
    cells: dict[tuple[dt.date, str], float] = {}
    for rec in records:
        if not rec.asset_id:
            raise DataError(f"empty asset id on {rec.date}")
        price = float(rec.price)
        if not np.isfinite(price) or price <= 0.0:
            raise DataError(
                f"non-positive price {rec.price!r} for {rec.asset_id} on {rec.date}"
            )
        key = (rec.date, rec.asset_id)
        prev = cells.get(key)
        if prev is not None and prev != price:
            raise DataError(
                f"conflicting prices for {rec.asset_id} on {rec.date}: {prev} vs {price}"
            )
        cells[key] = price
    if not cells:
        raise DataError("no price records to ingest")

    dates = sorted({d for d, _ in cells})
    assets = sorted({a for _, a in cells})
    date_pos = {d: t for t, d in enumerate(dates)}
    asset_pos = {a: i for i, a in enumerate(assets)}

    raw = np.full((len(dates), len(assets)), np.nan)
    observed = np.zeros(raw.shape, dtype=bool)
    for (d, a), price in cells.items():
        raw[date_pos[d], asset_pos[a]] = price
        observed[date_pos[d], asset_pos[a]] = True

    rows = np.arange(len(dates))[:, None]
    last_seen = np.maximum.accumulate(np.where(observed, rows, -1), axis=0)
    first_seen = observed.argmax(axis=0)
    source = np.where(last_seen >= 0, last_seen, first_seen[None, :])
    prices = raw[source, np.arange(len(assets))[None, :]]
    return PricePanel(dates=dates, assets=assets, prices=prices, observed=observed)


def filter_min_history(panel: PricePanel, min_observed_days: int) -> PricePanel:
    """Keep assets with at least ``min_observed_days`` raw observations."""
    if min_observed_days < 1:
        raise ValueError(f"min_observed_days must be >= 1, got {min_observed_days}")
    counts = panel.observed.sum(axis=0)
    keep = counts >= min_observed_days
    n_kept = int(keep.sum())
    if n_kept < 2:
        raise DataError(
            f"history filter at {min_observed_days} observed days keeps {n_kept} "
            f"asset(s) of {panel.n_assets}, need at least 2"
        )
    if n_kept < panel.n_assets:
        logger.info("history filter retained %d of %d assets", n_kept, panel.n_assets)
    return PricePanel(
        dates=list(panel.dates),
        assets=[a for a, k in zip(panel.assets, keep) if k],
        prices=panel.prices[:, keep].copy(),
        observed=panel.observed[:, keep].copy(),
    )


@dataclass
class IndustryMap:
    """Asset-to-industry assignment over a fixed code scheme."""

    entries: dict[str, str]
    codes: list[str]

    def resolve(self, asset_id: str) -> str:
        return self.entries.get(asset_id, UNKNOWN_CODE)

    def group_sizes(self, assets: Sequence[str]) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for asset in assets:
            code = self.resolve(asset)
            sizes[code] = sizes.get(code, 0) + 1
        return sizes


def load_industry_map(
    records: Iterable[tuple[str, str]],
    codes: Sequence[str] | None = None,
) -> IndustryMap:
    """Build an industry map, validating codes against the scheme.

    Assets absent from the map resolve to ``UNK``; an asset mapped to two
    different codes is rejected.
    """
    scheme = list(CSRC_CODES if codes is None else codes)
    if len(set(scheme)) != len(scheme):
        raise DataError("industry scheme contains duplicate codes")
    known = set(scheme)
    entries: dict[str, str] = {}
    for asset_id, code in records:
        if code not in known:
            raise DataError(f"industry code {code!r} for {asset_id} not in scheme")
        prev = entries.get(asset_id)
        if prev is not None and prev != code:
            raise DataError(f"asset {asset_id} mapped to both {prev} and {code}")
        entries[asset_id] = code
    return IndustryMap(entries=entries, codes=scheme)


# ---------- delimited input and output ----------


def _parse_date(text: str, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"{where}: bad date {text!r}") from exc


def _parse_price(text: str, where: str) -> float:
    try:
        price = float(text)
    except ValueError as exc:
        raise DataError(f"{where}: bad price {text!r}") from exc
    if not np.isfinite(price) or price <= 0.0:
        raise DataError(f"{where}: non-positive price {text!r}")
    return price


def _check_header(row: list[str] | None, expected: list[str], path: Path) -> None:
    got = [h.strip().lower() for h in row] if row else []
    if got != expected:
        raise DataError(f"{path}:1: expected header {','.join(expected)}")


def read_price_csv(path: str | Path) -> list[PriceRecord]:
    """Read ``date,asset,price`` rows, reporting the offending line on error."""
    path = Path(path)
    records: list[PriceRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ["date", "asset", "price"], path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != 3:
                raise DataError(f"{where}: expected 3 fields, got {len(row)}")
            date = _parse_date(row[0], where)
            asset = row[1].strip()
            if not asset:
                raise DataError(f"{where}: empty asset id")
            records.append(PriceRecord(date=date, asset_id=asset, price=_parse_price(row[2], where)))
    if not records:
        raise DataError(f"{path}: no data rows")
    return records


def read_industry_csv(path: str | Path) -> list[tuple[str, str]]:
    """Read ``asset,industry`` rows."""
    path = Path(path)
    pairs: list[tuple[str, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ["asset", "industry"], path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != 2:
                raise DataError(f"{where}: expected 2 fields, got {len(row)}")
            asset, code = row[0].strip(), row[1].strip()
            if not asset or not code:
                raise DataError(f"{where}: empty field")
            pairs.append((asset, code))
    return pairs


def read_index_csv(path: str | Path) -> tuple[list[dt.date], np.ndarray]:
    """Read a ``date,price`` index series with strictly increasing dates."""
    path = Path(path)
    dates: list[dt.date] = []
    prices: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ["date", "price"], path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != 2:
                raise DataError(f"{where}: expected 2 fields, got {len(row)}")
            date = _parse_date(row[0], where)
            if dates and date <= dates[-1]:
                raise DataError(f"{where}: dates not strictly increasing at {date}")
            dates.append(date)
            prices.append(_parse_price(row[1], where))
    if len(dates) < 2:
        raise DataError(f"{path}: need at least 2 index rows")
    return dates, np.asarray(prices)


def write_price_csv(records: Sequence[PriceRecord], path: str | Path) -> Path:
    """Write ``date,asset,price`` rows with full-precision prices."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "asset", "price"])
        for rec in records:
            writer.writerow([rec.date.isoformat(), rec.asset_id, repr(float(rec.price))])
    return path


def write_industry_csv(imap: IndustryMap, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["asset", "industry"])
        for asset in sorted(imap.entries):
            writer.writerow([asset, imap.entries[asset]])
    return path


def write_panel_csv(panel: PricePanel, path: str | Path) -> Path:
    """Dump the normalized panel as ``date,asset,price,observed`` rows."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "asset", "price", "observed"])
        for t, date in enumerate(panel.dates):
            for i, asset in enumerate(panel.assets):
                writer.writerow([
                    date.isoformat(),
                    asset,
                    repr(float(panel.prices[t, i])),
                    "1" if panel.observed[t, i] else "0",
                ])
    return path


def read_panel_dump(path: str | Path) -> list[PriceRecord]:
    """Read a :func:`write_panel_csv` dump back into raw records.

    Only observed rows become records, so ingesting the result reproduces
    the original panel bit for bit.
    """
    path = Path(path)
    records: list[PriceRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), ["date", "asset", "price", "observed"], path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != 4:
                raise DataError(f"{where}: expected 4 fields, got {len(row)}")
            if row[3].strip() != "1":
                continue
            records.append(PriceRecord(
                date=_parse_date(row[0], where),
                asset_id=row[1].strip(),
                price=_parse_price(row[2], where),
            ))
    if not records:
        raise DataError(f"{path}: no observed rows")
    return records
