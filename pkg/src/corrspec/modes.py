"""Eigenvector interpretation: industry structure, market mode, component rankings."""

from __future__ import annotations

import datetime as dt
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .correlate import TWO_PASS_VAR_FLOOR
from .errors import DataError
from .panel import IndustryMap, UNKNOWN_CODE
from .spectra import Spectrum

logger = logging.getLogger(__name__)


@dataclass
class IndustryContribution:
    """Mean squared eigenvector component per industry group.

    ``small_codes`` lists groups below the small-group floor so consumers
    can discount their noisy means; they still appear in ``per_code``.
    """

    end_date: dt.date
    k: int
    per_code: dict[str, float]
    small_codes: list[str] = field(default_factory=list)


@dataclass
class ModeProjection:
    """Market-mode return series of one window and its index regression."""

    end_date: dt.date
    series: np.ndarray
    regression_slope: float
    regression_r2: float


@dataclass
class ComponentRanking:
    """Average component ranks of the best assets over a period of windows."""

    k: int
    period: tuple[dt.date, dt.date]
    entries: list[tuple[str, float, str]]


def industry_contribution(
    spectrum: Spectrum,
    assets: Sequence[str],
    imap: IndustryMap,
    k: int,
    small_group_floor: int = 3,
) -> IndustryContribution:
    """Mean squared component of eigenvector k within each industry group.

    Groups with no member assets are omitted; unmapped assets fall into the
    ``UNK`` group.
    """
    n = spectrum.eigenvalues.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if len(assets) != n:
        raise ValueError(f"got {len(assets)} asset ids for an N={n} spectrum")
    squared = spectrum.eigenvectors[:, k - 1] ** 2
    members: dict[str, list[int]] = {}
    for i, asset in enumerate(assets):
        members.setdefault(imap.resolve(asset), []).append(i)
    order = [c for c in imap.codes if c in members]
    if UNKNOWN_CODE in members:
        order.append(UNKNOWN_CODE)
    per_code: dict[str, float] = {}
    small: list[str] = []
    for code in order:
        idx = members[code]
        per_code[code] = float(squared[idx].mean())
        if len(idx) < small_group_floor:
            small.append(code)
    if small:
        logger.warning("industry groups below floor %d: %s", small_group_floor, ", ".join(small))
    return IndustryContribution(
        end_date=spectrum.end_date, k=k, per_code=per_code, small_codes=small,
    )


def _standardize(values: np.ndarray, what: str) -> np.ndarray:
    centered = values - values.mean()
    var = float((centered * centered).mean())
    if var <= float((values * values).mean()) * TWO_PASS_VAR_FLOOR:
        raise DataError(f"zero-variance {what}, regression rejected")
    return centered / math.sqrt(var)


def project_market_mode(
    window_returns: np.ndarray,
    spectrum: Spectrum,
    index_returns: np.ndarray,
) -> ModeProjection:
    """Market-mode return series of a window and its regression on an index.

    The projection weights raw (unstandardized) window returns by the first
    eigenvector.  Both axes are standardized before the fit, so the slope
    equals their correlation and is scale-free.
    """
    w = np.asarray(window_returns, dtype=float)
    idx = np.asarray(index_returns, dtype=float)
    n = spectrum.eigenvalues.size
    if w.ndim != 2 or w.shape[1] != n:
        raise ValueError(f"window shape {w.shape} does not match N={n}")
    if idx.shape != (w.shape[0],):
        raise ValueError(f"index series shape {idx.shape} does not match window rows {w.shape[0]}")
    series = w @ spectrum.eigenvectors[:, 0]
    y = _standardize(series, "market-mode projection")
    x = _standardize(idx, "index series")
    slope = float((x @ y) / (x @ x))
    resid = y - slope * x
    r2 = 1.0 - float((resid @ resid) / (y @ y))
    return ModeProjection(
        end_date=spectrum.end_date,
        series=series,
        regression_slope=slope,
        regression_r2=min(max(r2, 0.0), 1.0),
    )


def rank_components(
    spectra: Iterable[Spectrum],
    assets: Sequence[str],
    imap: IndustryMap,
    k: int,
    top_count: int = 10,
    include_market: bool = False,
) -> ComponentRanking:
    """Average per-window component ranks and keep the ``top_count`` best assets.

    Within each window assets rank 1..N by descending signed component of
    the sign-fixed eigenvector k.  Ties, and tied averages, break
    lexicographically by asset id.  The market eigenvector (k = 1) is only
    rankable with ``include_market``.
    """
    items = list(spectra)
    if not items:
        raise ValueError("empty window period")
    n = items[0].eigenvalues.size
    low = 1 if include_market else 2
    if not low <= k <= n:
        raise ValueError(f"k must be in [{low}, {n}], got {k}")
    if len(assets) != n:
        raise ValueError(f"got {len(assets)} asset ids for an N={n} spectrum")
    totals = np.zeros(n)
    for s in items:
        u = s.eigenvectors[:, k - 1]
        order = sorted(range(n), key=lambda i: (-u[i], assets[i]))
        for position, i in enumerate(order, start=1):
            totals[i] += position
    averages = totals / len(items)
    best = sorted(range(n), key=lambda i: (averages[i], assets[i]))[:top_count]
    return ComponentRanking(
        k=k,
        period=(items[0].end_date, items[-1].end_date),
        entries=[(assets[i], float(averages[i]), imap.resolve(assets[i])) for i in best],
    )


def period_partition(
    window_end_dates: Sequence[dt.date],
    dividers: Sequence[dt.date],
) -> list[tuple[dt.date, dt.date]]:
    """Split window end dates into half-open periods at the given dividers.

    Each divider starts a new period containing it.  Returns (first, last)
    end-date pairs of the non-empty periods; dividers outside the end-date
    range are ignored with a warning.
    """
    ends = list(window_end_dates)
    if not ends:
        raise ValueError("no window end dates")
    for d0, d1 in zip(dividers, dividers[1:]):
        if d1 <= d0:
            raise ValueError(f"dividers must be strictly increasing, got {d0} then {d1}")
    first, last = ends[0], ends[-1]
    kept: list[dt.date] = []
    for d in dividers:
        if d < first or d > last:
            logger.warning("divider %s outside end-date range [%s, %s], ignored", d, first, last)
        else:
            kept.append(d)
    bounds = [first, *kept, last + dt.timedelta(days=1)]
    periods: list[tuple[dt.date, dt.date]] = []
    for lo, hi in zip(bounds, bounds[1:]):
        members = [d for d in ends if lo <= d < hi]
        if members:
            periods.append((members[0], members[-1]))
    return periods
