"""Log returns, rolling correlation matrices, and coefficient statistics."""

from __future__ import annotations

import datetime as dt
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .panel import PricePanel

logger = logging.getLogger(__name__)

# Relative variance floor below which a window column counts as constant.
# The incremental rolling path accumulates O(steps * eps) drift between full
# recomputes, so its floor must sit far above two-pass rounding noise.
GRAM_VAR_FLOOR = 1e-11
# Two-pass paths only need to absorb centering residue on constant columns.
TWO_PASS_VAR_FLOOR = (32.0 * np.finfo(float).eps) ** 2


@dataclass(frozen=True)
class WindowSpec:
    """Rolling window geometry: ``length`` rows advanced by ``step`` rows."""

    length: int
    step: int = 1

    def __post_init__(self) -> None:
        if self.length < 2:
            raise ValueError(f"window length must be >= 2, got {self.length}")
        if self.step < 1:
            raise ValueError(f"window step must be >= 1, got {self.step}")


@dataclass
class ReturnPanel:
    """Daily log returns per asset.

    ``lead_gaps[i]`` is the row index (into the price calendar) of asset i's
    first raw observation; windows starting before it must not use the asset.
    Synthetic panels carry ``None``, meaning fully observed.
    """

    dates: list[dt.date]
    assets: list[str]
    returns: np.ndarray
    lead_gaps: np.ndarray | None = None


@dataclass
class WindowedCorrelation:
    """One window's correlation matrix with off-diagonal summary stats."""

    end_date: dt.date
    matrix: np.ndarray
    mean_coeff: float
    std_coeff: float


@dataclass
class MetricSeries:
    """Named series of (window end date, value) points."""

    name: str
    points: list[tuple[dt.date, float]]

    def __post_init__(self) -> None:
        for (d0, _), (d1, _) in zip(self.points, self.points[1:]):
            if d1 <= d0:
                raise ValueError(f"{self.name}: end dates not strictly increasing at {d1}")

    def dates(self) -> list[dt.date]:
        return [d for d, _ in self.points]

    def values(self) -> np.ndarray:
        return np.asarray([v for _, v in self.points])


def log_returns(panel: PricePanel) -> ReturnPanel:
    """Per-asset log price differences between consecutive panel dates."""
    if panel.n_dates < 2:
        raise DataError(f"need at least 2 dates for returns, got {panel.n_dates}")
    returns = np.diff(np.log(panel.prices), axis=0)
    return ReturnPanel(
        dates=list(panel.dates[1:]),
        assets=list(panel.assets),
        returns=returns,
        lead_gaps=panel.observed.argmax(axis=0),
    )


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation of two equal-length series (population convention).

    A zero-variance input makes the coefficient undefined; it is logged and
    mapped to 0.0 rather than raised, so one dead series cannot abort a run.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1:
        raise ValueError("pearson expects 1-d series")
    if xa.size != ya.size:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    if xa.size < 2:
        raise ValueError(f"need at least 2 observations, got {xa.size}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    ssx = float(dx @ dx)
    ssy = float(dy @ dy)
    if ssx <= TWO_PASS_VAR_FLOOR * float(xa @ xa) or ssy <= TWO_PASS_VAR_FLOOR * float(ya @ ya):
        logger.warning("zero-variance input to pearson, coefficient set to 0.0")
        return 0.0
    c = float(dx @ dy) / np.sqrt(ssx * ssy)
    return float(min(1.0, max(-1.0, c)))


def window_bounds(n_rows: int, spec: WindowSpec) -> Iterator[tuple[int, int]]:
    """Yield ``(start, end)`` row slices for every emitted window."""
    if n_rows < spec.length:
        raise DataError(
            f"window length {spec.length} exceeds available return rows {n_rows}"
        )
    for end in range(spec.length, n_rows + 1, spec.step):
        yield end - spec.length, end


def correlation_matrix(window: np.ndarray, degenerate: np.ndarray | None = None) -> np.ndarray:
    """Correlation matrix of one window, standardized Gram form with divisor T.

    Zero-variance columns (plus any caller-flagged ``degenerate`` columns)
    get zero correlations and a unit diagonal.
    """
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 2:
        raise ValueError(f"expected a (T, N) window with T >= 2, got {w.shape}")
    t = w.shape[0]
    centered = w - w.mean(axis=0)
    var = (centered * centered).mean(axis=0)
    dead = var <= (w * w).mean(axis=0) * TWO_PASS_VAR_FLOOR
    if degenerate is not None:
        dead = dead | degenerate
    z = centered / np.sqrt(np.where(dead, 1.0, var))
    c = (z.T @ z) / t
    c[dead, :] = 0.0
    c[:, dead] = 0.0
    np.fill_diagonal(c, 1.0)
    np.clip(c, -1.0, 1.0, out=c)
    return c


def standardize_window(window: np.ndarray) -> np.ndarray:
    """Standardize columns by the window's own mean and population std."""
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 2:
        raise ValueError(f"expected a (T, N) window with T >= 2, got {w.shape}")
    centered = w - w.mean(axis=0)
    var = (centered * centered).mean(axis=0)
    dead = var <= (w * w).mean(axis=0) * TWO_PASS_VAR_FLOOR
    if np.any(dead):
        raise DataError(
            f"zero-variance column(s) {np.flatnonzero(dead).tolist()} cannot be standardized"
        )
    return centered / np.sqrt(var)


def rolling_correlations(
    rp: ReturnPanel,
    spec: WindowSpec,
    recompute_every: int = 1000,
) -> Iterator[WindowedCorrelation]:
    """Yield one :class:`WindowedCorrelation` per window end.

    Window sums slide incrementally (drop the rows that left, add the rows
    that entered) and are rebuilt from scratch every ``recompute_every``
    windows to bound accumulated rounding drift.  Assets that are constant
    within a window, or first observed after the window starts, get zero
    correlations and a logged warning.
    """
    returns = rp.returns
    rows, n = returns.shape
    if n < 2:
        raise DataError(f"need at least 2 assets for correlations, got {n}")
    if recompute_every < 1:
        raise ValueError(f"recompute_every must be >= 1, got {recompute_every}")
    t = spec.length
    iu = np.triu_indices(n, k=1)
    s1 = np.zeros(n)
    s2 = np.zeros((n, n))
    prev: tuple[int, int] | None = None
    for emitted, (start, end) in enumerate(window_bounds(rows, spec)):
        if prev is None or emitted % recompute_every == 0:
            block = returns[start:end]
            s1 = block.sum(axis=0)
            s2 = block.T @ block
        else:
            dropped = returns[prev[0]:start]
            added = returns[prev[1]:end]
            s1 += added.sum(axis=0) - dropped.sum(axis=0)
            s2 += added.T @ added - dropped.T @ dropped
        prev = (start, end)

        end_date = rp.dates[end - 1]
        mean = s1 / t
        sq = np.diagonal(s2) / t
        var = sq - mean * mean
        constant = var <= sq * GRAM_VAR_FLOOR
        late = rp.lead_gaps > start if rp.lead_gaps is not None else np.zeros(n, dtype=bool)
        dead = constant | late
        for i in np.flatnonzero(dead):
            if late[i] and not constant[i]:
                logger.warning(
                    "asset %s first observed after start of window ending %s, correlations set to 0",
                    rp.assets[i], end_date,
                )
            else:
                logger.warning(
                    "zero-variance column %s in window ending %s, correlations set to 0",
                    rp.assets[i], end_date,
                )
        sd = np.sqrt(np.where(dead, 1.0, var))
        c = (s2 / t - np.outer(mean, mean)) / np.outer(sd, sd)
        c[dead, :] = 0.0
        c[:, dead] = 0.0
        np.fill_diagonal(c, 1.0)
        np.clip(c, -1.0, 1.0, out=c)
        off = c[iu]
        yield WindowedCorrelation(
            end_date=end_date,
            matrix=c,
            mean_coeff=float(off.mean()),
            std_coeff=float(off.std()),
        )


def coefficient_histogram(
    wc: WindowedCorrelation,
    bins: int = 201,
) -> list[tuple[float, float]]:
    """Density histogram of the window's off-diagonal coefficients on [-1, 1]."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    n = wc.matrix.shape[0]
    values = wc.matrix[np.triu_indices(n, k=1)]
    densities, edges = np.histogram(values, bins=bins, range=(-1.0, 1.0), density=True)
    centers = (edges[:-1] + edges[1:]) / 2.0
    return list(zip(centers.tolist(), densities.tolist()))


def equal_weight_index(rp: ReturnPanel) -> MetricSeries:
    """Cross-sectional mean return per day, a proxy index when none is supplied."""
    values = rp.returns.mean(axis=1)
    return MetricSeries("equal_weight_index", list(zip(rp.dates, values.tolist())))


def index_volatility(series: MetricSeries, window: int = 100) -> MetricSeries:
    """Trailing mean absolute value of an index return series."""
    if window < 1:
        raise ValueError(f"volatility window must be >= 1, got {window}")
    values = np.abs(series.values())
    if values.size < window:
        raise DataError(
            f"volatility window {window} exceeds series length {values.size}"
        )
    means = np.convolve(values, np.ones(window), mode="valid") / window
    dates = series.dates()[window - 1:]
    return MetricSeries(f"{series.name}_volatility", list(zip(dates, means.tolist())))
