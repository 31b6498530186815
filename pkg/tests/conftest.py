"""Shared builders for panels, windows, and synthetic return draws."""

from __future__ import annotations

import datetime as dt

import numpy as np

from corrspec.correlate import ReturnPanel
from corrspec.panel import PriceRecord

BASE = dt.date(2020, 1, 1)


def day(i: int) -> dt.date:
    return BASE + dt.timedelta(days=i)


def records_from_grid(grid: dict[str, list[float | None]]) -> list[PriceRecord]:
    """Records from {asset: per-day price list}, None meaning no observation."""
    records = []
    for asset, prices in grid.items():
        for i, price in enumerate(prices):
            if price is not None:
                records.append(PriceRecord(date=day(i), asset_id=asset, price=price))
    return records


def return_panel(returns: np.ndarray, lead_gaps: np.ndarray | None = None) -> ReturnPanel:
    returns = np.asarray(returns, dtype=float)
    rows, n = returns.shape
    return ReturnPanel(
        dates=[day(i + 1) for i in range(rows)],
        assets=[f"A{i:04d}" for i in range(n)],
        returns=returns,
        lead_gaps=lead_gaps,
    )


def correlated_returns(n: int, t: int, target: np.ndarray, seed: int) -> np.ndarray:
    """Gaussian draw against an explicit correlation target, independent of synth."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((t, n)) @ np.linalg.cholesky(target).T


def equicorr_target(n: int, rho: float) -> np.ndarray:
    c = np.full((n, n), rho)
    np.fill_diagonal(c, 1.0)
    return c
