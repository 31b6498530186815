"""Synthetic Gaussian return panels with known correlation structure."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .correlate import ReturnPanel
from .panel import IndustryMap, PriceRecord


@dataclass(frozen=True)
class IidModel:
    """Uncorrelated unit-variance returns."""


@dataclass(frozen=True)
class EquicorrelatedModel:
    """Every pair of assets shares the same correlation ``rho``."""

    rho: float


@dataclass(frozen=True)
class OneFactorModel:
    """Returns driven by one market factor with per-asset loadings.

    Loadings are drawn uniformly from [beta_low, beta_high]; idiosyncratic
    noise has standard deviation ``noise_std``.
    """

    beta_low: float = 0.8
    beta_high: float = 1.2
    noise_std: float = 1.0


@dataclass(frozen=True)
class SectorModel:
    """Block correlation target: ``intra_rho`` within a sector, ``market_rho`` across."""

    sizes: tuple[int, ...]
    intra_rho: float
    market_rho: float


@dataclass(frozen=True)
class RegimeModel:
    """Time-concatenated segments, each ``(length, model)``."""

    segments: tuple[tuple[int, "Model"], ...]


Model = IidModel | EquicorrelatedModel | OneFactorModel | SectorModel | RegimeModel


@dataclass(frozen=True)
class SynthSpec:
    """Panel dimensions, correlation model, and master seed."""

    n_assets: int
    n_days: int
    model: Model
    seed: int = 0


_BASE_DATE = dt.date(2000, 1, 3)


def _validate(model: Model, n: int) -> None:
    if isinstance(model, EquicorrelatedModel):
        if n < 2:
            raise ValueError("equicorrelated model needs at least 2 assets")
        low = -1.0 / (n - 1)
        if not low < model.rho < 1.0:
            raise ValueError(
                f"rho must lie in ({low:.6g}, 1) for N={n}, got {model.rho}"
            )
    elif isinstance(model, OneFactorModel):
        if model.beta_low > model.beta_high:
            raise ValueError("beta_low must not exceed beta_high")
        if model.noise_std < 0.0:
            raise ValueError("noise_std must be nonnegative")
    elif isinstance(model, SectorModel):
        if not model.sizes or any(s < 1 for s in model.sizes):
            raise ValueError("sector sizes must be positive")
        if sum(model.sizes) != n:
            raise ValueError(
                f"sector sizes sum to {sum(model.sizes)}, panel has {n} assets"
            )
        for name, value in ("intra_rho", model.intra_rho), ("market_rho", model.market_rho):
            if not -1.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (-1, 1), got {value}")
    elif isinstance(model, RegimeModel):
        if not model.segments:
            raise ValueError("regime model needs at least one segment")
        for length, sub in model.segments:
            if length < 1:
                raise ValueError(f"segment length must be >= 1, got {length}")
            if isinstance(sub, RegimeModel):
                raise ValueError("regime segments cannot nest another regime")
            _validate(sub, n)


def sector_target(model: SectorModel) -> np.ndarray:
    """Target correlation matrix implied by a sector model."""
    n = sum(model.sizes)
    c = np.full((n, n), model.market_rho)
    start = 0
    for size in model.sizes:
        c[start:start + size, start:start + size] = model.intra_rho
        start += size
    np.fill_diagonal(c, 1.0)
    return c


def _target_factor(target: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(target)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"correlation target is not positive definite: {exc}") from exc


def _draw(model: Model, rng: np.random.Generator, t: int, n: int) -> np.ndarray:
    if isinstance(model, IidModel):
        return rng.standard_normal((t, n))
    if isinstance(model, EquicorrelatedModel):
        target = np.full((n, n), model.rho)
        np.fill_diagonal(target, 1.0)
        return rng.standard_normal((t, n)) @ _target_factor(target).T
    if isinstance(model, OneFactorModel):
        betas = rng.uniform(model.beta_low, model.beta_high, n)
        market = rng.standard_normal(t)
        noise = rng.standard_normal((t, n))
        return np.outer(market, betas) + model.noise_std * noise
    if isinstance(model, SectorModel):
        return rng.standard_normal((t, n)) @ _target_factor(sector_target(model)).T
    if isinstance(model, RegimeModel):
        blocks = [_draw(sub, rng, length, n) for length, sub in model.segments]
        return np.vstack(blocks)
    raise TypeError(f"unknown model {model!r}")


def _planted_map(model: Model, assets: list[str]) -> IndustryMap | None:
    layouts: set[tuple[int, ...]] = set()
    if isinstance(model, SectorModel):
        layouts.add(model.sizes)
    elif isinstance(model, RegimeModel):
        for _, sub in model.segments:
            if isinstance(sub, SectorModel):
                layouts.add(sub.sizes)
    if len(layouts) != 1:
        return None
    sizes = layouts.pop()
    entries: dict[str, str] = {}
    start = 0
    for s_index, size in enumerate(sizes, start=1):
        for asset in assets[start:start + size]:
            entries[asset] = f"S{s_index}"
        start += size
    return IndustryMap(entries=entries, codes=[f"S{i + 1}" for i in range(len(sizes))])


def generate(spec: SynthSpec) -> tuple[ReturnPanel, IndustryMap | None]:
    """Draw the return panel described by ``spec``.

    All randomness comes from one generator stream seeded by ``spec.seed``,
    so equal specs pin the panel exactly.  Sector models also return the
    planted industry map; other models return None.
    """
    if spec.n_assets < 1:
        raise ValueError(f"n_assets must be >= 1, got {spec.n_assets}")
    if spec.n_days < 1:
        raise ValueError(f"n_days must be >= 1, got {spec.n_days}")
    _validate(spec.model, spec.n_assets)
    if isinstance(spec.model, RegimeModel):
        total = sum(length for length, _ in spec.model.segments)
        if total != spec.n_days:
            raise ValueError(f"segment lengths sum to {total}, spec has {spec.n_days} days")
    rng = np.random.default_rng(spec.seed)
    returns = _draw(spec.model, rng, spec.n_days, spec.n_assets)
    assets = [f"A{i:04d}" for i in range(spec.n_assets)]
    dates = [_BASE_DATE + dt.timedelta(days=i + 1) for i in range(spec.n_days)]
    return (
        ReturnPanel(dates=dates, assets=assets, returns=returns, lead_gaps=None),
        _planted_map(spec.model, assets),
    )


def price_records(
    panel: ReturnPanel,
    start_price: float = 100.0,
    daily_vol: float = 1.0,
) -> list[PriceRecord]:
    """Rebuild a price history by cumulating scaled returns from a start price.

    Scaling by ``daily_vol`` changes price levels only; correlations of the
    recovered log returns are unchanged.
    """
    if start_price <= 0.0:
        raise ValueError(f"start_price must be positive, got {start_price}")
    if daily_vol <= 0.0:
        raise ValueError(f"daily_vol must be positive, got {daily_vol}")
    first = panel.dates[0] - dt.timedelta(days=1)
    log_paths = np.vstack([
        np.zeros(len(panel.assets)),
        np.cumsum(panel.returns * daily_vol, axis=0),
    ])
    prices = start_price * np.exp(log_paths)
    records: list[PriceRecord] = []
    for t, date in enumerate([first, *panel.dates]):
        for i, asset in enumerate(panel.assets):
            records.append(PriceRecord(date=date, asset_id=asset, price=float(prices[t, i])))
    return records
