"""Eigendecomposition of correlation windows and the random-matrix reference law."""

from __future__ import annotations

import datetime as dt
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .correlate import WindowedCorrelation
from .errors import NumericalError


@dataclass
class Spectrum:
    """Descending eigenvalues and sign-fixed eigenvector columns of one window."""

    end_date: dt.date
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class MPModel:
    """Marchenko-Pastur reference for an N-asset, L-day correlation window."""

    q: float
    lambda_min: float
    lambda_max: float


@dataclass
class EigenvalueHistogram:
    """Eigenvalue density of one window over a fixed range.

    ``mass_below``/``mass_above`` hold the eigenvalue fractions outside the
    range, so a split view (bulk vs large eigenvalues) stays consistent.
    """

    end_date: dt.date
    bin_centers: np.ndarray
    densities: np.ndarray
    mass_below: float
    mass_above: float


def decompose(wc: WindowedCorrelation) -> Spectrum:
    """Eigendecompose one window's correlation matrix.

    Eigenvalues come out in descending order.  Each eigenvector column is
    sign-fixed so its component sum is nonnegative; when the sum is exactly
    zero the largest-magnitude component is made positive.
    """
    m = np.asarray(wc.matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("correlation matrix contains non-finite entries")
    asym = float(np.abs(m - m.T).max())
    if asym > 1e-12:
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds 1e-12")

    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w = w[order]
    v = v[:, order]
    for k in range(v.shape[1]):
        total = v[:, k].sum()
        if total < 0.0 or (total == 0.0 and v[np.argmax(np.abs(v[:, k])), k] < 0.0):
            v[:, k] = -v[:, k]

    n = m.shape[0]
    if w[-1] < -1e-9:
        raise NumericalError(f"matrix not positive semi-definite: min eigenvalue {w[-1]:.3e}")
    trace_gap = abs(float(w.sum()) - n)
    if trace_gap > 1e-8 * n:
        raise NumericalError(f"eigenvalue sum deviates from N={n} by {trace_gap:.3e}")
    return Spectrum(end_date=wc.end_date, eigenvalues=w, eigenvectors=v)


def mp_bounds(n_assets: int, n_days: int) -> MPModel:
    """Support edges of the eigenvalue density of a random correlation window.

    For Q = L / N > 1 the support is 1 + 1/Q -/+ 2 sqrt(1/Q).
    """
    if n_assets < 1 or n_days < 1:
        raise ValueError("asset and day counts must be positive")
    if n_days <= n_assets:
        raise ValueError(
            f"need more days than assets (Q = L/N > 1), got N={n_assets}, L={n_days}"
        )
    q = n_days / n_assets
    center = 1.0 + 1.0 / q
    half_width = 2.0 * math.sqrt(1.0 / q)
    return MPModel(q=q, lambda_min=center - half_width, lambda_max=center + half_width)


def mp_density(model: MPModel, lam: float | Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Reference eigenvalue density, zero outside the support."""
    arr = np.asarray(lam, dtype=float)
    out = np.zeros_like(arr)
    inside = (arr >= model.lambda_min) & (arr <= model.lambda_max)
    x = arr[inside]
    out[inside] = (
        model.q / (2.0 * np.pi)
        * np.sqrt(np.maximum((model.lambda_max - x) * (x - model.lambda_min), 0.0))
        / x
    )
    if out.ndim == 0:
        return float(out)
    return out


def eigenvalue_histogram(
    spectra: Iterable[Spectrum],
    bins: int = 60,
    value_range: tuple[float, float] | None = None,
) -> list[EigenvalueHistogram]:
    """Per-window eigenvalue densities over a common range.

    The default range spans [0, max eigenvalue] across the input so every
    window is binned identically.
    """
    items = list(spectra)
    if not items:
        raise ValueError("no spectra given")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if value_range is None:
        value_range = (0.0, max(float(s.eigenvalues[0]) for s in items))
    lo, hi = value_range
    if not hi > lo:
        raise ValueError(f"empty value range ({lo}, {hi})")
    edges = np.linspace(lo, hi, bins + 1)
    centers = (edges[:-1] + edges[1:]) / 2.0
    width = (hi - lo) / bins
    out = []
    for s in items:
        ev = s.eigenvalues
        counts, _ = np.histogram(ev, bins=edges)
        out.append(EigenvalueHistogram(
            end_date=s.end_date,
            bin_centers=centers.copy(),
            densities=counts / (ev.size * width),
            mass_below=float((ev < lo).mean()),
            mass_above=float((ev > hi).mean()),
        ))
    return out
