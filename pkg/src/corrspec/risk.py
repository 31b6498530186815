"""Principal components of standardized windows and the cumulative risk fraction."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .correlate import MetricSeries
from .spectra import Spectrum


@dataclass
class PCADecomposition:
    """Standardized window returns expressed in the eigenvector basis."""

    loadings: np.ndarray
    component_series: np.ndarray
    eigenvalues: np.ndarray


@dataclass
class CRFSeries:
    """One cumulative risk fraction series per requested component count."""

    n_values: list[int]
    series: dict[int, MetricSeries]


def pca_decompose(window_std: np.ndarray, spectrum: Spectrum) -> PCADecomposition:
    """Project standardized window returns onto the window's eigenvectors.

    With standardization matching the correlation construction, component k
    has sample second moment eigenvalue_k and the components are pairwise
    uncorrelated.
    """
    z = np.asarray(window_std, dtype=float)
    if z.ndim != 2:
        raise ValueError(f"expected a (T, N) window, got shape {z.shape}")
    n = spectrum.eigenvalues.size
    if z.shape[1] != n:
        raise ValueError(f"window has {z.shape[1]} columns, spectrum expects {n}")
    return PCADecomposition(
        loadings=spectrum.eigenvectors.copy(),
        component_series=z @ spectrum.eigenvectors,
        eigenvalues=spectrum.eigenvalues.copy(),
    )


def crf(spectrum: Spectrum, n: int) -> float:
    """Fraction of total variance carried by the n largest components."""
    total = spectrum.eigenvalues.size
    if not 1 <= n <= total:
        raise ValueError(f"n must be in [1, {total}], got {n}")
    ev = spectrum.eigenvalues
    return float(ev[:n].sum() / ev.sum())


def crf_series(
    spectra: Iterable[Spectrum],
    n_values: Sequence[int] | None = None,
) -> CRFSeries:
    """Cumulative risk fraction per window for each component count.

    Defaults to counts 1, 10, 50 (those below N) plus N itself.
    """
    items = list(spectra)
    if not items:
        raise ValueError("no spectra given")
    total = items[0].eigenvalues.size
    if n_values is None:
        counts = [n for n in (1, 10, 50) if n < total] + [total]
    else:
        counts = list(dict.fromkeys(int(n) for n in n_values))
    series: dict[int, MetricSeries] = {}
    for n in counts:
        points = [(s.end_date, crf(s, n)) for s in items]
        series[n] = MetricSeries(f"crf_{n}", points)
    return CRFSeries(n_values=counts, series=series)
