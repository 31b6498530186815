"""Rolling cross-correlation spectra for asset return panels.

Builds date-aligned price panels, slides fixed-length correlation windows
over their log returns, eigendecomposes each window against a shuffled
random-matrix null, and interprets the significant eigenvectors through
risk fractions, industry structure, and market-mode regressions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .correlate import (
    MetricSeries,
    ReturnPanel,
    WindowSpec,
    WindowedCorrelation,
    coefficient_histogram,
    correlation_matrix,
    equal_weight_index,
    index_volatility,
    log_returns,
    pearson,
    rolling_correlations,
    standardize_window,
    window_bounds,
)
from .errors import DataError, NumericalError
from .modes import (
    ComponentRanking,
    IndustryContribution,
    ModeProjection,
    industry_contribution,
    period_partition,
    project_market_mode,
    rank_components,
)
from .panel import (
    CSRC_CODES,
    IndustryMap,
    PricePanel,
    PriceRecord,
    filter_min_history,
    ingest_prices,
    load_industry_map,
)
from .risk import CRFSeries, PCADecomposition, crf, crf_series, pca_decompose
from .spectra import (
    EigenvalueHistogram,
    MPModel,
    Spectrum,
    decompose,
    eigenvalue_histogram,
    mp_bounds,
    mp_density,
)
from .surrogate import (
    SurrogateSummary,
    null_threshold,
    shuffle_window,
    significance_series,
    significant_count,
)
from .synth import (
    EquicorrelatedModel,
    IidModel,
    OneFactorModel,
    RegimeModel,
    SectorModel,
    SynthSpec,
    generate,
    price_records,
    sector_target,
)
