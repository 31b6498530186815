"""Window eigendecomposition and the analytic random-matrix reference."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from conftest import correlated_returns, day, equicorr_target, return_panel
from corrspec.correlate import WindowSpec, WindowedCorrelation, rolling_correlations
from corrspec.errors import NumericalError
from corrspec.spectra import decompose, eigenvalue_histogram, mp_bounds, mp_density

# Frozen values computed independently with 64-bit floats.
LAMBDA_MIN_367_400 = 0.0017755939331984827
LAMBDA_MAX_367_400 = 3.8332244060668015
DENSITY_AT_ONE_367_400 = 0.2917216342234149


def _wc(matrix: np.ndarray) -> WindowedCorrelation:
    return WindowedCorrelation(end_date=day(1), matrix=np.asarray(matrix, dtype=float),
                               mean_coeff=0.0, std_coeff=0.0)


def test_decompose_rank_one_pair():
    s = decompose(_wc([[1.0, 1.0], [1.0, 1.0]]))
    assert s.eigenvalues == pytest.approx([2.0, 0.0], abs=1e-12)
    assert np.abs(s.eigenvectors[:, 0]) == pytest.approx(
        [1.0 / np.sqrt(2.0)] * 2, abs=1e-12)
    assert s.eigenvectors[:, 0].sum() > 0.0


def test_decompose_identity():
    s = decompose(_wc(np.eye(5)))
    assert s.eigenvalues == pytest.approx(np.ones(5), abs=1e-15)


def test_decompose_equicorrelated_four():
    s = decompose(_wc(equicorr_target(4, 0.5)))
    assert s.eigenvalues == pytest.approx([2.5, 0.5, 0.5, 0.5], abs=1e-12)


def test_decompose_rejects_asymmetry():
    m = np.eye(3)
    m[0, 1] = 1e-6
    with pytest.raises(ValueError, match="asymmetry"):
        decompose(_wc(m))


def test_decompose_enforces_unit_trace_scale():
    with pytest.raises(NumericalError, match="deviates"):
        decompose(_wc(np.diag([2.0, 1.0])))


def test_decompose_rejects_indefinite_input():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NumericalError, match="positive semi-definite"):
        decompose(_wc(m))


def test_sign_convention_nonnegative_sums():
    returns = correlated_returns(8, 60, equicorr_target(8, 0.2), seed=4)
    wc = next(iter(rolling_correlations(return_panel(returns), WindowSpec(length=60))))
    s = decompose(wc)
    for k in range(8):
        assert s.eigenvectors[:, k].sum() >= 0.0


def test_sign_convention_tie_breaks_on_largest_component():
    # eigenvector (1, -1)/sqrt(2) sums to zero; the convention flips it so the
    # largest-magnitude component is positive
    s = decompose(_wc([[1.0, -1.0], [-1.0, 1.0]]))
    contrast = s.eigenvectors[:, 0]
    assert contrast.sum() == pytest.approx(0.0, abs=1e-15)
    assert contrast[np.argmax(np.abs(contrast))] > 0.0


def test_orthonormality_and_reconstruction():
    returns = correlated_returns(12, 90, equicorr_target(12, 0.3), seed=5)
    wc = next(iter(rolling_correlations(return_panel(returns), WindowSpec(length=90))))
    s = decompose(wc)
    gram = s.eigenvectors.T @ s.eigenvectors
    assert np.abs(gram - np.eye(12)).max() <= 1e-8
    rebuilt = (s.eigenvectors * s.eigenvalues) @ s.eigenvectors.T
    assert np.abs(rebuilt - wc.matrix).max() <= 1e-8
    assert np.all(np.diff(s.eigenvalues) <= 1e-15)


def test_trace_identity_across_windows():
    returns = correlated_returns(10, 80, equicorr_target(10, 0.25), seed=6)
    for wc in rolling_correlations(return_panel(returns), WindowSpec(length=40, step=10)):
        s = decompose(wc)
        assert abs(s.eigenvalues.sum() - 10.0) <= 1e-8 * 10.0


def test_mp_bounds_frozen_values():
    model = mp_bounds(367, 400)
    assert model.lambda_max == pytest.approx(LAMBDA_MAX_367_400, rel=1e-12)
    assert model.lambda_min == pytest.approx(LAMBDA_MIN_367_400, rel=1e-12)
    assert f"{model.lambda_max:.3g}" == "3.83"
    assert f"{model.lambda_min:.2g}" == "0.0018"


def test_mp_bounds_collapse_to_one_for_large_q():
    model = mp_bounds(5, 5_000_000)
    assert abs(model.lambda_min - 1.0) < 0.01
    assert abs(model.lambda_max - 1.0) < 0.01


def test_mp_bounds_requires_more_days_than_assets():
    with pytest.raises(ValueError, match="Q"):
        mp_bounds(400, 400)
    with pytest.raises(ValueError):
        mp_bounds(0, 10)


def test_mp_density_frozen_value_and_support():
    model = mp_bounds(367, 400)
    assert mp_density(model, 1.0) == pytest.approx(DENSITY_AT_ONE_367_400, rel=1e-12)
    assert mp_density(model, model.lambda_min) == 0.0
    assert mp_density(model, model.lambda_max) == 0.0
    assert mp_density(model, model.lambda_max + 0.5) == 0.0
    assert mp_density(model, model.lambda_min - 0.001) == 0.0
    grid = np.linspace(0.0, 4.0, 9)
    values = mp_density(model, grid)
    assert values.shape == grid.shape


def test_mp_density_integrates_to_one():
    for n, t in ((367, 400), (100, 400)):
        model = mp_bounds(n, t)
        mass, _ = integrate.quad(
            lambda lam: mp_density(model, lam),
            model.lambda_min, model.lambda_max, limit=200)
        assert abs(mass - 1.0) <= 1e-6


def test_eigenvalue_histogram_masses():
    spectra = [decompose(_wc(np.eye(4)))]
    hists = eigenvalue_histogram(spectra, bins=5, value_range=(0.0, 2.0))
    h = hists[0]
    width = 2.0 / 5
    assert h.mass_below == 0.0 and h.mass_above == 0.0
    assert h.densities.sum() * width == pytest.approx(1.0, abs=1e-12)
    # all four unit eigenvalues land in the bin containing 1.0
    assert h.densities[2] == pytest.approx(1.0 / width, abs=1e-12)


def test_eigenvalue_histogram_out_of_range_mass():
    s = decompose(_wc(equicorr_target(4, 0.5)))
    h = eigenvalue_histogram([s], bins=4, value_range=(0.4, 0.6))[0]
    assert h.mass_above == pytest.approx(0.25)
    assert h.mass_below == 0.0
    in_range = h.densities.sum() * (0.2 / 4)
    assert in_range == pytest.approx(0.75, abs=1e-12)


def test_eigenvalue_continuity_between_windows():
    # one-step eigenvalue moves are bounded by the spectral norm of the
    # correlation matrix change
    returns = correlated_returns(8, 45, equicorr_target(8, 0.15), seed=8)
    wcs = list(rolling_correlations(return_panel(returns), WindowSpec(length=30, step=1)))
    spectra = [decompose(wc) for wc in wcs]
    for a, b, wa, wb in zip(spectra, spectra[1:], wcs, wcs[1:]):
        bound = np.linalg.norm(wb.matrix - wa.matrix, 2)
        assert np.abs(b.eigenvalues - a.eigenvalues).max() <= bound + 1e-9
