"""Report files: delimited output, a merged JSON summary, and rendered figures."""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

SUMMARY_CSV = "correlation_summary.csv"
HISTOGRAM_CSV = "coefficient_histogram.csv"
EIGENVALUE_CSV = "eigenvalues.csv"
VOLATILITY_CSV = "index_volatility.csv"
CRF_CSV = "crf.csv"
SURROGATE_CSV = "surrogate.csv"
CONTRIBUTIONS_CSV = "contributions.csv"
RANKINGS_CSV = "rankings.csv"
PROJECTION_CSV = "projection.csv"
EIGENVECTOR_DUMP = "eigenvectors.npz"
MANIFEST_JSON = "manifest.json"
SUMMARY_JSON = "summary.json"

REPORT_CSVS = (
    SUMMARY_CSV,
    HISTOGRAM_CSV,
    EIGENVALUE_CSV,
    VOLATILITY_CSV,
    CRF_CSV,
    SURROGATE_CSV,
    CONTRIBUTIONS_CSV,
    RANKINGS_CSV,
    PROJECTION_CSV,
)


def _cell(value: object) -> str:
    # repr of a float is the shortest round-trip form, never below full precision
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Write rows with full-precision reals, ISO dates, and LF line endings."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, [])
        return header, [row for row in reader if row]


def _column_summary(header: list[str], rows: list[list[str]]) -> dict[str, object]:
    info: dict[str, object] = {"rows": len(rows), "columns": header}
    if not rows:
        return info
    stats: dict[str, dict[str, float]] = {}
    for j, name in enumerate(header):
        try:
            values = np.asarray([float(r[j]) for r in rows])
        except (ValueError, IndexError):
            continue
        stats[name] = {
            "min": float(values.min()),
            "max": float(values.max()),
            "mean": float(values.mean()),
        }
    if stats:
        info["numeric"] = stats
    dates: dict[str, dict[str, str]] = {}
    for j, name in enumerate(header):
        if name.endswith("date"):
            dates[name] = {"first": rows[0][j], "last": rows[-1][j]}
    if dates:
        info["dates"] = dates
    return info


def merge_reports(out_dir: str | Path) -> dict[str, object]:
    """Collect every report CSV in a directory into one JSON-ready summary."""
    out_dir = Path(out_dir)
    summary: dict[str, object] = {"directory": out_dir.name, "files": {}}
    manifest = out_dir / MANIFEST_JSON
    if manifest.exists():
        summary["manifest"] = json.loads(manifest.read_text(encoding="utf-8"))
    files: dict[str, object] = {}
    for name in REPORT_CSVS:
        path = out_dir / name
        if not path.exists():
            continue
        header, rows = _read_csv(path)
        files[name] = _column_summary(header, rows)
    summary["files"] = files
    return summary


def write_summary_json(summary: dict[str, object], out_dir: str | Path) -> Path:
    path = Path(out_dir) / SUMMARY_JSON
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------- figures ----------


def _parse_dates(values: list[str]) -> list[dt.date]:
    return [dt.date.fromisoformat(v) for v in values]


def _load_columns(path: Path) -> dict[str, list[str]]:
    header, rows = _read_csv(path)
    return {name: [row[j] for row in rows] for j, name in enumerate(header)}


def _fig_mean_correlation(out_dir: Path, plt) -> Path | None:
    path = out_dir / SUMMARY_CSV
    if not path.exists():
        return None
    cols = _load_columns(path)
    dates = _parse_dates(cols["end_date"])
    mean = np.asarray([float(v) for v in cols["mean_coeff"]])
    std = np.asarray([float(v) for v in cols["std_coeff"]])
    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    ax.plot(dates, mean, color="tab:blue", lw=1.2, label="mean coefficient")
    ax.fill_between(dates, mean - std, mean + std, color="tab:blue", alpha=0.2,
                    label="+/- std")
    ax.set_xlabel("window end date")
    ax.set_ylabel("correlation coefficient")
    vol_path = out_dir / VOLATILITY_CSV
    if vol_path.exists():
        vcols = _load_columns(vol_path)
        ax2 = ax.twinx()
        ax2.plot(_parse_dates(vcols["end_date"]), [float(v) for v in vcols["value"]],
                 color="tab:red", lw=0.9, alpha=0.7, label="index volatility")
        ax2.set_ylabel("index volatility")
    ax.legend(loc="upper left", fontsize=8)
    fig.autofmt_xdate()
    target = out_dir / "mean_correlation.png"
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def _fig_eigenvalue_spectrum(out_dir: Path, plt) -> Path | None:
    path = out_dir / EIGENVALUE_CSV
    if not path.exists():
        return None
    cols = _load_columns(path)
    end_dates = cols["end_date"]
    last = end_dates[-1]
    values = np.asarray([
        float(v) for v, d in zip(cols["lambda"], end_dates) if d == last
    ])
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0), width_ratios=[3, 1])
    bulk_top = min(5.0, float(values.max()))
    axes[0].hist(values[values <= bulk_top], bins=50, range=(0.0, bulk_top),
                 density=True, color="tab:blue", alpha=0.7, label="bulk")
    model = _mp_model_from_manifest(out_dir, values.size)
    if model is not None:
        from .spectra import mp_density

        grid = np.linspace(0.0, bulk_top, 400)
        axes[0].plot(grid, mp_density(model, grid), color="tab:red", lw=1.3,
                     label="random reference")
    axes[0].set_xlabel("eigenvalue")
    axes[0].set_ylabel("density")
    axes[0].legend(fontsize=8)
    axes[0].set_title(f"window ending {last}", fontsize=9)
    axes[1].plot(np.arange(1, values.size + 1), np.sort(values)[::-1], ".", ms=3)
    axes[1].set_yscale("log")
    axes[1].set_xlabel("rank")
    axes[1].set_ylabel("eigenvalue")
    fig.tight_layout()
    target = out_dir / "eigenvalue_spectrum.png"
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def _mp_model_from_manifest(out_dir: Path, n_assets: int):
    manifest = out_dir / MANIFEST_JSON
    if not manifest.exists():
        return None
    try:
        window = json.loads(manifest.read_text(encoding="utf-8"))["config"]["window"]
        if window <= n_assets:
            return None
        from .spectra import mp_bounds

        return mp_bounds(n_assets, window)
    except (KeyError, ValueError, TypeError):
        return None


def _fig_significance(out_dir: Path, plt) -> Path | None:
    path = out_dir / SURROGATE_CSV
    if not path.exists():
        return None
    cols = _load_columns(path)
    dates = _parse_dates(cols["end_date"])
    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    ax.plot(dates, [float(v) for v in cols["threshold"]], color="tab:red", lw=1.0,
            label="null threshold")
    ax.set_xlabel("window end date")
    ax.set_ylabel("threshold")
    ax2 = ax.twinx()
    ax2.step(dates, [int(v) for v in cols["significant_count"]], where="mid",
             color="tab:blue", lw=1.0, alpha=0.8, label="significant count")
    ax2.set_ylabel("count above threshold")
    ax.legend(loc="upper left", fontsize=8)
    ax2.legend(loc="upper right", fontsize=8)
    fig.autofmt_xdate()
    target = out_dir / "significance.png"
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def _fig_crf(out_dir: Path, plt) -> Path | None:
    path = out_dir / CRF_CSV
    if not path.exists():
        return None
    cols = _load_columns(path)
    groups: dict[str, tuple[list[dt.date], list[float]]] = {}
    for d, n, h in zip(cols["end_date"], cols["n"], cols["h_n"]):
        dates, values = groups.setdefault(n, ([], []))
        dates.append(dt.date.fromisoformat(d))
        values.append(float(h))
    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    for n in sorted(groups, key=int):
        dates, values = groups[n]
        ax.plot(dates, values, lw=1.1, label=f"n = {n}")
    ax.set_xlabel("window end date")
    ax.set_ylabel("cumulative risk fraction")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.autofmt_xdate()
    target = out_dir / "crf.png"
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def render_figures(out_dir: str | Path) -> list[Path]:
    """Render the standard figures for whichever report CSVs are present.

    Plotting is best effort; the delimited files stay the primary artifact
    and a failed figure only logs a warning.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    written: list[Path] = []
    for renderer in (_fig_mean_correlation, _fig_eigenvalue_spectrum,
                     _fig_significance, _fig_crf):
        try:
            target = renderer(out_dir, plt)
        except Exception as exc:  # noqa: BLE001
            logger.warning("figure %s failed: %s", renderer.__name__, exc)
            continue
        if target is not None:
            written.append(target)
    return written
