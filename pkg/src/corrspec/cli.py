"""Command-line pipeline over price panels: ingest, synth, analyze, surrogate, modes, report."""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import correlate, modes, panel, report, risk, spectra, surrogate, synth
from .errors import DataError, NumericalError

logger = logging.getLogger(__name__)

ENV_PREFIX = "CORRSPEC_"

__version__ = "0.1.0"


@dataclass
class RunConfig:
    """Resolved configuration of one pipeline run.

    Numeric defaults follow the reference market study: 400-day windows
    advanced one day at a time, a 2600-observation history filter, and a
    10-repetition shuffled null read at its 99th percentile.
    """

    prices: str
    industry: str | None = None
    index: str | None = None
    window: int = 400
    step: int = 1
    min_days: int = 2600
    repetitions: int = 10
    percentile: float = 99.0
    crf_n: list[int] | None = None
    k_list: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    top_count: int = 10
    include_market: bool = False
    dividers: list[str] = field(default_factory=list)
    bins: int = 201
    vol_window: int = 100
    industry_scheme: str = "csrc"
    seed: int = 0
    out_dir: str = "out"
    dump_eigenvectors: bool = False
    figures: bool = True


def _env_default(name: str, fallback: object) -> object:
    return os.environ.get(ENV_PREFIX + name, fallback)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _date_list(text: str) -> list[str]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(dt.date.fromisoformat(part).isoformat())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad date {part!r}") from exc
    return out


def _size_list(text: str) -> tuple[int, ...]:
    values = _int_list(text)
    if not values:
        raise argparse.ArgumentTypeError("empty size list")
    return tuple(values)


def _segments(text: str) -> tuple[tuple[int, synth.Model], ...]:
    """Parse ``length:model[:rho]`` segments, comma separated."""
    out: list[tuple[int, synth.Model]] = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        try:
            length = int(parts[0])
            kind = parts[1]
            if kind == "iid" and len(parts) == 2:
                out.append((length, synth.IidModel()))
            elif kind == "equicorrelated" and len(parts) == 3:
                out.append((length, synth.EquicorrelatedModel(rho=float(parts[2]))))
            else:
                raise ValueError(kind)
        except (ValueError, IndexError) as exc:
            raise argparse.ArgumentTypeError(
                f"bad segment {chunk!r}, expected length:iid or length:equicorrelated:rho"
            ) from exc
    if not out:
        raise argparse.ArgumentTypeError("no segments given")
    return tuple(out)


# ---------- pipeline ----------


def _load_panel(config: RunConfig) -> panel.PricePanel:
    records = panel.read_price_csv(config.prices)
    prices = panel.ingest_prices(records)
    return panel.filter_min_history(prices, config.min_days)


def _load_imap(config: RunConfig) -> panel.IndustryMap:
    if config.industry is None:
        return panel.IndustryMap(entries={}, codes=[])
    pairs = panel.read_industry_csv(config.industry)
    if config.industry_scheme == "auto":
        codes = sorted({code for _, code in pairs})
    else:
        codes = None
    return panel.load_industry_map(pairs, codes=codes)


def _load_index(config: RunConfig, rp: correlate.ReturnPanel) -> tuple[np.ndarray, str]:
    """Index returns aligned to the panel's return dates."""
    if config.index is None:
        return rp.returns.mean(axis=1), "equal_weight_proxy"
    dates, prices = panel.read_index_csv(config.index)
    values = dict(zip(dates[1:], np.diff(np.log(prices))))
    missing = [d for d in rp.dates if d not in values]
    if missing:
        raise DataError(f"index series missing {len(missing)} return date(s), first {missing[0]}")
    return np.asarray([values[d] for d in rp.dates]), str(config.index)


def _parse_dividers(config: RunConfig) -> list[dt.date]:
    return [dt.date.fromisoformat(d) for d in config.dividers]


def run_pipeline(config: RunConfig, stages: set[str] | None = None) -> int:
    """Run the requested stages and write report files into ``config.out_dir``.

    Stages: ``analyze`` (correlations, spectra, risk), ``surrogate``,
    ``modes``, ``report``.  A manifest echoing the full configuration is
    always written; re-running from it reproduces every delimited file byte
    for byte.
    """
    t0 = time.time()
    if stages is None:
        stages = {"analyze", "surrogate", "modes", "report"}
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    prices = _load_panel(config)
    rp = correlate.log_returns(prices)
    wspec = correlate.WindowSpec(length=config.window, step=config.step)
    rows = rp.returns.shape[0]
    if rows < config.window:
        raise DataError(f"window length {config.window} exceeds available return rows {rows}")
    imap = _load_imap(config)
    index_values, index_source = _load_index(config, rp)

    if "analyze" in stages or "modes" in stages:
        _window_pass(config, rp, wspec, imap, index_values, out_dir,
                     want_analyze="analyze" in stages, want_modes="modes" in stages)
    if "surrogate" in stages:
        _surrogate_stage(config, rp, wspec, out_dir)

    n_windows = len(list(correlate.window_bounds(rows, wspec)))
    manifest = {
        "config": asdict(config),
        "stages": sorted(stages),
        "panel": {
            "n_assets": len(rp.assets),
            "n_dates": prices.n_dates,
            "n_return_rows": rows,
            "n_windows": n_windows,
            "first_date": prices.dates[0].isoformat(),
            "last_date": prices.dates[-1].isoformat(),
            "index_source": index_source,
        },
        "seed": config.seed,
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
    }
    (out_dir / report.MANIFEST_JSON).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    if "report" in stages:
        _report_stage(out_dir, figures=config.figures, to_stdout=False)
    return 0


def _window_pass(
    config: RunConfig,
    rp: correlate.ReturnPanel,
    wspec: correlate.WindowSpec,
    imap: panel.IndustryMap,
    index_values: np.ndarray,
    out_dir: Path,
    want_analyze: bool,
    want_modes: bool,
) -> None:
    summary_rows: list[tuple] = []
    hist_rows: list[tuple] = []
    eig_rows: list[tuple] = []
    contrib_rows: list[tuple] = []
    projection_rows: list[tuple] = []
    all_spectra: list[spectra.Spectrum] = []
    dump_dates: list[str] = []
    dump_vectors: list[np.ndarray] = []

    rank_ks = [k for k in config.k_list if k >= 2 or config.include_market]
    bounds = list(correlate.window_bounds(rp.returns.shape[0], wspec))
    for (start, end), wc in zip(bounds, correlate.rolling_correlations(rp, wspec)):
        spectrum = spectra.decompose(wc)
        if want_analyze:
            summary_rows.append((wc.end_date, wc.mean_coeff, wc.std_coeff))
            for center, density in correlate.coefficient_histogram(wc, config.bins):
                hist_rows.append((wc.end_date, center, density))
            for k, lam in enumerate(spectrum.eigenvalues, start=1):
                eig_rows.append((wc.end_date, k, float(lam)))
            if config.dump_eigenvectors:
                dump_dates.append(wc.end_date.isoformat())
                dump_vectors.append(spectrum.eigenvectors.copy())
        if want_modes:
            n = spectrum.eigenvalues.size
            for k in config.k_list:
                if k > n:
                    continue
                contribution = modes.industry_contribution(spectrum, rp.assets, imap, k)
                for code, value in contribution.per_code.items():
                    contrib_rows.append((wc.end_date, k, code, value))
            try:
                projection = modes.project_market_mode(
                    rp.returns[start:end], spectrum, index_values[start:end])
                projection_rows.append((wc.end_date, projection.regression_slope,
                                        projection.regression_r2))
            except DataError as exc:
                logger.warning("window ending %s: %s", wc.end_date, exc)
        all_spectra.append(spectrum)

    if want_analyze:
        report.write_csv(out_dir / report.SUMMARY_CSV,
                         ["end_date", "mean_coeff", "std_coeff"], summary_rows)
        report.write_csv(out_dir / report.HISTOGRAM_CSV,
                         ["end_date", "bin_center", "density"], hist_rows)
        report.write_csv(out_dir / report.EIGENVALUE_CSV,
                         ["end_date", "k", "lambda"], eig_rows)
        crf_rows: list[tuple] = []
        crf = risk.crf_series(all_spectra, n_values=config.crf_n)
        for n in crf.n_values:
            for date, value in crf.series[n].points:
                crf_rows.append((date, n, value))
        crf_rows.sort(key=lambda r: (r[0], r[1]))
        report.write_csv(out_dir / report.CRF_CSV, ["end_date", "n", "h_n"], crf_rows)
        if config.dump_eigenvectors:
            np.savez_compressed(
                out_dir / report.EIGENVECTOR_DUMP,
                end_dates=np.asarray(dump_dates),
                eigenvectors=np.stack(dump_vectors),
            )
        if rp.returns.shape[0] >= config.vol_window:
            index_series = correlate.MetricSeries(
                "index", list(zip(rp.dates, index_values.tolist())))
            vol = correlate.index_volatility(index_series, window=config.vol_window)
            report.write_csv(out_dir / report.VOLATILITY_CSV,
                             ["end_date", "value"], vol.points)
        else:
            logger.info("volatility window %d exceeds %d return rows, series skipped",
                        config.vol_window, rp.returns.shape[0])

    if want_modes:
        report.write_csv(out_dir / report.CONTRIBUTIONS_CSV,
                         ["end_date", "k", "industry", "X"], contrib_rows)
        report.write_csv(out_dir / report.PROJECTION_CSV,
                         ["end_date", "slope", "r2"], projection_rows)
        ranking_rows: list[tuple] = []
        end_dates = [s.end_date for s in all_spectra]
        by_date = {s.end_date: s for s in all_spectra}
        for period_start, period_stop in modes.period_partition(end_dates, _parse_dividers(config)):
            members = [by_date[d] for d in end_dates if period_start <= d <= period_stop]
            for k in rank_ks:
                if k > all_spectra[0].eigenvalues.size:
                    continue
                ranking = modes.rank_components(
                    members, rp.assets, imap, k,
                    top_count=config.top_count, include_market=config.include_market)
                for position, (asset, average, industry) in enumerate(ranking.entries, start=1):
                    ranking_rows.append((period_start, period_stop, k, position,
                                         asset, industry, average))
        report.write_csv(out_dir / report.RANKINGS_CSV,
                         ["period_start", "period_end", "k", "rank",
                          "asset", "industry", "average_rank"], ranking_rows)


def _surrogate_stage(
    config: RunConfig,
    rp: correlate.ReturnPanel,
    wspec: correlate.WindowSpec,
    out_dir: Path,
) -> None:
    thresholds, counts = surrogate.significance_series(
        rp, wspec, repetitions=config.repetitions,
        percentile=config.percentile, seed=config.seed)
    summaries = [
        surrogate.SurrogateSummary(
            end_date=date, threshold=value, significant_count=int(count),
            repetitions=config.repetitions, seed=config.seed)
        for (date, value), (_, count) in zip(thresholds.points, counts.points)
    ]
    report.write_csv(
        out_dir / report.SURROGATE_CSV,
        ["end_date", "threshold", "significant_count", "repetitions", "seed"],
        [(s.end_date, s.threshold, s.significant_count, s.repetitions, s.seed)
         for s in summaries],
    )


def _report_stage(out_dir: Path, figures: bool, to_stdout: bool) -> None:
    summary = report.merge_reports(out_dir)
    report.write_summary_json(summary, out_dir)
    if figures:
        written = report.render_figures(out_dir)
        logger.info("rendered %d figure(s)", len(written))
    if to_stdout:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        files = summary.get("files", {})
        for name, info in files.items():
            print(f"{name}: {info.get('rows', 0)} rows")


# ---------- subcommands ----------


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "from_manifest", None):
        try:
            payload = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
            config = RunConfig(**payload["config"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise DataError(f"cannot load manifest {args.from_manifest}: {exc}") from exc
        if args.out_dir is not None:
            config.out_dir = args.out_dir
        return config
    return RunConfig(
        prices=args.prices,
        industry=args.industry,
        index=args.index,
        window=args.window,
        step=args.step,
        min_days=args.min_days,
        repetitions=args.repetitions,
        percentile=args.percentile,
        crf_n=args.crf_n,
        k_list=args.k_list,
        top_count=args.top_count,
        include_market=args.include_market,
        dividers=args.dividers,
        bins=args.bins,
        vol_window=args.vol_window,
        industry_scheme=args.industry_scheme,
        seed=args.seed,
        out_dir=args.out_dir if args.out_dir is not None else "out",
        dump_eigenvectors=args.dump_eigenvectors,
        figures=not args.no_figures,
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    records = panel.read_price_csv(args.prices)
    raw = panel.ingest_prices(records)
    filtered = panel.filter_min_history(raw, args.min_days)
    print(f"records: {len(records)}")
    print(f"dates: {raw.n_dates} ({raw.dates[0]} to {raw.dates[-1]})")
    print(f"assets: {raw.n_assets} ingested, {filtered.n_assets} past the "
          f"{args.min_days}-day history filter")
    if args.dump:
        path = panel.write_panel_csv(filtered, args.dump)
        print(f"panel dump: {path}")
    return 0


def _model_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> synth.Model:
    if args.model == "iid":
        return synth.IidModel()
    if args.model == "equicorrelated":
        return synth.EquicorrelatedModel(rho=args.rho)
    if args.model == "one-factor":
        return synth.OneFactorModel(beta_low=args.beta_low, beta_high=args.beta_high,
                                    noise_std=args.noise_std)
    if args.model == "sector":
        if args.sizes is None:
            parser.error("--sizes is required for the sector model")
        return synth.SectorModel(sizes=args.sizes, intra_rho=args.intra_rho,
                                 market_rho=args.market_rho)
    if args.segments is None:
        parser.error("--segments is required for the regime model")
    return synth.RegimeModel(segments=args.segments)


def cmd_synth(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    model = _model_from_args(args, parser)
    try:
        spec = synth.SynthSpec(n_assets=args.n, n_days=args.days, model=model, seed=args.seed)
        rp, imap = synth.generate(spec)
        records = synth.price_records(rp, daily_vol=args.daily_vol)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    path = panel.write_price_csv(records, args.prices_out)
    print(f"prices: {path} ({len(rp.assets)} assets, {len(rp.dates) + 1} dates)")
    if imap is not None and args.industry_out:
        print(f"industries: {panel.write_industry_csv(imap, args.industry_out)}")
    elif args.industry_out:
        logger.warning("model plants no industry map, %s not written", args.industry_out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    out_dir = Path(args.dir)
    if not out_dir.is_dir():
        raise DataError(f"report directory {out_dir} does not exist")
    _report_stage(out_dir, figures=not args.no_figures, to_stdout=args.json)
    return 0


def _add_panel_arguments(p: argparse.ArgumentParser, prices_required: bool = True) -> None:
    p.add_argument("--prices", required=prices_required, default=None,
                   help="price CSV (date,asset,price)")
    p.add_argument("--industry", default=None, help="industry CSV (asset,industry)")
    p.add_argument("--industry-scheme", choices=["csrc", "auto"],
                   default=_env_default("INDUSTRY_SCHEME", "csrc"),
                   help="industry code scheme; auto derives codes from the file")
    p.add_argument("--index", default=None,
                   help="index CSV (date,price); defaults to the equal-weight panel mean")
    p.add_argument("--min-days", type=int, default=_env_default("MIN_DAYS", 2600),
                   help="minimum raw observations per asset (default 2600)")


def _add_window_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", "-T", type=int, default=_env_default("WINDOW", 400),
                   help="window length in return rows (default 400)")
    p.add_argument("--step", type=int, default=_env_default("STEP", 1),
                   help="window step in return rows (default 1)")


def _add_common_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_env_default("SEED", 0),
                   help="master seed for every stochastic stage (default 0)")
    p.add_argument("--out-dir", "-o", default=None,
                   help="output directory (default out)")
    p.add_argument("--repetitions", type=int, default=_env_default("REPETITIONS", 10),
                   help="surrogate repetitions per window (default 10)")
    p.add_argument("--percentile", type=float, default=_env_default("PERCENTILE", 99.0),
                   help="pooled surrogate percentile (default 99)")
    p.add_argument("--crf-n", type=_int_list, default=_env_default("CRF_N", None),
                   help="comma-separated component counts (default 1,10,50,N)")
    p.add_argument("--k-list", type=_int_list, default=_env_default("K_LIST", "1,2,3,4,5"),
                   help="eigenvector indices for industry output (default 1,2,3,4,5)")
    p.add_argument("--top", dest="top_count", type=int, default=_env_default("TOP", 10),
                   help="assets per ranking table (default 10)")
    p.add_argument("--include-market", action="store_true",
                   help="also rank the market eigenvector")
    p.add_argument("--dividers", type=_date_list, default=_env_default("DIVIDERS", ""),
                   help="comma-separated ISO dates splitting the ranking periods")
    p.add_argument("--bins", type=int, default=_env_default("BINS", 201),
                   help="coefficient histogram bins (default 201)")
    p.add_argument("--vol-window", type=int, default=_env_default("VOL_WINDOW", 100),
                   help="trailing index volatility window (default 100)")
    p.add_argument("--dump-eigenvectors", action="store_true",
                   help="also write per-window eigenvectors (npz)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrspec",
        description="Rolling correlation-matrix spectra for asset return panels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="info-level logging")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("ingest", help="validate a price CSV and report panel shape")
    p.add_argument("--prices", required=True)
    p.add_argument("--min-days", type=int, default=_env_default("MIN_DAYS", 2600))
    p.add_argument("--dump", default=None, help="write the normalized panel CSV here")
    p.set_defaults(func=cmd_ingest)

    p = commands.add_parser("synth", help="generate a synthetic price panel")
    p.add_argument("--model", required=True,
                   choices=["iid", "equicorrelated", "one-factor", "sector", "regime"])
    p.add_argument("--n", type=int, required=True, help="number of assets")
    p.add_argument("--days", type=int, required=True, help="number of return days")
    p.add_argument("--rho", type=float, default=0.3, help="pair correlation (equicorrelated)")
    p.add_argument("--beta-low", type=float, default=0.8)
    p.add_argument("--beta-high", type=float, default=1.2)
    p.add_argument("--noise-std", type=float, default=1.0)
    p.add_argument("--sizes", type=_size_list, default=None,
                   help="comma-separated sector sizes (sector model)")
    p.add_argument("--intra-rho", type=float, default=0.4)
    p.add_argument("--market-rho", type=float, default=0.1)
    p.add_argument("--segments", type=_segments, default=None,
                   help="regime segments, e.g. 400:equicorrelated:0.1,500:equicorrelated:0.5")
    p.add_argument("--daily-vol", type=float, default=0.02,
                   help="return scale used when cumulating prices (default 0.02)")
    p.add_argument("--seed", type=int, default=_env_default("SEED", 0))
    p.add_argument("--prices-out", required=True, help="output price CSV path")
    p.add_argument("--industry-out", default=None, help="output industry CSV path")
    p.set_defaults(func=lambda args, _p=p: cmd_synth(args, _p))

    for name, stages, help_text in (
        ("analyze", {"analyze"}, "correlations, spectra, and risk fractions"),
        ("surrogate", {"surrogate"}, "shuffled-null thresholds and significant counts"),
        ("modes", {"modes"}, "industry contributions, rankings, market-mode regression"),
        ("run", None, "full pipeline plus report"),
    ):
        p = commands.add_parser(name, help=help_text)
        _add_panel_arguments(p, prices_required=name != "run")
        _add_window_arguments(p)
        _add_common_arguments(p)
        if name == "run":
            p.add_argument("--from-manifest", default=None,
                           help="load the full configuration from a manifest JSON")
        p.set_defaults(func=lambda args, _stages=stages: _cmd_pipeline(args, _stages))

    p = commands.add_parser("report", help="merge report CSVs into JSON and render figures")
    p.add_argument("--dir", default="out", help="directory holding the report CSVs")
    p.add_argument("--json", action="store_true", help="print the merged summary as JSON")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def _cmd_pipeline(args: argparse.Namespace, stages: set[str] | None) -> int:
    if getattr(args, "from_manifest", None) is None and args.prices is None:
        raise DataError("either --prices or --from-manifest is required")
    config = _config_from_args(args)
    return run_pipeline(config, stages=stages)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console()
