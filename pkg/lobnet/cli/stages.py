"""
Pipeline stages behind the CLI commands.

Days fan out across the worker pool; every cross-day reduction (pooled fits,
profiles, correlations, batch summaries) runs after all days are back.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Optional, Sequence

from opentelemetry import trace

from lobnet.cli.context import RunContext, fan_out
from lobnet.common.core.config import settings
from lobnet.common.core.exceptions import ConfigError, FitError
from lobnet.common.models.records import DayStream, Trade
from lobnet.common.models.schemas import CancelMode, FitConfig, NetworkSizeMetrics, PowerLawFit
from lobnet.common.utils.artifacts import HEADER_PREFIX, read_json
from lobnet.common.utils.rng import STREAM_BOOTSTRAP, STREAM_FITNESS
from lobnet.fitnessmodel import build_pools, compare_exponents, run_ensemble
from lobnet.matchengine import MatchingEngine, ReferenceMatcher, ReplayResult
from lobnet.matchengine.ledger import (
    compare_with_reference,
    ledger_date,
    ledger_file_name,
    read_ledger,
    read_reference_series,
    write_ledger,
    write_snapshots,
)
from lobnet.orderflow import load_day_files, validate_day
from lobnet.orderflow.files import expand_inputs, write_day_files
from lobnet.orderflow.parser import format_price
from lobnet.plfit import ccdf, fit_powerlaw, summarize_fits
from lobnet.synthgen import generate_days
from lobnet.tradenet import (
    Direction,
    TradingNetwork,
    build_network,
    degree_size_correlation,
    degrees,
    knn_profile,
    network_metrics,
    order_sizes,
)
from lobnet.tradenet.profiles import DEGREE_TYPES, DayDegreeFits, degree_samples, fit_degree_samples
from lobnet.tradestats import aggregate_trade_sizes, correlation_report, daily_market_stats, transaction_ratios
from lobnet.tradestats.market import mean_ratio, pooled_sample
from lobnet.tradestats.ratios import trade_size_sample

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

ORDERFLOW_DIR = "orderflow"
LEDGER_DIR = "ledgers"

DAILY_SERIES_COLUMNS = ("date", "N", "N_ask", "N_bid", "N_e", "r", "r_ask", "r_bid", "close", "volatility", "volume")
FIT_BATCH_COLUMNS = ("date", "xmin", "gamma", "sr_class", "passes")
FIT_SAMPLES = ("trade_size",) + DEGREE_TYPES


@dataclass
class DayData:
    """One day's ledger, its order flow when available, and its network."""
    date: date
    trades: list[Trade]
    flow: Optional[DayStream] = None
    network: TradingNetwork = field(init=False)

    def __post_init__(self) -> None:
        self.network = build_network(self.trades, self.date)


# ==================== SYNTH ====================

def synth_stage(ctx: RunContext) -> list[Path]:
    gen, days = ctx.manifest.gen, ctx.manifest.days
    with tracer.start_as_current_span("stage.synth") as span:
        span.set_attribute("days", days)
        paths = [
            write_day_files(day, ctx.path(ORDERFLOW_DIR), digest=ctx.digest)
            for day in generate_days(gen, days, ctx.manifest.seed)
        ]
    logger.info(f"Generated {len(paths)} order-flow days under {ctx.path(ORDERFLOW_DIR)}")
    return paths


# ==================== REPLAY ====================

def order_flow_inputs(ctx: RunContext, paths: Sequence[Path] = ()) -> list[Path]:
    """Explicit paths, else the manifest's inputs, else the run's own synthetic days."""
    chosen = list(paths) or list(ctx.manifest.inputs)
    if not chosen and ctx.path(ORDERFLOW_DIR).is_dir():
        chosen = [ctx.path(ORDERFLOW_DIR)]
    return expand_inputs(chosen)


def load_valid_days(ctx: RunContext, paths: Sequence[Path], write_reports: bool = False) -> list[DayStream]:
    """Parse and validate order-flow files; optionally write the rejects and summary reports."""
    parsed = load_day_files(list(paths))
    days, summaries, invalid_rows = [], [], []
    for day in parsed.days:
        cleaned, invalid, summary = validate_day(day)
        days.append(cleaned)
        summaries.append(summary)
        invalid_rows.extend((day.date, e.order_id, verdict.reason) for e, verdict in invalid)

    if write_reports:
        ctx.write_csv(
            "rejects.csv",
            ("line", "reason", "raw"),
            ((r.line, r.reason, r.raw) for r in parsed.rejects),
        )
        ctx.write_csv("invalid_orders.csv", ("date", "order_id", "reason"), invalid_rows)
        ctx.write_csv(
            "orderflow_summary.csv",
            ("date", "bid_orders", "ask_orders", "cancels", "invalid", "traders"),
            ((s.date, s.bid_orders, s.ask_orders, s.cancels, s.invalid, s.traders) for s in summaries),
        )
    for failure in parsed.failed_days:
        logger.warning(f"Skipping day: {failure}")
    return days


def _replay_job(args: tuple[DayStream, CancelMode, tuple[int, ...], bool]) -> tuple[ReplayResult, Optional[dict]]:
    day, cancel_mode, snapshot_times, check = args
    result = MatchingEngine(cancel_mode=cancel_mode, snapshot_times=snapshot_times).run_day(day)
    if not check:
        return result, None
    expected = ReferenceMatcher(cancel_mode).run_day(day)
    mismatch = next(
        (i for i, (a, b) in enumerate(zip(result.trades, expected)) if a != b),
        None if len(result.trades) == len(expected) else min(len(result.trades), len(expected)),
    )
    return result, {
        "date": day.date,
        "engine_trades": len(result.trades),
        "reference_trades": len(expected),
        "match": mismatch is None,
        "first_mismatch": mismatch,
    }


def replay_stage(
    ctx: RunContext,
    paths: Sequence[Path] = (),
    check: bool = False,
    snapshot_times: Iterable[int] = (),
    cancel_mode: CancelMode = CancelMode.TARGET,
) -> list[ReplayResult]:
    inputs = order_flow_inputs(ctx, paths)
    if not inputs:
        raise ConfigError("no order-flow inputs: pass day files or set `inputs` in the manifest")

    with tracer.start_as_current_span("stage.replay") as span:
        days = load_valid_days(ctx, inputs, write_reports=True)
        span.set_attribute("days", len(days))
        jobs = [(day, cancel_mode, tuple(snapshot_times), check) for day in days]
        outcomes = fan_out(_replay_job, jobs, ctx.jobs)
        span.add_event("replayed", attributes={"days": len(outcomes)})

    results = [result for result, _ in outcomes]
    for result in results:
        write_ledger(ctx.path(LEDGER_DIR, ledger_file_name(result.date)), result.trades, ctx.digest)
        if result.snapshots:
            write_snapshots(ctx.path("snapshots", f"{result.date:%Y%m%d}_book.csv"), result.snapshots, ctx.digest)

    ctx.write_csv(
        "ratios.csv",
        ("date", "r", "r_ask", "r_bid", "placed_ask", "placed_bid", "executed_ask", "executed_bid",
         "trades", "volume", "canceled_orders", "expired_orders", "noop_cancels", "unknown_cancels"),
        (
            (res.date, res.ratios.r, res.ratios.r_ask, res.ratios.r_bid, res.ratios.placed_ask,
             res.ratios.placed_bid, res.ratios.executed_ask, res.ratios.executed_bid, len(res.trades),
             res.volume, res.canceled_orders, res.expired_orders, res.noop_cancels, res.unknown_cancels)
            for res in results
        ),
    )

    if ctx.manifest.reference is not None:
        reference = read_reference_series(ctx.manifest.reference)
        rows = [compare_with_reference(res.date, res.trades, reference) for res in results]
        ctx.write_csv(
            "discrepancies.csv",
            ("date", "close", "reference_close", "price_diff", "volume", "reference_volume", "volume_diff"),
            ((d.date, d.close, d.reference_close, d.price_diff, d.volume, d.reference_volume, d.volume_diff)
             for d in rows if d is not None),
        )

    if check:
        report = [entry for _, entry in outcomes]
        ctx.write_json("check_report.json", {
            "days": len(report),
            "mismatched_days": sum(not entry["match"] for entry in report),
            "per_day": report,
        })
        mismatched = [str(e["date"]) for e in report if not e["match"]]
        if mismatched:
            logger.error(f"Engine and reference matcher disagree on {mismatched}")
    return results


# ==================== ANALYZE INPUTS ====================

def load_day_data(
    ctx: RunContext,
    ledger_dir: Optional[Path] = None,
    order_paths: Sequence[Path] = (),
) -> list[DayData]:
    """Ledgers from the ledger directory, paired with validated order flow where it exists."""
    ledger_dir = Path(ledger_dir or ctx.manifest.ledgers or ctx.path(LEDGER_DIR))
    ledger_files = sorted(ledger_dir.glob("*_trades.csv")) if ledger_dir.is_dir() else []
    if not ledger_files:
        raise ConfigError(f"no trade ledgers found in {ledger_dir}; run `lobnet replay` first")

    inputs = order_flow_inputs(ctx, order_paths)
    flows = {day.date: day for day in load_valid_days(ctx, inputs)} if inputs else {}
    data = [
        DayData(date=ledger_date(path), trades=read_ledger(path), flow=flows.get(ledger_date(path)))
        for path in ledger_files
    ]
    logger.info(f"Loaded {len(data)} ledgers ({len(flows)} with order flow)")
    return data


def size_basis(days: Sequence[DayData]) -> str:
    basis = settings.order_size_basis
    if basis == "submitted" and any(d.flow is None for d in days):
        logger.warning("Order flow missing for some days; order sizes fall back to executed shares")
        return "executed"
    return basis


# ==================== NETWORK ====================

def network_stage(ctx: RunContext, days: Sequence[DayData]) -> list[NetworkSizeMetrics]:
    basis = size_basis(days)
    metrics = []
    with tracer.start_as_current_span("stage.network"):
        for d in days:
            ctx.write_csv(
                f"networks/{d.date:%Y%m%d}_edges.csv",
                ("seller", "buyer", "weight"),
                d.network.edges(include_self_loops=True),
            )
            metrics.append(network_metrics(d.network, order_sizes(d.flow, d.trades, basis)))

    columns = tuple(NetworkSizeMetrics.model_fields)
    ctx.write_csv("network_metrics.csv", columns, ([getattr(m, c) for c in columns] for m in metrics))
    return metrics


# ==================== STATS ====================

def stats_stage(ctx: RunContext, days: Sequence[DayData]) -> list[dict]:
    """Daily series plus the correlation report."""
    rows = []
    with tracer.start_as_current_span("stage.stats"):
        for d in days:
            market = daily_market_stats(d.date, d.trades)
            ratios = transaction_ratios(d.flow, d.trades) if d.flow is not None else None
            metrics = network_metrics(d.network)
            rows.append({
                "date": d.date,
                "N": metrics.N,
                "N_ask": metrics.N_ask,
                "N_bid": metrics.N_bid,
                "N_e": metrics.N_e,
                "r": ratios.r if ratios else None,
                "r_ask": ratios.r_ask if ratios else None,
                "r_bid": ratios.r_bid if ratios else None,
                "close": market.close,
                "volatility": market.volatility,
                "volume": market.total_volume,
                "r_LC": metrics.r_LC,
                "r_2LC": metrics.r_2LC,
            })

    ctx.write_csv(
        "daily_series.csv",
        DAILY_SERIES_COLUMNS,
        (
            [format_price(row[c]) if c == "close" and row[c] is not None else row[c] for c in DAILY_SERIES_COLUMNS]
            for row in rows
        ),
    )
    ctx.write_json("correlations.json", {
        "days": len(rows),
        "mean_r": mean_ratio(row["r"] for row in rows),
        "mean_r_ask": mean_ratio(row["r_ask"] for row in rows),
        "mean_r_bid": mean_ratio(row["r_bid"] for row in rows),
        "pairs": correlation_report(rows),
    })
    return rows


# ==================== FIT ====================

def _fit_or_reason(sample: Sequence[int], config: FitConfig) -> tuple[Optional[PowerLawFit], Optional[str]]:
    try:
        return fit_powerlaw(sample, config), None
    except FitError as e:
        return None, e.reason


def _fit_day_job(args: tuple[date, list[int], dict[str, list[int]], FitConfig, FitConfig]) -> dict:
    day, sizes, degree_sample, size_config, degree_config = args
    fit, reason = _fit_or_reason(sizes, size_config)
    degree_fits = fit_degree_samples(degree_sample, degree_config, day)
    return {
        "trade_size": (fit, reason),
        **{t: (degree_fits.fits[t], degree_fits.errors.get(t)) for t in DEGREE_TYPES},
    }


def _write_ccdf(ctx: RunContext, relative: str, sample: Sequence[float]) -> None:
    x, p = ccdf(sample)
    ctx.write_csv(relative, ("x", "ccdf"), zip(x.tolist(), p.tolist()))


def fit_stage(ctx: RunContext, days: Sequence[DayData]) -> dict[str, dict]:
    """Per-day trade-size and degree fits, the pooled trade-size fits and their plot data."""
    with tracer.start_as_current_span("stage.fit") as span:
        jobs = [
            (
                d.date,
                trade_size_sample(d.trades),
                degree_samples(d.network),
                ctx.fit_config(STREAM_BOOTSTRAP, d.date, 0),
                ctx.fit_config(STREAM_BOOTSTRAP, d.date, 1),
            )
            for d in days
        ]
        per_day = fan_out(_fit_day_job, jobs, ctx.jobs)
        span.add_event("daily_fits_done", attributes={"days": len(per_day)})

        pooled_sizes = pooled_sample(trade_size_sample(d.trades) for d in days)
        pooled_aggregate = pooled_sample(aggregate_trade_sizes(d.trades) for d in days)
        pooled, pooled_reason = _fit_or_reason(pooled_sizes, ctx.fit_config(STREAM_BOOTSTRAP, None, 0, jobs=ctx.jobs))
        aggregate, aggregate_reason = _fit_or_reason(
            pooled_aggregate, ctx.fit_config(STREAM_BOOTSTRAP, None, 1, jobs=ctx.jobs)
        )

    summaries = {}
    for kind in FIT_SAMPLES:
        results = [fits[kind] for fits in per_day]
        ctx.write_csv(
            f"fits/{kind}_batch.csv",
            FIT_BATCH_COLUMNS,
            (
                (d.date, fit.xmin, fit.gamma, fit.sr_class, fit.passes) if fit else (d.date, None, None, None, None)
                for d, (fit, _) in zip(days, results)
            ),
        )
        ctx.write_json(f"fits/{kind}_reports.json", [
            {"date": d.date, **(fit.report() if fit else {"error": reason})}
            for d, (fit, reason) in zip(days, results)
        ])
        summaries[kind] = summarize_fits([fit for fit, _ in results])

    ctx.write_json("fits/summary.json", summaries)
    ctx.write_json("fits/trade_size_pooled.json", pooled.report() if pooled else {"error": pooled_reason})
    ctx.write_json("fits/aggregate_size_pooled.json", aggregate.report() if aggregate else {"error": aggregate_reason})

    _write_ccdf(ctx, "ccdf/trade_size_pooled.csv", pooled_sizes)
    _write_ccdf(ctx, "ccdf/aggregate_size_pooled.csv", pooled_aggregate)
    for d, job in zip(days, jobs):
        _write_ccdf(ctx, f"ccdf/{d.date:%Y%m%d}_trade_size.csv", job[1])
        for degree_type, sample in job[2].items():
            _write_ccdf(ctx, f"ccdf/{d.date:%Y%m%d}_degree_{degree_type}.csv", sample)
    return summaries


# ==================== PROFILES ====================

def profiles_stage(ctx: RunContext, days: Sequence[DayData]) -> dict:
    networks = [d.network for d in days]
    basis = size_basis(days)
    with tracer.start_as_current_span("stage.profiles"):
        for direction in Direction:
            profile = knn_profile(networks, direction)
            ctx.write_csv(
                f"profiles/knn_{direction.value}.csv",
                ("mean_k", "mean_knn", "count"),
                ((b.mean_k, b.mean_knn, b.count) for b in profile),
            )

        records = [r for d in days for r in degrees(d.network, order_sizes(d.flow, d.trades, basis))]
        fits = {}
        for side in ("ask", "bid"):
            profile = degree_size_correlation(records, side)
            ctx.write_csv(
                f"profiles/size_degree_{side}.csv",
                ("mean_s", "std_s", "mean_k", "std_k", "count"),
                ((b.mean_s, b.std_s, b.mean_k, b.std_k, b.count) for b in profile.bins),
            )
            fits[side] = {
                "beta": profile.beta,
                "beta_stderr": profile.beta_stderr,
                "fit_points": profile.fit_points,
                "fit_threshold": profile.fit_threshold,
            }
    result = {"order_size_basis": basis, "fits": fits}
    ctx.write_json("profiles/size_degree_fit.json", result)
    return result


# ==================== FITNESS ====================

def fitness_stage(ctx: RunContext, days: Sequence[DayData], pool_mode: Optional[str] = None) -> list:
    """One fitness-model ensemble per day, compared with the day's real degree fits."""
    pool_mode = pool_mode or settings.fitness_pool_mode
    if pool_mode not in ("executed", "submitted"):
        raise ConfigError(f"unknown pool mode {pool_mode!r}")
    if pool_mode == "submitted" and any(d.flow is None for d in days):
        raise ConfigError("submitted pools need order flow for every day")

    reports = []
    with tracer.start_as_current_span("stage.fitness") as span:
        span.set_attribute("replicas", ctx.manifest.replicas)
        for d in days:
            sellers, buyers = build_pools(d.flow, d.trades, pool_mode)
            if not sellers or not buyers:
                logger.warning(f"{d.date}: no trades to seed the fitness pools; skipped")
                continue
            real: DayDegreeFits = fit_degree_samples(
                degree_samples(d.network), ctx.fit_config(STREAM_BOOTSTRAP, d.date, 1), d.date
            )
            report = run_ensemble(
                sellers,
                buyers,
                ctx.manifest.replicas,
                config=ctx.fit_config(STREAM_FITNESS, d.date),
                rng_seed=ctx.day_seed(STREAM_FITNESS, d.date),
                day=d.date,
                real=real,
                jobs=ctx.jobs,
                pool_mode=pool_mode,
            )
            ctx.write_json(f"fitness/{d.date:%Y%m%d}_ensemble.json", report)
            reports.append(report)

    ctx.write_csv(
        "fitness/p_model.csv",
        ("date", "p_model_ask", "p_model_bid", "p_model_total"),
        ((r.date, r.ask.p_model, r.bid.p_model, r.total.p_model) for r in reports),
    )
    bias = {}
    for degree_type in DEGREE_TYPES:
        comparison = compare_exponents(reports, degree_type)
        ctx.write_csv(
            f"fitness/gamma_{degree_type}.csv",
            ("gamma_real", "gamma_model_mean", "gamma_model_std"),
            ((real, mean, std) for _, real, mean, std in comparison.rows),
        )
        bias[degree_type] = comparison.as_dict()
    ctx.write_json("fitness/bias.json", bias)
    return reports


# ==================== REPORT ====================

def _inventory_entry(directory: Path, path: Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    entry: dict = {"path": path.relative_to(directory).as_posix()}
    if path.suffix == ".json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError:
            document = None
        entry["header"] = document.get("_header") if isinstance(document, dict) else None
        return entry

    lines = [line for line in text.splitlines() if line.strip()]
    entry["header"] = next((line for line in lines[:2] if line.startswith(HEADER_PREFIX)), None)
    if path.suffix == ".csv":
        body = [line for line in lines if not line.startswith("#")]
        # order-flow files have no column row
        is_orderflow = bool(lines) and lines[0].startswith("#lobnet-orderflow")
        entry["rows"] = len(body) if is_orderflow else max(len(body) - 1, 0)
    return entry


def summarize_artifacts(directory: Path) -> dict:
    """File inventory (header and row count per artifact) plus the headline results."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not an artifact directory")

    files = [
        _inventory_entry(directory, path)
        for path in sorted(p for p in directory.rglob("*") if p.is_file())
    ]
    highlights = {}
    for name in ("fits/summary.json", "fits/trade_size_pooled.json", "profiles/size_degree_fit.json",
                 "fitness/bias.json", "check_report.json"):
        if (directory / name).exists():
            highlights[name] = read_json(directory / name)
    return {"directory": str(directory), "files": files, "highlights": highlights}
