"""Command-line driver: stage subcommands plus a config-driven full run.

Every subcommand reads and writes plain CSV/JSON artifacts so any stage
can be re-run from the persisted output of the previous one.  `run`
chains the stages and records a manifest with the config hash, the
master seed, the derived per-stage seeds and a SHA-256 per artifact; no
timestamps go into any output, so identical config + seed reproduces
every file bit for bit.

Seed discipline: the master seed never feeds a generator directly.  Each
stage with randomness gets `SeedSequence([master, ordinal]).generate_state(1)`
where the ordinal is the stage's fixed position in STAGE_ORDER; the
derived seeds are listed in the manifest.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from . import __version__
from .backtest import CostParams, apply_regime_filter, momentum_signal, run_backtest
from .cluster import agnes, cut, label_regimes_cluster, validate_clustering
from .fracdiff import estimate_d, frac_difference
from .market_data import (
    CsvColumns,
    MarketDataError,
    ReturnPanel,
    align_panel,
    load_prices,
    month_label,
    panel_from_csv,
    panel_to_csv,
)
from .pca import fit_pca, standardize
from .pipeline import transition_candidates
from .realized_cov import (
    RealizedCovSeries,
    cov_panel,
    metric_panel,
    realized_covariance,
    unvech,
    vech_names,
)
from .regimes import RegimeSeries
from .synthetic import SyntheticParams, generate, score
from .tvar import fit_tvar, label_regimes_tvar
from .vlstar import fit_vlstar, label_regimes, linearity_test, select_transition

STAGE_ORDER = {
    "ingest": 0,
    "fracdiff": 1,
    "rcov": 2,
    "pca": 3,
    "detect-vlstar": 4,
    "detect-agnes": 5,
    "detect-tvar": 6,
    "simulate": 7,
    "evaluate": 8,
    "backtest": 9,
}


class CliError(Exception):
    pass


def stage_seed(master: int, stage: str) -> int:
    """Deterministic per-stage seed derived from the master seed."""
    if stage not in STAGE_ORDER:
        raise CliError(f"unknown stage {stage!r}")
    ss = np.random.SeedSequence([int(master), STAGE_ORDER[stage]])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _require_seed(args) -> int:
    if args.seed is None:
        raise CliError("this stage is stochastic: provide --seed or config [run] seed")
    return int(args.seed)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_frame(path: Path, frame: pd.DataFrame) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def _read_config(path: str | None) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise CliError(f"config file not found: {p}")
        cfg.read(p)
    return cfg


def _cfg(cfg: configparser.ConfigParser, section: str, key: str, fallback=None):
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    return fallback


def _out_dir(args, cfg) -> Path:
    out = args.out or _cfg(cfg, "run", "out") or "artifacts"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_scores(path: str | Path) -> tuple[np.ndarray, tuple[str, ...], list[str]]:
    frame = pd.read_csv(Path(path), float_precision="round_trip")
    if "month" not in frame.columns:
        raise CliError(f"{Path(path).name}: missing column 'month'")
    months = tuple(frame["month"].astype(str))
    cols = [c for c in frame.columns if c != "month"]
    if not cols:
        raise CliError(f"{Path(path).name}: no score columns")
    return frame[cols].to_numpy(dtype=float), months, cols


def _read_vech(path: str | Path) -> RealizedCovSeries:
    frame = pd.read_csv(Path(path), float_precision="round_trip")
    if "month" not in frame.columns:
        raise CliError(f"{Path(path).name}: missing column 'month'")
    months = tuple(frame["month"].astype(str))
    cols = [c for c in frame.columns if c != "month"]
    parts: list[str] = []
    for c in cols:
        for side in c.split("~"):
            if side not in parts:
                parts.append(side)
    mats = np.stack([unvech(row) for row in frame[cols].to_numpy(dtype=float)])
    return RealizedCovSeries(months=months, matrices=mats, instruments=tuple(parts))


# ---------------------------------------------------------------- stages


def cmd_ingest(args, cfg) -> list[Path]:
    files = args.files or []
    if not files:
        raw = _cfg(cfg, "ingest", "files", "")
        files = [f.strip() for f in raw.split(",") if f.strip()]
    if len(files) < 2:
        raise CliError("ingest needs at least two price files (--files)")
    columns = CsvColumns(timestamp=args.timestamp_column, price=args.price_column)
    series = [load_prices(f, columns=columns) for f in files]
    panel = align_panel(series)
    out = _out_dir(args, cfg)
    panel_to_csv(panel, out / "panel.csv")
    return [out / "panel.csv"]


def cmd_fracdiff(args, cfg) -> list[Path]:
    panel = panel_from_csv(args.panel)
    out = _out_dir(args, cfg)
    bandwidth = args.bandwidth
    truncation = args.truncation
    report = {}
    diffed = np.empty_like(panel.returns)
    for j, name in enumerate(panel.instruments):
        x = panel.returns[:, j]
        trunc = min(truncation, len(x))
        spec = estimate_d(x, bandwidth=bandwidth, truncation=trunc, instrument_id=name)
        diffed[:, j] = frac_difference(x, spec.d, truncation=trunc)
        report[name] = {"d": spec.d, "bandwidth": spec.bandwidth, "truncation": trunc}
    new_panel = ReturnPanel(
        timestamps=panel.timestamps,
        instruments=panel.instruments,
        returns=diffed,
        month_index=panel.month_index,
    )
    panel_to_csv(new_panel, out / "panel_fracdiff.csv")
    _write_json(out / "fracdiff.json", report)
    return [out / "panel_fracdiff.csv", out / "fracdiff.json"]


def cmd_rcov(args, cfg) -> list[Path]:
    panel = panel_from_csv(args.panel)
    rcov = realized_covariance(panel)
    out = _out_dir(args, cfg)
    written = []
    names = vech_names(rcov.instruments)
    frame = pd.DataFrame(cov_panel(rcov), columns=names)
    frame.insert(0, "month", rcov.months)
    written.append(_write_frame(out / "rcov_vech.csv", frame))
    if args.metric_out:
        mnames = vech_names(rcov.instruments, strict=True)
        mframe = pd.DataFrame(metric_panel(rcov), columns=mnames)
        mframe.insert(0, "month", rcov.months)
        written.append(_write_frame(out / args.metric_out, mframe))
    if args.matrices_out:
        dump = {
            month: mat.tolist() for month, mat in zip(rcov.months, rcov.matrices)
        }
        written.append(_write_json(out / args.matrices_out, dump))
    return written


def cmd_pca(args, cfg) -> list[Path]:
    frame = pd.read_csv(Path(args.vech), float_precision="round_trip")
    if "month" not in frame.columns:
        raise CliError(f"{Path(args.vech).name}: missing column 'month'")
    months = frame["month"].astype(str)
    cols = [c for c in frame.columns if c != "month"]
    panel = frame[cols].to_numpy(dtype=float)
    if args.standardize:
        panel, _, _ = standardize(panel, names=cols)
    model = fit_pca(panel, k=args.k)
    out = _out_dir(args, cfg)
    sframe = pd.DataFrame(
        model.scores, columns=[f"pc{j + 1}" for j in range(model.k)]
    )
    sframe.insert(0, "month", months)
    prefix = args.prefix
    scores_path = _write_frame(out / f"{prefix}scores.csv", sframe)
    report = {
        "k": model.k,
        "standardized": bool(args.standardize),
        "features": cols,
        "loadings": model.loadings.tolist(),
        "explained_variance_ratio": model.explained_variance_ratio.tolist(),
        "cumulative_variance": model.cumulative_variance(),
    }
    json_path = _write_json(out / f"{prefix}pca.json", report)
    return [scores_path, json_path]


def cmd_detect_vlstar(args, cfg) -> list[Path]:
    scores, months, _ = _read_scores(args.scores)
    cands = transition_candidates(scores)
    fit = fit_vlstar(
        scores,
        cands,
        p=args.p,
        months=months,
        gamma_bounds=(args.gamma_min, args.gamma_max),
        n_gamma=args.n_gamma,
    )
    regimes = label_regimes(fit)
    out = _out_dir(args, cfg)
    regimes.to_csv(out / "regimes_vlstar.csv")
    report = {
        "transition": fit.transition_id,
        "p": fit.p,
        "linearity": {
            r.candidate_id: {"statistic": r.statistic, "p_value": r.p_value}
            for r in fit.linearity
        },
        "no_rejection": fit.no_rejection,
        "gamma_standardized": fit.params.gamma,
        "c_standardized": fit.params.c,
        "gamma": fit.params_original.gamma,
        "c": fit.params_original.c,
        "ssr": fit.ssr,
        "ssr_linear": fit.ssr_linear,
        "refine_converged": fit.refine_converged,
        "g_values": fit.g_values.tolist(),
    }
    _write_json(out / "vlstar.json", report)
    return [out / "regimes_vlstar.csv", out / "vlstar.json"]


def cmd_detect_agnes(args, cfg) -> list[Path]:
    scores, months, _ = _read_scores(args.scores)
    rcov = _read_vech(args.rcov)
    if rcov.months != months:
        raise CliError("scores and covariance months disagree")
    dend = agnes(scores, metric=args.metric)
    labels = cut(dend, args.n_clusters)
    regimes = label_regimes_cluster(labels, rcov)
    seed = stage_seed(_require_seed(args), "detect-agnes")
    validation = validate_clustering(scores, labels, seed=seed)
    out = _out_dir(args, cfg)
    regimes.to_csv(out / "regimes_agnes.csv")
    _write_json(
        out / "dendrogram.json",
        {
            "leaf_count": dend.leaf_count,
            "merges": [
                {"a": m.node_a, "b": m.node_b, "height": m.height, "id": m.new_id}
                for m in dend.merges
            ],
        },
    )
    _write_json(
        out / "cluster_validation.json",
        {
            "hopkins": validation.hopkins,
            "mean_silhouette": float(np.mean(validation.silhouettes)),
            "negative_silhouette_share": validation.negative_silhouette_share,
            "dunn": validation.dunn,
        },
    )
    order = dend.leaf_order()
    dist = squareform(pdist(scores, metric="cityblock"))
    ordered = dist[np.ix_(order, order)]
    oframe = pd.DataFrame(ordered, columns=[months[i] for i in order])
    oframe.insert(0, "month", [months[i] for i in order])
    _write_frame(out / "ordered_dissimilarity.csv", oframe)
    return [
        out / "regimes_agnes.csv",
        out / "dendrogram.json",
        out / "cluster_validation.json",
        out / "ordered_dissimilarity.csv",
    ]


def cmd_detect_tvar(args, cfg) -> list[Path]:
    scores, months, _ = _read_scores(args.scores)
    rcov = _read_vech(args.rcov)
    if rcov.months != months:
        raise CliError("scores and covariance months disagree")
    cands = transition_candidates(scores)
    best = select_transition(linearity_test(scores, cands, p=args.p))
    series = cands[best.candidate_id].copy()
    if not np.isfinite(series[0]):
        series[0] = series[1]
    fit = fit_tvar(scores, series, threshold_id=best.candidate_id, months=months)
    regimes = label_regimes_tvar(fit, rcov)
    out = _out_dir(args, cfg)
    regimes.to_csv(out / "regimes_tvar.csv")
    report = {
        "threshold_variable": fit.threshold_id,
        "threshold": fit.threshold,
        "mu_low": fit.mu_low.tolist(),
        "phi_low": fit.phi_low.tolist(),
        "mu_high": fit.mu_high.tolist(),
        "phi_high": fit.phi_high.tolist(),
        "ssr": fit.ssr,
        "n_candidates": fit.n_candidates,
        "n_skipped": fit.n_skipped,
    }
    _write_json(out / "tvar.json", report)
    return [out / "regimes_tvar.csv", out / "tvar.json"]


def cmd_simulate(args, cfg) -> list[Path]:
    seed = stage_seed(_require_seed(args), "simulate")
    params = SyntheticParams(
        alpha=args.alpha,
        noise_sd=args.noise_sd,
        threshold=args.threshold,
        shock_multiplier=args.shock_multiplier,
    )
    dataset = generate(args.periods, args.assets, params=params, seed=seed)
    out = _out_dir(args, cfg)
    rframe = pd.DataFrame(
        dataset.returns, columns=[f"a{j}" for j in range(args.assets)]
    )
    rframe.insert(0, "row", np.arange(args.periods))
    _write_frame(out / "returns.csv", rframe)
    tframe = pd.DataFrame(
        {
            "row": np.arange(args.periods),
            "highvol": dataset.true_regime.astype(int),
            "b_bar": dataset.b_bar,
        }
    )
    _write_frame(out / "truth.csv", tframe)
    return [out / "returns.csv", out / "truth.csv"]


def cmd_evaluate(args, cfg) -> list[Path]:
    truth_frame = pd.read_csv(Path(args.truth), float_precision="round_trip")
    if "highvol" not in truth_frame.columns:
        raise CliError(f"{Path(args.truth).name}: missing column 'highvol'")
    truth = truth_frame["highvol"].to_numpy(dtype=bool)
    out = _out_dir(args, cfg)
    month_length = args.month_length
    league = []
    written = []
    for item in args.pred:
        if "=" not in item:
            raise CliError(f"--pred wants name=path, got {item!r}")
        name, path = item.split("=", 1)
        regimes = RegimeSeries.from_csv(path, detector=name)
        pred_rows = np.repeat(regimes.highvol, month_length)
        usable = len(pred_rows)
        if usable > len(truth):
            raise CliError(
                f"{name}: prediction covers {usable} rows, truth only {len(truth)}"
            )
        cm = score(pred_rows, truth[:usable])
        entry = {
            "detector": name,
            "accuracy": cm.accuracy,
            "highvol_as_calm": cm.highvol_as_calm,
            "cells": cm.cells.tolist(),
        }
        league.append(entry)
        written.append(_write_json(out / f"confusion_{name}.json", entry))
    league.sort(key=lambda e: (-e["accuracy"], e["detector"]))
    written.append(
        _write_json(
            out / "league.json",
            [
                {k: e[k] for k in ("detector", "accuracy", "highvol_as_calm")}
                for e in league
            ],
        )
    )
    print(f"{'detector':<12s} {'accuracy':>9s} {'highvol_as_calm':>16s}")
    for e in league:
        print(f"{e['detector']:<12s} {e['accuracy']:>9.4f} {e['highvol_as_calm']:>16.4f}")
    return written


def _chunk_day_months(n_days: int, length: int) -> list[str]:
    return [f"m{i // length:04d}" for i in range(n_days)]


def cmd_backtest(args, cfg) -> list[Path]:
    columns = CsvColumns(timestamp=args.timestamp_column, price=args.price_column)
    series = load_prices(args.prices, columns=columns)
    prices = series.prices
    signal = momentum_signal(prices, short=args.short, long=args.long)
    if args.day_months.startswith("chunk:"):
        day_months = _chunk_day_months(len(prices), int(args.day_months.split(":")[1]))
    elif args.day_months == "calendar":
        day_months = [month_label(ts) for ts in series.timestamps]
    else:
        raise CliError("--day-months wants 'calendar' or 'chunk:<len>'")
    costs = CostParams(
        lambda0_bp=args.lambda0_bp,
        lambda1_inv_bp=args.lambda1_inv_bp,
        normalize_vol=not args.raw_vol,
    )
    unfiltered = run_backtest(prices, signal, costs)
    summary = {
        "unfiltered": {
            "sharpe_annualized": unfiltered.sharpe_annualized,
            "total_costs_bp": unfiltered.total_costs_bp,
            "n_trades": unfiltered.n_trades,
        }
    }
    out = _out_dir(args, cfg)
    eq = pd.DataFrame(
        {"day": np.arange(len(prices)), "equity": unfiltered.equity_curve}
    )
    trades = [
        {"day": int(day), "direction": direction, "strategy": "unfiltered"}
        for day, direction in unfiltered.trades
    ]
    written = []
    if args.regimes:
        regimes = RegimeSeries.from_csv(args.regimes)
        filtered_signal = apply_regime_filter(signal, regimes, day_months)
        filtered = run_backtest(prices, filtered_signal, costs)
        summary["filtered"] = {
            "sharpe_annualized": filtered.sharpe_annualized,
            "total_costs_bp": filtered.total_costs_bp,
            "n_trades": filtered.n_trades,
        }
        eq["equity_filtered"] = filtered.equity_curve
        trades.extend(
            {"day": int(day), "direction": direction, "strategy": "filtered"}
            for day, direction in filtered.trades
        )
    written.append(_write_frame(out / "equity.csv", eq))
    trades.sort(key=lambda t: (t["day"], t["strategy"]))
    tframe = pd.DataFrame(trades, columns=["day", "direction", "strategy"])
    written.append(_write_frame(out / "trades.csv", tframe))
    written.append(_write_json(out / "summary.json", summary))
    return written


# ------------------------------------------------------------------ run


def _namespace(**kw) -> argparse.Namespace:
    return argparse.Namespace(**kw)


def cmd_run(args, cfg) -> list[Path]:
    out = _out_dir(args, cfg)
    master = args.seed
    if master is None and _cfg(cfg, "run", "seed") is not None:
        master = int(_cfg(cfg, "run", "seed"))
    stages_raw = args.stages or _cfg(
        cfg, "run", "stages", "simulate,rcov,pca,detect,evaluate"
    )
    stages = [s.strip() for s in stages_raw.split(",") if s.strip()]
    known = {"ingest", "fracdiff", "simulate", "rcov", "pca", "detect", "evaluate", "backtest"}
    for s in stages:
        if s not in known:
            raise CliError(f"unknown stage {s!r} in run list")
    month_length = int(_cfg(cfg, "simulate", "month_length", "21"))
    k = int(_cfg(cfg, "pca", "k", "3"))
    artifacts: list[Path] = []
    panel_path = out / "panel.csv"

    def record(paths):
        artifacts.extend(paths)

    try:
        if "ingest" in stages:
            record(
                cmd_ingest(
                    _namespace(
                        files=None,
                        timestamp_column=_cfg(cfg, "ingest", "timestamp_column", "timestamp"),
                        price_column=_cfg(cfg, "ingest", "price_column", "price"),
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
        if "fracdiff" in stages:
            record(
                cmd_fracdiff(
                    _namespace(
                        panel=str(panel_path),
                        bandwidth=None,
                        truncation=int(_cfg(cfg, "fracdiff", "truncation", "1000")),
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
            panel_path = out / "panel_fracdiff.csv"
        if "simulate" in stages:
            sim_args = _namespace(
                periods=int(_cfg(cfg, "simulate", "periods", "2000")),
                assets=int(_cfg(cfg, "simulate", "assets", "5")),
                alpha=float(_cfg(cfg, "simulate", "alpha", "0.9")),
                noise_sd=float(_cfg(cfg, "simulate", "noise_sd", "0.1")),
                threshold=float(_cfg(cfg, "simulate", "threshold", "0.7")),
                shock_multiplier=float(_cfg(cfg, "simulate", "shock_multiplier", "3.0")),
                out=str(out),
                seed=master,
            )
            record(cmd_simulate(sim_args, cfg))
            returns = pd.read_csv(out / "returns.csv", float_precision="round_trip")
            asset_cols = [c for c in returns.columns if c != "row"]
            rets = returns[asset_cols].to_numpy(dtype=float)
            usable = (len(rets) // month_length) * month_length
            stamps = pd.date_range(
                "2000-01-01", periods=usable, freq="h", tz="UTC"
            )
            months = _chunk_day_months(usable, month_length)
            panel = ReturnPanel(
                timestamps=stamps,
                instruments=tuple(asset_cols),
                returns=rets[:usable],
                month_index=np.array(months),
            )
            panel_to_csv(panel, panel_path)
            artifacts.append(panel_path)
        if "rcov" in stages:
            record(
                cmd_rcov(
                    _namespace(
                        panel=str(panel_path),
                        metric_out="metric_vech.csv",
                        matrices_out=None,
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
        if "pca" in stages:
            record(
                cmd_pca(
                    _namespace(
                        vech=str(out / "rcov_vech.csv"),
                        k=k,
                        standardize=False,
                        prefix="",
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
            record(
                cmd_pca(
                    _namespace(
                        vech=str(out / "metric_vech.csv"),
                        k=k,
                        standardize=True,
                        prefix="metric_",
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
        if "detect" in stages:
            record(
                cmd_detect_vlstar(
                    _namespace(
                        scores=str(out / "scores.csv"),
                        p=int(_cfg(cfg, "vlstar", "p", "1")),
                        gamma_min=float(_cfg(cfg, "vlstar", "gamma_min", "0.1")),
                        gamma_max=float(_cfg(cfg, "vlstar", "gamma_max", "100")),
                        n_gamma=int(_cfg(cfg, "vlstar", "n_gamma", "30")),
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
            record(
                cmd_detect_agnes(
                    _namespace(
                        scores=str(out / "metric_scores.csv"),
                        rcov=str(out / "rcov_vech.csv"),
                        metric=_cfg(cfg, "agnes", "metric", "manhattan"),
                        n_clusters=int(_cfg(cfg, "agnes", "n_clusters", "2")),
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
            record(
                cmd_detect_tvar(
                    _namespace(
                        scores=str(out / "scores.csv"),
                        rcov=str(out / "rcov_vech.csv"),
                        p=int(_cfg(cfg, "vlstar", "p", "1")),
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
        if "evaluate" in stages:
            if "simulate" not in stages and not (out / "truth.csv").exists():
                raise CliError("evaluate needs truth.csv (run simulate first)")
            record(
                cmd_evaluate(
                    _namespace(
                        truth=str(out / "truth.csv"),
                        pred=[
                            f"vlstar={out / 'regimes_vlstar.csv'}",
                            f"cluster={out / 'regimes_agnes.csv'}",
                            f"tvar={out / 'regimes_tvar.csv'}",
                        ],
                        month_length=month_length,
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
        if "backtest" in stages:
            returns = pd.read_csv(out / "returns.csv", float_precision="round_trip")
            asset_cols = [c for c in returns.columns if c != "row"]
            rets = returns[asset_cols[0]].to_numpy(dtype=float)
            usable = (len(rets) // month_length) * month_length
            stamps = pd.date_range("2000-01-03", periods=usable, freq="D", tz="UTC")
            prices = 100.0 * np.exp(np.cumsum(rets[:usable]))
            pframe = pd.DataFrame(
                {
                    "timestamp": stamps.strftime("%Y-%m-%dT%H:%M:%SZ"),
                    "price": prices,
                }
            )
            _write_frame(out / "prices.csv", pframe)
            artifacts.append(out / "prices.csv")
            record(
                cmd_backtest(
                    _namespace(
                        prices=str(out / "prices.csv"),
                        regimes=str(out / "regimes_vlstar.csv"),
                        timestamp_column="timestamp",
                        price_column="price",
                        short=int(_cfg(cfg, "backtest", "short", "30")),
                        long=int(_cfg(cfg, "backtest", "long", "100")),
                        lambda0_bp=float(_cfg(cfg, "backtest", "lambda0_bp", "1.0")),
                        lambda1_inv_bp=float(_cfg(cfg, "backtest", "lambda1_inv_bp", "0.5")),
                        raw_vol=not cfg.getboolean("backtest", "normalize_vol", fallback=True),
                        day_months=f"chunk:{month_length}",
                        out=str(out),
                        seed=master,
                    ),
                    cfg,
                )
            )
    finally:
        manifest = {
            "package_version": __version__,
            "seed": master,
            "stage_seeds": {
                s: stage_seed(master, s) for s in STAGE_ORDER
            }
            if master is not None
            else {},
            "config_sha256": hashlib.sha256(
                Path(args.config).read_bytes() if args.config else b""
            ).hexdigest(),
            "stages": stages,
            "artifacts": {
                str(p.relative_to(out)): _sha256(p)
                for p in sorted(set(artifacts))
                if p.exists()
            },
        }
        _write_json(out / "manifest.json", manifest)
    return artifacts + [out / "manifest.json"]


# ----------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimekit",
        description="Volatility-regime detection from monthly realized covariances.",
    )
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--out", default=None, help="artifact directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="align price CSVs into a return panel")
    p.add_argument("--files", nargs="+", default=None)
    p.add_argument("--timestamp-column", default="timestamp")
    p.add_argument("--price-column", default="price")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("fracdiff", help="fractionally difference a panel")
    p.add_argument("--panel", required=True)
    p.add_argument("--bandwidth", type=int, default=None)
    p.add_argument("--truncation", type=int, default=1000)
    p.set_defaults(handler=cmd_fracdiff)

    p = sub.add_parser("rcov", help="monthly realized covariances from a panel")
    p.add_argument("--panel", required=True)
    p.add_argument("--metric-out", default=None, help="also write metric vech CSV")
    p.add_argument("--matrices-out", default=None, help="also dump matrices as JSON")
    p.set_defaults(handler=cmd_rcov)

    p = sub.add_parser("pca", help="component scores from a vech CSV")
    p.add_argument("--vech", required=True)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--prefix", default="", help="artifact filename prefix")
    p.set_defaults(handler=cmd_pca)

    p = sub.add_parser("detect-vlstar", help="smooth-transition regime detector")
    p.add_argument("--scores", required=True)
    p.add_argument("-p", type=int, default=1, help="lag order")
    p.add_argument("--gamma-min", type=float, default=0.1)
    p.add_argument("--gamma-max", type=float, default=100.0)
    p.add_argument("--n-gamma", type=int, default=30)
    p.set_defaults(handler=cmd_detect_vlstar)

    p = sub.add_parser("detect-agnes", help="hierarchical-clustering detector")
    p.add_argument("--scores", required=True)
    p.add_argument("--rcov", required=True, help="vech CSV for the trace labeling")
    p.add_argument("--metric", default="manhattan", choices=["manhattan", "euclidean"])
    p.add_argument("--n-clusters", type=int, default=2)
    p.set_defaults(handler=cmd_detect_agnes)

    p = sub.add_parser("detect-tvar", help="threshold-VAR baseline detector")
    p.add_argument("--scores", required=True)
    p.add_argument("--rcov", required=True, help="vech CSV for the trace labeling")
    p.add_argument("-p", type=int, default=1, help="lag order for selection")
    p.set_defaults(handler=cmd_detect_tvar)

    p = sub.add_parser("simulate", help="regime-switching synthetic returns")
    p.add_argument("--periods", type=int, default=2000)
    p.add_argument("--assets", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--shock-multiplier", type=float, default=3.0)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("evaluate", help="confusion matrices against the truth")
    p.add_argument("--truth", required=True)
    p.add_argument(
        "--pred",
        action="append",
        required=True,
        help="name=regimes.csv (repeatable)",
    )
    p.add_argument("--month-length", type=int, default=21)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("backtest", help="momentum strategy with regime filter")
    p.add_argument("--prices", required=True)
    p.add_argument("--regimes", default=None)
    p.add_argument("--timestamp-column", default="timestamp")
    p.add_argument("--price-column", default="price")
    p.add_argument("--short", type=int, default=30)
    p.add_argument("--long", type=int, default=100)
    p.add_argument("--lambda0-bp", type=float, default=1.0)
    p.add_argument("--lambda1-inv-bp", type=float, default=0.5)
    p.add_argument("--raw-vol", action="store_true", help="skip volatility normalization")
    p.add_argument(
        "--day-months",
        default="calendar",
        help="'calendar' or 'chunk:<len>' for synthetic data",
    )
    p.set_defaults(handler=cmd_backtest)

    p = sub.add_parser("run", help="chain stages per config")
    p.add_argument("--stages", default=None, help="comma list overriding config")
    p.set_defaults(handler=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _read_config(args.config)
        if args.seed is None and _cfg(cfg, "run", "seed") is not None:
            args.seed = int(_cfg(cfg, "run", "seed"))
        args.handler(args, cfg)
    except (CliError, MarketDataError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
