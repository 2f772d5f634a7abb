"""Command line for the transaction-trend pipeline.

Stages are independently invokable and pipe through on-disk artifacts in a
single output directory. Every artifact names the hash of the effective
config that produced it: CSVs carry a ``# config_hash=...`` first line, JSON
documents a ``config_hash`` key, SVGs a trailing XML comment. ``run`` chains
all stages and writes ``manifest.json`` with the config hash, the seeds and
a digest per artifact; a failed stage still writes the manifest, flagging
the output set as partial.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd

from . import evaluate as ev
from . import gbdt, graph, ingest, netprops, plots, slicing, ta
from .dataset import LABEL_THRESHOLD, WARMUP_ROWS, FeatureMatrix, assemble, split

# reference hyperparameters per model family (emitted by the params echo)
BM_PARAMS = {"n_estimators": 100, "max_depth": 3, "colsample_bytree": 0.5,
             "min_child_weight": 13.0, "learning_rate": 0.05, "gamma": 0.08,
             "subsample": 0.5}
FM_PARAMS = {"n_estimators": 100, "max_depth": 5, "colsample_bytree": 0.5,
             "min_child_weight": 13.0, "learning_rate": 0.01, "gamma": 0.05,
             "subsample": 0.5}

# BM sees technical + social columns only; FM adds the network family
MODEL_FAMILIES = {"BM": ("ta", "sm"), "FM": ("np", "ta", "sm")}

_INT_KEYS = ("min_days", "max_days", "warmup", "seed", "jobs", "grid_folds")
_GRID_INT_PARAMS = ("n_estimators", "max_depth")


@dataclass
class RunConfig:
    transactions: str | None = None
    candles: str | None = None
    social: str | None = None
    out: str = "out"
    interval: str = "daily"          # daily | dynamic
    min_days: int = 7
    max_days: int = 28
    threshold: float = LABEL_THRESHOLD
    warmup: int = WARMUP_ROWS
    train_end: date | None = None
    model: str = "both"              # BM | FM | both
    seed: int | None = None
    jobs: int = 1
    grid: dict = field(default_factory=dict)
    grid_folds: int = 4

    def validate(self) -> None:
        if self.interval not in ("daily", "dynamic"):
            raise ValueError(f"interval must be daily or dynamic, got {self.interval!r}")
        if self.model not in ("BM", "FM", "both"):
            raise ValueError(f"model must be BM, FM or both, got {self.model!r}")
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if not 1 <= self.min_days <= self.max_days:
            raise ValueError("need 1 <= min_days <= max_days")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")

    def as_dict(self) -> dict:
        return {
            "transactions": self.transactions,
            "candles": self.candles,
            "social": self.social,
            "out": self.out,
            "interval": self.interval,
            "min_days": self.min_days,
            "max_days": self.max_days,
            "threshold": self.threshold,
            "warmup": self.warmup,
            "train_end": self.train_end.isoformat() if self.train_end else None,
            "model": self.model,
            "seed": self.seed,
            "jobs": self.jobs,
            "grid": {k: list(v) for k, v in sorted(self.grid.items())},
            "grid_folds": self.grid_folds,
        }

    def hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def models(self) -> list[str]:
        return ["BM", "FM"] if self.model == "both" else [self.model]


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` comments and blanks ignored."""
    vals: dict[str, str] = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path} line {i}: expected key = value")
        key, _, val = line.partition("=")
        vals[key.strip().lower()] = val.strip()
    return vals


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file values with flags; flags win."""
    file_vals = read_config_file(args.config) if getattr(args, "config", None) else {}

    grid: dict[str, list] = {}
    for key in [k for k in file_vals if k.startswith("grid.")]:
        name = key[len("grid."):]
        cast = int if name in _GRID_INT_PARAMS else float
        parts = [p.strip() for p in file_vals.pop(key).split(",") if p.strip()]
        grid[name] = [cast(p) for p in parts]

    cfg = RunConfig(grid=grid)
    for name in ("transactions", "candles", "social", "out", "interval",
                 "min_days", "max_days", "threshold", "warmup", "train_end",
                 "model", "seed", "jobs", "grid_folds"):
        val = getattr(args, name, None)
        if val is None and name in file_vals:
            raw = file_vals[name]
            if name in _INT_KEYS:
                val = int(raw)
            elif name == "threshold":
                val = float(raw)
            elif name == "train_end":
                val = date.fromisoformat(raw)
            else:
                val = raw
        elif isinstance(val, str) and name == "train_end":
            val = date.fromisoformat(val)
        if val is not None:
            setattr(cfg, name, val)
    unknown = set(file_vals) - set(cfg.as_dict())
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- artifacts

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _stamp_svg(path: Path, cfg_hash: str) -> None:
    with open(path, "a") as fh:
        fh.write(f"<!-- config_hash={cfg_hash} -->\n")


def _write_frame(df: pd.DataFrame, path: Path, cfg_hash: str) -> None:
    """Date-indexed frame to CSV with the config-hash comment line."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        out = df.copy()
        out.index = pd.Index([d.isoformat() for d in out.index], name="date")
        out.to_csv(fh, lineterminator="\n")


def _read_frame(path) -> pd.DataFrame:
    df = pd.read_csv(path, comment="#", index_col="date",
                     float_precision="round_trip")
    df.index = pd.Index([date.fromisoformat(d) for d in df.index], name="date")
    return df


def _read_net_features(path) -> pd.DataFrame:
    df = pd.read_csv(path, comment="#", float_precision="round_trip")
    # the matrix is daily; per-slice rows cannot be joined on date
    if not (df["start_day"] == df["end_day"]).all():
        raise ValueError("network features are per-slice; rebuild "
                         "graph-metrics with interval = daily")
    df.index = pd.Index([date.fromisoformat(d) for d in df["start_day"]],
                        name="date")
    return df.drop(columns=["start_day", "end_day"])


def _close_series(bars) -> pd.Series:
    idx = pd.Index([b.date for b in bars], name="date")
    return pd.Series([b.close for b in bars], index=idx, dtype=np.float64)


# ------------------------------------------------------------------ stages
# Each stage returns the artifact paths it wrote. ``ctx`` caches in-memory
# values so `run` does not reload between stages; standalone subcommands
# start from an empty ctx and read prior artifacts from disk.

def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ValueError(f"missing required inputs: {', '.join(missing)}")


def _txs(cfg: RunConfig, ctx: dict) -> list:
    if "txs" not in ctx:
        _require(cfg, "transactions")
        stats = ingest.IngestStats()
        ctx["txs"] = list(ingest.load_transactions(cfg.transactions, stats=stats))
        ctx["tx_stats"] = stats
    return ctx["txs"]


def _bars(cfg: RunConfig, ctx: dict) -> list:
    if "bars" not in ctx:
        _require(cfg, "candles")
        bars, gaps = ingest.load_candles(cfg.candles)
        ctx["bars"], ctx["candle_gaps"] = bars, gaps
    return ctx["bars"]


def _social_rows(cfg: RunConfig, ctx: dict) -> list:
    if "social" not in ctx:
        _require(cfg, "social")
        ctx["social"] = ingest.load_social(cfg.social)
    return ctx["social"]


def _daily_snapshots(cfg: RunConfig, ctx: dict) -> list:
    if "snapshots" not in ctx:
        ctx["snapshots"] = graph.SnapshotBuilder().build_daily(_txs(cfg, ctx))
    return ctx["snapshots"]


def stage_ingest(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    txs = _txs(cfg, ctx)
    bars = _bars(cfg, ctx)
    rows = _social_rows(cfg, ctx)
    ctx["sm_frame"] = ingest.social_frame(rows)

    summary = {
        "config_hash": h,
        "transactions": ctx["tx_stats"].as_dict(),
        "candles": {"rows": len(bars),
                    "gap_days": [d.isoformat() for d in ctx["candle_gaps"]]},
        "social": {"rows": len(rows)},
    }
    summary_path = out / "ingest_summary.json"
    _write_json(summary_path, summary)
    social_path = out / "social_features.csv"
    _write_frame(ctx["sm_frame"], social_path, h)
    return [summary_path, social_path]


def stage_graph_metrics(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    snaps = _daily_snapshots(cfg, ctx)
    seed = cfg.seed if cfg.seed is not None else 0
    feats = netprops.compute_features(snaps, seed=seed, jobs=cfg.jobs)
    ctx["net_frame"] = netprops.features_frame(snaps, feats)

    rows_snaps, rows_feats = snaps, feats
    if cfg.interval == "dynamic":
        # per-slice rows for the emitted CSV; the daily frame above still
        # feeds the feature matrix
        days, events = slicing.daily_events(snaps)
        plan = slicing.slice_events(events, cfg.min_days, cfg.max_days)
        builder = graph.SnapshotBuilder()
        txs = _txs(cfg, ctx)
        rows_snaps = [builder.build_snapshot(txs, days[a], days[b - 1])
                      for a, b in plan.intervals]
        rows_feats = netprops.compute_features(rows_snaps, seed=seed, jobs=cfg.jobs)

    path = out / "network_features.csv"
    netprops.write_features_csv(path, rows_snaps, rows_feats,
                                header_comment=f"config_hash={h}")
    return [path]


def stage_slice(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    snaps = _daily_snapshots(cfg, ctx)
    days, events = slicing.daily_events(snaps)
    plan = slicing.slice_events(events, cfg.min_days, cfg.max_days)

    close_map = {b.date: b.close for b in _bars(cfg, ctx)}
    missing = [d for d in days if d not in close_map]
    if missing:
        raise ValueError(f"no close price for sliced day {missing[0].isoformat()}")
    closes = [close_map[d] for d in days]
    scores, mean_prices = slicing.similarity_price_series(plan, closes)

    csv_path = out / "intervals.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# config_hash={h}\n")
        w = csv.writer(fh)
        w.writerow(["start", "end", "score"])
        for k, (a, b) in enumerate(plan.intervals):
            # score column holds the similarity to the previous interval
            score = repr(plan.similarity_scores[k - 1]) if k > 0 and \
                k - 1 < len(plan.similarity_scores) else ""
            w.writerow([days[a].isoformat(), days[b - 1].isoformat(), score])

    svg_path = out / "similarity_price.svg"
    plots.similarity_price_figure(scores, mean_prices, svg_path)
    _stamp_svg(svg_path, h)

    summary = {"config_hash": h, "n_intervals": len(plan.intervals),
               "pearson_r": None, "pearson_p": None}
    if len(scores) >= 3:
        r, p = slicing.pearson(scores, mean_prices)
        summary["pearson_r"], summary["pearson_p"] = float(r), float(p)
    summary_path = out / "slice_summary.json"
    _write_json(summary_path, summary)
    return [csv_path, svg_path, summary_path]


def stage_ta(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    ctx["ta_frame"] = ta.compute_ta_features(_bars(cfg, ctx))
    path = out / "ta_features.csv"
    _write_frame(ctx["ta_frame"], path, h)
    return [path]


def stage_dataset(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    if "net_frame" not in ctx:
        ctx["net_frame"] = _read_net_features(
            getattr(cfg, "net_features_path", None)
            or out / "network_features.csv")
    if "ta_frame" not in ctx:
        ctx["ta_frame"] = _read_frame(getattr(cfg, "ta_features_path", None)
                                      or out / "ta_features.csv")
    if "sm_frame" not in ctx:
        ctx["sm_frame"] = _read_frame(getattr(cfg, "social_features_path", None)
                                      or out / "social_features.csv")

    closes = _close_series(_bars(cfg, ctx))
    matrix = assemble(ctx["net_frame"], ctx["ta_frame"], ctx["sm_frame"],
                      closes, threshold=cfg.threshold, warmup=cfg.warmup,
                      split_point=cfg.train_end)
    if matrix.split_point is None:
        # fall back to a 3:1 chronological split
        cut = matrix.frame.index[int(len(matrix.frame) * 0.75)]
        matrix = FeatureMatrix(matrix.frame, cut, matrix.warmup_dropped,
                               matrix.rows_dropped_no_next_day,
                               matrix.imputation, matrix.threshold,
                               matrix.label_on_return_change)
    ctx["matrix"] = matrix
    path = out / "matrix.csv"
    matrix.save(path, header_comment=f"config_hash={h}")
    sidecar = path.with_suffix(".json")
    doc = json.loads(sidecar.read_text())
    doc["config_hash"] = h
    _write_json(sidecar, doc)
    return [path, sidecar]


def _matrix(cfg: RunConfig, ctx: dict, out: Path) -> FeatureMatrix:
    if "matrix" not in ctx:
        path = getattr(cfg, "matrix_path", None) or out / "matrix.csv"
        ctx["matrix"] = FeatureMatrix.load(path)
    return ctx["matrix"]


def stage_train(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    if cfg.seed is None:
        raise ValueError("seed is required to train")
    matrix = _matrix(cfg, ctx, out)
    train_m, _ = split(matrix)

    written: list[Path] = []
    ctx.setdefault("models", {})
    configs: dict[str, gbdt.BoostConfig] = {}
    for name in cfg.models():
        cols = matrix.family_columns(MODEL_FAMILIES[name])
        if not cols:
            raise ValueError(f"no feature columns for model {name}")
        if cfg.grid:
            result = gbdt.grid_search(train_m, cfg.grid, n_folds=cfg.grid_folds,
                                      seed=cfg.seed, columns=cols)
            boost_cfg = result.best
            grid_path = out / f"grid_scores_{name.lower()}.csv"
            _write_grid_table(result.table, grid_path, h, cfg.seed)
            written.append(grid_path)
        else:
            params = BM_PARAMS if name == "BM" else FM_PARAMS
            boost_cfg = gbdt.BoostConfig(seed=cfg.seed, **params)
        ens = gbdt.fit(train_m, boost_cfg, columns=cols)
        ctx["models"][name] = ens
        configs[name] = boost_cfg

        doc = json.loads(ens.to_json())
        doc["config_hash"] = h
        model_path = out / f"model_{name.lower()}.json"
        with open(model_path, "w") as fh:
            fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
        written.append(model_path)

    params_path = out / "params.csv"
    _write_params_echo(configs, params_path, h)
    written.append(params_path)
    return written


def _write_params_echo(configs: dict, path: Path, cfg_hash: str) -> None:
    """Hyperparameter table, one column per trained model."""
    names = list(configs)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        w = csv.writer(fh)
        w.writerow(["parameter"] + names)
        for param in gbdt._GRID_ORDER:
            row = [param]
            for name in names:
                v = getattr(configs[name], param)
                row.append(repr(v) if isinstance(v, float) else v)
            w.writerow(row)


def _write_grid_table(table: list[dict], path: Path, cfg_hash: str,
                      seed: int) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        w = csv.writer(fh)
        w.writerow(list(gbdt._GRID_ORDER) + ["mean_auc", "n_folds_used",
                                             "folds_skipped"])
        for row in table:
            full = gbdt.BoostConfig(seed=seed, **row["params"])
            vals = [getattr(full, p) for p in gbdt._GRID_ORDER]
            vals = [repr(v) if isinstance(v, float) else v for v in vals]
            w.writerow(vals + [repr(row["mean_auc"]), row["n_folds_used"],
                               row["folds_skipped"]])


def _load_models(cfg: RunConfig, ctx: dict, out: Path) -> dict:
    models = ctx.get("models", {})
    for name in cfg.models():
        if name not in models:
            path = out / f"model_{name.lower()}.json"
            if not path.exists():
                raise ValueError(f"model file not found: {path}")
            models[name] = gbdt.BoostedEnsemble.load(path)
    ctx["models"] = models
    return models


def stage_evaluate(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    matrix = _matrix(cfg, ctx, out)
    models = _load_models(cfg, ctx, out)
    _, test_m = split(matrix)

    reports: dict[str, ev.ClassReport] = {}
    for name in cfg.models():
        ens = models[name]
        preds, _ = gbdt.predict(ens, test_m.frame[list(ens.feature_names)])
        reports[name] = ev.score(preds, test_m.y)
    ctx["reports"] = reports

    doc = {
        "config_hash": h,
        "n_test": int(len(test_m.frame)),
        "models": {name: rep.as_dict() for name, rep in reports.items()},
        "delta": (ev.compare(reports["BM"], reports["FM"])
                  if set(reports) == {"BM", "FM"} else None),
    }
    report_path = out / "report.json"
    _write_json(report_path, doc)
    figures = _render_figures(reports, matrix, out, h)
    return [report_path] + figures


def _render_figures(reports: dict, matrix: FeatureMatrix, out: Path,
                    h: str) -> list[Path]:
    metrics_path = out / "metrics.svg"
    plots.metric_bars(reports, metrics_path)
    _stamp_svg(metrics_path, h)

    net = ev.correlation_network(matrix)
    network_path = out / "feature_network.svg"
    plots.correlation_network_figure(net, network_path)
    _stamp_svg(network_path, h)
    return [metrics_path, network_path]


def _report_from_dict(doc: dict) -> ev.ClassReport:
    return ev.ClassReport(
        confusion=tuple(tuple(int(v) for v in row) for row in doc["confusion"]),
        per_class={k: dict(v) for k, v in doc["per_class"].items()},
        macro_precision=doc["macro"]["precision"],
        macro_recall=doc["macro"]["recall"],
        macro_f1=doc["macro"]["f1"],
        accuracy=doc["accuracy"],
        n=doc["n"],
        zero_division=tuple(tuple(z) for z in doc["zero_division"]),
        test_hash=doc["test_hash"],
    )


def stage_report(cfg: RunConfig, ctx: dict, out: Path, h: str) -> list[Path]:
    """Re-render the figures from report.json and matrix.csv."""
    if "reports" not in ctx:
        path = getattr(cfg, "report_path", None) or out / "report.json"
        doc = json.loads(Path(path).read_text())
        ctx["reports"] = {name: _report_from_dict(d)
                          for name, d in doc["models"].items()}
    matrix = _matrix(cfg, ctx, out)
    return _render_figures(ctx["reports"], matrix, out, h)


_RUN_STAGES = (
    ("ingest", stage_ingest),
    ("graph-metrics", stage_graph_metrics),
    ("slice", stage_slice),
    ("ta", stage_ta),
    ("dataset", stage_dataset),
    ("train", stage_train),
    ("evaluate", stage_evaluate),
)


def run_pipeline(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ValueError("seed is required for run")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    h = cfg.hash()
    ctx: dict = {}
    artifacts: dict[str, str] = {}

    manifest = {
        "config": cfg.as_dict(),
        "config_hash": h,
        "seeds": {"train": cfg.seed, "louvain_base": cfg.seed},
        "artifacts": artifacts,
        "complete": False,
        "failed_stage": None,
        "error": None,
    }
    for name, fn in _RUN_STAGES:
        try:
            paths = fn(cfg, ctx, out, h)
        except Exception as exc:
            manifest["failed_stage"] = name
            manifest["error"] = str(exc)
            _write_json(out / "manifest.json", manifest)
            print(f"stage {name} failed: {exc}", file=sys.stderr)
            return 1
        for p in paths:
            artifacts[p.name] = _sha256(p)
    manifest["complete"] = True
    _write_json(out / "manifest.json", manifest)
    return 0


# -------------------------------------------------------------------- main

def _single_stage(cfg: RunConfig, fn) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx: dict = {}
    for path in fn(cfg, ctx, out, cfg.hash()):
        print(path)
    return 0


def _knobs_parent() -> argparse.ArgumentParser:
    """Every subcommand accepts the full config surface; each stage reads
    the keys it needs, so one config file can drive the whole pipeline."""
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--jobs", type=int, help="worker bound for parallel stages")
    p.add_argument("--seed", type=int, help="run seed; required to train")
    p.add_argument("--transactions", help="transaction CSV path")
    p.add_argument("--candles", help="OHLCV CSV path")
    p.add_argument("--social", help="social series CSV path")
    p.add_argument("--interval", choices=("daily", "dynamic"),
                   help="snapshot policy for graph metrics")
    p.add_argument("--min-days", dest="min_days", type=int)
    p.add_argument("--max-days", dest="max_days", type=int)
    p.add_argument("--threshold", type=float, help="trend label threshold")
    p.add_argument("--warmup", type=int, help="indicator warm-up rows to drop")
    p.add_argument("--train-end", dest="train_end",
                   help="last training date (ISO)")
    p.add_argument("--model", choices=("BM", "FM", "both"),
                   help="model family selection")
    return p


_SUBCOMMANDS = (
    ("ingest", "validate inputs, emit social features"),
    ("graph-metrics", "per-snapshot network features"),
    ("slice", "dynamic intervals and similarity-price chart"),
    ("ta", "technical indicator features"),
    ("dataset", "assemble the labelled feature matrix"),
    ("train", "fit the boosted-tree models"),
    ("evaluate", "score models, write report and figures"),
    ("report", "re-render figures from report.json"),
    ("run", "full pipeline plus manifest"),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chaintrend",
        description="transaction-network, technical and social features "
                    "for next-day trend classification")
    sub = parser.add_subparsers(dest="command", required=True)
    knobs = _knobs_parent()

    parsers = {name: sub.add_parser(name, help=text, parents=[knobs])
               for name, text in _SUBCOMMANDS}
    parsers["dataset"].add_argument("--net-features", dest="net_features_path")
    parsers["dataset"].add_argument("--ta-features", dest="ta_features_path")
    parsers["dataset"].add_argument("--social-features",
                                    dest="social_features_path")
    for name in ("train", "evaluate", "report"):
        parsers[name].add_argument("--matrix", dest="matrix_path",
                                   help="matrix.csv path")
    parsers["report"].add_argument("--report", dest="report_path")

    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        for attr in ("net_features_path", "ta_features_path",
                     "social_features_path", "matrix_path", "report_path"):
            if getattr(args, attr, None):
                setattr(cfg, attr, getattr(args, attr))

        if args.command == "run":
            return run_pipeline(cfg)
        stage = {
            "ingest": stage_ingest,
            "graph-metrics": stage_graph_metrics,
            "slice": stage_slice,
            "ta": stage_ta,
            "dataset": stage_dataset,
            "train": stage_train,
            "evaluate": stage_evaluate,
            "report": stage_report,
        }[args.command]
        return _single_stage(cfg, stage)
    except (ValueError, OSError, ingest.RowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
