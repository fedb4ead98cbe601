"""Command-line orchestration: one-shot oversampling, the benchmark
harness, report rendering and the gradient verification gate.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import core, evaluate, gan, nnet, oversample
from .core import Dataset, SplitSpec, child_seed, make_rng
from .errors import GanbalanceError, ConfigError
from .fixtures import make_imbalanced

STRATEGIES = oversample.STRATEGIES
METRIC_KEYS = ("accuracy", "precision", "recall", "f1")


# ---------------------------------------------------------------- helpers

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def _gan_config_from(cfg: dict, seed: int) -> gan.GanConfig:
    g = dict(cfg.get("gan", {}))
    return gan.GanConfig(
        latent_dim=g.get("latent_dim", 32),
        generator_hidden=tuple(g.get("generator_hidden", (128, 256, 512, 1024))),
        discriminator_hidden=tuple(g.get("discriminator_hidden", (512, 256, 128))),
        batch_size=g.get("batch_size", 32),
        learning_rate=g.get("learning_rate", 1e-5),
        epochs=g.get("epochs", 500),
        stability_tol=g.get("stability_tol", 1e-5),
        stability_min_epochs=g.get("stability_min_epochs", 100),
        seed=seed,
    )


def _train_config_from(cfg: dict, seed: int) -> nnet.TrainConfig:
    c = dict(cfg.get("classifier", {}))
    return nnet.TrainConfig(
        batch_size=c.get("batch_size", 32),
        epochs=c.get("epochs", 100),
        learning_rate=c.get("learning_rate", 1e-3),
        early_stop_patience=c.get("early_stop_patience", 10),
        seed=seed,
    )


def _load_dataset(entry: dict) -> Dataset:
    if "path" in entry:
        return core.load_csv(entry["path"], entry.get("label_column", -1),
                             entry["minority_label"])
    # Synthetic fixture entry: {"fixture": {"n_major":..,"n_minor":..,"n_features":..,"seed":..}}
    f = entry["fixture"]
    return make_imbalanced(f["n_major"], f["n_minor"], f["n_features"],
                           seed=f.get("seed", 0))


# ---------------------------------------------------------------- benchmark

def run_cell(ds: Dataset, strategy: str, config: dict, d_idx: int, s_idx: int,
             rep: int, master_seed: int, out_dir: Path, dataset_name: str) -> dict:
    """One (dataset, strategy, repetition) cell of the benchmark grid.

    Split first, then scale on the train side only, then oversample the
    scaled train split; the test split stays untouched originals.
    """
    split_seed = child_seed(master_seed, d_idx, rep, 0)
    over_seed = child_seed(master_seed, d_idx, s_idx, rep, 1)
    clf_seed = child_seed(master_seed, d_idx, s_idx, rep, 2)
    record = {
        "dataset": dataset_name, "strategy": strategy, "rep": rep,
        "seeds": {"split": split_seed, "oversample": over_seed, "classifier": clf_seed},
        "error": None,
    }
    train_fraction = config.get("train_fraction", 0.8)
    train_raw, test_raw = core.train_test_split(ds, SplitSpec(train_fraction, split_seed))
    scaler = core.minmax_fit(train_raw)
    train = core.minmax_apply(train_raw, scaler)
    test = core.minmax_apply(test_raw, scaler)
    record["train_class_counts"] = list(train.class_counts())

    gan_cfg = _gan_config_from(config, over_seed)
    major, minor = train.class_counts()
    batch = oversample.synthesize(train, strategy, max(0, major - minor),
                                  seed=over_seed, k=config.get("k", 5),
                                  m=config.get("m", 10), gan_config=gan_cfg)
    balanced = oversample.append_synthetic(train, batch)
    record["balanced_class_counts"] = list(balanced.class_counts())
    _, pooled = evaluate.feature_std(balanced.features)
    record["pooled_feature_std"] = pooled

    if hasattr(batch, "gan_model"):
        loss_dir = out_dir / "loss_history"
        loss_dir.mkdir(exist_ok=True)
        gan.write_loss_history(
            batch.gan_model, loss_dir / f"{dataset_name}_{strategy}_rep{rep}.csv"
        )
        record["gan_stopped_epoch"] = batch.gan_model.stopped_epoch
        record["gan_stop_reason"] = batch.gan_model.stop_reason

    if rep == 0 and batch.samples.shape[0] > 0:
        hist_dir = out_dir / "histograms"
        hist_dir.mkdir(exist_ok=True)
        _write_histograms(batch.samples, hist_dir / f"{dataset_name}_{strategy}.csv")

    net = nnet.build_classifier(train.n_features,
                                tuple(config.get("classifier", {}).get("hidden", (64, 32))),
                                seed=clf_seed)
    report = nnet.train_supervised(net, balanced, _train_config_from(config, clf_seed))
    record["classifier_stopped_epoch"] = report.stopped_epoch
    record["train_accuracy"] = report.final_train_accuracy

    preds = (net.predict(test.features).ravel() >= 0.5).astype(np.int64)
    c = evaluate.confusion(preds, test.labels)
    m = evaluate.metrics(c)
    record["test"] = {
        "confusion": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
        "misclassification": evaluate.misclassification_count(c),
        **m.as_dict(),
    }
    return record


def _write_histograms(samples: np.ndarray, path: Path, bins: int = 20) -> None:
    lines = ["feature,bin_lo,bin_hi,count"]
    for j in range(samples.shape[1]):
        edges, counts = evaluate.histogram(samples[:, j], bins)
        for b in range(bins):
            lines.append(f"{j},{edges[b]!r},{edges[b + 1]!r},{counts[b]}")
    path.write_text("\n".join(lines) + "\n")


def run_benchmark(config: dict, out_dir: Path) -> int:
    """Execute the full grid; returns the number of failed cells."""
    strategies = config.get("strategies", list(STRATEGIES))
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r} (choose from {STRATEGIES})")
    if not strategies:
        raise ConfigError("strategies list is empty")
    reps = int(config.get("repetitions", 10))
    if reps < 1:
        raise ConfigError("repetitions must be >= 1")
    master_seed = int(config.get("master_seed", 0))
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "config_echo.json", config)

    records = []
    failures = 0
    for d_idx, entry in enumerate(config["datasets"]):
        name = entry.get("name", Path(entry.get("path", f"fixture{d_idx}")).stem)
        ds = _load_dataset(entry)
        for s_idx, strategy in enumerate(strategies):
            for rep in range(reps):
                try:
                    rec = run_cell(ds, strategy, config, d_idx, s_idx, rep,
                                   master_seed, out_dir, name)
                except GanbalanceError as exc:
                    rec = {"dataset": name, "strategy": strategy, "rep": rep,
                           "error": str(exc)}
                    failures += 1
                records.append(rec)
    _write_json(out_dir / "runs.json", records)
    render_tables(records, strategies, out_dir)
    return failures


# ---------------------------------------------------------------- reporting

def _aggregate_records(records):
    """Group successful run records by (dataset, strategy)."""
    groups: dict[tuple, list] = {}
    order: list[tuple] = []
    failed: set[tuple] = set()
    for rec in records:
        key = (rec["dataset"], rec["strategy"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        if rec.get("error"):
            failed.add(key)
        else:
            groups[key].append(rec)
    return groups, order, failed


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_tables(records, strategies, out_dir: Path) -> None:
    groups, order, failed = _aggregate_records(records)

    # Performance table: per (dataset, strategy) mean/max/std of train
    # accuracy and the four test metrics.
    perf_rows = []
    for key in order:
        dataset, strategy = key
        runs = groups[key]
        row = {"dataset": dataset, "strategy": strategy}
        if not runs:
            row["failed"] = True
            perf_rows.append(row)
            continue
        row["failed"] = key in failed  # partial failures still aggregate
        tr = np.array([r["train_accuracy"] for r in runs])
        row["train_accuracy"] = (tr.mean(), tr.max(), tr.std(ddof=1 if tr.size > 1 else 0))
        sets = [evaluate.MetricSet(**{k: r["test"][k] for k in METRIC_KEYS}) for r in runs]
        agg = evaluate.aggregate(sets)
        for k in METRIC_KEYS:
            row[f"test_{k}"] = (agg.mean[k], agg.max[k], agg.std[k])
        perf_rows.append(row)
    _emit_performance(perf_rows, out_dir)

    # Misclassification and feature-std tables: dataset rows, strategy columns.
    datasets = []
    for d, _ in order:
        if d not in datasets:
            datasets.append(d)
    mis, fstd = {}, {}
    for key in order:
        runs = groups[key]
        if runs:
            mis[key] = float(np.mean([r["test"]["misclassification"] for r in runs]))
            fstd[key] = float(np.mean([r["pooled_feature_std"] for r in runs]))
    _emit_matrix(datasets, strategies, mis, out_dir, "misclassification",
                 best="min")
    _emit_matrix(datasets, strategies, fstd, out_dir, "feature_std",
                 best="closest_to_none")


def _emit_performance(rows, out_dir: Path) -> None:
    cols = ["train_accuracy"] + [f"test_{k}" for k in METRIC_KEYS]
    csv_lines = ["dataset,strategy," + ",".join(
        f"{c}_{s}" for c in cols for s in ("mean", "max", "std"))]
    for row in rows:
        if "train_accuracy" not in row:
            csv_lines.append(f"{row['dataset']},{row['strategy']}," +
                             ",".join(["failed"] * (3 * len(cols))))
            continue
        vals = [v for c in cols for v in row[c]]
        csv_lines.append(f"{row['dataset']},{row['strategy']}," +
                         ",".join(_fmt(v) for v in vals))
    (out_dir / "performance.csv").write_text("\n".join(csv_lines) + "\n")

    # Markdown: bold the best mean per dataset per column.
    by_dataset: dict[str, list] = {}
    for row in rows:
        by_dataset.setdefault(row["dataset"], []).append(row)
    md = ["| dataset | strategy | " + " | ".join(cols) + " |",
          "|" + "---|" * (2 + len(cols))]
    for dataset, drows in by_dataset.items():
        best = {}
        for c in cols:
            vals = [r[c][0] for r in drows if c in r]
            best[c] = max(vals) if vals else None
        for r in drows:
            cells = []
            for c in cols:
                if c not in r:
                    cells.append("failed")
                    continue
                mean, mx, sd = r[c]
                text = f"{_fmt(mean)} ({_fmt(mx)}, {_fmt(sd)})"
                cells.append(f"**{text}**" if mean == best[c] else text)
            md.append(f"| {dataset} | {r['strategy']} | " + " | ".join(cells) + " |")
    (out_dir / "performance.md").write_text("\n".join(md) + "\n")


def _emit_matrix(datasets, strategies, values: dict, out_dir: Path,
                 name: str, best: str) -> None:
    csv_lines = ["dataset," + ",".join(strategies)]
    md = ["| dataset | " + " | ".join(strategies) + " |",
          "|" + "---|" * (1 + len(strategies))]
    for d in datasets:
        row = {s: values.get((d, s)) for s in strategies}
        present = {s: v for s, v in row.items() if v is not None}
        if best == "min":
            target = min(present.values()) if present else None
        else:  # closest to the un-oversampled value
            ref = row.get("none")
            scored = {s: abs(v - ref) for s, v in present.items()
                      if s != "none" and ref is not None}
            target_s = min(scored, key=scored.get) if scored else None
            target = row.get(target_s) if target_s else None
        csv_lines.append(
            d + "," + ",".join("failed" if row[s] is None else _fmt(row[s])
                               for s in strategies))
        cells = []
        for s in strategies:
            v = row[s]
            if v is None:
                cells.append("failed")
            else:
                text = _fmt(v)
                cells.append(f"**{text}**" if target is not None and v == target else text)
        md.append(f"| {d} | " + " | ".join(cells) + " |")
    (out_dir / f"{name}.csv").write_text("\n".join(csv_lines) + "\n")
    (out_dir / f"{name}.md").write_text("\n".join(md) + "\n")


# ---------------------------------------------------------------- commands

def cmd_oversample(args) -> int:
    if args.strategy == "none":
        shutil.copyfile(args.input, args.out)
        ds = core.load_csv(args.input, args.label_column, args.minority_label)
        major, minor = ds.class_counts()
        print(f"class counts: before major={major} minor={minor}; "
              f"after major={major} minor={minor}")
        return 0
    ds = core.load_csv(args.input, args.label_column, args.minority_label)
    major, minor = ds.class_counts()
    scaler = core.minmax_fit(ds)
    scaled = core.minmax_apply(ds, scaler)
    gan_cfg = gan.GanConfig(seed=args.seed, epochs=args.gan_epochs)
    balanced = oversample.balance_to_parity(scaled, args.strategy, seed=args.seed,
                                            k=args.k, m=args.m, gan_config=gan_cfg)
    out = core.minmax_invert(balanced, scaler)
    core.save_csv(out, args.out)
    after_major, after_minor = out.class_counts()
    print(f"class counts: before major={major} minor={minor}; "
          f"after major={after_major} minor={after_minor}")
    return 0


def cmd_benchmark(args) -> int:
    config = json.loads(Path(args.config).read_text())
    out_dir = Path(args.out or config.get("output_dir", "benchmark_out"))
    if args.seed is not None:
        config["master_seed"] = args.seed
    failures = run_benchmark(config, out_dir)
    print(f"benchmark complete: bundle at {out_dir}, {failures} failed cells")
    return 1 if failures else 0


def cmd_report(args) -> int:
    bundle = Path(args.bundle)
    missing = [str(bundle / f) for f in ("runs.json", "config_echo.json")
               if not (bundle / f).exists()]
    if missing:
        print(f"incomplete bundle, missing: {', '.join(missing)}", file=sys.stderr)
        return 1
    records = json.loads((bundle / "runs.json").read_text())
    config = json.loads((bundle / "config_echo.json").read_text())
    strategies = config.get("strategies", list(STRATEGIES))
    out_dir = Path(args.out or bundle)
    out_dir.mkdir(parents=True, exist_ok=True)
    render_tables(records, strategies, out_dir)
    if args.format == "markdown":
        for name in ("performance", "misclassification", "feature_std"):
            print((out_dir / f"{name}.md").read_text())
    else:
        for name in ("performance", "misclassification", "feature_std"):
            print((out_dir / f"{name}.csv").read_text())
    return 0


def cmd_gradcheck(args) -> int:
    """Finite-difference verification of every architecture in the benchmark."""
    rng = make_rng(args.seed)
    n_features = 8
    threshold = 1e-4
    worst = {}

    clf = nnet.build_classifier(n_features, seed=1)
    batch = rng.uniform(size=(6, n_features))
    targets = rng.integers(0, 2, size=6)
    worst["classifier"] = nnet.grad_check(clf, batch, targets, sample_per_tensor=10)

    cfg = gan.GanConfig(seed=2)
    gen = gan._build_generator(cfg.latent_dim, n_features, cfg, 3)
    disc = gan._build_discriminator(n_features, cfg, 4)
    noise = rng.standard_normal((6, cfg.latent_dim))
    fake = gen.predict(noise)
    worst["generator"] = nnet.grad_check(
        nnet.DenseNet(gen.specs, init_seed=3), noise,
        rng.uniform(0.2, 0.8, size=(6, n_features)), sample_per_tensor=5)
    worst["discriminator"] = nnet.grad_check(disc, fake, rng.integers(0, 2, size=6),
                                             sample_per_tensor=5)
    worst["composite"] = gan.composite_grad_check(gen, disc, noise, sample_per_tensor=5)

    ok = True
    for name, err in worst.items():
        status = "pass" if err < threshold else "FAIL"
        ok &= err < threshold
        print(f"{name}: max relative error {err:.3e} [{status}]")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ganbalance",
        description="Oversampling for imbalanced binary classification "
                    "(SMOTE, SVM-SMOTE, GBO, SSG) and its benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oversample", help="balance one CSV dataset to parity")
    p.add_argument("input")
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--label-column", default=-1,
                   type=lambda s: int(s) if s.lstrip("-").isdigit() else s)
    p.add_argument("--minority-label", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--gan-epochs", type=int, default=500)
    p.set_defaults(func=cmd_oversample)

    p = sub.add_parser("benchmark", help="run the benchmark grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("report", help="re-render tables from a bundle")
    p.add_argument("bundle")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GanbalanceError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
