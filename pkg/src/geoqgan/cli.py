"""Command-line front end: dataset building, training, evaluation, reporting.

Config precedence for `train`: explicit command-line flags override the
optional JSON config file, which overrides the model's registered defaults.
The merged snapshot always lands in the run manifest so no run is ambiguous.

Exit codes: 0 success, 2 usage, 3 bad input, 4 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, dataset as ds, metrics, trainer
from .backends import BACKEND_NAME
from .errors import InputError, TrainingError

MANIFEST_NAME = "manifest.json"
RUNS_ENV = "GEOQGAN_RUNS"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4

METRIC_DECISIONS = {
    "wasserstein_pooling": "all six edge positions pooled into one marginal",
    "js_bins": metrics.JS_BINS,
    "js_range": list(metrics.JS_RANGE),
    "js_log_base": 2,
    "triangle_tolerance": 1e-2,
    "ptolemy_tolerance": 1e-2,
    "ci_method": "percentile bootstrap, seeded",
    "d_steps_per_g_step": 1,
    "fake_label": 0.0,
    "last_partial_batch": "dropped",
}


def runs_root() -> Path:
    return Path(os.environ.get(RUNS_ENV, "runs"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoqgan",
                                     description="Quantum/classical GANs for K4 edge-weight graphs")
    parser.add_argument("--version", action="version", version=f"geoqgan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dataset", help="build a training dataset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--airports", help="airport table CSV (14-column public layout)")
    src.add_argument("--synthetic", action="store_true",
                     help="use the bundled synthetic sphere-airport generator")
    p.add_argument("--synthetic-airports", type=int, default=2400,
                   help="number of synthetic airports (with --synthetic)")
    p.add_argument("--n", type=int, default=10000, help="number of quadruples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-edge-km", type=float, default=ds.MIN_EDGE_KM)
    p.add_argument("--out", default="dataset.csv", help="output CSV path")

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--model", required=True, choices=trainer.MODEL_NAMES)
    p.add_argument("--dataset", required=True, help="dataset CSV from the dataset command")
    p.add_argument("--out", default=None, help="run directory (default runs/<model>_seed<seed>)")
    p.add_argument("--config", default=None, help="JSON file with TrainConfig overrides")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr-g", type=float, default=None)
    p.add_argument("--lr-d", type=float, default=None)
    p.add_argument("--real-label", type=float, default=None)
    p.add_argument("--variance", choices=("on", "off"), default=None,
                   help="override the model's variance-regularizer default")
    p.add_argument("--lambda-variance", type=float, default=None)
    p.add_argument("--scaling", choices=("on", "off"), default=None,
                   help="override the model's output-scaling default")
    p.add_argument("--eval-every", type=int, default=None)
    p.add_argument("--eval-samples", type=int, default=None)
    p.add_argument("--final-samples", type=int, default=None)
    p.add_argument("--bootstrap-resamples", type=int, default=None)

    p = sub.add_parser("evaluate", help="re-evaluate a finished run")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--dataset", default=None, help="override the manifest's dataset path")
    p.add_argument("--out", default=None, help="output JSON (default <run>/metrics_eval.json)")

    p = sub.add_parser("report", help="combine finished runs into a table plus curve files")
    p.add_argument("--runs", nargs="+", required=True, help="run directories")
    p.add_argument("--out", required=True, help="report output directory")
    return parser


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------

def cmd_dataset(args) -> int:
    if args.synthetic:
        airports = ds.synthetic_airports(args.synthetic_airports, seed=args.seed)
        source = {"source": f"synthetic(n={args.synthetic_airports})", "source_sha256": None}
    else:
        airports = ds.ingest_airports(args.airports)
        source = {"source": str(args.airports), "source_sha256": ds.file_sha256(args.airports)}
        print(f"ingested {len(airports)} airports from {args.airports}")
    records = ds.build_dataset(airports, args.n, args.min_edge_km, args.seed)
    provenance = {"seed": args.seed, "n_quadruples": args.n,
                  "min_edge_km": args.min_edge_km, "earth_radius_km": ds.EARTH_RADIUS_KM}
    provenance.update(source)
    ds.save_dataset(records, args.out, provenance)
    weights = ds.dataset_weights(records)
    print(f"wrote {len(records)} quadruples to {args.out}")
    print(f"real-data validity: TVS {100 * metrics.tvs(weights):.2f}%  "
          f"4PCM {100 * metrics.pcm4(weights):.2f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

_FLAG_FIELDS = ("epochs", "seed", "batch_size", "lr_g", "lr_d", "real_label",
                "lambda_variance", "eval_every", "eval_samples", "final_samples",
                "bootstrap_resamples")


def resolve_config(args) -> trainer.TrainConfig:
    overrides: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise InputError(f"config {args.config} must hold a JSON object")
        file_cfg.pop("model", None)
        overrides.update(file_cfg)
    for name in _FLAG_FIELDS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.variance is not None:
        overrides["variance_loss"] = args.variance == "on"
    if args.scaling is not None:
        overrides["scaling_head"] = args.scaling == "on"
    try:
        return trainer.TrainConfig.for_model(args.model, **overrides)
    except TypeError as exc:
        raise InputError(f"bad config field: {exc}") from exc


def cmd_train(args) -> int:
    config = resolve_config(args)
    data = ds.load_dataset(args.dataset)
    run_dir = Path(args.out) if args.out else runs_root() / f"{config.model}_seed{config.seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": "geoqgan-run",
        "version": 1,
        "model": config.model,
        "seed": config.seed,
        "code_version": __version__,
        "backend": BACKEND_NAME,
        "config": {k: v for k, v in sorted(vars(config).items())},
        "dataset": {"path": str(args.dataset), "sha256": ds.file_sha256(args.dataset)},
        "metric_decisions": METRIC_DECISIONS,
        "outputs": {"trainlog": "trainlog.csv", "metrics": "metrics.json",
                    "final_checkpoint": "checkpoint_final.json", "histogram": "histogram.csv"},
    }
    with open(run_dir / MANIFEST_NAME, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"training {config.model} for {config.epochs} epochs "
          f"(seed {config.seed}, backend {BACKEND_NAME}) -> {run_dir}")
    result = trainer.train(config, data, run_dir=run_dir)
    rep = result.report.to_dict()
    print(f"final: wass {rep['wass']['point']:.4f}  js {rep['js']['point']:.4f}  "
          f"TVS {100 * rep['tvs']['point']:.2f}%  4PCM {100 * rep['pcm4']['point']:.2f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _load_manifest(run_dir: Path) -> dict:
    try:
        with open(run_dir / MANIFEST_NAME) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{run_dir} has no readable manifest: {exc}") from exc


def cmd_evaluate(args) -> int:
    run_dir = Path(args.run)
    manifest = _load_manifest(run_dir)
    config, generator, _ = trainer.load_checkpoint(run_dir / "checkpoint_final.json")
    data_path = args.dataset or manifest["dataset"]["path"]
    data = ds.load_dataset(data_path)
    n = args.samples or config.final_samples
    rng = np.random.default_rng([config.seed, 0xEA1])
    _, report = trainer.evaluate(generator, n, data, rng,
                                 n_resamples=config.bootstrap_resamples,
                                 boot_rng=np.random.default_rng([config.seed, 0xB007]))
    out = Path(args.out) if args.out else run_dir / "metrics_eval.json"
    trainer.write_report(out, report)
    rep = report.to_dict()
    print(f"{manifest['model']}: wass {rep['wass']['point']:.4f}  js {rep['js']['point']:.4f}  "
          f"TVS {100 * rep['tvs']['point']:.2f}%  4PCM {100 * rep['pcm4']['point']:.2f}%")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

_TABLE_COLUMNS = ("model", "wass", "js", "tvs_pct", "tvs_ci_low", "tvs_ci_high",
                  "pcm4_pct", "pcm4_ci_low", "pcm4_ci_high")


def _completed(run_dir: Path) -> bool:
    needed = (MANIFEST_NAME, "trainlog.csv", "metrics.json", "checkpoint_final.json")
    return all((run_dir / name).exists() for name in needed)


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for run in args.runs:
        run_dir = Path(run)
        if not _completed(run_dir):
            print(f"skipping incomplete run directory: {run_dir}", file=sys.stderr)
            continue
        manifest = _load_manifest(run_dir)
        with open(run_dir / "metrics.json") as fh:
            report = metrics.MetricsReport.from_dict(json.load(fh))
        log_rows = trainer.read_trainlog(run_dir / "trainlog.csv")
        name = run_dir.name
        for curve in ("sigma_batch", "tvs", "pcm4"):
            with open(out_dir / f"{name}_{curve}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["epoch", curve])
                for row in log_rows:
                    writer.writerow([row["epoch"], repr(row[curve])])
        hist_src = run_dir / "histogram.csv"
        if hist_src.exists():
            (out_dir / f"{name}_histogram.csv").write_bytes(hist_src.read_bytes())
        d = report.to_dict()
        rows.append({
            "model": manifest["model"],
            "order": trainer.MODEL_NAMES.index(manifest["model"]),
            "wass": d["wass"]["point"], "js": d["js"]["point"],
            "tvs_pct": 100 * d["tvs"]["point"],
            "tvs_ci_low": 100 * d["tvs"]["ci_low"], "tvs_ci_high": 100 * d["tvs"]["ci_high"],
            "pcm4_pct": 100 * d["pcm4"]["point"],
            "pcm4_ci_low": 100 * d["pcm4"]["ci_low"], "pcm4_ci_high": 100 * d["pcm4"]["ci_high"],
        })
    if not rows:
        raise InputError("no completed run directories among the inputs")
    rows.sort(key=lambda r: (r["order"], r["model"]))
    with open(out_dir / "combined.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TABLE_COLUMNS)
        for r in rows:
            writer.writerow([r["model"]] + [repr(float(r[c])) for c in _TABLE_COLUMNS[1:]])
    lines = [f"{'Model':32s} {'Wass.':>7s} {'JS':>7s} {'TVS %':>7s} {'TVS 95% CI':>18s} "
             f"{'4PCM %':>7s} {'4PCM 95% CI':>18s}"]
    for r in rows:
        lines.append(
            f"{r['model']:32s} {r['wass']:7.3f} {r['js']:7.3f} {r['tvs_pct']:7.2f} "
            f"[{r['tvs_ci_low']:7.2f}, {r['tvs_ci_high']:7.2f}] {r['pcm4_pct']:7.2f} "
            f"[{r['pcm4_ci_low']:7.2f}, {r['pcm4_ci_high']:7.2f}]")
    (out_dir / "combined.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"report written to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"dataset": cmd_dataset, "train": cmd_train,
                "evaluate": cmd_evaluate, "report": cmd_report}
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
