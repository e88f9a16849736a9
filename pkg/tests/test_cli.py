"""End-to-end command-line behavior: files, determinism, exit codes."""
import json

import numpy as np
import pytest

from geoqgan import cli
from geoqgan.trainer import MODEL_NAMES


def run_cli(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny.csv"
    code = run_cli("dataset", "--synthetic", "--synthetic-airports", 200,
                   "--n", 150, "--seed", 3, "--out", path)
    assert code == 0
    return path


class TestDatasetCommand:
    def test_synthetic_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli("dataset", "--synthetic", "--synthetic-airports", 120,
                           "--n", 100, "--seed", 7, "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()

    def test_sidecar_provenance(self, tmp_path):
        out = tmp_path / "d.csv"
        run_cli("dataset", "--synthetic", "--synthetic-airports", 120,
                "--n", 50, "--seed", 1, "--out", out)
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["count"] == 50
        assert meta["seed"] == 1
        assert meta["min_edge_km"] == pytest.approx(185.2)

    def test_missing_airport_file(self, capsys):
        code = run_cli("dataset", "--airports", "/no/such/file.csv", "--n", 10, "--out", "x.csv")
        assert code == cli.EXIT_INPUT
        assert "/no/such/file.csv" in capsys.readouterr().err


def train_args(model, dataset, out, **kw):
    args = ["train", "--model", model, "--dataset", dataset, "--out", out,
            "--epochs", 1, "--batch-size", 16, "--eval-samples", 64,
            "--final-samples", 64, "--bootstrap-resamples", 20, "--seed", 5]
    for key, value in kw.items():
        args += [f"--{key.replace('_', '-')}", value]
    return args


class TestTrainCommand:
    def test_smoke_and_artifacts(self, tiny_dataset, tmp_path):
        run_dir = tmp_path / "run"
        assert run_cli(*train_args("gan_classic", tiny_dataset, run_dir)) == 0
        for name in ("manifest.json", "trainlog.csv", "metrics.json",
                     "checkpoint_final.json", "histogram.csv"):
            assert (run_dir / name).exists(), name
        report = json.loads((run_dir / "metrics.json").read_text())
        for iv in report.values():
            assert np.isfinite(iv["point"])

    def test_loss_scale_manifest_flags(self, tiny_dataset, tmp_path):
        run_dir = tmp_path / "run"
        assert run_cli(*train_args("qugan_triangle_loss_scale", tiny_dataset, run_dir)) == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["config"]["variance_loss"] is True
        assert manifest["config"]["lambda_variance"] == 5000.0
        assert manifest["config"]["scaling_head"] is True
        assert manifest["dataset"]["sha256"]

    def test_identical_seeds_identical_outputs(self, tiny_dataset, tmp_path):
        blobs = []
        for tag in ("r1", "r2"):
            run_dir = tmp_path / tag
            assert run_cli(*train_args("qugan_opposite", tiny_dataset, run_dir)) == 0
            blobs.append((run_dir / "trainlog.csv").read_bytes()
                         + (run_dir / "metrics.json").read_bytes())
        assert blobs[0] == blobs[1]

    def test_unknown_model_is_usage_error(self, tiny_dataset, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli(*train_args("qugan_dodecahedron", tiny_dataset, tmp_path / "r"))
        assert exc.value.code == cli.EXIT_USAGE
        err = capsys.readouterr().err
        assert "qugan_triangle" in err  # usage lists the valid names

    def test_config_file_and_flag_precedence(self, tiny_dataset, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"epochs": 3, "batch_size": 16, "eval_samples": 64,
                                   "final_samples": 64, "bootstrap_resamples": 20,
                                   "seed": 2}))
        run_dir = tmp_path / "run"
        assert run_cli("train", "--model", "gan_classic", "--dataset", tiny_dataset,
                       "--out", run_dir, "--config", cfg, "--epochs", 1) == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["config"]["epochs"] == 1      # flag beats file
        assert manifest["config"]["seed"] == 2        # file beats default


class TestEvaluateCommand:
    def test_reevaluation(self, tiny_dataset, tmp_path, capsys):
        run_dir = tmp_path / "run"
        run_cli(*train_args("qugan_ring", tiny_dataset, run_dir))
        assert run_cli("evaluate", "--run", run_dir, "--samples", 64) == 0
        out = json.loads((run_dir / "metrics_eval.json").read_text())
        assert set(out) == {"wass", "js", "tvs", "pcm4", "sigma"}

    def test_missing_run(self, tmp_path):
        assert run_cli("evaluate", "--run", tmp_path / "nope") == cli.EXIT_INPUT


@pytest.fixture(scope="module")
def two_runs(tiny_dataset, tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    for model in ("gan_classic", "qugan_triangle"):
        assert run_cli(*train_args(model, tiny_dataset, root / model)) == 0
    return root


class TestReportCommand:
    def test_combined_table_and_curves(self, two_runs, tmp_path):
        out = tmp_path / "report"
        assert run_cli("report", "--runs", two_runs / "gan_classic",
                       two_runs / "qugan_triangle", "--out", out) == 0
        table = (out / "combined.csv").read_text().splitlines()
        assert table[0].startswith("model,wass,js,tvs_pct")
        assert len(table) == 3
        assert table[1].startswith("gan_classic")  # registry order
        assert (out / "combined.txt").exists()
        for curve in ("sigma_batch", "tvs", "pcm4"):
            assert (out / f"gan_classic_{curve}.csv").exists()

    def test_histogram_conserves_counts(self, two_runs, tmp_path):
        out = tmp_path / "report"
        run_cli("report", "--runs", two_runs / "qugan_triangle", "--out", out)
        rows = (out / "qugan_triangle_histogram.csv").read_text().splitlines()[1:]
        total = sum(int(r.split(",")[2]) for r in rows)
        assert total == 64 * 6  # final_samples x six pooled edges

    def test_incomplete_runs_skipped(self, two_runs, tmp_path, capsys):
        empty = tmp_path / "empty_run"
        empty.mkdir()
        out = tmp_path / "report"
        assert run_cli("report", "--runs", empty, two_runs / "gan_classic", "--out", out) == 0
        assert "skipping incomplete" in capsys.readouterr().err

    def test_no_complete_runs_is_input_error(self, tmp_path):
        empty = tmp_path / "empty_run"
        empty.mkdir()
        assert run_cli("report", "--runs", empty, "--out", tmp_path / "r") == cli.EXIT_INPUT


def test_runs_root_env_var(tiny_dataset, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.RUNS_ENV, str(tmp_path / "custom_root"))
    args = train_args("gan_classic", tiny_dataset, "ignored")
    args.remove("--out")
    args.remove("ignored")
    assert run_cli(*args) == 0
    assert (tmp_path / "custom_root" / "gan_classic_seed5" / "manifest.json").exists()


def test_all_registered_models_are_cli_choices():
    assert set(MODEL_NAMES) == {
        "gan_classic", "qugan_ring", "qugan_all_to_all", "qugan_triangle",
        "qugan_opposite", "qugan_combined", "qugan_triangle_cyclic_cnot",
        "qugan_triangle_cyclic_crot", "qugan_triangle_noncyclic_cnot",
        "qugan_triangle_noncyclic_crot", "qugan_triangle_loss",
        "qugan_triangle_loss_scale"}
