"""Adversarial training loop for the classical GAN and all QuGAN variants.

Per minibatch: one discriminator update (real labels smoothed to 0.9, fake
labels 0) followed by one generator update on the non-saturating BCE loss,
optionally plus the weighted variance-matching penalty. Quantum generator
gradients chain the parameter-shift rule through the simplex/scaling head
and the discriminator's input gradient. All randomness flows from
per-purpose RNG streams derived from the run seed, so runs are
bit-reproducible.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import ansatz, metrics, nets
from .engine import param_shift_vjp, run_circuit_batch
from .errors import InputError, TrainingError

LOG_COLUMNS = ("epoch", "loss_g", "loss_d", "sigma_batch", "tvs", "pcm4", "wass", "js")

CHECKPOINT_FORMAT = "geoqgan-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    generator: str           # "classical" or a topology variant name
    variance_loss: bool = False
    scaling_head: bool = False


MODEL_REGISTRY: dict[str, ModelSpec] = {
    "gan_classic": ModelSpec("classical"),
    "qugan_ring": ModelSpec("ring"),
    "qugan_all_to_all": ModelSpec("all_to_all"),
    "qugan_triangle": ModelSpec("triangle"),
    "qugan_opposite": ModelSpec("opposite"),
    "qugan_combined": ModelSpec("combined"),
    "qugan_triangle_cyclic_cnot": ModelSpec("triangle_cyclic_cnot"),
    "qugan_triangle_cyclic_crot": ModelSpec("triangle_cyclic_crot"),
    "qugan_triangle_noncyclic_cnot": ModelSpec("triangle_noncyclic_cnot"),
    "qugan_triangle_noncyclic_crot": ModelSpec("triangle_noncyclic_crot"),
    "qugan_triangle_loss": ModelSpec("triangle", variance_loss=True),
    "qugan_triangle_loss_scale": ModelSpec("triangle", variance_loss=True, scaling_head=True),
}

MODEL_NAMES = tuple(MODEL_REGISTRY)


@dataclass
class TrainConfig:
    model: str = "qugan_triangle"
    epochs: int = 1000
    batch_size: int = 64
    lr_g: float = 5e-4
    lr_d: float = 2e-4
    real_label: float = 0.9
    variance_loss: bool = False
    lambda_variance: float = 5000.0
    scaling_head: bool = False
    eval_every: int = 25
    eval_samples: int = 500
    final_samples: int = 5000
    bootstrap_resamples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODEL_REGISTRY:
            raise InputError(f"unknown model {self.model!r}; known: {', '.join(MODEL_NAMES)}")
        if self.batch_size < 1 or self.epochs < 0:
            raise InputError("batch_size must be >= 1 and epochs >= 0")
        if self.lambda_variance < 0:
            raise InputError("lambda_variance must be >= 0")
        if not 0.0 < self.real_label <= 1.0:
            raise InputError("real_label must lie in (0, 1]")
        if self.scaling_head and MODEL_REGISTRY[self.model].generator == "classical":
            raise InputError("scaling head applies to quantum generators only")

    @classmethod
    def for_model(cls, model: str, **overrides) -> "TrainConfig":
        """Config with the model's registered variance/scaling defaults applied."""
        spec = MODEL_REGISTRY.get(model)
        if spec is None:
            raise InputError(f"unknown model {model!r}; known: {', '.join(MODEL_NAMES)}")
        merged = {"variance_loss": spec.variance_loss, "scaling_head": spec.scaling_head}
        merged.update(overrides)
        return cls(model=model, **merged)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def bce_loss(predictions: np.ndarray, targets) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its gradient w.r.t. the predictions."""
    p = np.clip(np.asarray(predictions, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    t = np.broadcast_to(np.asarray(targets, dtype=np.float64), p.shape)
    loss = float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))
    grad = (p - t) / (p * (1.0 - p)) / p.size
    return loss, grad


def variance_loss(batch: np.ndarray, sigma_target: float) -> tuple[float, np.ndarray]:
    """Squared gap between the mean per-sample spread and the target spread.

    Per-sample spread is the population standard deviation across the 6
    edge weights; the batch statistic is their mean.
    """
    w = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    n, d = w.shape
    mu = w.mean(axis=1, keepdims=True)
    centered = w - mu
    stds = np.sqrt(np.mean(centered * centered, axis=1))
    sigma_batch = float(stds.mean())
    loss = (sigma_batch - sigma_target) ** 2
    safe = np.where(stds > 0, stds, 1.0)
    grad = (2.0 * (sigma_batch - sigma_target) / n) * centered / (d * safe[:, None])
    grad[stds == 0] = 0.0
    return loss, grad


def sigma_target_of(data: np.ndarray) -> float:
    return float(metrics.sample_std(data).mean())


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

class ClassicalGenerator:
    """Baseline MLP generator; softmax output is already simplex-valued."""

    kind = "classical"

    def __init__(self, params: np.ndarray):
        self.spec = nets.generator_spec()
        self.params = {"gen": np.asarray(params, dtype=np.float64)}

    @classmethod
    def init(cls, rng: np.random.Generator) -> "ClassicalGenerator":
        return cls(nets.init_mlp_params(nets.generator_spec(), rng))

    def forward_batch(self, z: np.ndarray):
        w, cache = nets.mlp_forward(self.spec, self.params["gen"], z)
        return w, cache

    def backward(self, cache, grad_w: np.ndarray) -> dict[str, np.ndarray]:
        gp, _ = nets.mlp_backward(self.spec, self.params["gen"], cache, grad_w)
        return {"gen": gp}

    def sample(self, z: np.ndarray) -> np.ndarray:
        return self.forward_batch(z)[0]


class QuantumGenerator:
    """Topology-variant circuit followed by the simplex (or scaling) head."""

    kind = "quantum"

    def __init__(self, variant: ansatz.TopologyVariant, theta: np.ndarray,
                 scale_a: np.ndarray | None = None):
        self.variant = variant
        self.template = ansatz.build_template(variant)
        self.params = {"theta": np.asarray(theta, dtype=np.float64)}
        if scale_a is not None:
            self.params["scale"] = np.asarray(scale_a, dtype=np.float64)

    @classmethod
    def init(cls, variant_name: str, rng: np.random.Generator,
             scaling_head: bool = False) -> "QuantumGenerator":
        variant = ansatz.get_variant(variant_name)
        theta = ansatz.init_quantum_params(variant, rng)
        scale_a = nets.scaling_init() if scaling_head else None
        return cls(variant, theta, scale_a)

    @property
    def scaling(self) -> bool:
        return "scale" in self.params

    def forward_batch(self, z: np.ndarray):
        v = run_circuit_batch(self.template, z, self.params["theta"])
        if self.scaling:
            w, hcache = nets.scaling_forward(self.params["scale"], v)
        else:
            w, hcache = nets.simplex_forward(v)
        return w, (z, hcache)

    def backward(self, cache, grad_w: np.ndarray) -> dict[str, np.ndarray]:
        z, hcache = cache
        grads: dict[str, np.ndarray] = {}
        if self.scaling:
            gv, ga = nets.scaling_backward(hcache, grad_w)
            grads["scale"] = ga
        else:
            gv = nets.simplex_backward(hcache, grad_w)
        grads["theta"] = param_shift_vjp(self.template, z, self.params["theta"], gv)
        return grads

    def sample(self, z: np.ndarray) -> np.ndarray:
        return self.forward_batch(z)[0]


def make_generator(config: TrainConfig, rng: np.random.Generator):
    spec = MODEL_REGISTRY[config.model]
    if spec.generator == "classical":
        return ClassicalGenerator.init(rng)
    return QuantumGenerator.init(spec.generator, rng, scaling_head=config.scaling_head)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    generator: object
    disc_params: np.ndarray
    log_rows: list[dict]
    report: metrics.MetricsReport
    final_samples: np.ndarray


def _rng_streams(seed: int) -> dict[str, np.random.Generator]:
    return {name: np.random.default_rng([seed, tag])
            for name, tag in (("init", 0), ("train", 1), ("eval", 2), ("bootstrap", 3))}


def evaluate(generator, n_samples: int, real: np.ndarray,
             rng: np.random.Generator, tol: metrics.ToleranceConfig = metrics.ToleranceConfig(),
             n_resamples: int = 1000,
             boot_rng: np.random.Generator | None = None):
    """Draw fresh latents, generate, and compute the full metrics report."""
    z = rng.standard_normal((n_samples, 6))
    samples = generator.sample(z)
    report = metrics.compute_report(samples, real, tol, n_resamples=n_resamples, rng=boot_rng)
    return samples, report


def _quick_eval(generator, n_samples, real, rng, tol):
    z = rng.standard_normal((n_samples, 6))
    samples = generator.sample(z)
    return {
        "sigma_batch": float(metrics.sample_std(samples).mean()),
        "tvs": metrics.tvs(samples, tol.triangle),
        "pcm4": metrics.pcm4(samples, tol.ptolemy),
        "wass": metrics.wasserstein1(samples, real, rng=np.random.default_rng(1)),
        "js": metrics.js_divergence(samples, real),
    }


def train(config: TrainConfig, data: np.ndarray, run_dir: Path | None = None,
          tol: metrics.ToleranceConfig = metrics.ToleranceConfig()) -> TrainResult:
    """Run the full adversarial loop; returns final parameters, log, and report."""
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.size == 0:
        raise InputError("empty training dataset")
    n_batches = len(data) // config.batch_size
    if config.epochs > 0 and n_batches == 0:
        raise InputError(f"dataset of {len(data)} rows is smaller than one batch "
                         f"({config.batch_size})")
    streams = _rng_streams(config.seed)
    generator = make_generator(config, streams["init"])
    disc_spec = nets.discriminator_spec()
    disc = nets.init_mlp_params(disc_spec, streams["init"])
    adam_g = {name: nets.adam_init(p.size, config.lr_g) for name, p in generator.params.items()}
    adam_d = nets.adam_init(disc.size, config.lr_d)
    sigma_target = sigma_target_of(data)
    lam = config.lambda_variance if config.variance_loss else 0.0
    train_rng, eval_rng = streams["train"], streams["eval"]

    log_rows: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        order = train_rng.permutation(len(data))
        loss_g_sum = 0.0
        loss_d_sum = 0.0
        for b in range(n_batches):
            real_batch = data[order[b * config.batch_size:(b + 1) * config.batch_size]]

            # discriminator step
            z = train_rng.standard_normal((config.batch_size, 6))
            fake = generator.sample(z)
            p_real, cache_r = nets.mlp_forward(disc_spec, disc, real_batch)
            loss_r, gp_r = bce_loss(p_real, config.real_label)
            p_fake, cache_f = nets.mlp_forward(disc_spec, disc, fake)
            loss_f, gp_f = bce_loss(p_fake, 0.0)
            gd_r, _ = nets.mlp_backward(disc_spec, disc, cache_r, gp_r)
            gd_f, _ = nets.mlp_backward(disc_spec, disc, cache_f, gp_f)
            loss_d = loss_r + loss_f
            disc = nets.adam_step(adam_d, disc, gd_r + gd_f)

            # generator step (non-saturating loss, optional variance term)
            z = train_rng.standard_normal((config.batch_size, 6))
            w, gcache = generator.forward_batch(z)
            p_gen, cache_g = nets.mlp_forward(disc_spec, disc, w)
            loss_g, gp_g = bce_loss(p_gen, 1.0)
            _, grad_w = nets.mlp_backward(disc_spec, disc, cache_g, gp_g)
            if lam > 0.0:
                loss_v, grad_v = variance_loss(w, sigma_target)
                loss_g += lam * loss_v
                grad_w = grad_w + lam * grad_v
            grads = generator.backward(gcache, grad_w)
            for name, grad in grads.items():
                generator.params[name] = nets.adam_step(adam_g[name], generator.params[name], grad)

            if not (np.isfinite(loss_g) and np.isfinite(loss_d)):
                if run_dir is not None:
                    save_checkpoint(Path(run_dir) / "checkpoint_diagnostic.json",
                                    config, generator, disc, adam_g, adam_d, streams, epoch)
                raise TrainingError(f"non-finite loss at epoch {epoch} (G={loss_g}, D={loss_d})")
            loss_g_sum += loss_g
            loss_d_sum += loss_d

        if epoch % config.eval_every == 0 or epoch == config.epochs:
            row = {"epoch": epoch,
                   "loss_g": loss_g_sum / max(1, n_batches),
                   "loss_d": loss_d_sum / max(1, n_batches)}
            row.update(_quick_eval(generator, config.eval_samples, data, eval_rng, tol))
            log_rows.append(row)
            if run_dir is not None:
                save_checkpoint(Path(run_dir) / f"checkpoint_{epoch:06d}.json",
                                config, generator, disc, adam_g, adam_d, streams, epoch)

    final_samples, report = evaluate(generator, config.final_samples, data, eval_rng, tol,
                                     n_resamples=config.bootstrap_resamples,
                                     boot_rng=streams["bootstrap"])
    if run_dir is not None:
        run_dir = Path(run_dir)
        save_checkpoint(run_dir / "checkpoint_final.json",
                        config, generator, disc, adam_g, adam_d, streams, config.epochs)
        write_trainlog(run_dir / "trainlog.csv", log_rows)
        write_report(run_dir / "metrics.json", report)
        write_histogram(run_dir / "histogram.csv", final_samples)
    return TrainResult(generator, disc, log_rows, report, final_samples)


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def write_trainlog(path, log_rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for row in log_rows:
            writer.writerow([row["epoch"]] + [repr(float(row[c])) for c in LOG_COLUMNS[1:]])


def read_trainlog(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: (int(v) if k == "epoch" else float(v)) for k, v in row.items()}
                for row in reader]


def write_report(path, report: metrics.MetricsReport) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def write_histogram(path, samples: np.ndarray, bins: int = 100) -> None:
    """Pooled edge-weight histogram with plot-ready columns; counts sum to
    the number of pooled values."""
    pooled = np.asarray(samples).ravel()
    counts, edges = np.histogram(np.clip(pooled, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for i, c in enumerate(counts):
            writer.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), int(c)])


def _adam_to_dict(state: nets.AdamState) -> dict:
    return {"m": state.m.tolist(), "v": state.v.tolist(), "t": state.t, "lr": state.lr,
            "beta1": state.beta1, "beta2": state.beta2, "eps": state.eps}


def _adam_from_dict(d: dict) -> nets.AdamState:
    return nets.AdamState(np.array(d["m"]), np.array(d["v"]), d["t"], d["lr"],
                          d["beta1"], d["beta2"], d["eps"])


def save_checkpoint(path, config: TrainConfig, generator, disc: np.ndarray,
                    adam_g: dict, adam_d: nets.AdamState, streams: dict, epoch: int) -> None:
    """Parameters + optimizer moments + RNG states, JSON-encoded (64-bit exact)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model": config.model,
        "config": asdict(config),
        "epoch": epoch,
        "generator_kind": generator.kind,
        "params": {name: p.tolist() for name, p in generator.params.items()},
        "discriminator": disc.tolist(),
        "discriminator_spec": nets.discriminator_spec().signature(),
        "adam_g": {name: _adam_to_dict(s) for name, s in adam_g.items()},
        "adam_d": _adam_to_dict(adam_d),
        "rng": {name: rng.bit_generator.state for name, rng in streams.items()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path):
    """Rebuild (config, generator, discriminator params) from a checkpoint."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise InputError(f"{path} is not a geoqgan checkpoint")
    config = TrainConfig(**payload["config"])
    spec = MODEL_REGISTRY[config.model]
    params = {name: np.array(p) for name, p in payload["params"].items()}
    if payload["generator_kind"] == "classical":
        generator = ClassicalGenerator(params["gen"])
    else:
        generator = QuantumGenerator(ansatz.get_variant(spec.generator),
                                     params["theta"], params.get("scale"))
    return config, generator, np.array(payload["discriminator"])
