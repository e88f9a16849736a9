"""Classical network components: MLPs with reverse-mode gradients, the
simplex/scaling output heads, and the Adam optimizer.

Parameters live in flat float64 vectors, serialized layer by layer as
weights (row-major, shape (out, in)) then biases. All forward passes are
batched over axis 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError, TrainingError

LEAKY_SLOPE = 0.01
HEAD_EPS = 1e-8

ACTIVATIONS = ("leaky_relu", "sigmoid", "softmax", "identity")


@dataclass(frozen=True)
class MlpSpec:
    widths: tuple[int, ...]
    activations: tuple[str, ...]

    def __post_init__(self):
        if len(self.activations) != len(self.widths) - 1:
            raise StructuralError("need one activation per layer transition")
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise StructuralError(f"unknown activation {a!r}")

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    def signature(self) -> str:
        return "mlp:" + "-".join(map(str, self.widths)) + ":" + ",".join(self.activations)


def generator_spec() -> MlpSpec:
    """Baseline classical generator: 6 -> 6 leaky-rectifier -> 6 softmax (84 params)."""
    return MlpSpec((6, 6, 6), ("leaky_relu", "softmax"))


def discriminator_spec() -> MlpSpec:
    """Shared three-hidden-layer discriminator with scalar sigmoid output.

    Width matters: narrower critics judge the sample spread too coarsely,
    which lets the generator overshoot the data's dispersion early in
    training and stalls geometric validity.
    """
    return MlpSpec((6, 64, 32, 16, 1), ("leaky_relu", "leaky_relu", "leaky_relu", "sigmoid"))


def param_count(spec: MlpSpec) -> int:
    return sum((i + 1) * o for i, o in zip(spec.widths[:-1], spec.widths[1:]))


def _layer_views(spec: MlpSpec, params: np.ndarray):
    """Yield (W, b) views into the flat parameter vector, layer by layer."""
    if params.shape != (param_count(spec),):
        raise StructuralError(
            f"expected {param_count(spec)} parameters for {spec.signature()}, got {params.shape}")
    off = 0
    for n_in, n_out in zip(spec.widths[:-1], spec.widths[1:]):
        w = params[off:off + n_in * n_out].reshape(n_out, n_in)
        off += n_in * n_out
        b = params[off:off + n_out]
        off += n_out
        yield w, b


def init_mlp_params(spec: MlpSpec, rng: np.random.Generator) -> np.ndarray:
    """He-style init for leaky-rectifier layers, Xavier-style otherwise; zero biases."""
    params = np.zeros(param_count(spec))
    off = 0
    for n_in, n_out, act in zip(spec.widths[:-1], spec.widths[1:], spec.activations):
        gain = np.sqrt(2.0) if act == "leaky_relu" else 1.0
        params[off:off + n_in * n_out] = rng.normal(0.0, gain / np.sqrt(n_in), n_in * n_out)
        off += n_in * n_out + n_out
    return params


@dataclass
class MlpCache:
    spec: MlpSpec
    inputs: list = field(default_factory=list)   # per-layer input x_l
    outputs: list = field(default_factory=list)  # per-layer activated output


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def mlp_forward(spec: MlpSpec, params: np.ndarray, x: np.ndarray):
    """Batched forward pass; returns (output (B, out), cache for backprop)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != spec.widths[0]:
        raise StructuralError(f"input width {x.shape[1]} != {spec.widths[0]}")
    cache = MlpCache(spec)
    a = x
    for (w, b), act in zip(_layer_views(spec, params), spec.activations):
        cache.inputs.append(a)
        z = a @ w.T + b
        if act == "leaky_relu":
            a = np.where(z > 0, z, LEAKY_SLOPE * z)
        elif act == "sigmoid":
            a = 1.0 / (1.0 + np.exp(-z))
        elif act == "softmax":
            a = _softmax(z)
        else:
            a = z
        cache.outputs.append(a)
    return a, cache


def mlp_backward(spec: MlpSpec, params: np.ndarray, cache: MlpCache, gy: np.ndarray):
    """Gradients of a scalar loss: returns (flat parameter gradient, input gradient)."""
    if cache.spec != spec or len(cache.inputs) != spec.n_layers:
        raise StructuralError("cache does not match this spec (stale or foreign cache)")
    gy = np.atleast_2d(np.asarray(gy, dtype=np.float64))
    layers = list(_layer_views(spec, params))
    gparams = np.zeros_like(params)
    goff = param_count(spec)
    g = gy
    for li in range(spec.n_layers - 1, -1, -1):
        w, _ = layers[li]
        x_l, a = cache.inputs[li], cache.outputs[li]
        act = spec.activations[li]
        if act == "leaky_relu":
            gz = g * np.where(a > 0, 1.0, LEAKY_SLOPE)
        elif act == "sigmoid":
            gz = g * a * (1.0 - a)
        elif act == "softmax":
            gz = a * (g - np.sum(g * a, axis=1, keepdims=True))
        else:
            gz = g
        n_in, n_out = w.shape[1], w.shape[0]
        goff -= n_out
        gparams[goff:goff + n_out] = gz.sum(axis=0)
        goff -= n_in * n_out
        gparams[goff:goff + n_in * n_out] = (gz.T @ x_l).ravel()
        g = gz @ w
    return gparams, g


# ---------------------------------------------------------------------------
# output heads
# ---------------------------------------------------------------------------

def _normalize(scaled: np.ndarray):
    # max() keeps the outputs exactly on the simplex whenever any mass exists;
    # eps only guards the all-zero corner.
    denom = np.maximum(scaled.sum(axis=1, keepdims=True), HEAD_EPS)
    return scaled / denom, denom


def simplex_forward(v: np.ndarray):
    """Affine map of raw circuit outputs in [-1,1] onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    vp = 0.5 * (1.0 + v)
    w, denom = _normalize(vp)
    return w, (w, denom)


def simplex_backward(cache, gw: np.ndarray) -> np.ndarray:
    w, denom = cache
    gvp = (gw - np.sum(gw * w, axis=1, keepdims=True)) / denom
    return 0.5 * gvp


def simplex_head(v: np.ndarray) -> np.ndarray:
    return simplex_forward(v)[0]


def softplus(a: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, a)


def scaling_init() -> np.ndarray:
    """Pre-scale parameters giving neutral effective scales (alpha = 1)."""
    return np.full(6, np.log(np.e - 1.0))


def scaling_forward(a: np.ndarray, v: np.ndarray):
    """Learnable per-edge rescaling between the affine shift and the simplex projection.

    Effective scales are softplus(a) normalized to unit mean, so a global
    rescaling of the raw scales provably cancels and uniform scales reduce
    to the plain simplex head.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    alpha = softplus(a)
    alpha_bar = alpha / alpha.mean()
    vp = 0.5 * (1.0 + v)
    s = alpha_bar * vp
    w, denom = _normalize(s)
    return w, (a, alpha, alpha_bar, vp, w, denom)


def scaling_backward(cache, gw: np.ndarray):
    """Returns (gradient wrt raw outputs v, gradient wrt pre-scale params a)."""
    a, alpha, alpha_bar, vp, w, denom = cache
    gs = (gw - np.sum(gw * w, axis=1, keepdims=True)) / denom
    gv = 0.5 * gs * alpha_bar
    g_abar = np.sum(gs * vp, axis=0)
    m = alpha.mean()
    galpha = g_abar / m - np.dot(g_abar, alpha) / (len(a) * m * m)
    ga = galpha / (1.0 + np.exp(-a))  # softplus' = logistic
    return gv, ga


def scaling_head(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    return scaling_forward(a, v)[0]


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int
    lr: float
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(n: int, lr: float, beta1: float = 0.5, beta2: float = 0.999) -> AdamState:
    return AdamState(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameter vector."""
    if params.shape != grad.shape or params.shape != state.m.shape:
        raise StructuralError("parameter/gradient/moment length mismatch")
    if not np.all(np.isfinite(grad)):
        raise TrainingError("non-finite gradient passed to adam_step")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
