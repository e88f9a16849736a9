"""Geometric-validity and statistical-fidelity metrics for K4 edge-weight samples.

Validity checks follow the fixed edge ordering (AB, AC, AD, BC, BD, CD):
four triangle inequalities over the wire triples and the three
perfect-matching product inequalities. A constraint counts as violated only
when its deficit exceeds the tolerance. Both checks cost O(1) per sample.

Distribution metrics pool all six edge positions into one 1D marginal:
Wasserstein-1 via the exact sorted coupling, Jensen-Shannon on a 50-bin
histogram over [0, 0.5] with base-2 logs. Confidence intervals are
percentile bootstrap.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import InputError, StructuralError

TRIANGLES = ((0, 1, 3), (0, 2, 4), (1, 2, 5), (3, 4, 5))
MATCHING_PRODUCTS = ((1, 4), (0, 5), (2, 3))  # (AC,BD), (AB,CD), (AD,BC)

JS_BINS = 50
JS_RANGE = (0.0, 0.5)


@dataclass(frozen=True)
class ToleranceConfig:
    triangle: float = 1e-2
    ptolemy: float = 1e-2

    def __post_init__(self):
        if self.triangle < 0 or self.ptolemy < 0:
            raise StructuralError("tolerances must be nonnegative")


def _as_batch(samples) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if arr.shape[1] != 6:
        raise StructuralError(f"edge-weight samples must have 6 components, got {arr.shape}")
    return arr


def triangle_valid_batch(samples, eps: float = 1e-2) -> np.ndarray:
    """Per-sample triangle validity over all four 3-node subsets."""
    w = _as_batch(samples)
    ok = np.ones(len(w), dtype=bool)
    for i, j, k in TRIANGLES:
        x, y, z = w[:, i], w[:, j], w[:, k]
        ok &= (x <= y + z + eps) & (y <= x + z + eps) & (z <= x + y + eps)
    return ok


def triangle_valid(w, eps: float = 1e-2) -> bool:
    return bool(triangle_valid_batch(w, eps)[0])


def ptolemaic_valid_batch(samples, eps: float = 1e-2) -> np.ndarray:
    """Per-sample Ptolemaic validity over all three opposite-edge matchings."""
    w = _as_batch(samples)
    prods = [w[:, i] * w[:, j] for i, j in MATCHING_PRODUCTS]
    ok = np.ones(len(w), dtype=bool)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        ok &= prods[a] <= prods[b] + prods[c] + eps
    return ok


def ptolemaic_valid(w, eps: float = 1e-2) -> bool:
    return bool(ptolemaic_valid_batch(w, eps)[0])


def tvs(samples, eps: float = 1e-2) -> float:
    """Fraction of samples whose four triangles all satisfy the inequality."""
    w = _as_batch(samples)
    if len(w) == 0:
        raise InputError("tvs of an empty sample list")
    return float(triangle_valid_batch(w, eps).mean())


def pcm4(samples, eps: float = 1e-2) -> float:
    """Fraction of samples passing all three perfect-matching inequalities."""
    w = _as_batch(samples)
    if len(w) == 0:
        raise InputError("pcm4 of an empty sample list")
    return float(ptolemaic_valid_batch(w, eps).mean())


def sample_std(samples) -> np.ndarray:
    """Population standard deviation across the 6 components, per sample."""
    return np.std(_as_batch(samples), axis=1)


def edge_permutation(vertex_perm) -> np.ndarray:
    """Edge-index permutation induced by relabeling the four vertices.

    Returns perm such that relabeled[perm[e]] = original[e].
    """
    pair_index = {(0, 1): 0, (0, 2): 1, (0, 3): 2, (1, 2): 3, (1, 3): 4, (2, 3): 5}
    pairs = list(pair_index)
    out = np.empty(6, dtype=np.intp)
    for e, (u, v) in enumerate(pairs):
        out[e] = pair_index[tuple(sorted((vertex_perm[u], vertex_perm[v])))]
    return out


def vertex_relabelings():
    """All 24 relabelings of the K4 vertices, as edge permutations."""
    return [edge_permutation(p) for p in permutations(range(4))]


# ---------------------------------------------------------------------------
# distribution metrics
# ---------------------------------------------------------------------------

def _pooled(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InputError("empty sample set")
    return arr


def wasserstein1(generated, real, rng: np.random.Generator | None = None) -> float:
    """W1 between the pooled edge-weight marginals (exact 1D sorted coupling).

    Unequal pool sizes are reconciled by seeded uniform subsampling of the
    larger side.
    """
    g = _pooled(generated)
    r = _pooled(real)
    if g.size != r.size:
        if rng is None:
            rng = np.random.default_rng(0)
        if g.size > r.size:
            g = g[rng.choice(g.size, r.size, replace=False)]
        else:
            r = r[rng.choice(r.size, g.size, replace=False)]
    return float(np.mean(np.abs(np.sort(g) - np.sort(r))))


def _histogram(pool: np.ndarray, bins: int, lo: float, hi: float) -> np.ndarray:
    counts, _ = np.histogram(np.clip(pool, lo, hi), bins=bins, range=(lo, hi))
    return counts / counts.sum()


def js_divergence(generated, real, bins: int = JS_BINS,
                  value_range: tuple[float, float] = JS_RANGE) -> float:
    """Base-2 Jensen-Shannon divergence between discretized pooled marginals.

    Out-of-range mass is clamped into the boundary bins; disjoint supports
    give exactly 1.
    """
    lo, hi = value_range
    p = _histogram(_pooled(generated), bins, lo, hi)
    q = _histogram(_pooled(real), bins, lo, hi)
    m = 0.5 * (p + q)

    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))

    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def bootstrap_ci(values, n_resamples: int = 1000, level: float = 0.95,
                 rng: np.random.Generator | None = None, stat=None):
    """Percentile bootstrap interval for `stat` over rows of `values`.

    `stat` defaults to the mean of the (1D) values; pass a closure for
    compound statistics. Returns (low, high) containing the point estimate.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if n < 2:
        raise InputError("bootstrap needs at least 2 samples")
    if rng is None:
        rng = np.random.default_rng(0)
    if stat is None:
        stat = lambda v: float(np.mean(v))
    point = stat(values)
    stats = np.empty(n_resamples)
    for i in range(n_resamples):
        stats[i] = stat(values[rng.integers(0, n, n)])
    alpha = 0.5 * (1.0 - level)
    low = float(np.quantile(stats, alpha))
    high = float(np.quantile(stats, 1.0 - alpha))
    return min(low, point), max(high, point)


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricInterval:
    point: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class MetricsReport:
    wass: MetricInterval
    js: MetricInterval
    tvs: MetricInterval
    pcm4: MetricInterval
    sigma: MetricInterval

    def to_dict(self) -> dict:
        return {
            name: {"point": iv.point, "ci_low": iv.ci_low, "ci_high": iv.ci_high}
            for name, iv in (("wass", self.wass), ("js", self.js), ("tvs", self.tvs),
                             ("pcm4", self.pcm4), ("sigma", self.sigma))
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**{k: MetricInterval(v["point"], v["ci_low"], v["ci_high"])
                      for k, v in d.items()})

    def csv_row(self) -> dict:
        row = {}
        for name, iv in self.to_dict().items():
            row[name] = iv["point"]
            row[f"{name}_ci_low"] = iv["ci_low"]
            row[f"{name}_ci_high"] = iv["ci_high"]
        return row


def compute_report(generated, real, tol: ToleranceConfig = ToleranceConfig(),
                   n_resamples: int = 1000, level: float = 0.95,
                   rng: np.random.Generator | None = None) -> MetricsReport:
    """Point estimates plus bootstrap CIs for all five evaluation metrics."""
    gen = _as_batch(generated)
    real = _as_batch(real)
    if rng is None:
        rng = np.random.default_rng(0)

    def interval_from_values(vals):
        lo, hi = bootstrap_ci(vals, n_resamples, level, rng)
        return MetricInterval(float(np.mean(vals)), lo, hi)

    tvs_iv = interval_from_values(triangle_valid_batch(gen, tol.triangle).astype(float))
    pcm_iv = interval_from_values(ptolemaic_valid_batch(gen, tol.ptolemy).astype(float))
    sig_iv = interval_from_values(sample_std(gen))

    wass_point = wasserstein1(gen, real, rng=np.random.default_rng(1))
    wlo, whi = bootstrap_ci(gen, n_resamples, level, rng,
                            stat=lambda g: wasserstein1(g, real, rng=np.random.default_rng(1)))
    js_point = js_divergence(gen, real)
    jlo, jhi = bootstrap_ci(gen, n_resamples, level, rng, stat=lambda g: js_divergence(g, real))
    return MetricsReport(
        wass=MetricInterval(wass_point, min(wlo, wass_point), max(whi, wass_point)),
        js=MetricInterval(js_point, min(jlo, js_point), max(jhi, js_point)),
        tvs=tvs_iv, pcm4=pcm_iv, sigma=sig_iv,
    )
