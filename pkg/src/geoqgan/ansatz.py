"""Circuit templates for every entanglement topology variant.

Wire assignment is the fixed edge ordering of K4 on vertices A<B<C<D:
AB->0, AC->1, AD->2, BC->3, BD->4, CD->5. The four triangles and the three
opposite-edge pairs index into that ordering. Each template is the latent
encoding (one RY per wire) followed by `layers` blocks of per-wire
RX,RY,RZ rotations and the variant's entanglers. CNOT variants run 5
layers, CRot variants 3, so every variant carries exactly 90 trainable
parameters.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .engine import CircuitTemplate, GateOp, N_QUBITS, run_circuit, run_circuit_batch
from .errors import StructuralError

EDGE_LABELS = ("AB", "AC", "AD", "BC", "BD", "CD")

# triangle wire triples in vertex order ABC, ABD, ACD, BCD
TRIANGLE_WIRES = ((0, 1, 3), (0, 2, 4), (1, 2, 5), (3, 4, 5))

# the three perfect matchings of K4, as wire pairs
OPPOSITE_WIRE_PAIRS = ((0, 5), (1, 4), (2, 3))

QUANTUM_PARAM_COUNT = 90


@dataclass(frozen=True)
class TopologyVariant:
    name: str
    layers: int
    entangler: str  # "cnot" | "cry"
    pairs: tuple[tuple[int, int], ...]

    def params_per_layer(self) -> int:
        return 3 * N_QUBITS + (len(self.pairs) if self.entangler == "cry" else 0)

    def n_params(self) -> int:
        return self.layers * self.params_per_layer()


def ring_pairs() -> tuple[tuple[int, int], ...]:
    return tuple((i, (i + 1) % N_QUBITS) for i in range(N_QUBITS))


def all_to_all_pairs() -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(N_QUBITS), 2))


def triangle_pairs(cyclic: bool = False) -> tuple[tuple[int, int], ...]:
    pairs = []
    for a, b, c in TRIANGLE_WIRES:
        if cyclic:
            pairs += [(a, b), (b, c), (c, a)]
        else:
            pairs += [(a, b), (a, c), (b, c)]
    return tuple(pairs)


def opposite_pairs() -> tuple[tuple[int, int], ...]:
    return OPPOSITE_WIRE_PAIRS


def combined_pairs() -> tuple[tuple[int, int], ...]:
    return triangle_pairs() + opposite_pairs()


def _matchings(wires: tuple[int, ...]):
    """All perfect matchings of an even wire set."""
    if not wires:
        yield ()
        return
    first, rest = wires[0], wires[1:]
    for i, second in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _matchings(remaining):
            yield ((first, second),) + tail


def opposite_pairs_from_data(samples: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Data-driven variant of the opposite layout: the disjoint wire pairing
    with the most negative summed correlation in the training samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != N_QUBITS or samples.shape[0] < 2:
        raise StructuralError("need a (N, 6) sample matrix with N >= 2")
    corr = np.corrcoef(samples, rowvar=False)
    best = min(_matchings(tuple(range(N_QUBITS))),
               key=lambda m: sum(corr[i, j] for i, j in m))
    return tuple(sorted(best))


def _make_variants() -> dict[str, TopologyVariant]:
    table = {
        "ring": TopologyVariant("ring", 5, "cnot", ring_pairs()),
        "all_to_all": TopologyVariant("all_to_all", 5, "cnot", all_to_all_pairs()),
        "triangle": TopologyVariant("triangle", 5, "cnot", triangle_pairs()),
        "opposite": TopologyVariant("opposite", 5, "cnot", opposite_pairs()),
        "combined": TopologyVariant("combined", 5, "cnot", combined_pairs()),
        "triangle_cyclic_cnot": TopologyVariant(
            "triangle_cyclic_cnot", 5, "cnot", triangle_pairs(cyclic=True)),
        "triangle_cyclic_crot": TopologyVariant(
            "triangle_cyclic_crot", 3, "cry", triangle_pairs(cyclic=True)),
        "triangle_noncyclic_cnot": TopologyVariant(
            "triangle_noncyclic_cnot", 5, "cnot", triangle_pairs()),
        "triangle_noncyclic_crot": TopologyVariant(
            "triangle_noncyclic_crot", 3, "cry", triangle_pairs()),
    }
    for variant in table.values():
        if variant.n_params() != QUANTUM_PARAM_COUNT:
            raise StructuralError(
                f"{variant.name}: {variant.n_params()} parameters, expected {QUANTUM_PARAM_COUNT}")
    return table


VARIANTS = _make_variants()
VARIANT_NAMES = tuple(VARIANTS.keys())


def get_variant(name: str) -> TopologyVariant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise StructuralError(
            f"unknown topology {name!r}; known: {', '.join(VARIANT_NAMES)}") from None


def entangler_pairs(variant: TopologyVariant) -> tuple[tuple[int, int], ...]:
    """Ordered (control, target) couplings for one variational layer."""
    return variant.pairs


@lru_cache(maxsize=None)
def build_template(variant: TopologyVariant) -> CircuitTemplate:
    """Encoding layer plus `variant.layers` rotation+entangler blocks."""
    gates = [GateOp("ry", (w,), "latent", w) for w in range(N_QUBITS)]
    p = 0
    for _ in range(variant.layers):
        for w in range(N_QUBITS):
            for axis in ("rx", "ry", "rz"):
                gates.append(GateOp(axis, (w,), "param", p))
                p += 1
        for c, t in variant.pairs:
            if variant.entangler == "cnot":
                gates.append(GateOp("cnot", (c, t)))
            else:
                gates.append(GateOp("cry", (c, t), "param", p))
                p += 1
    assert p == variant.n_params()
    return CircuitTemplate(tuple(gates), p)


def first_layer_ry_indices() -> tuple[int, ...]:
    """Parameter indices of the first variational layer's RY rotations."""
    return tuple(w * 3 + 1 for w in range(N_QUBITS))


def init_quantum_params(variant: TopologyVariant, rng: np.random.Generator,
                        std: float = 0.1) -> np.ndarray:
    """Angles ~ N(0, std^2), with the first layer's RY rotations biased to
    pi/2 so each wire starts at the steepest point of its response.

    Without the bias the raw outputs crowd toward +1 and the normalized
    samples start far more uniform (hence more geometry-valid) than the
    data, which inverts the validity-over-epochs trend during adversarial
    training. Entangling angles keep the same small spread.
    """
    theta = rng.normal(0.0, std, variant.n_params())
    theta[list(first_layer_ry_indices())] += 0.5 * np.pi
    return theta


def quantum_generator_forward(variant: TopologyVariant, latent, params) -> np.ndarray:
    """Raw Pauli-Z outputs in [-1, 1]^6 for one latent vector."""
    return run_circuit(build_template(variant), latent, params)


def quantum_generator_forward_batch(variant: TopologyVariant, latents, params) -> np.ndarray:
    return run_circuit_batch(build_template(variant), latents, params)
