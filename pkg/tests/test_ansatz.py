"""Topology layouts, parameter counts, and generator forward behavior."""
import numpy as np
import pytest

from geoqgan import ansatz
from geoqgan.ansatz import (
    TopologyVariant, build_template, entangler_pairs, get_variant,
    init_quantum_params, opposite_pairs_from_data, quantum_generator_forward,
    quantum_generator_forward_batch, triangle_pairs,
)
from geoqgan.engine import run_circuit
from geoqgan.errors import StructuralError

CNOT_VARIANTS = [n for n in ansatz.VARIANT_NAMES if get_variant(n).entangler == "cnot"]
CROT_VARIANTS = [n for n in ansatz.VARIANT_NAMES if get_variant(n).entangler == "cry"]


class TestPairs:
    def test_ring(self):
        assert entangler_pairs(get_variant("ring")) == (
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0))

    def test_all_to_all_is_every_pair(self):
        pairs = entangler_pairs(get_variant("all_to_all"))
        assert len(pairs) == 15
        assert len(set(pairs)) == 15
        assert all(c < t for c, t in pairs)

    def test_opposite_matchings(self):
        assert entangler_pairs(get_variant("opposite")) == ((0, 5), (1, 4), (2, 3))

    def test_triangle_noncyclic_order(self):
        assert triangle_pairs()[:3] == ((0, 1), (0, 3), (1, 3))
        assert triangle_pairs()[-3:] == ((3, 4), (3, 5), (4, 5))
        assert len(triangle_pairs()) == 12

    def test_triangle_cyclic_first_triangle(self):
        assert entangler_pairs(get_variant("triangle_cyclic_cnot"))[:3] == (
            (0, 1), (1, 3), (3, 0))

    def test_combined_is_triangle_then_opposite(self):
        combined = entangler_pairs(get_variant("combined"))
        assert combined == triangle_pairs() + ((0, 5), (1, 4), (2, 3))
        assert len(set(combined)) == 15

    def test_wire_map_identities(self):
        # triangle triples and opposite pairs partition consistently: every
        # triangle shares exactly one wire with each opposite pair
        for tri in ansatz.TRIANGLE_WIRES:
            for a, b in ansatz.OPPOSITE_WIRE_PAIRS:
                assert len({a, b} & set(tri)) == 1


class TestTemplates:
    @pytest.mark.parametrize("name", ansatz.VARIANT_NAMES)
    def test_ninety_parameters(self, name):
        assert build_template(get_variant(name)).n_params == 90

    def test_layer_structure_triangle(self):
        tmpl = build_template(get_variant("triangle"))
        kinds = [g.kind for g in tmpl.gates]
        assert kinds.count("cnot") == 5 * 12
        assert kinds.count("ry") == 6 + 5 * 6  # encoding + per-layer rotations
        assert get_variant("triangle").layers == 5

    def test_layer_structure_crot(self):
        tmpl = build_template(get_variant("triangle_cyclic_crot"))
        kinds = [g.kind for g in tmpl.gates]
        assert kinds.count("cry") == 3 * 12
        assert kinds.count("cnot") == 0
        assert get_variant("triangle_cyclic_crot").layers == 3

    def test_triangle_alias_matches_noncyclic_cnot(self):
        assert (build_template(get_variant("triangle")).gates
                == build_template(get_variant("triangle_noncyclic_cnot")).gates)

    def test_unknown_variant(self):
        with pytest.raises(StructuralError):
            get_variant("pentagon")

    def test_custom_variant_count_guard(self):
        lopsided = TopologyVariant("lopsided", 4, "cnot", ansatz.ring_pairs())
        assert lopsided.n_params() == 72  # not registered, so not forced to 90


class TestForward:
    @pytest.mark.parametrize("name", ansatz.VARIANT_NAMES)
    def test_identity_at_zero(self, name):
        out = quantum_generator_forward(get_variant(name), np.zeros(6), np.zeros(90))
        np.testing.assert_allclose(out, np.ones(6), atol=1e-12)

    def test_encoding_only_gives_cosines(self):
        zero_layer = TopologyVariant("bare", 0, "cnot", ())
        rng = np.random.default_rng(2)
        for _ in range(5):
            z = rng.standard_normal(6)
            out = run_circuit(build_template(zero_layer), z, np.zeros(0))
            np.testing.assert_allclose(out, np.cos(z), atol=1e-12)

    def test_ring_pi_latent_zero_params(self):
        # each wire encodes |1>; CNOT ring then flips targets deterministically
        out = quantum_generator_forward(get_variant("ring"), np.full(6, np.pi), np.zeros(90))
        np.testing.assert_allclose(np.abs(out), np.ones(6), atol=1e-12)

    def test_output_bounds_random_draws(self):
        rng = np.random.default_rng(3)
        for name in ("triangle", "triangle_cyclic_crot"):
            var = get_variant(name)
            params = init_quantum_params(var, rng)
            latents = rng.standard_normal((1000, 6))
            out = quantum_generator_forward_batch(var, latents, params)
            assert np.all(out <= 1.0 + 1e-12) and np.all(out >= -1.0 - 1e-12)

    def test_init_params_shape_and_scale(self):
        rng = np.random.default_rng(4)
        params = init_quantum_params(get_variant("combined"), rng)
        assert params.shape == (90,)
        biased = list(ansatz.first_layer_ry_indices())
        rest = [i for i in range(90) if i not in biased]
        assert abs(params[rest].std() - 0.1) < 0.05
        assert abs(params[biased].mean() - np.pi / 2) < 0.15


class TestDataDrivenOpposite:
    def test_recovers_planted_anticorrelation(self):
        rng = np.random.default_rng(5)
        u, v, w = rng.standard_normal((3, 4000))
        samples = np.stack([u, v, w, -w, -v, -u], axis=1) + 0.01 * rng.standard_normal((4000, 6))
        assert opposite_pairs_from_data(samples) == ((0, 5), (1, 4), (2, 3))

    def test_pairs_are_disjoint(self):
        rng = np.random.default_rng(6)
        pairs = opposite_pairs_from_data(rng.dirichlet(np.ones(6), 500))
        wires = [w for p in pairs for w in p]
        assert sorted(wires) == list(range(6))

    def test_rejects_bad_shape(self):
        with pytest.raises(StructuralError):
            opposite_pairs_from_data(np.zeros((5, 4)))
