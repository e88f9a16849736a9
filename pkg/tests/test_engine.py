"""Statevector engine correctness: analytic gate identities, norm/unitarity
properties, and parameter-shift gradients against finite differences."""
import math

import numpy as np
import pytest

from geoqgan import ansatz
from geoqgan.engine import (
    CircuitTemplate, GateOp, apply_gate, expectation_z_all, init_zero,
    param_shift_jacobian, run_circuit, run_circuit_batch,
)
from geoqgan.errors import InputError, StructuralError


def single_rot_template(kind="ry", wire=0):
    return CircuitTemplate((GateOp(kind, (wire,), "param", 0),), 1)


def encoding_template():
    return CircuitTemplate(tuple(GateOp("ry", (w,), "latent", w) for w in range(6)), 0)


def fd_jacobian(template, latent, params, h=1e-5):
    jac = np.zeros((6, len(params)))
    for p in range(len(params)):
        up, down = params.copy(), params.copy()
        up[p] += h
        down[p] -= h
        jac[:, p] = (run_circuit(template, latent, up) - run_circuit(template, latent, down)) / (2 * h)
    return jac


class TestInitAndExpectation:
    def test_init_zero_amplitudes(self):
        state = init_zero()
        assert state[0] == 1.0 + 0.0j
        assert np.all(state[1:] == 0)
        assert len(state) == 64

    def test_init_zero_norm(self):
        assert np.linalg.norm(init_zero()) == 1.0

    def test_init_zero_expectations(self):
        np.testing.assert_array_equal(expectation_z_all(init_zero()), np.ones(6))

    def test_ry_on_qubit3_gives_cos(self):
        for theta in (0.3, 1.1, -2.4):
            state = apply_gate(init_zero(), GateOp("ry", (3,), "const"), theta)
            exp = expectation_z_all(state)
            assert exp[3] == pytest.approx(math.cos(theta), abs=1e-12)
            for w in (0, 1, 2, 4, 5):
                assert exp[w] == pytest.approx(1.0, abs=1e-12)

    def test_uniform_superposition_zero_expectations(self):
        state = init_zero()
        for w in range(6):
            state = apply_gate(state, GateOp("ry", (w,), "const"), math.pi / 2)
        np.testing.assert_allclose(expectation_z_all(state), np.zeros(6), atol=1e-12)


class TestApplyGate:
    def test_rx_pi_flips(self):
        state = apply_gate(init_zero(), GateOp("rx", (0,), "const"), math.pi)
        assert expectation_z_all(state)[0] == pytest.approx(-1.0, abs=1e-12)

    def test_ry_half_pi_equal_superposition(self):
        state = apply_gate(init_zero(), GateOp("ry", (0,), "const"), math.pi / 2)
        assert expectation_z_all(state)[0] == pytest.approx(0.0, abs=1e-12)

    def test_cnot_flips_target_when_control_set(self):
        state = apply_gate(init_zero(), GateOp("rx", (0,), "const"), math.pi)
        state = apply_gate(state, GateOp("cnot", (0, 1)))
        assert expectation_z_all(state)[1] == pytest.approx(-1.0, abs=1e-12)

    def test_cry_identity_on_zero_control(self):
        state = apply_gate(init_zero(), GateOp("cry", (0, 1), "const"), 1.234)
        np.testing.assert_allclose(state, init_zero(), atol=1e-15)

    def test_cry_rotates_when_control_set(self):
        state = apply_gate(init_zero(), GateOp("rx", (2,), "const"), math.pi)
        state = apply_gate(state, GateOp("cry", (2, 4), "const"), 0.8)
        assert expectation_z_all(state)[4] == pytest.approx(math.cos(0.8), abs=1e-12)

    def test_bad_wire_rejected(self):
        with pytest.raises(StructuralError):
            GateOp("ry", (6,), "const")
        with pytest.raises(StructuralError):
            GateOp("cnot", (2, 2))

    def test_non_finite_angle_rejected(self):
        with pytest.raises(InputError):
            apply_gate(init_zero(), GateOp("ry", (0,), "const"), float("nan"))


class TestProperties:
    def _random_gates(self, rng, n=40):
        gates = []
        for _ in range(n):
            kind = rng.choice(["rx", "ry", "rz", "cnot", "cry"])
            if kind == "cnot" or kind == "cry":
                c, t = rng.choice(6, 2, replace=False)
                src = "none" if kind == "cnot" else "const"
                gates.append((GateOp(kind, (int(c), int(t)), src), rng.uniform(-3, 3)))
            else:
                gates.append((GateOp(kind, (int(rng.integers(6)),), "const"), rng.uniform(-3, 3)))
        return gates

    def test_norm_preserved_random_sequences(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            state = init_zero()
            for gate, angle in self._random_gates(rng):
                state = apply_gate(state, gate, angle)
                assert abs(np.vdot(state, state).real - 1.0) < 1e-12

    def test_gate_then_inverse_restores_state(self):
        rng = np.random.default_rng(12)
        state = init_zero()
        for gate, angle in self._random_gates(rng, 15):
            state = apply_gate(state, gate, angle)
        for gate, angle in self._random_gates(rng, 25):
            after = apply_gate(state, gate, angle)
            if gate.kind == "cnot":
                restored = apply_gate(after, gate)
            else:
                restored = apply_gate(after, gate, -angle)
            np.testing.assert_allclose(restored, state, atol=1e-12)

    def test_expectations_bounded(self):
        rng = np.random.default_rng(13)
        state = init_zero()
        for gate, angle in self._random_gates(rng, 60):
            state = apply_gate(state, gate, angle)
        exp = expectation_z_all(state)
        assert np.all(np.abs(exp) <= 1.0 + 1e-12)

    def test_determinism(self):
        var = ansatz.get_variant("combined")
        tmpl = ansatz.build_template(var)
        rng = np.random.default_rng(14)
        latent = rng.standard_normal(6)
        params = rng.normal(0, 0.4, 90)
        first = run_circuit(tmpl, latent, params)
        for _ in range(3):
            again = run_circuit(tmpl, latent, params)
            assert np.array_equal(first, again)


class TestRunCircuit:
    def test_zero_layers_zero_latent(self):
        np.testing.assert_allclose(run_circuit(encoding_template(), np.zeros(6), np.zeros(0)),
                                   np.ones(6), atol=1e-15)

    def test_zero_layers_pi_latent(self):
        out = run_circuit(encoding_template(), np.array([math.pi, 0, 0, 0, 0, 0]), np.zeros(0))
        np.testing.assert_allclose(out, [-1, 1, 1, 1, 1, 1], atol=1e-12)

    def test_triangle_identity_at_zero(self):
        # all-zero params and latent: rotations are identity and every CNOT
        # control stays |0>, so the state never leaves |0...0>
        tmpl = ansatz.build_template(ansatz.get_variant("triangle"))
        out = run_circuit(tmpl, np.zeros(6), np.zeros(90))
        np.testing.assert_allclose(out, np.ones(6), atol=1e-12)

    def test_param_count_mismatch(self):
        tmpl = ansatz.build_template(ansatz.get_variant("ring"))
        with pytest.raises(StructuralError):
            run_circuit(tmpl, np.zeros(6), np.zeros(89))

    def test_batch_matches_single(self):
        tmpl = ansatz.build_template(ansatz.get_variant("opposite"))
        rng = np.random.default_rng(5)
        latents = rng.standard_normal((8, 6))
        params = rng.normal(0, 0.3, 90)
        batch = run_circuit_batch(tmpl, latents, params)
        for b in range(8):
            np.testing.assert_allclose(batch[b], run_circuit(tmpl, latents[b], params), atol=1e-13)


class TestParameterShift:
    def test_single_ry_at_zero(self):
        jac = param_shift_jacobian(single_rot_template(), np.zeros(6), np.zeros(1))
        assert jac[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_single_ry_at_half_pi(self):
        jac = param_shift_jacobian(single_rot_template(), np.zeros(6),
                                   np.array([math.pi / 2]))
        assert jac[0, 0] == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("name", ansatz.VARIANT_NAMES)
    def test_matches_finite_differences(self, name):
        var = ansatz.get_variant(name)
        tmpl = ansatz.build_template(var)
        rng = np.random.default_rng(hash(name) % 2**32)
        latent = rng.standard_normal(6)
        params = rng.normal(0, 0.5, var.n_params())
        jac = param_shift_jacobian(tmpl, latent, params)
        np.testing.assert_allclose(jac, fd_jacobian(tmpl, latent, params), atol=1e-6)

    def test_cry_only_template_matches_fd(self):
        gates = (GateOp("ry", (0,), "latent", 0), GateOp("ry", (1,), "latent", 1),
                 GateOp("cry", (0, 1), "param", 0), GateOp("cry", (1, 2), "param", 1))
        tmpl = CircuitTemplate(gates, 2)
        rng = np.random.default_rng(42)
        latent = rng.standard_normal(6)
        params = rng.normal(0, 0.7, 2)
        np.testing.assert_allclose(param_shift_jacobian(tmpl, latent, params),
                                   fd_jacobian(tmpl, latent, params), atol=1e-7)
