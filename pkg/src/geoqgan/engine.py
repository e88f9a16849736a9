"""Dense 6-qubit statevector engine.

Exact (noiseless) simulation of the edge-register: gate application,
Pauli-Z expectation readout, circuit execution over latent/parameter angle
sources, and parameter-shift Jacobians. Batched execution is delegated to
the active kernel backend; the small single-state helpers here always use
the numpy kernels.

Angle bookkeeping: a gate's angle is coeff * source_value (latent component
or trainable parameter), or just coeff for constants. Controlled-RY gates
are differentiated by rewriting CRY(t) as RY(t/2) CNOT RY(-t/2) CNOT on the
target wire, which reduces every derivative to the two-term shift rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .backends import active as _backend
from .backends import numpy_backend as _npk
from .errors import InputError, StructuralError

N_QUBITS = _npk.N_QUBITS
DIM = _npk.DIM

ROTATION_KINDS = ("rx", "ry", "rz")
GATE_KINDS = ROTATION_KINDS + ("cnot", "cry")
ANGLE_SOURCES = ("latent", "param", "const")

_KIND_CODE = {"rx": _npk.KIND_RX, "ry": _npk.KIND_RY, "rz": _npk.KIND_RZ,
              "cnot": _npk.KIND_CNOT, "cry": _npk.KIND_CRY}
_SRC_CODE = {"none": _npk.SRC_NONE, "latent": _npk.SRC_LATENT,
             "param": _npk.SRC_PARAM, "const": _npk.SRC_CONST}


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, wires, and where its angle (if any) comes from."""

    kind: str
    wires: tuple[int, ...]
    source: str = "none"
    index: int = -1
    coeff: float = 1.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise StructuralError(f"unknown gate kind {self.kind!r}")
        expected = 2 if self.kind in ("cnot", "cry") else 1
        if len(self.wires) != expected:
            raise StructuralError(f"{self.kind} expects {expected} wire(s), got {self.wires}")
        for w in self.wires:
            if not 0 <= w < N_QUBITS:
                raise StructuralError(f"wire index {w} out of range [0, {N_QUBITS})")
        if len(set(self.wires)) != len(self.wires):
            raise StructuralError(f"duplicate wires in {self.wires}")
        if self.kind == "cnot":
            if self.source != "none":
                raise StructuralError("cnot carries no angle")
        else:
            if self.source not in ANGLE_SOURCES:
                raise StructuralError(f"{self.kind} needs an angle source, got {self.source!r}")
            if self.source in ("latent", "param") and self.index < 0:
                raise StructuralError("latent/param gates need a nonnegative index")


@dataclass(frozen=True)
class CircuitTemplate:
    """Ordered gate list plus the declared trainable parameter count."""

    gates: tuple[GateOp, ...]
    n_params: int

    def __post_init__(self):
        for g in self.gates:
            if g.source == "param" and g.index >= self.n_params:
                raise StructuralError(
                    f"gate references parameter {g.index} but template declares {self.n_params}")
            if g.source == "latent" and g.index >= N_QUBITS:
                raise StructuralError(f"latent index {g.index} out of range")


class _Program:
    """Flat array encoding of a gate list, as consumed by the kernels."""

    def __init__(self, gates: tuple[GateOp, ...]):
        n = len(gates)
        self.kind = np.empty(n, dtype=np.int8)
        self.w0 = np.empty(n, dtype=np.int8)
        self.w1 = np.empty(n, dtype=np.int8)
        self.src = np.empty(n, dtype=np.int8)
        self.idx = np.empty(n, dtype=np.int16)
        self.coeff = np.empty(n, dtype=np.float64)
        for i, g in enumerate(gates):
            self.kind[i] = _KIND_CODE[g.kind]
            self.w0[i] = g.wires[0]
            self.w1[i] = g.wires[1] if len(g.wires) == 2 else -1
            self.src[i] = _SRC_CODE[g.source]
            self.idx[i] = g.index
            self.coeff[i] = g.coeff

    def run(self, latents, params, out, shift_gate=-1, shift=0.0):
        _backend.run_program(self.kind, self.w0, self.w1, self.src, self.idx,
                             self.coeff, latents, params, shift_gate, shift, out)


class _Compiled:
    def __init__(self, template: CircuitTemplate):
        self.n_params = template.n_params
        self.forward = _Program(template.gates)
        expanded: list[GateOp] = []
        for g in template.gates:
            if g.kind == "cry" and g.source == "param":
                c, t = g.wires
                expanded.append(GateOp("ry", (t,), g.source, g.index, 0.5 * g.coeff))
                expanded.append(GateOp("cnot", (c, t)))
                expanded.append(GateOp("ry", (t,), g.source, g.index, -0.5 * g.coeff))
                expanded.append(GateOp("cnot", (c, t)))
            else:
                expanded.append(g)
        self.diff = _Program(tuple(expanded))
        entries = [(i, g.index, g.coeff) for i, g in enumerate(expanded) if g.source == "param"]
        self.diff_gate = np.array([e[0] for e in entries], dtype=np.int32)
        self.diff_param = np.array([e[1] for e in entries], dtype=np.int32)
        self.diff_coeff = np.array([e[2] for e in entries], dtype=np.float64)


@lru_cache(maxsize=None)
def _compile(template: CircuitTemplate) -> _Compiled:
    return _Compiled(template)


# ---------------------------------------------------------------------------
# single-state operations
# ---------------------------------------------------------------------------

def init_zero() -> np.ndarray:
    """|0...0> as a 64-component complex amplitude vector."""
    state = np.zeros(DIM, dtype=np.complex128)
    state[0] = 1.0
    return state


def apply_gate(state: np.ndarray, gate: GateOp, angle: float = 0.0) -> np.ndarray:
    """Return the state transformed by `gate` with the given angle (radians)."""
    if gate.kind != "cnot" and not math.isfinite(angle):
        raise InputError(f"non-finite gate angle {angle!r}")
    psi = np.array(state, dtype=np.complex128).reshape(DIM, 1)
    if gate.kind == "cnot":
        _npk._apply_cnot(psi, gate.wires[0], gate.wires[1])
    elif gate.kind == "cry":
        _npk._apply_cry(psi, gate.wires[0], gate.wires[1], angle)
    else:
        _npk._apply_rot(psi, _KIND_CODE[gate.kind], gate.wires[0], angle)
    return psi[:, 0]


def expectation_z_all(state: np.ndarray) -> np.ndarray:
    """Per-wire <sigma_z>, each in [-1, 1]."""
    prob = state.real ** 2 + state.imag ** 2
    return prob @ _npk.SIGNS


# ---------------------------------------------------------------------------
# circuit execution
# ---------------------------------------------------------------------------

def _check_inputs(template, latents, params):
    if params.shape != (template.n_params,):
        raise StructuralError(
            f"template declares {template.n_params} parameters, got {params.shape}")
    if latents.shape[-1] != N_QUBITS:
        raise StructuralError(f"latent vectors must have {N_QUBITS} components")


def run_circuit(template: CircuitTemplate, latent, params) -> np.ndarray:
    """Execute the template for one latent vector; returns the 6 <sigma_z> values."""
    latent = np.asarray(latent, dtype=np.float64).reshape(1, -1)
    params = np.asarray(params, dtype=np.float64)
    _check_inputs(template, latent, params)
    out = np.empty((1, N_QUBITS))
    _compile(template).forward.run(latent, params, out)
    return out[0]


def run_circuit_batch(template: CircuitTemplate, latents, params) -> np.ndarray:
    """Vectorized run_circuit over a (B, 6) latent batch; returns (B, 6)."""
    latents = np.ascontiguousarray(latents, dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    _check_inputs(template, latents, params)
    out = np.empty((latents.shape[0], N_QUBITS))
    _compile(template).forward.run(latents, params, out)
    return out


def param_shift_jacobian(template: CircuitTemplate, latent, params) -> np.ndarray:
    """d<sigma_z_i>/d theta_p for all outputs, via the parameter-shift rule.

    Returns a (6, P) matrix. Trainable controlled-RY angles are handled
    through the two-CNOT decomposition, summing both shifted-rule halves.
    """
    latent = np.ascontiguousarray(np.reshape(latent, (1, -1)), dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    _check_inputs(template, latent, params)
    comp = _compile(template)
    jac = np.zeros((N_QUBITS, template.n_params))
    e_plus = np.empty((1, N_QUBITS))
    e_minus = np.empty((1, N_QUBITS))
    for g, p, c in zip(comp.diff_gate, comp.diff_param, comp.diff_coeff):
        comp.diff.run(latent, params, e_plus, shift_gate=int(g), shift=0.5 * math.pi)
        comp.diff.run(latent, params, e_minus, shift_gate=int(g), shift=-0.5 * math.pi)
        jac[:, p] += c * 0.5 * (e_plus[0] - e_minus[0])
    return jac


def param_shift_vjp(template: CircuitTemplate, latents, params, out_grad) -> np.ndarray:
    """Sum over the batch of J_b^T g_b without materializing per-sample Jacobians."""
    latents = np.ascontiguousarray(latents, dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    out_grad = np.ascontiguousarray(out_grad, dtype=np.float64)
    _check_inputs(template, latents, params)
    comp = _compile(template)
    grad = np.zeros(template.n_params)
    _backend.vjp_program(comp.diff.kind, comp.diff.w0, comp.diff.w1, comp.diff.src,
                         comp.diff.idx, comp.diff.coeff,
                         comp.diff_gate, comp.diff_param, comp.diff_coeff,
                         latents, params, out_grad, grad)
    return grad
