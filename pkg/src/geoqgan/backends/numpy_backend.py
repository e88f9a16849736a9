"""Pure-numpy statevector kernels (fallback backend).

Implements the same flat-program API as the compiled kernel: a program is a
set of parallel arrays (gate kind, wires, angle source) executed against a
batch of 6-qubit statevectors held as a (64, B) complex array.

Conventions: qubit 0 is the most significant bit of the basis index, so wire
w occupies bit position 5 - w. Rotation matrices follow
RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] and analogues.
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"

N_QUBITS = 6
DIM = 1 << N_QUBITS

KIND_RX, KIND_RY, KIND_RZ, KIND_CNOT, KIND_CRY = 0, 1, 2, 3, 4
SRC_NONE, SRC_LATENT, SRC_PARAM, SRC_CONST = 0, 1, 2, 3

_IDX = np.arange(DIM)

# pair tables per wire: indices with the wire bit clear, partner = index + step
_PAIR0 = {}
for _w in range(N_QUBITS):
    _step = 1 << (N_QUBITS - 1 - _w)
    _PAIR0[_w] = _IDX[(_IDX & _step) == 0]

# sign table for <sigma_z>: SIGNS[i, w] = +1 if bit of wire w is 0 else -1
SIGNS = np.empty((DIM, N_QUBITS), dtype=np.float64)
for _w in range(N_QUBITS):
    SIGNS[:, _w] = 1.0 - 2.0 * ((_IDX >> (N_QUBITS - 1 - _w)) & 1)


def _apply_rot(psi: np.ndarray, kind: int, wire: int, angle) -> None:
    """Apply RX/RY/RZ(angle) on `wire` in place; angle scalar or (B,)."""
    half = np.multiply(angle, 0.5)
    c, s = np.cos(half), np.sin(half)
    i0 = _PAIR0[wire]
    i1 = i0 + (1 << (N_QUBITS - 1 - wire))
    a0 = psi[i0]
    a1 = psi[i1]
    if kind == KIND_RX:
        psi[i0] = c * a0 - 1j * s * a1
        psi[i1] = -1j * s * a0 + c * a1
    elif kind == KIND_RY:
        psi[i0] = c * a0 - s * a1
        psi[i1] = s * a0 + c * a1
    else:  # RZ
        psi[i0] = (c - 1j * s) * a0
        psi[i1] = (c + 1j * s) * a1


def _apply_cnot(psi: np.ndarray, control: int, target: int) -> None:
    cmask = 1 << (N_QUBITS - 1 - control)
    tmask = 1 << (N_QUBITS - 1 - target)
    i0 = _IDX[((_IDX & cmask) != 0) & ((_IDX & tmask) == 0)]
    i1 = i0 + tmask
    swapped = psi[i0].copy()
    psi[i0] = psi[i1]
    psi[i1] = swapped


def _apply_cry(psi: np.ndarray, control: int, target: int, angle) -> None:
    cmask = 1 << (N_QUBITS - 1 - control)
    tmask = 1 << (N_QUBITS - 1 - target)
    half = np.multiply(angle, 0.5)
    c, s = np.cos(half), np.sin(half)
    i0 = _IDX[((_IDX & cmask) != 0) & ((_IDX & tmask) == 0)]
    i1 = i0 + tmask
    a0 = psi[i0]
    a1 = psi[i1]
    psi[i0] = c * a0 - s * a1
    psi[i1] = s * a0 + c * a1


def _resolve_angle(src: int, idx: int, coeff: float, latents: np.ndarray, params: np.ndarray):
    if src == SRC_LATENT:
        return coeff * latents[:, idx]
    if src == SRC_PARAM:
        return coeff * params[idx]
    return coeff  # SRC_CONST: coeff is the angle itself


def _apply_gate_seq(psi, start, stop, kind, w0, w1, src, idx, coeff,
                    latents, params, shift_gate, shift):
    for g in range(start, stop):
        k = kind[g]
        if k == KIND_CNOT:
            _apply_cnot(psi, w0[g], w1[g])
            continue
        angle = _resolve_angle(src[g], idx[g], coeff[g], latents, params)
        if g == shift_gate:
            angle = angle + shift
        if k == KIND_CRY:
            _apply_cry(psi, w0[g], w1[g], angle)
        else:
            _apply_rot(psi, k, w0[g], angle)


def _expectations(psi: np.ndarray, out: np.ndarray) -> None:
    prob = psi.real ** 2 + psi.imag ** 2  # (64, B)
    np.matmul(prob.T, SIGNS, out=out)


def run_program(kind, w0, w1, src, idx, coeff, latents, params,
                shift_gate: int, shift: float, out: np.ndarray) -> None:
    """Execute the program from |0...0> and write <sigma_z> rows into out (B, 6).

    When shift_gate >= 0 the gate at that index gets `shift` added to its
    resolved angle (parameter-shift evaluation).
    """
    batch = latents.shape[0]
    psi = np.zeros((DIM, batch), dtype=np.complex128)
    psi[0] = 1.0
    _apply_gate_seq(psi, 0, len(kind), kind, w0, w1, src, idx, coeff,
                    latents, params, shift_gate, shift)
    _expectations(psi, out)


def vjp_program(kind, w0, w1, src, idx, coeff,
                diff_gate, diff_param, diff_coeff,
                latents, params, out_grad, grad: np.ndarray) -> None:
    """Accumulate sum_b J_b^T out_grad_b into grad via the two-term shift rule.

    Forward states are snapshotted before each differentiated gate so every
    shifted evaluation replays only that gate and its suffix.
    """
    batch = latents.shape[0]
    n_gates = len(kind)
    psi = np.zeros((DIM, batch), dtype=np.complex128)
    psi[0] = 1.0
    snapshots = []
    pos = 0
    for d in range(len(diff_gate)):
        g = diff_gate[d]
        _apply_gate_seq(psi, pos, g, kind, w0, w1, src, idx, coeff,
                        latents, params, -1, 0.0)
        snapshots.append(psi.copy())
        pos = g
    expect = np.empty((batch, N_QUBITS))
    half_pi = 0.5 * np.pi
    for d in range(len(diff_gate)):
        g = diff_gate[d]
        contrib = 0.0
        for sign in (1.0, -1.0):
            work = snapshots[d].copy()
            _apply_gate_seq(work, g, n_gates, kind, w0, w1, src, idx, coeff,
                            latents, params, g, sign * half_pi)
            _expectations(work, expect)
            contrib += sign * float(np.sum(expect * out_grad))
        grad[diff_param[d]] += diff_coeff[d] * 0.5 * contrib
