# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels (the training hot path).

Same flat-program API and conventions as numpy_backend.py. States are held
as separate real/imaginary (64, B) arrays so the per-gate batch loops stay
contiguous and vectorizable. The vjp entry point snapshots the forward
state before every differentiated gate, so each shifted evaluation replays
only that gate plus its suffix.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

NAME = "cython"

cdef enum:
    DIM = 64
    NQ = 6
    KIND_RX = 0
    KIND_RY = 1
    KIND_RZ = 2
    KIND_CNOT = 3
    KIND_CRY = 4
    SRC_LATENT = 1
    SRC_PARAM = 2

_SGN_ARR = np.empty((64, 6))
for _i in range(64):
    for _w in range(6):
        _SGN_ARR[_i, _w] = 1.0 if ((_i >> (5 - _w)) & 1) == 0 else -1.0
cdef double[:, ::1] SGN = _SGN_ARR


cdef void _rot(double[:, ::1] re, double[:, ::1] im, int kind, int wire,
               double* cs, double* sn, int B) noexcept nogil:
    cdef int step = 1 << (NQ - 1 - wire)
    cdef int two_step = 2 * step
    cdef int base = 0
    cdef int off, i0, i1, b
    cdef double c, s, r0, u0, r1, u1
    while base < DIM:
        for off in range(step):
            i0 = base + off
            i1 = i0 + step
            if kind == KIND_RY:
                for b in range(B):
                    c = cs[b]; s = sn[b]
                    r0 = re[i0, b]; u0 = im[i0, b]; r1 = re[i1, b]; u1 = im[i1, b]
                    re[i0, b] = c * r0 - s * r1
                    im[i0, b] = c * u0 - s * u1
                    re[i1, b] = s * r0 + c * r1
                    im[i1, b] = s * u0 + c * u1
            elif kind == KIND_RX:
                for b in range(B):
                    c = cs[b]; s = sn[b]
                    r0 = re[i0, b]; u0 = im[i0, b]; r1 = re[i1, b]; u1 = im[i1, b]
                    re[i0, b] = c * r0 + s * u1
                    im[i0, b] = c * u0 - s * r1
                    re[i1, b] = s * u0 + c * r1
                    im[i1, b] = -s * r0 + c * u1
            else:  # RZ
                for b in range(B):
                    c = cs[b]; s = sn[b]
                    r0 = re[i0, b]; u0 = im[i0, b]; r1 = re[i1, b]; u1 = im[i1, b]
                    re[i0, b] = c * r0 + s * u0
                    im[i0, b] = c * u0 - s * r0
                    re[i1, b] = c * r1 - s * u1
                    im[i1, b] = c * u1 + s * r1
        base += two_step


cdef void _cnot(double[:, ::1] re, double[:, ::1] im, int control, int target,
                int B) noexcept nogil:
    cdef int cmask = 1 << (NQ - 1 - control)
    cdef int tmask = 1 << (NQ - 1 - target)
    cdef int i, i1, b
    cdef double tmp
    for i in range(DIM):
        if (i & cmask) != 0 and (i & tmask) == 0:
            i1 = i | tmask
            for b in range(B):
                tmp = re[i, b]; re[i, b] = re[i1, b]; re[i1, b] = tmp
                tmp = im[i, b]; im[i, b] = im[i1, b]; im[i1, b] = tmp


cdef void _cry(double[:, ::1] re, double[:, ::1] im, int control, int target,
               double* cs, double* sn, int B) noexcept nogil:
    cdef int cmask = 1 << (NQ - 1 - control)
    cdef int tmask = 1 << (NQ - 1 - target)
    cdef int i, i1, b
    cdef double c, s, r0, u0, r1, u1
    for i in range(DIM):
        if (i & cmask) != 0 and (i & tmask) == 0:
            i1 = i | tmask
            for b in range(B):
                c = cs[b]; s = sn[b]
                r0 = re[i, b]; u0 = im[i, b]; r1 = re[i1, b]; u1 = im[i1, b]
                re[i, b] = c * r0 - s * r1
                im[i, b] = c * u0 - s * u1
                re[i1, b] = s * r0 + c * r1
                im[i1, b] = s * u0 + c * u1


cdef void _exec(double[:, ::1] re, double[:, ::1] im,
                signed char[::1] kind, signed char[::1] w0, signed char[::1] w1,
                signed char[::1] src, short[::1] idx, double[::1] coeff,
                double[:, ::1] latents, double[::1] params,
                int start, int stop, int shift_gate, double shift,
                double* cbuf, double* sbuf, int B) noexcept nogil:
    cdef int g, b, k
    cdef double ang, half, c0, s0
    for g in range(start, stop):
        k = kind[g]
        if k == KIND_CNOT:
            _cnot(re, im, w0[g], w1[g], B)
            continue
        if src[g] == SRC_LATENT:
            for b in range(B):
                ang = coeff[g] * latents[b, idx[g]]
                if g == shift_gate:
                    ang += shift
                half = 0.5 * ang
                cbuf[b] = cos(half)
                sbuf[b] = sin(half)
        else:
            if src[g] == SRC_PARAM:
                ang = coeff[g] * params[idx[g]]
            else:
                ang = coeff[g]
            if g == shift_gate:
                ang += shift
            half = 0.5 * ang
            c0 = cos(half)
            s0 = sin(half)
            for b in range(B):
                cbuf[b] = c0
                sbuf[b] = s0
        if k == KIND_CRY:
            _cry(re, im, w0[g], w1[g], cbuf, sbuf, B)
        else:
            _rot(re, im, k, w0[g], cbuf, sbuf, B)


cdef void _expect(double[:, ::1] re, double[:, ::1] im, double[:, ::1] out,
                  int B) noexcept nogil:
    cdef int i, b, w
    cdef double p
    for b in range(B):
        for w in range(NQ):
            out[b, w] = 0.0
    for i in range(DIM):
        for b in range(B):
            p = re[i, b] * re[i, b] + im[i, b] * im[i, b]
            for w in range(NQ):
                out[b, w] += p * SGN[i, w]


def run_program(signed char[::1] kind, signed char[::1] w0, signed char[::1] w1,
                signed char[::1] src, short[::1] idx, double[::1] coeff,
                double[:, ::1] latents, double[::1] params,
                int shift_gate, double shift, double[:, ::1] out):
    """Execute the program from |0...0> and write <sigma_z> into out (B, 6)."""
    cdef int B = latents.shape[0]
    cdef int G = kind.shape[0]
    re_arr = np.zeros((DIM, B))
    im_arr = np.zeros((DIM, B))
    cb_arr = np.empty(B)
    sb_arr = np.empty(B)
    cdef double[:, ::1] re = re_arr
    cdef double[:, ::1] im = im_arr
    cdef double[::1] cb = cb_arr
    cdef double[::1] sb = sb_arr
    cdef int b
    with nogil:
        for b in range(B):
            re[0, b] = 1.0
        _exec(re, im, kind, w0, w1, src, idx, coeff, latents, params,
              0, G, shift_gate, shift, &cb[0], &sb[0], B)
        _expect(re, im, out, B)


def vjp_program(signed char[::1] kind, signed char[::1] w0, signed char[::1] w1,
                signed char[::1] src, short[::1] idx, double[::1] coeff,
                cnp.int32_t[::1] diff_gate, cnp.int32_t[::1] diff_param,
                double[::1] diff_coeff,
                double[:, ::1] latents, double[::1] params,
                double[:, ::1] out_grad, double[::1] grad):
    """Accumulate sum_b J_b^T out_grad_b into grad via the two-term shift rule."""
    cdef int B = latents.shape[0]
    cdef int G = kind.shape[0]
    cdef int D = diff_gate.shape[0]
    snap_arr = np.empty((max(D, 1), 2, DIM, B))
    re_arr = np.zeros((DIM, B))
    im_arr = np.zeros((DIM, B))
    wre_arr = np.empty((DIM, B))
    wim_arr = np.empty((DIM, B))
    exp_arr = np.empty((B, NQ))
    cb_arr = np.empty(B)
    sb_arr = np.empty(B)
    cdef double[:, :, :, ::1] snap = snap_arr
    cdef double[:, ::1] re = re_arr
    cdef double[:, ::1] im = im_arr
    cdef double[:, ::1] wre = wre_arr
    cdef double[:, ::1] wim = wim_arr
    cdef double[:, ::1] ebuf = exp_arr
    cdef double[::1] cb = cb_arr
    cdef double[::1] sb = sb_arr
    cdef int d, g, b, i, w, pos, sgn
    cdef double acc, total
    cdef double half_pi = 0.5 * M_PI
    with nogil:
        for b in range(B):
            re[0, b] = 1.0
        pos = 0
        for d in range(D):
            g = diff_gate[d]
            _exec(re, im, kind, w0, w1, src, idx, coeff, latents, params,
                  pos, g, -1, 0.0, &cb[0], &sb[0], B)
            for i in range(DIM):
                for b in range(B):
                    snap[d, 0, i, b] = re[i, b]
                    snap[d, 1, i, b] = im[i, b]
            pos = g
        for d in range(D):
            g = diff_gate[d]
            total = 0.0
            for sgn in range(2):
                for i in range(DIM):
                    for b in range(B):
                        wre[i, b] = snap[d, 0, i, b]
                        wim[i, b] = snap[d, 1, i, b]
                _exec(wre, wim, kind, w0, w1, src, idx, coeff, latents, params,
                      g, G, g, half_pi if sgn == 0 else -half_pi,
                      &cb[0], &sb[0], B)
                _expect(wre, wim, ebuf, B)
                acc = 0.0
                for b in range(B):
                    for w in range(NQ):
                        acc += ebuf[b, w] * out_grad[b, w]
                total += acc if sgn == 0 else -acc
            grad[diff_param[d]] += diff_coeff[d] * 0.5 * total
