# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernel.

Mirrors `_statevec_py` exactly: same kind codes, same conventions
(qubit 0 = most significant bit, R_A(theta) = exp(-i*theta*A/2)),
same function signatures. Plain C loops over the 2^n amplitudes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

DEF K_RX = 0
DEF K_RY = 1
DEF K_RZ = 2
DEF K_H = 3
DEF K_CNOT = 4
DEF K_CZ = 5
DEF K_CRX = 6
DEF K_CRZ = 7

RX, RY, RZ, H, CNOT, CZ, CRX, CRZ = range(8)

ctypedef double complex cplx


cdef void _gate_matrix(long kind, double angle, cplx* u) noexcept nogil:
    cdef double c, s, r
    if kind == K_RX or kind == K_CRX:
        c = cos(angle / 2.0); s = sin(angle / 2.0)
        u[0] = c; u[1] = -1j * s; u[2] = -1j * s; u[3] = c
    elif kind == K_RY:
        c = cos(angle / 2.0); s = sin(angle / 2.0)
        u[0] = c; u[1] = -s; u[2] = s; u[3] = c
    elif kind == K_RZ or kind == K_CRZ:
        c = cos(angle / 2.0); s = sin(angle / 2.0)
        u[0] = c - 1j * s; u[1] = 0; u[2] = 0; u[3] = c + 1j * s
    elif kind == K_H:
        r = 1.0 / sqrt(2.0)
        u[0] = r; u[1] = r; u[2] = r; u[3] = -r
    elif kind == K_CNOT:
        u[0] = 0; u[1] = 1; u[2] = 1; u[3] = 0
    else:  # K_CZ
        u[0] = 1; u[1] = 0; u[2] = 0; u[3] = -1


cdef void _gate_matrix_deriv(long kind, double angle, cplx* u) noexcept nogil:
    cdef double c, s
    c = cos(angle / 2.0); s = sin(angle / 2.0)
    if kind == K_RX or kind == K_CRX:
        u[0] = -0.5 * s; u[1] = -0.5j * c; u[2] = -0.5j * c; u[3] = -0.5 * s
    elif kind == K_RY:
        u[0] = -0.5 * s; u[1] = -0.5 * c; u[2] = 0.5 * c; u[3] = -0.5 * s
    else:  # K_RZ / K_CRZ
        u[0] = -0.5j * (c - 1j * s); u[1] = 0; u[2] = 0; u[3] = 0.5j * (c + 1j * s)


cdef void _apply_1q_c(cplx* state, long dim, long n, long q, cplx* u) noexcept nogil:
    cdef long half = 1 << (n - 1 - q)
    cdef long period = half << 1
    cdef long base, k
    cdef cplx a, b
    base = 0
    while base < dim:
        for k in range(base, base + half):
            a = state[k]; b = state[k + half]
            state[k] = u[0] * a + u[1] * b
            state[k + half] = u[2] * a + u[3] * b
        base += period


cdef void _apply_ctrl_1q_c(cplx* state, long dim, long n, long c, long t,
                           cplx* u, bint zero_rest) noexcept nogil:
    cdef long cm = 1 << (n - 1 - c)
    cdef long tm = 1 << (n - 1 - t)
    cdef long k
    cdef cplx a, b
    for k in range(dim):
        if not (k & cm):
            if zero_rest:
                state[k] = 0
            continue
        if k & tm:
            continue
        a = state[k]; b = state[k | tm]
        state[k] = u[0] * a + u[1] * b
        state[k | tm] = u[2] * a + u[3] * b


cdef inline double _angle_of(long slot, double fixed_angle, double[:] params) noexcept nogil:
    if slot >= 0:
        return params[slot]
    return fixed_angle


cdef void _run_ops_c(long[:] kinds, long[:] controls, long[:] targets,
                     long[:] slots, double[:] fixed, double[:] params,
                     cplx* state, long dim, long n) noexcept nogil:
    cdef long g
    cdef cplx u[4]
    for g in range(kinds.shape[0]):
        _gate_matrix(kinds[g], _angle_of(slots[g], fixed[g], params), u)
        if controls[g] < 0:
            _apply_1q_c(state, dim, n, targets[g], u)
        else:
            _apply_ctrl_1q_c(state, dim, n, controls[g], targets[g], u, False)


def run_ops(long[:] kinds, long[:] controls, long[:] targets, long[:] slots,
            double[:] fixed, double[:] params, cplx[:] state, long n):
    """Apply the compiled gate list to `state` in place."""
    _run_ops_c(kinds, controls, targets, slots, fixed, params,
               &state[0] if state.shape[0] else NULL, state.shape[0], n)


def z_expectations(const cplx[:] state, long n):
    """Exact <Z_q> for each qubit from the amplitudes."""
    out = np.empty(n)
    cdef double[:] ov = out
    cdef long dim = state.shape[0]
    cdef long q, k, mask
    cdef double p1
    cdef cplx a
    for q in range(n):
        mask = 1 << (n - 1 - q)
        p1 = 0.0
        for k in range(dim):
            if k & mask:
                a = state[k]
                p1 += a.real * a.real + a.imag * a.imag
        ov[q] = 1.0 - 2.0 * p1
    return out


def single_qubit_purity(const cplx[:] state, long n, long q):
    """Tr(rho_q^2) of the reduced single-qubit state."""
    cdef long dim = state.shape[0]
    cdef long mask = 1 << (n - 1 - q)
    cdef long k
    cdef double p00 = 0.0, p11 = 0.0
    cdef cplx off = 0, a, b
    for k in range(dim):
        if k & mask:
            continue
        a = state[k]; b = state[k | mask]
        p00 += a.real * a.real + a.imag * a.imag
        p11 += b.real * b.real + b.imag * b.imag
        off += a * b.conjugate()  # rho[0,1] accumulates psi(0,rest)*conj(psi(1,rest))
    return p00 * p00 + p11 * p11 + 2.0 * (off.real * off.real + off.imag * off.imag)


def adjoint_grad(long[:] kinds, long[:] controls, long[:] targets, long[:] slots,
                 double[:] fixed, double[:] params, const cplx[:] psi_in,
                 const double[:] zweights, long n):
    """Forward-evolve psi_in, then back-propagate d<sum_q w_q Z_q>/dtheta_k.

    Returns (psi_out, grads); identical math to the numpy kernel.
    """
    cdef long dim = psi_in.shape[0]
    cdef long nparams = params.shape[0]
    psi_out_arr = np.empty(dim, dtype=np.complex128)
    grads_arr = np.zeros(nparams)
    bra_arr = np.empty(dim, dtype=np.complex128)
    ket_arr = np.empty(dim, dtype=np.complex128)
    tket_arr = np.empty(dim, dtype=np.complex128)

    cdef cplx[:] psi_out = psi_out_arr
    cdef double[:] grads = grads_arr
    cdef cplx[:] bra = bra_arr
    cdef cplx[:] ket = ket_arr
    cdef cplx[:] tket = tket_arr

    cdef long g, k, q, s, kind
    cdef double angle, d, re
    cdef cplx u[4]
    cdef cplx acc

    for k in range(dim):
        psi_out[k] = psi_in[k]
    _run_ops_c(kinds, controls, targets, slots, fixed, params, &psi_out[0], dim, n)

    # bra = diag(sum_q w_q Z_q) * psi_out ; ket = psi_out
    for k in range(dim):
        d = 0.0
        for q in range(n):
            if k & (1 << (n - 1 - q)):
                d -= zweights[q]
            else:
                d += zweights[q]
        bra[k] = d * psi_out[k]
        ket[k] = psi_out[k]

    for g in range(kinds.shape[0] - 1, -1, -1):
        kind = kinds[g]
        angle = _angle_of(slots[g], fixed[g], params)
        _gate_matrix(kind, -angle, u)  # adjoint; H/CNOT/CZ ignore the angle
        if controls[g] < 0:
            _apply_1q_c(&ket[0], dim, n, targets[g], u)
        else:
            _apply_ctrl_1q_c(&ket[0], dim, n, controls[g], targets[g], u, False)
        s = slots[g]
        if s >= 0:
            for k in range(dim):
                tket[k] = ket[k]
            _gate_matrix_deriv(kind, angle, u)
            if controls[g] < 0:
                _apply_1q_c(&tket[0], dim, n, targets[g], u)
            else:
                _apply_ctrl_1q_c(&tket[0], dim, n, controls[g], targets[g], u, True)
            acc = 0
            for k in range(dim):
                acc += bra[k].conjugate() * tket[k]
            grads[s] += 2.0 * acc.real
        _gate_matrix(kind, -angle, u)
        if controls[g] < 0:
            _apply_1q_c(&bra[0], dim, n, targets[g], u)
        else:
            _apply_ctrl_1q_c(&bra[0], dim, n, controls[g], targets[g], u, False)

    return psi_out_arr, grads_arr
