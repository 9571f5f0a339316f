"""Pure-numpy statevector kernel.

Reference implementation of the kernel interface shared with the Cython
extension `_statevec_c`. Qubit 0 is the most significant bit of the basis
index; rotations follow R_A(theta) = exp(-i*theta*A/2).

Gate kind codes (shared across kernels):
    0=RX 1=RY 2=RZ 3=H 4=CNOT 5=CZ 6=CRX 7=CRZ
"""

import math

import numpy as np

RX, RY, RZ, H, CNOT, CZ, CRX, CRZ = range(8)

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def _gate_matrix(kind, angle):
    """2x2 matrix applied to the target qubit (identity block implied for controls)."""
    if kind == RX or kind == CRX:
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == RY:
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == RZ or kind == CRZ:
        e = np.exp(-0.5j * angle)
        return np.array([[e, 0.0], [0.0, e.conjugate()]])
    if kind == H:
        return np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
    if kind == CNOT:
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if kind == CZ:
        return np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    raise ValueError(f"unknown gate kind {kind}")


def _gate_matrix_deriv(kind, angle):
    """d/dtheta of the target-qubit 2x2 block (zero block on control=0 implied)."""
    if kind == RX or kind == CRX:
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[-0.5 * s, -0.5j * c], [-0.5j * c, -0.5 * s]])
    if kind == RY:
        c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
        return np.array([[-0.5 * s, -0.5 * c], [0.5 * c, -0.5 * s]], dtype=complex)
    if kind == RZ or kind == CRZ:
        e = np.exp(-0.5j * angle)
        return np.array([[-0.5j * e, 0.0], [0.0, 0.5j * e.conjugate()]])
    raise ValueError(f"gate kind {kind} is not parametrized")


def apply_1q(state, n, q, u):
    """Apply a 2x2 matrix to qubit q, in place."""
    psi = state.reshape(1 << q, 2, -1)
    a0 = psi[:, 0, :].copy()
    a1 = psi[:, 1, :]
    psi[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    psi[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_ctrl_1q(state, n, c, t, u, zero_rest=False):
    """Apply a 2x2 matrix to qubit t on the control=1 subspace of qubit c, in place.

    With zero_rest=True the control=0 amplitudes are zeroed instead of kept,
    which turns the unitary into the derivative operator of a controlled
    rotation (projector times d/dtheta of the rotation block).
    """
    lo, hi = (c, t) if c < t else (t, c)
    psi = state.reshape(1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n - 1 - hi))
    if c < t:
        sub = psi[:, 1]  # control axis 1, target now axis 2 of sub
        a0 = sub[:, :, 0, :].copy()
        a1 = sub[:, :, 1, :]
        sub[:, :, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        sub[:, :, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
        if zero_rest:
            psi[:, 0] = 0.0
    else:
        sub = psi[:, :, :, 1, :]  # control axis 3, target stays axis 1
        a0 = sub[:, 0, :, :].copy()
        a1 = sub[:, 1, :, :]
        sub[:, 0, :, :] = u[0, 0] * a0 + u[0, 1] * a1
        sub[:, 1, :, :] = u[1, 0] * a0 + u[1, 1] * a1
        if zero_rest:
            psi[:, :, :, 0, :] = 0.0


def _resolve_angle(slots, fixed, params, g):
    s = slots[g]
    return params[s] if s >= 0 else fixed[g]


def run_ops(kinds, controls, targets, slots, fixed, params, state, n):
    """Apply the compiled gate list to `state` in place."""
    for g in range(len(kinds)):
        kind = kinds[g]
        angle = _resolve_angle(slots, fixed, params, g)
        u = _gate_matrix(kind, angle)
        c = controls[g]
        if c < 0:
            apply_1q(state, n, targets[g], u)
        else:
            apply_ctrl_1q(state, n, c, targets[g], u)


def z_expectations(state, n):
    """Exact <Z_q> for each qubit from the amplitudes."""
    probs = state.real**2 + state.imag**2
    out = np.empty(n)
    for q in range(n):
        p1 = probs.reshape(1 << q, 2, -1)[:, 1, :].sum()
        out[q] = 1.0 - 2.0 * p1
    return out


def single_qubit_purity(state, n, q):
    """Tr(rho_q^2) of the reduced single-qubit state."""
    psi = state.reshape(1 << q, 2, -1)
    u = psi[:, 0, :].ravel()
    v = psi[:, 1, :].ravel()
    p00 = np.vdot(u, u).real
    p11 = np.vdot(v, v).real
    off = np.vdot(v, u)  # rho[0,1]
    return p00 * p00 + p11 * p11 + 2.0 * (off.real**2 + off.imag**2)


def _z_diag(zweights, n):
    """Diagonal of sum_q w_q Z_q over the 2^n basis states."""
    dim = 1 << n
    diag = np.zeros(dim)
    idx = np.arange(dim)
    for q in range(n):
        bit = (idx >> (n - 1 - q)) & 1
        diag += zweights[q] * (1.0 - 2.0 * bit)
    return diag


def adjoint_grad(kinds, controls, targets, slots, fixed, params, psi_in, zweights, n):
    """Forward-evolve psi_in, then back-propagate d<sum_q w_q Z_q>/dtheta_k.

    Returns (psi_out, grads). One forward and one backward sweep; exact to
    simulator precision for every parametrized gate.
    """
    nparams = len(params)
    psi = psi_in.copy()
    run_ops(kinds, controls, targets, slots, fixed, params, psi, n)
    psi_out = psi.copy()

    grads = np.zeros(nparams)
    bra = psi * _z_diag(zweights, n)
    ket = psi.copy()
    for g in range(len(kinds) - 1, -1, -1):
        kind = kinds[g]
        angle = _resolve_angle(slots, fixed, params, g)
        u_dag = _gate_matrix(kind, -angle if kind in (RX, RY, RZ, CRX, CRZ) else angle)
        c, t = controls[g], targets[g]
        if c < 0:
            apply_1q(ket, n, t, u_dag)
        else:
            apply_ctrl_1q(ket, n, c, t, u_dag)
        s = slots[g]
        if s >= 0:
            du = _gate_matrix_deriv(kind, angle)
            tket = ket.copy()
            if c < 0:
                apply_1q(tket, n, t, du)
            else:
                apply_ctrl_1q(tket, n, c, t, du, zero_rest=True)
            grads[s] += 2.0 * np.vdot(bra, tket).real
        if c < 0:
            apply_1q(bra, n, t, u_dag)
        else:
            apply_ctrl_1q(bra, n, c, t, u_dag)
    return psi_out, grads
