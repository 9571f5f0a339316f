"""Dense statevector simulation of few-qubit circuits.

Conventions, used consistently everywhere:
  * qubit 0 is the most significant bit of the basis-state index, so
    |q0 q1 q2 q3> lives at amplitude index q0*8 + q1*4 + q2*2 + q3;
  * rotations are R_A(theta) = exp(-i*theta*A/2) for A in {X, Y, Z};
  * controlled rotations apply R_A(theta) to the target iff the control
    qubit is |1>; wires list the control first.

States are plain complex128 numpy arrays of length 2^n. The heavy loops
live in the kernel selected by `backend` (compiled or pure numpy).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .backend import kernel as _k

GATE_KINDS = ("RX", "RY", "RZ", "H", "CNOT", "CZ", "CRX", "CRZ")
_KIND_CODE = {name: code for code, name in enumerate(GATE_KINDS)}
PARAMETRIZED_KINDS = frozenset({"RX", "RY", "RZ", "CRX", "CRZ"})
TWO_QUBIT_KINDS = frozenset({"CNOT", "CZ", "CRX", "CRZ"})


class InvalidCircuitError(ValueError):
    """Raised for malformed gates, bad wires, or parameter-count mismatches."""


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, wires (control first for two-qubit kinds), and either
    a parameter slot or a fixed angle for rotation kinds."""

    kind: str
    wires: tuple
    param_slot: Optional[int] = None
    fixed_angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise InvalidCircuitError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.wires) != want:
            raise InvalidCircuitError(
                f"{self.kind} takes {want} wire(s), got {self.wires}"
            )
        if len(set(self.wires)) != len(self.wires):
            raise InvalidCircuitError(f"duplicate wires in {self.wires}")
        if self.kind in PARAMETRIZED_KINDS:
            if (self.param_slot is None) == (self.fixed_angle is None):
                raise InvalidCircuitError(
                    f"{self.kind} needs exactly one of param_slot/fixed_angle"
                )
        elif self.param_slot is not None or self.fixed_angle is not None:
            raise InvalidCircuitError(f"{self.kind} takes no angle")


@dataclass(frozen=True)
class CompiledOps:
    """Kernel-ready arrays for a gate sequence (see kernel kind codes)."""

    kinds: np.ndarray
    controls: np.ndarray
    targets: np.ndarray
    slots: np.ndarray
    fixed: np.ndarray
    num_qubits: int
    param_count: int = field(default=0)

    def __len__(self):
        return len(self.kinds)


def compile_gates(gates: Sequence[GateOp], num_qubits: int) -> CompiledOps:
    """Validate a gate list and pack it into kernel arrays."""
    g = len(gates)
    kinds = np.zeros(g, dtype=np.int64)
    controls = np.full(g, -1, dtype=np.int64)
    targets = np.zeros(g, dtype=np.int64)
    slots = np.full(g, -1, dtype=np.int64)
    fixed = np.zeros(g)
    max_slot = -1
    for i, gate in enumerate(gates):
        for w in gate.wires:
            if not 0 <= w < num_qubits:
                raise InvalidCircuitError(
                    f"wire {w} out of range for {num_qubits} qubits"
                )
        kinds[i] = _KIND_CODE[gate.kind]
        if gate.kind in TWO_QUBIT_KINDS:
            controls[i], targets[i] = gate.wires
        else:
            targets[i] = gate.wires[0]
        if gate.param_slot is not None:
            if gate.param_slot < 0:
                raise InvalidCircuitError(f"negative param slot {gate.param_slot}")
            slots[i] = gate.param_slot
            max_slot = max(max_slot, gate.param_slot)
        elif gate.fixed_angle is not None:
            fixed[i] = gate.fixed_angle
    return CompiledOps(
        kinds=kinds,
        controls=controls,
        targets=targets,
        slots=slots,
        fixed=fixed,
        num_qubits=num_qubits,
        param_count=max_slot + 1,
    )


def zero_state(num_qubits: int = 4) -> np.ndarray:
    state = np.zeros(1 << num_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def basis_state(index: int, num_qubits: int = 4) -> np.ndarray:
    state = np.zeros(1 << num_qubits, dtype=np.complex128)
    state[index] = 1.0
    return state


def num_qubits_of(state: np.ndarray) -> int:
    n = int(len(state)).bit_length() - 1
    if 1 << n != len(state):
        raise ValueError(f"state length {len(state)} is not a power of two")
    return n


def _check_params(compiled: CompiledOps, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64) if params is not None else np.empty(0)
    if len(params) != compiled.param_count:
        raise InvalidCircuitError(
            f"expected {compiled.param_count} parameters, got {len(params)}"
        )
    return params


def apply_gate(state: np.ndarray, gate: GateOp, params=None) -> np.ndarray:
    """Apply a single gate, returning a new state (norm preserved)."""
    n = num_qubits_of(state)
    compiled = compile_gates([gate], n)
    if gate.param_slot is not None:
        params = np.asarray(params, dtype=np.float64) if params is not None else np.empty(0)
        if gate.param_slot >= len(params):
            raise InvalidCircuitError(
                f"param slot {gate.param_slot} outside vector of length {len(params)}"
            )
        angles = params
    else:
        angles = np.empty(0)
    out = np.array(state, dtype=np.complex128, copy=True)
    _k.run_ops(
        compiled.kinds, compiled.controls, compiled.targets,
        compiled.slots, compiled.fixed, angles, out, n,
    )
    return out


def run_circuit(template, params=None, input_state: Optional[np.ndarray] = None) -> np.ndarray:
    """Run a circuit template on input_state (default |0...0>), returning the output state."""
    compiled = template.compiled
    n = compiled.num_qubits
    params = _check_params(compiled, params)
    if input_state is None:
        out = zero_state(n)
    else:
        if len(input_state) != (1 << n):
            raise InvalidCircuitError(
                f"input state has dimension {len(input_state)}, circuit expects {1 << n}"
            )
        out = np.array(input_state, dtype=np.complex128, copy=True)
    _k.run_ops(
        compiled.kinds, compiled.controls, compiled.targets,
        compiled.slots, compiled.fixed, params, out, n,
    )
    return out


def z_expectations(state: np.ndarray) -> np.ndarray:
    """<Z_q> for every qubit, exact (infinite-shot limit), phase invariant."""
    return _k.z_expectations(np.ascontiguousarray(state, dtype=np.complex128),
                             num_qubits_of(state))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for two normalized states of equal dimension."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    ov = np.vdot(a, b)
    return float(ov.real**2 + ov.imag**2)


def circuit_gradient(template, params, input_state=None, observable_weights=None):
    """Gradient of <sum_q w_q Z_q> after the circuit w.r.t. every parameter slot.

    Computed with an adjoint-style backward sweep (exact; one forward pass
    plus one reverse pass over the gate list).
    """
    compiled = template.compiled
    n = compiled.num_qubits
    params = _check_params(compiled, params)
    psi = zero_state(n) if input_state is None else np.ascontiguousarray(
        input_state, dtype=np.complex128
    )
    if len(psi) != (1 << n):
        raise InvalidCircuitError(
            f"input state has dimension {len(psi)}, circuit expects {1 << n}"
        )
    w = np.asarray(observable_weights, dtype=np.float64)
    if len(w) != n:
        raise ValueError(f"need {n} observable weights, got {len(w)}")
    _, grads = _k.adjoint_grad(
        compiled.kinds, compiled.controls, compiled.targets,
        compiled.slots, compiled.fixed, params, psi, w, n,
    )
    return grads


def forward_and_gradient(template, params, input_state, observable_weights):
    """Output state and the gradient in one kernel call (shared sweeps)."""
    compiled = template.compiled
    n = compiled.num_qubits
    params = _check_params(compiled, params)
    w = np.asarray(observable_weights, dtype=np.float64)
    psi_out, grads = _k.adjoint_grad(
        compiled.kinds, compiled.controls, compiled.targets,
        compiled.slots, compiled.fixed, params,
        np.ascontiguousarray(input_state, dtype=np.complex128), w, n,
    )
    return psi_out, grads


def reduced_single_qubit_purity(state: np.ndarray, qubit: int) -> float:
    """Tr(rho_q^2) of one qubit's reduced density matrix; 0.5 <= value <= 1."""
    n = num_qubits_of(state)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    return float(
        _k.single_qubit_purity(
            np.ascontiguousarray(state, dtype=np.complex128), n, qubit
        )
    )
