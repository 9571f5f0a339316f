"""The basis-embedding circuit and the 19 four-qubit benchmark templates.

Each template is declarative data: an ordered gate list with parameter
slots assigned in order of appearance. Directed entanglers (CNOT, CRX,
CRZ) in linear chains run control = higher wire -> target = next lower
wire, applied in descending order; circular and shifted-circular layers
follow the standard drawings of this circuit family. `dump_template`
renders the table as text for visual verification.

Model weight count for a template with P parameters is W = 2P + 25
(two independently parametrized circuits plus a 4x4+4 policy head and a
4x1+1 value head).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

from .statevec import CompiledOps, GateOp, compile_gates

NUM_QUBITS = 4
NUM_BENCHMARK_CIRCUITS = 19
HEAD_WEIGHTS = 4 * 4 + 4 + 4 * 1 + 1  # linear policy + value heads


@dataclass(frozen=True)
class CircuitTemplate:
    """Immutable gate program with parameter slots 0..param_count-1."""

    id: object  # 1..19 or "embedding"
    gates: Tuple[GateOp, ...]
    param_count: int
    entangler_kind: str
    topology: str
    num_qubits: int = NUM_QUBITS
    compiled: CompiledOps = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        compiled = compile_gates(self.gates, self.num_qubits)
        slots = sorted(g.param_slot for g in self.gates if g.param_slot is not None)
        if slots != list(range(self.param_count)) or compiled.param_count != self.param_count:
            raise ValueError(
                f"circuit {self.id}: slots {slots} do not cover 0..{self.param_count - 1}"
            )
        object.__setattr__(self, "compiled", compiled)


class _Builder:
    """Accumulates gates, assigning parameter slots in order of appearance."""

    def __init__(self):
        self.gates = []
        self.next_slot = 0

    def rot(self, kind, wire):
        self.gates.append(GateOp(kind, (wire,), param_slot=self.next_slot))
        self.next_slot += 1

    def crot(self, kind, control, target):
        self.gates.append(GateOp(kind, (control, target), param_slot=self.next_slot))
        self.next_slot += 1

    def fixed(self, kind, wire, angle):
        self.gates.append(GateOp(kind, (wire,), fixed_angle=angle))

    def plain(self, kind, *wires):
        self.gates.append(GateOp(kind, tuple(wires)))

    def rot_layer(self, kind, wires=range(NUM_QUBITS)):
        for q in wires:
            self.rot(kind, q)


# Entangler wire orders (control, target); CZ ignores direction.
_LINEAR = [(3, 2), (2, 1), (1, 0)]
_LINEAR_SWAPPED = [(1, 0), (3, 2), (2, 1)]  # linear with last two gates reordered
_ALL_TO_ALL = [
    (c, t) for c in (3, 2, 1, 0) for t in (3, 2, 1, 0) if t != c
]
_CIRCULAR = [(3, 0), (2, 3), (1, 2), (0, 1)]
_SHIFTED_ALT = [(3, 2), (0, 3), (1, 0), (2, 1)]
_CZ_CHAIN = [(2, 3), (1, 2), (0, 1)]
_CZ_CIRCULAR = _CZ_CHAIN + [(3, 0)]


def _rx_rz_block(b):
    b.rot_layer("RX")
    b.rot_layer("RZ")


def _entangled_linear(kind, order=_LINEAR):
    b = _Builder()
    _rx_rz_block(b)
    for c, t in order:
        if kind == "CNOT":
            b.plain("CNOT", c, t)
        else:
            b.crot(kind, c, t)
    return b


def _universal(kind):
    # two RX/RZ blocks around an all-to-all controlled-rotation wall
    b = _Builder()
    _rx_rz_block(b)
    for c, t in _ALL_TO_ALL:
        b.crot(kind, c, t)
    _rx_rz_block(b)
    return b


def _paired(kind):
    # pairwise entanglers (1->0, 3->2), middle block, then (2->1)
    b = _Builder()
    _rx_rz_block(b)
    b.crot(kind, 1, 0)
    b.crot(kind, 3, 2)
    _rx_rz_block(b)
    b.crot(kind, 2, 1)
    return b


def _sampler(entangler):
    # RY/RZ columns, paired entanglers, inner RY/RZ on middle wires, closing entangler
    b = _Builder()
    b.rot_layer("RY")
    b.rot_layer("RZ")
    for c, t in ((1, 0), (3, 2)):
        b.plain(entangler, c, t)
    b.rot("RY", 1)
    b.rot("RY", 2)
    b.rot("RZ", 1)
    b.rot("RZ", 2)
    b.plain(entangler, 2, 1)
    return b


def _ring_pair(kind):
    # RY column, circular entanglers, RY column, shifted-circular-alternating entanglers
    b = _Builder()
    b.rot_layer("RY")
    for c, t in _CIRCULAR:
        if kind == "CNOT":
            b.plain("CNOT", c, t)
        else:
            b.crot(kind, c, t)
    b.rot_layer("RY")
    for c, t in _SHIFTED_ALT:
        if kind == "CNOT":
            b.plain("CNOT", c, t)
        else:
            b.crot(kind, c, t)
    return b


def _circular_rot(kind):
    b = _Builder()
    _rx_rz_block(b)
    for c, t in _CIRCULAR:
        b.crot(kind, c, t)
    return b


def _build_benchmark(circuit_id):
    if circuit_id == 1:
        b = _Builder()
        _rx_rz_block(b)
        return b, "none", "none"
    if circuit_id == 2:
        return _entangled_linear("CNOT"), "CNOT", "linear"
    if circuit_id == 3:
        return _entangled_linear("CRZ"), "CRZ", "linear"
    if circuit_id == 4:
        return _entangled_linear("CRX"), "CRX", "linear"
    if circuit_id == 5:
        return _universal("CRZ"), "CRZ", "all-to-all"
    if circuit_id == 6:
        return _universal("CRX"), "CRX", "all-to-all"
    if circuit_id == 7:
        return _paired("CRZ"), "CRZ", "pairwise"
    if circuit_id == 8:
        return _paired("CRX"), "CRX", "pairwise"
    if circuit_id == 9:
        b = _Builder()
        for q in range(NUM_QUBITS):
            b.plain("H", q)
        for c, t in _CZ_CHAIN:
            b.plain("CZ", c, t)
        b.rot_layer("RX")
        return b, "CZ", "linear"
    if circuit_id == 10:
        b = _Builder()
        b.rot_layer("RY")
        for c, t in _CZ_CIRCULAR:
            b.plain("CZ", c, t)
        b.rot_layer("RY")
        return b, "CZ", "circular"
    if circuit_id == 11:
        return _sampler("CNOT"), "CNOT", "pairwise"
    if circuit_id == 12:
        return _sampler("CZ"), "CZ", "pairwise"
    if circuit_id == 13:
        return _ring_pair("CRZ"), "CRZ", "shifted-circular-alternating"
    if circuit_id == 14:
        return _ring_pair("CRX"), "CRX", "shifted-circular-alternating"
    if circuit_id == 15:
        return _ring_pair("CNOT"), "CNOT", "shifted-circular-alternating"
    if circuit_id == 16:
        return _entangled_linear("CRZ", _LINEAR_SWAPPED), "CRZ", "linear"
    if circuit_id == 17:
        return _entangled_linear("CRX", _LINEAR_SWAPPED), "CRX", "linear"
    if circuit_id == 18:
        return _circular_rot("CRZ"), "CRZ", "circular"
    if circuit_id == 19:
        return _circular_rot("CRX"), "CRX", "circular"
    raise ValueError(f"circuit id must be 1..{NUM_BENCHMARK_CIRCUITS}, got {circuit_id}")


@lru_cache(maxsize=None)
def benchmark_circuit(circuit_id: int) -> CircuitTemplate:
    """Single-layer template for benchmark circuit 1..19."""
    builder, entangler, topology = _build_benchmark(int(circuit_id))
    return CircuitTemplate(
        id=int(circuit_id),
        gates=tuple(builder.gates),
        param_count=builder.next_slot,
        entangler_kind=entangler,
        topology=topology,
    )


@lru_cache(maxsize=None)
def embedding_circuit(state_index: int) -> CircuitTemplate:
    """Parameter-free basis embedding of an environment state 0..15.

    Bit i of the index (most significant bit first) drives RX(pi*b) then
    RZ(pi*b) on qubit i, turning |0000> into the matching basis state up
    to a global phase.
    """
    if not 0 <= state_index < (1 << NUM_QUBITS):
        raise ValueError(f"state index must be 0..15, got {state_index}")
    b = _Builder()
    for q in range(NUM_QUBITS):
        bit = (state_index >> (NUM_QUBITS - 1 - q)) & 1
        b.fixed("RX", q, math.pi * bit)
        b.fixed("RZ", q, math.pi * bit)
    return CircuitTemplate(
        id="embedding",
        gates=tuple(b.gates),
        param_count=0,
        entangler_kind="none",
        topology="none",
    )


def param_count_table() -> dict:
    """id -> (P, W) for all benchmark circuits, W = 2P + 25."""
    table = {}
    for cid in range(1, NUM_BENCHMARK_CIRCUITS + 1):
        p = benchmark_circuit(cid).param_count
        table[cid] = (p, 2 * p + HEAD_WEIGHTS)
    return table


def dump_template(template: CircuitTemplate) -> str:
    """Readable gate table, one gate per line."""
    lines = [
        f"circuit {template.id}  "
        f"(entangler={template.entangler_kind}, topology={template.topology}, "
        f"params={template.param_count})"
    ]
    for gate in template.gates:
        if len(gate.wires) == 2:
            where = f"q{gate.wires[0]} -> q{gate.wires[1]}"
        else:
            where = f"q{gate.wires[0]}"
        if gate.param_slot is not None:
            lines.append(f"  {gate.kind}({where}, slot {gate.param_slot})")
        elif gate.fixed_angle is not None:
            lines.append(f"  {gate.kind}({where}, angle {gate.fixed_angle:.6g})")
        else:
            lines.append(f"  {gate.kind}({where})")
    return "\n".join(lines)
