"""Circuit template tests: parameter-count table, structural invariants,
basis embedding, gate-table dump."""

import numpy as np
import pytest

from qrl_lake import circuits, statevec

from reference_values import WEIGHTS


# =============================================================================
# Parameter counts
# =============================================================================

@pytest.mark.parametrize("cid", range(1, 20))
def test_weight_count_matches_published_table(cid):
    p, w = circuits.param_count_table()[cid]
    assert w == 2 * p + 25
    assert w == WEIGHTS[cid]


def test_param_table_internal_consistency():
    """sum over ids of (W - 25) / 2 equals the total parameter count."""
    table = circuits.param_count_table()
    assert sum((w - 25) / 2 for _, w in table.values()) == sum(
        p for p, _ in table.values())


@pytest.mark.parametrize("cid", range(1, 20))
def test_slots_cover_range_once(cid):
    t = circuits.benchmark_circuit(cid)
    slots = [g.param_slot for g in t.gates if g.param_slot is not None]
    assert sorted(slots) == list(range(t.param_count))


# =============================================================================
# Structure
# =============================================================================

def test_circuit1_has_no_two_qubit_gates():
    assert all(len(g.wires) == 1 for g in circuits.benchmark_circuit(1).gates)


@pytest.mark.parametrize("cid", range(2, 20))
def test_entangled_circuits_have_two_qubit_gates(cid):
    assert any(len(g.wires) == 2 for g in circuits.benchmark_circuit(cid).gates)


def test_entangler_metadata():
    assert circuits.benchmark_circuit(1).entangler_kind == "none"
    assert circuits.benchmark_circuit(2).entangler_kind == "CNOT"
    assert circuits.benchmark_circuit(5).topology == "all-to-all"
    assert circuits.benchmark_circuit(7).topology == "pairwise"
    assert circuits.benchmark_circuit(13).topology == "shifted-circular-alternating"


def test_swapped_variants_share_gate_multiset():
    """16/17 reorder the controlled gates of 3/4 without changing the set."""
    for base_id, swapped_id in ((3, 16), (4, 17)):
        base = circuits.benchmark_circuit(base_id)
        swapped = circuits.benchmark_circuit(swapped_id)
        key = lambda t: sorted((g.kind, g.wires) for g in t.gates)
        assert key(base) == key(swapped)
        assert [g.wires for g in base.gates] != [g.wires for g in swapped.gates]


def test_benchmark_circuit_id_range():
    with pytest.raises(ValueError):
        circuits.benchmark_circuit(0)
    with pytest.raises(ValueError):
        circuits.benchmark_circuit(20)


# =============================================================================
# Basis embedding
# =============================================================================

def test_embedding_zero_is_identity():
    out = statevec.run_circuit(circuits.embedding_circuit(0))
    assert np.allclose(out, statevec.zero_state(4))


@pytest.mark.parametrize("s", range(16))
def test_embedding_yields_matching_basis_state(s):
    out = statevec.run_circuit(circuits.embedding_circuit(s))
    magnitudes = np.abs(out)
    assert magnitudes[s] == pytest.approx(1.0, abs=1e-12)
    assert np.sum(magnitudes > 1e-12) == 1


def test_embedding_state_9_expectations():
    out = statevec.run_circuit(circuits.embedding_circuit(9))
    assert np.allclose(statevec.z_expectations(out), [-1, 1, 1, -1], atol=1e-12)


def test_embedding_index_out_of_range():
    with pytest.raises(ValueError):
        circuits.embedding_circuit(16)
    with pytest.raises(ValueError):
        circuits.embedding_circuit(-1)


# =============================================================================
# Dump
# =============================================================================

def test_dump_lists_every_gate():
    t = circuits.benchmark_circuit(5)
    text = circuits.dump_template(t)
    lines = text.splitlines()
    assert len(lines) == 1 + len(t.gates)
    assert "all-to-all" in lines[0] and "params=28" in lines[0]
    assert any("CRZ(q3 -> q2" in line for line in lines)


def test_dump_embedding_shows_angles():
    text = circuits.dump_template(circuits.embedding_circuit(15))
    assert text.count("angle 3.14159") == 8
