"""Parity between the compiled statevector kernel and the numpy fallback:
identical states, expectations, purities, and gradients to near machine
precision on all benchmark templates."""

import numpy as np
import pytest

from qrl_lake import circuits
from qrl_lake.backend import get_kernel

try:
    compiled = get_kernel("compiled")
    HAS_COMPILED = True
except ImportError:
    HAS_COMPILED = False

pure = get_kernel("python")

pytestmark = pytest.mark.skipif(not HAS_COMPILED,
                                reason="compiled kernel not built")


def random_state(rng):
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    return (psi / np.linalg.norm(psi)).astype(np.complex128)


@pytest.mark.parametrize("cid", range(1, 20))
def test_kernel_parity_on_template(cid):
    rng = np.random.default_rng(1000 + cid)
    t = circuits.benchmark_circuit(cid)
    co = t.compiled
    for _ in range(3):
        theta = rng.uniform(0, 2 * np.pi, t.param_count)
        psi = random_state(rng)
        weights = rng.normal(size=4)

        out_c, grad_c = compiled.adjoint_grad(
            co.kinds, co.controls, co.targets, co.slots, co.fixed, theta,
            psi.copy(), weights, 4)
        out_p, grad_p = pure.adjoint_grad(
            co.kinds, co.controls, co.targets, co.slots, co.fixed, theta,
            psi.copy(), weights, 4)

        assert np.abs(out_c - out_p).max() <= 1e-13
        if len(grad_c):
            assert np.abs(grad_c - grad_p).max() <= 1e-12
        assert np.allclose(compiled.z_expectations(out_c, 4),
                           pure.z_expectations(out_p, 4), atol=1e-13)
        for q in range(4):
            assert compiled.single_qubit_purity(out_c, 4, q) == pytest.approx(
                pure.single_qubit_purity(out_p, 4, q), abs=1e-13)


def test_run_ops_parity_embedding():
    for s in range(16):
        co = circuits.embedding_circuit(s).compiled
        a = np.zeros(16, dtype=np.complex128)
        a[0] = 1.0
        b = a.copy()
        compiled.run_ops(co.kinds, co.controls, co.targets, co.slots, co.fixed,
                         np.empty(0), a, 4)
        pure.run_ops(co.kinds, co.controls, co.targets, co.slots, co.fixed,
                     np.empty(0), b, 4)
        assert np.abs(a - b).max() <= 1e-15


def test_forced_kernel_selection(monkeypatch):
    """QRL_LAKE_KERNEL=python must select the fallback in a fresh import."""
    import importlib
    import subprocess
    import sys

    code = ("import qrl_lake; print(qrl_lake.KERNEL_NAME)")
    env_out = subprocess.run(
        [sys.executable, "-c", code],
        env={"QRL_LAKE_KERNEL": "python", "PATH": "/usr/bin:/bin"},
        capture_output=True, text=True, cwd="/")
    assert env_out.stdout.strip() == "python"
