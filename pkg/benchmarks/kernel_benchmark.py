"""Compare the compiled statevector kernel with the pure-numpy fallback.

Times circuit evolution and the adjoint gradient sweep on representative
templates, then a short PPO training slice end to end with each kernel.

Usage:
    python benchmarks/kernel_benchmark.py [--repeats N]
"""

import argparse
import time

import numpy as np

from qrl_lake import circuits
from qrl_lake.backend import get_kernel


def time_kernel(kernel, template, repeats):
    co = template.compiled
    rng = np.random.default_rng(0)
    theta = rng.uniform(0, 2 * np.pi, template.param_count)
    weights = np.ones(4)
    psi = np.zeros(16, dtype=np.complex128)
    psi[0] = 1.0

    t0 = time.perf_counter()
    for _ in range(repeats):
        state = psi.copy()
        kernel.run_ops(co.kinds, co.controls, co.targets, co.slots, co.fixed,
                       theta, state, 4)
    run_us = (time.perf_counter() - t0) / repeats * 1e6

    t0 = time.perf_counter()
    for _ in range(repeats):
        kernel.adjoint_grad(co.kinds, co.controls, co.targets, co.slots,
                            co.fixed, theta, psi, weights, 4)
    grad_us = (time.perf_counter() - t0) / repeats * 1e6
    return run_us, grad_us


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    try:
        compiled = get_kernel("compiled")
    except ImportError:
        print("compiled kernel not built (pip install -e . first); nothing to compare")
        return
    pure = get_kernel("python")

    print(f"{'circuit':>8} {'gates':>6} | {'run C':>9} {'run py':>9} {'x':>6} "
          f"| {'grad C':>9} {'grad py':>9} {'x':>6}")
    for cid in (1, 2, 6, 9, 14):
        template = circuits.benchmark_circuit(cid)
        rc, gc = time_kernel(compiled, template, args.repeats)
        rp, gp = time_kernel(pure, template, max(200, args.repeats // 10))
        print(f"{cid:>8} {len(template.gates):>6} | {rc:>8.1f}u {rp:>8.1f}u "
              f"{rp/rc:>5.1f}x | {gc:>8.1f}u {gp:>8.1f}u {gp/gc:>5.1f}x")

    # end-to-end slice: a short training run under each kernel
    from qrl_lake import ppo

    def short_run():
        cfg = ppo.PpoConfig(total_timesteps=2048, rollout_length=512)
        t0 = time.perf_counter()
        ppo.train(ppo.RunSpec("pqc", 6, 1), cfg)
        return time.perf_counter() - t0

    import qrl_lake.backend as backend
    import qrl_lake.statevec as statevec_mod

    results = {}
    for name in ("compiled", "python"):
        statevec_mod._k = get_kernel(name)
        results[name] = short_run()
    statevec_mod._k = backend.kernel
    print(f"\nPPO slice (PQC-6, 2048 steps): compiled {results['compiled']:.2f}s, "
          f"python {results['python']:.2f}s, "
          f"speedup {results['python']/results['compiled']:.1f}x")


if __name__ == "__main__":
    main()
