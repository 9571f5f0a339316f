"""Statevector kernel selection.

Two interchangeable kernels implement the hot loops (gate application,
circuit evolution, adjoint gradients): a Cython extension compiled at
install time and a pure-numpy fallback. The compiled one is picked when
importable; QRL_LAKE_KERNEL=python|compiled forces a choice.
"""

import os

_requested = os.environ.get("QRL_LAKE_KERNEL", "").strip().lower()

if _requested == "python":
    from . import _statevec_py as kernel

    KERNEL_NAME = "python"
elif _requested == "compiled":
    from . import _statevec_c as kernel  # hard import error if not built

    KERNEL_NAME = "compiled"
elif _requested == "":
    try:
        from . import _statevec_c as kernel

        KERNEL_NAME = "compiled"
    except ImportError:
        from . import _statevec_py as kernel

        KERNEL_NAME = "python"
else:
    raise ValueError(
        f"QRL_LAKE_KERNEL must be 'python' or 'compiled', got {_requested!r}"
    )


def get_kernel(name=None):
    """Return a kernel module by name ('python' or 'compiled'), or the active one."""
    if name is None or name == KERNEL_NAME:
        return kernel
    if name == "python":
        from . import _statevec_py

        return _statevec_py
    if name == "compiled":
        from . import _statevec_c

        return _statevec_c
    raise ValueError(f"unknown kernel {name!r}")
