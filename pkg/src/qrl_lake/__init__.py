"""Hybrid quantum-classical PPO on a slippery FrozenLake, plus circuit metrics."""

from .backend import KERNEL_NAME

__version__ = "0.1.0"
__all__ = ["KERNEL_NAME", "__version__"]
