"""Symmetry classification of 1-D linear parabolic PDEs, reductions to the
heat equation, and a numerically verified heat-kernel catalog."""

__version__ = "0.1.0"
