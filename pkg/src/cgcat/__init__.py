"""Coarse-grained measurements, Bell quantities and phase-space negativity for bosonic states."""

__version__ = "0.1.0"
