"""Noise-aware qubit assignment scored by Loschmidt echoes, on simulated devices."""

__version__ = "0.1.0"
