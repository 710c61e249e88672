"""Conditional amplification of Schrödinger cat states in a truncated Fock space."""

__version__ = "0.1.0"
