"""Numerical laboratory for early-time OTOC growth in two inverted-oscillator
systems: truncated Fock-space dynamics side by side with the classical flows."""

__version__ = "0.1.0"
