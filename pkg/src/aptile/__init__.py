"""Aperiodic tilings, cut-and-project sets and their diffraction."""

__version__ = "0.1.0"
