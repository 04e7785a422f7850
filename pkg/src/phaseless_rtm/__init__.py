"""Phaseless reverse-time-migration imaging of acoustic obstacles in 2D."""

__version__ = "0.1.0"
