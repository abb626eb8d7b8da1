"""Kleinian mock modular forms attached to weight-2 newform orbits."""

__version__ = "0.1.0"
