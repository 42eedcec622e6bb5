"""Stability analysis of the coupled Mathieu system for asymmetric surface traps."""

__version__ = "0.1.0"
