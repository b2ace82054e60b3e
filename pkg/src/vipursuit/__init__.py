"""Pursuit-evasion at sea with model-free actor-critic pursuers."""

__version__ = "0.1.0"
