"""Modeling and simulation of tilted multi-rotor aerial platforms."""

__version__ = "0.1.0"
