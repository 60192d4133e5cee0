"""Synchronisability checking for networks of communicating automata."""

__version__ = "0.1.0"
