"""Executable model of syntax as MERGE-built trees carried by neural oscillations."""

__version__ = "0.1.0"
