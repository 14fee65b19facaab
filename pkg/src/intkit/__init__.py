"""Synthetic inequality theorem generation, checking, and proving."""

__version__ = "0.1.0"
