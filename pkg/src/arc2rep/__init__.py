"""Exact categorified level-two quantum sl(n) verification toolkit."""

__version__ = "0.1.0"
