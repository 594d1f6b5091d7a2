"""Exact certificates for the uniform multiplicative Littlewood quantity."""

__version__ = "0.1.0"
