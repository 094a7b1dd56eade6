"""Weighted fuzzy rule classifier learned by a brainstorm-style optimizer."""

__version__ = "0.1.0"
