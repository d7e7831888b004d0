"""Recognize Contributor and Musical Work mentions in short messages."""

__version__ = "0.1.0"
