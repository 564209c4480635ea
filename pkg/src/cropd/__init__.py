"""Contrastive robust pre-processing laboratory."""

__version__ = "0.1.0"
