"""Offline embedding extraction: corpus in, EMB1 table out."""

__version__ = "0.1.0"
