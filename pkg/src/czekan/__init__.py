"""Czekanowski's diagrams and contiguous clustering of seriated data."""

__version__ = "0.1.0"
