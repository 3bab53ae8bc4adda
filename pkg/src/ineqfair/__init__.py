"""Inequality-index measures of algorithmic unfairness."""
__version__ = "0.1.0"
