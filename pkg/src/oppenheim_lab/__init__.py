"""Numerical laboratory for the quantitative Oppenheim problem with shifts."""

__version__ = "0.1.0"
