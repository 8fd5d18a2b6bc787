"""Exhaustive checks of why local regularizers fail on the one-time-pad class."""

__version__ = "0.1.0"
