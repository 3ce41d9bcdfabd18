"""Domain shift analysis toolbox."""

__version__ = "0.1.0"
