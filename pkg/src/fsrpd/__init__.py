"""Random feedback shift register cycle statistics and verification tools."""

__version__ = "0.1.0"
