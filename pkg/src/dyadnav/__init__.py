"""2D human/guide-robot dyad navigation simulator and library."""

__version__ = "0.1.0"
