"""Cache timing attack derivation, benchmark generation and scoring toolkit."""

__version__ = "0.1.0"
