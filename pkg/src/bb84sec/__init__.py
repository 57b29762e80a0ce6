"""Security bounds for BB84 under collective attacks, with brute-force cross-checks."""

__version__ = "0.1.0"
