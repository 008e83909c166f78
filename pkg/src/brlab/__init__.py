"""brlab: numerical laboratory for small divisors and the Bruno-Russmann condition."""

__version__ = "0.1.0"
