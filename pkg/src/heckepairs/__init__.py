"""Hecke pairs: coset engine, Hecke algebras, length functions, transfer, extensions and RD probes."""
__version__ = "0.1.0"
