"""Parabolic cylinder functions: asymptotic expansions with certified remainder bounds."""

__version__ = "0.1.0"
