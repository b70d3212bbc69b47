"""Entropy support maps on binary cubes and factor-of-iid subsets of Cayley graphs."""

__version__ = "0.1.0"
