"""Utility functions for erem-fem."""

from .core import env_int, fmt17, halving_sequence

__all__ = [
    "env_int",
    "fmt17",
    "halving_sequence",
]
