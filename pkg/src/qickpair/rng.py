"""Seed splitting so parallel or reordered work stays reproducible."""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Child seed for stream ``index``: ``master XOR splitmix64(index)``."""
    if master < 0 or master > MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {master}")
    return (master ^ splitmix64(index)) & MASK64
