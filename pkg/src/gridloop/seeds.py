"""Deterministic, collision-free RNG streams.

Every random draw in the package flows through a named stream derived from
``numpy.random.SeedSequence`` so that runs are reproducible end to end and
independent stages (template synthesis, per-home bootstrap, training-attack
magnitudes, forest bagging) never share or reorder draws.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["seed_sequence", "stream"]


def _key_to_int(key) -> int:
    """Map a stream key component to a stable non-negative integer."""
    if isinstance(key, (int, np.integer)):
        return int(key)
    if isinstance(key, str):
        # stable across processes (unlike hash())
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"stream key must be int or str, got {type(key).__name__}")


def seed_sequence(*keys) -> np.random.SeedSequence:
    """Build a SeedSequence from a tuple of ints / short strings."""
    return np.random.SeedSequence([_key_to_int(k) for k in keys])


def stream(*keys) -> np.random.Generator:
    """A Generator on the stream named by ``keys``.

    Same keys -> bit-identical draw sequence, on any platform.
    """
    return np.random.default_rng(seed_sequence(*keys))
