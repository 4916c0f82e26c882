"""Stable seed derivation.

Python's builtin hash() is salted per process, so every sub-stream seed is
derived through SHA-256 instead. Identical (seed, tags) always yield the
identical child seed, across processes and platforms.
"""

import hashlib
import random

_MASK = (1 << 63) - 1


def derive_seed(seed: int, *tags: object) -> int:
    """Derive a 63-bit child seed from a parent seed and a tag path."""
    material = ":".join([str(seed), *(str(t) for t in tags)]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big") & _MASK


def rng_for(seed: int, *tags: object) -> random.Random:
    """Independent RNG for one named sub-stream."""
    return random.Random(derive_seed(seed, *tags))
