"""Deterministic sub-seed derivation.

All randomness in the pipeline flows from a single master seed through
named sub-seeds, so results never depend on iteration or worker order.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(master: int, *parts: str | int) -> int:
    """Derive a stable 63-bit seed from the master seed and a name path."""
    h = hashlib.sha256()
    h.update(str(master).encode("utf-8"))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big") >> 1


def rng_for(master: int, *parts: str | int) -> random.Random:
    """Return a ``random.Random`` seeded for the given name path."""
    return random.Random(derive_seed(master, *parts))
