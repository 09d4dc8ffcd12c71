"""Deterministic, platform-independent random streams.

Every stochastic component of the package draws from its own named stream,
so adding draws to one component can never shift the numbers seen by
another.  A stream is derived by hashing ``"{seed}:{label}"`` with SHA-256
and seeding :class:`random.Random` with the digest; both the hash and the
Mersenne Twister behind ``random.Random`` are stable across platforms and
Python versions, which is what makes generated files byte-reproducible.

Stream labels in use:

- ``"generate"`` — instance generation (one stream per generator seed)
- ``"anneal"``   — one simulated-annealing run (multi-run fan-out uses
  ``seed + run_index``, each run deriving its own ``"anneal"`` stream)
"""

from __future__ import annotations

import hashlib
import random


def stream(seed: int, label: str) -> random.Random:
    """Return an independent generator for (seed, label)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest, "big"))
