"""Random-source injection.

Every randomized operation takes a ``random.Random``-compatible source, so
tests and the CLI can pin seeds.  The default is the OS CSPRNG; setting the
``CONDENC_SEED`` environment variable switches the CLI to a reproducible
seeded generator.
"""

from __future__ import annotations

import os
import random

SEED_ENV_VAR = "CONDENC_SEED"


def default_rng(seed: int | None = None) -> random.Random:
    if seed is not None:
        return random.Random(seed)
    return random.SystemRandom()


def rng_from_env() -> random.Random:
    seed = os.environ.get(SEED_ENV_VAR)
    if seed is None:
        return random.SystemRandom()
    return random.Random(int(seed))
