import random

import pytest

from condenc import paillier


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture(scope="session")
def toy35():
    """The fully enumerable key pair: N = 5 * 7 = 35."""
    return paillier.keypair_from_primes(5, 7)


@pytest.fixture(scope="session")
def key256():
    """A small but non-enumerable key pair for randomized checks."""
    return paillier.keygen(256, rng=random.Random(1))


class ScriptedRng:
    """Duck-typed random source whose getrandbits pops from a fixed script."""

    def __init__(self, script):
        self.script = list(script)

    def getrandbits(self, _bits):
        return self.script.pop(0)


class NoShuffleRng(random.Random):
    """Seeded randomness with shuffling disabled, to pin list positions."""

    def shuffle(self, x):
        pass
