"""Candidate-subset enumeration for Hamming-distance conditional decryption.

Decrypting a conditional Hamming ciphertext means finding a set of share
indices untouched by character mismatches.  Strategies, in the order they
are applied when the short-password ordering is enabled:

1. pair-block exclusions {2i-1, 2i} (distance-2 predicate only): when a
   single share is corrupted the clean subset is found within n/2 attempts;
2. short-password order: exclusion sets of size ell enumerated with their
   largest element ascending, so mismatches clustered in a short prefix are
   hit early; this enumeration is complete, so no separate exhaustive pass
   is needed (pair-block duplicates are skipped).

Without the ordering flag the enumeration is plain lexicographic over all
C(n, ell) exclusion sets.

The dual-field optimization screens each candidate with a cheap zero-share
reconstruction over GF(2^32).  The screen is vectorized with numpy over
batches of candidates; it only ever *proposes* subsets, every hit is
confirmed by a full GF(2^128) recovery plus authenticated decryption.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

from .secretshare import GF32

_GF32_FOLD = np.uint64(GF32.poly & 0xFFFFFFFF)
_SCAN_BATCH = 8192


@dataclass
class DecryptStats:
    """Instrumentation counters filled in by the Hamming decryptor."""

    subset_attempts: int = 0
    small_field_recoveries: int = 0
    large_field_recoveries: int = 0
    ae_attempts: int = 0


def _pair_blocks(n: int) -> Iterator[tuple[int, ...]]:
    for i in range(1, n // 2 + 1):
        yield (2 * i - 1, 2 * i)


def _short_password_order(n: int, ell: int) -> Iterator[tuple[int, ...]]:
    if ell == 0:
        yield ()
        return
    for k in range(ell, n + 1):
        for prefix in combinations(range(1, k), ell - 1):
            yield prefix + (k,)


def exclusion_phases(n: int, ell: int, short_order: bool) -> list[Iterator[tuple[int, ...]]]:
    """Candidate corrupted-index sets, 1-based and sorted, grouped into
    strategy phases so batched scans keep the fast path fast."""
    if not short_order:
        return [iter(combinations(range(1, n + 1), ell))]
    if ell != 2 or n < 2:
        return [_short_password_order(n, ell)]

    def rest() -> Iterator[tuple[int, ...]]:
        for c in _short_password_order(n, ell):
            if c[0] + 1 == c[1] and c[0] % 2 == 1:
                continue  # already tried as a pair block
            yield c

    return [_pair_blocks(n), rest()]


def enumerate_exclusions(n: int, ell: int, short_order: bool) -> Iterator[tuple[int, ...]]:
    for phase in exclusion_phases(n, ell, short_order):
        yield from phase


def gf32_mul_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise GF(2^32) product of uint64 arrays (values < 2^32)."""
    r = np.zeros_like(a)
    aa = a.copy()
    bb = b.copy()
    for _ in range(32):
        r ^= aa * (bb & np.uint64(1))
        bb >>= np.uint64(1)
        carry = aa >> np.uint64(31)
        aa = ((aa << np.uint64(1)) & np.uint64(0xFFFFFFFF)) ^ carry * _GF32_FOLD
    return r


class ZeroShareScanner:
    """Batched GF(2^32) Lagrange-at-zero test over candidate exclusion sets.

    For share coordinates fixed at x = 1..n the Lagrange coefficient of a
    subset factors into a full-set coefficient times one correction per
    excluded index, so a batch of candidates reduces to a handful of
    vectorized field multiplications.
    """

    _cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __init__(self, n: int, zero_shares: list[int]):
        self.n = n
        full_coeffs, corrections = self._tables(n)
        u = np.array(
            [GF32.mul(int(full_coeffs[i]), zero_shares[i]) for i in range(n)],
            dtype=np.uint64,
        )
        self._u = u
        self._g = corrections

    @classmethod
    def _tables(cls, n: int) -> tuple[np.ndarray, np.ndarray]:
        if n not in cls._cache:
            field_ = GF32
            full = np.zeros(n, dtype=np.uint64)
            for i in range(1, n + 1):
                acc = 1
                for j in range(1, n + 1):
                    if j == i:
                        continue
                    acc = field_.mul(acc, field_.mul(j, field_.inv(j ^ i)))
                full[i - 1] = acc
            g = np.zeros((n, n), dtype=np.uint64)
            for c in range(1, n + 1):
                inv_c = field_.inv(c)
                for i in range(1, n + 1):
                    if i == c:
                        continue
                    g[c - 1][i - 1] = field_.mul(c ^ i, inv_c)
            cls._cache[n] = (full, g)
        return cls._cache[n]

    def scan(self, exclusions: list[tuple[int, ...]]) -> list[int]:
        """Indices into ``exclusions`` whose complements reconstruct zero."""
        if not exclusions:
            return []
        esize = len(exclusions[0])
        cmat = np.asarray(exclusions, dtype=np.int64).reshape(len(exclusions), esize)
        v = np.broadcast_to(self._u, (len(exclusions), self.n)).copy()
        for k in range(esize):
            v = gf32_mul_vec(v, self._g[cmat[:, k] - 1, :])
        rows = np.arange(len(exclusions))[:, None]
        v[rows, cmat - 1] = 0
        x = np.bitwise_xor.reduce(v, axis=1)
        return np.flatnonzero(x == 0).tolist()


def batched(source: Iterable[tuple[int, ...]], size: int = _SCAN_BATCH) -> Iterator[list[tuple[int, ...]]]:
    batch: list[tuple[int, ...]] = []
    for item in source:
        batch.append(item)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch
