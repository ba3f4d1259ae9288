"""Message <-> integer codecs.

Messages are tuples of character codes over an alphabet of size ``size``;
the pad symbol is the extra code ``size`` (so padded strings live over an
alphabet of size ``size + 1``).

``to_int`` is the rank of a string in shortlex order (all shorter strings
first, then within one length little-endian by character code).  That makes
it injective over all strings of length <= n with image exactly
[0, message_count(size, n)), and message_count(size, n) < size^(n+1), which
is the bound the key-generation constraints are stated against.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import DomainError, MalformedPaddingError

Message = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Base alphabet; codes are [0, size) and the pad symbol is ``size``."""

    size: int = 256

    @property
    def pad_code(self) -> int:
        return self.size

    def check(self, m: Message) -> None:
        for code in m:
            if not 0 <= code < self.size:
                raise DomainError(f"code {code} outside alphabet of size {self.size}")


BYTES = Alphabet(256)


def as_message(m: "Message | bytes | str") -> Message:
    """Normalize str/bytes to a tuple of character codes."""
    if isinstance(m, tuple):
        return m
    if isinstance(m, str):
        m = m.encode("utf-8")
    return tuple(m)


def message_count(size: int, n: int) -> int:
    """Number of strings of length <= n over an alphabet of the given size."""
    return (size ** (n + 1) - 1) // (size - 1)


def to_int(m: Message, alphabet: Alphabet = BYTES) -> int:
    """Shortlex rank of m; injective over variable-length strings."""
    alphabet.check(m)
    size = alphabet.size
    offset = (size ** len(m) - 1) // (size - 1)
    value = 0
    for code in reversed(m):
        value = value * size + code
    return offset + value


def from_int(x: int, alphabet: Alphabet = BYTES, max_len: int | None = None) -> Message | None:
    """Inverse of to_int; None when x has no preimage of length <= max_len."""
    if x < 0:
        raise DomainError("negative rank")
    size = alphabet.size
    length = 0
    offset = 0
    while True:
        block = size**length
        if x - offset < block:
            break
        offset += block
        length += 1
        if max_len is not None and length > max_len:
            return None
    value = x - offset
    codes = []
    for _ in range(length):
        value, code = divmod(value, size)
        codes.append(code)
    return tuple(codes)


def pad(m: Message, n: int, alphabet: Alphabet = BYTES) -> Message:
    """m followed by pad symbols up to exactly n characters."""
    alphabet.check(m)
    if len(m) > n:
        raise DomainError(f"message of length {len(m)} exceeds n={n}")
    return m + (alphabet.pad_code,) * (n - len(m))


def unpad(m: Message, alphabet: Alphabet = BYTES) -> Message:
    """Strip the trailing pad run; reject pad symbols anywhere else."""
    pad_code = alphabet.pad_code
    end = len(m)
    while end > 0 and m[end - 1] == pad_code:
        end -= 1
    body = m[:end]
    if pad_code in body:
        raise MalformedPaddingError("pad symbol before a non-pad character")
    alphabet.check(body)
    return body


def invert_case(m: Message) -> Message:
    """Flip the case of ASCII letters; all other codes are fixed points."""
    return tuple(
        c ^ 0x20 if (0x41 <= c <= 0x5A) or (0x61 <= c <= 0x7A) else c for c in m
    )


def renc(payload: int, w: int, n_modulus: int, rng: random.Random) -> int:
    """Randomized embedding of a w-bit payload into Z_N.

    Returns a*2^w + payload for a uniform in [0, (N-1-payload) >> w]; the
    output is < N and congruent to the payload mod 2^w.
    """
    if not 0 <= payload < (1 << w):
        raise DomainError(f"payload outside [0, 2^{w})")
    if n_modulus <= (1 << w):
        raise DomainError("modulus must exceed the payload range")
    a = rng.randint(0, (n_modulus - 1 - payload) >> w)
    return (a << w) + payload


def rdec(y: int, w: int) -> int:
    """Extract the embedded payload: y mod 2^w."""
    if y < 0:
        raise DomainError("negative embedding")
    return y & ((1 << w) - 1)
