"""Paillier partially homomorphic cryptosystem.

Keys use the simple variant g = N + 1, so encryption needs a single modular
exponentiation: (1+N)^m r^N = (1 + N*m) * r^N  (mod N^2).  The homomorphic
operators are ciphertext addition (`add`), subtraction (`sub`) and
plaintext-scalar multiplication (`scalar_mul`).

Big-integer arithmetic is delegated to gmpy2.  Keys and ciphertexts are
immutable; every operation is a pure function of its inputs plus the caller's
random source.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass

import gmpy2

from .errors import DomainError, MalformedCiphertextError, NonceError, ParameterError

# Miller-Rabin round count: error probability <= 4^-40 <= 2^-80.
_MR_ROUNDS = 40

# Smallest supported modulus; toy keys for exhaustive tests.
MIN_MODULUS_BITS = 16


@dataclass(frozen=True)
class PaillierPublicKey:
    """Public key (N, g) with g fixed to N + 1."""

    n: int
    n_squared: int

    @property
    def g(self) -> int:
        return self.n + 1

    def serialize(self) -> bytes:
        return _write_int(self.n)

    @classmethod
    def deserialize(cls, data: bytes) -> "PaillierPublicKey":
        n, rest = _read_int(data)
        if rest:
            raise MalformedCiphertextError("trailing bytes after public key")
        return cls(n=n, n_squared=n * n)


@dataclass(frozen=True)
class PaillierSecretKey:
    """Secret key (beta, mu); the primes are kept for re-verification and test oracles."""

    p: int
    q: int
    beta: int
    mu: int

    def serialize(self) -> bytes:
        return _write_int(self.p) + _write_int(self.q)

    @classmethod
    def deserialize(cls, data: bytes) -> "PaillierSecretKey":
        p, rest = _read_int(data)
        q, rest = _read_int(rest)
        if rest:
            raise MalformedCiphertextError("trailing bytes after secret key")
        _, sk = keypair_from_primes(p, q)
        return sk


@dataclass(frozen=True)
class PaillierCiphertext:
    """An element of Z*_{N^2}."""

    value: int

    def serialize(self) -> bytes:
        return _write_int(self.value)

    @classmethod
    def deserialize(cls, data: bytes) -> "PaillierCiphertext":
        value, rest = _read_int(data)
        if rest:
            raise MalformedCiphertextError("trailing bytes after ciphertext")
        return cls(value=value)


def keypair_from_primes(p: int, q: int) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    """Build a key pair from explicit primes (used by tests and deserialization)."""
    if p == q:
        raise ParameterError("p and q must be distinct")
    n = p * q
    phi = (p - 1) * (q - 1)
    if math.gcd(n, phi) != 1:
        raise ParameterError("gcd(N, phi(N)) != 1")
    beta = math.lcm(p - 1, q - 1)
    mu = int(gmpy2.invert(phi, n))
    pk = PaillierPublicKey(n=n, n_squared=n * n)
    sk = PaillierSecretKey(p=p, q=q, beta=beta, mu=mu)
    return pk, sk


def _random_prime(bits: int, rng: random.Random) -> int:
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if gmpy2.is_prime(cand, _MR_ROUNDS):
            return cand


def keygen(
    bits: int,
    min_prime_bound: int = 0,
    require_n_at_least: int = 0,
    rng: random.Random | None = None,
) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    """Generate a key pair whose primes satisfy the callers' constraints.

    Primes are resampled until min(p, q) > min_prime_bound, N >= require_n_at_least
    and gcd(N, phi(N)) = 1.  Raises ParameterError when the constraints cannot be
    met at the requested modulus size.
    """
    if bits < MIN_MODULUS_BITS:
        raise ParameterError(f"modulus size must be at least {MIN_MODULUS_BITS} bits")
    half = bits // 2
    # min(p, q) < 2^half and N < 2^bits, so these bounds are hard ceilings.
    if min_prime_bound >= (1 << half):
        raise ParameterError(
            f"min_prime_bound needs {min_prime_bound.bit_length()} bits; "
            f"a {bits}-bit modulus caps the smaller prime below 2^{half}"
        )
    if require_n_at_least > (1 << bits):
        raise ParameterError("require_N_at_least exceeds the maximum modulus")
    rng = rng if rng is not None else random.SystemRandom()
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(bits - half, rng)
        if p == q:
            continue
        if min(p, q) <= min_prime_bound:
            continue
        n = p * q
        if n < require_n_at_least:
            continue
        if math.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        return keypair_from_primes(p, q)


def sample_nonce(pk: PaillierPublicKey, rng: random.Random) -> int:
    """Uniform element of Z*_N by rejection sampling."""
    while True:
        r = rng.randrange(1, pk.n)
        if math.gcd(r, pk.n) == 1:
            return r


def enc(
    pk: PaillierPublicKey,
    m: int,
    r: int | None = None,
    rng: random.Random | None = None,
) -> PaillierCiphertext:
    """Encrypt m in Z_N with nonce r (fresh random when omitted)."""
    if not 0 <= m < pk.n:
        raise DomainError(f"message {m} outside Z_N")
    if r is None:
        if rng is None:
            rng = random.SystemRandom()
        r = sample_nonce(pk, rng)
    elif not (0 < r < pk.n and math.gcd(r, pk.n) == 1):
        raise NonceError("nonce must be a unit in Z_N")
    n2 = pk.n_squared
    # (1+N)^m = 1 + N*m (mod N^2)
    value = (1 + pk.n * m) * gmpy2.powmod(r, pk.n, n2) % n2
    return PaillierCiphertext(value=int(value))


def dec(sk: PaillierSecretKey, pk: PaillierPublicKey, c: PaillierCiphertext) -> int:
    """Decrypt to Z_N: L(c^beta mod N^2) * mu * (phi/beta) mod N with L(u) = (u-1)/N.

    mu inverts phi(N) while the exponent is beta = lcm(p-1, q-1), so the
    result carries a leftover factor beta/phi; the gcd(p-1, q-1) term
    cancels it.
    """
    if not 0 < c.value < pk.n_squared:
        raise DomainError("ciphertext outside Z_{N^2}")
    u = gmpy2.powmod(c.value, sk.beta, pk.n_squared)
    scale = math.gcd(sk.p - 1, sk.q - 1)  # = phi(N) / beta
    return int((u - 1) // pk.n * sk.mu * scale % pk.n)


def add(pk: PaillierPublicKey, c1: PaillierCiphertext, c2: PaillierCiphertext) -> PaillierCiphertext:
    """Ciphertext of m1 + m2 mod N."""
    return PaillierCiphertext(value=c1.value * c2.value % pk.n_squared)


def sub(pk: PaillierPublicKey, c1: PaillierCiphertext, c2: PaillierCiphertext) -> PaillierCiphertext:
    """Ciphertext of m1 - m2 mod N."""
    try:
        inv = gmpy2.invert(c2.value, pk.n_squared)
    except ZeroDivisionError:
        raise MalformedCiphertextError("ciphertext is not a unit modulo N^2") from None
    return PaillierCiphertext(value=c1.value * int(inv) % pk.n_squared)


def scalar_mul(pk: PaillierPublicKey, k: int, c: PaillierCiphertext) -> PaillierCiphertext:
    """Ciphertext of k * m mod N."""
    if not 0 <= k < pk.n:
        raise DomainError(f"scalar {k} outside Z_N")
    return PaillierCiphertext(value=int(gmpy2.powmod(c.value, k, pk.n_squared)))


def ciphertext_width(pk: PaillierPublicKey) -> int:
    """Fixed byte width of a serialized ciphertext value under this key."""
    return (pk.n_squared.bit_length() + 7) // 8


def _write_int(x: int) -> bytes:
    raw = x.to_bytes((x.bit_length() + 7) // 8 or 1, "big")
    return struct.pack(">I", len(raw)) + raw


def _read_int(data: bytes) -> tuple[int, bytes]:
    if len(data) < 4:
        raise MalformedCiphertextError("truncated length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if len(data) < 4 + length:
        raise MalformedCiphertextError("truncated integer body")
    return int.from_bytes(data[4 : 4 + length], "big"), data[4 + length :]
