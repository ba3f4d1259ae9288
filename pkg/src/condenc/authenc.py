"""Authenticated encryption with wrong-key rejection.

AES-128-GCM plus an explicit key commitment: GCM tags alone are not
key-committing, but the Hamming-distance decryptor's error budget needs
decryption under an unrelated key to fail (except with probability about
2^-128).  A 16-byte hash of (key, nonce) is carried in the ciphertext and
checked before the tag.

Layout: nonce (12) || commitment (16) || GCM body+tag (len(m) + 16).
The overhead over the plaintext is the constant ``OVERHEAD`` = 44 bytes.
"""

from __future__ import annotations

import hashlib
import hmac
import random

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import DomainError

KEY_LEN = 16
NONCE_LEN = 12
COMMIT_LEN = 16
TAG_LEN = 16
OVERHEAD = NONCE_LEN + COMMIT_LEN + TAG_LEN

_COMMIT_DOMAIN = b"condenc/ae-key-commitment/v1"


def gen_key(rng: random.Random) -> bytes:
    return rng.getrandbits(8 * KEY_LEN).to_bytes(KEY_LEN, "big")


def _commitment(key: bytes, nonce: bytes) -> bytes:
    return hashlib.sha256(_COMMIT_DOMAIN + key + nonce).digest()[:COMMIT_LEN]


def auth_enc(key: bytes, m: bytes, rng: random.Random) -> bytes:
    """Encrypt with a fresh random nonce per call."""
    if len(key) != KEY_LEN:
        raise DomainError(f"key must be {KEY_LEN} bytes")
    nonce = rng.getrandbits(8 * NONCE_LEN).to_bytes(NONCE_LEN, "big")
    body = AESGCM(key).encrypt(nonce, m, None)
    return nonce + _commitment(key, nonce) + body


def auth_dec(key: bytes, c: bytes) -> bytes | None:
    """Plaintext iff c was produced under this key; None otherwise."""
    if len(key) != KEY_LEN:
        raise DomainError(f"key must be {KEY_LEN} bytes")
    if len(c) < OVERHEAD:
        return None
    nonce = c[:NONCE_LEN]
    commit = c[NONCE_LEN : NONCE_LEN + COMMIT_LEN]
    if not hmac.compare_digest(commit, _commitment(key, nonce)):
        return None
    try:
        return AESGCM(key).decrypt(nonce, c[NONCE_LEN + COMMIT_LEN :], None)
    except InvalidTag:
        return None
