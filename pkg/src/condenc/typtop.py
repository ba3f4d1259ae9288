"""Typo-tolerant password vault with a conditionally encrypted waitlist.

Two back-ends share one state machine:

* ``cond``: failed login attempts are conditionally encrypted against the
  registered password's ciphertext, so attempts that are not plausible
  typos decrypt to nothing even for someone holding the secret key;
* ``legacy``: the historical behaviour — every failed attempt is public-key
  encrypted outright (compact X25519 + AES-GCM hybrid), which is exactly
  what the recorded distinguishing attack exploits.

Per user the server keeps: a salt, the public key, (cond only) the
encryption of the registered password, a fixed-size waitlist of S_W
ciphertexts topped up with simulator dummies, a cache of AE-wrapped copies
of the secret key keyed by accepted passwords/typos, and a login counter.
State mutators take the vault by exclusive handle; read-only queries are
safe on any snapshot.
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)

from . import authenc, paillier, schemes
from .encoding import Message, as_message
from .errors import DomainError, IntegrityError, ParameterError
from .schemes import SchemeParams, make_scheme, scheme_keygen

STATE_VERSION = 1
DEFAULT_WAITLIST_SIZE = 10
DEFAULT_CACHE_SIZE = 10
SALT_LEN = 16

ACCEPT = "acpt"
REJECT = "rjct"


@dataclass(frozen=True)
class KdfParams:
    """Password KDF profile; deterministic given (pwd, salt, params)."""

    profile: str  # "fast" | "mhf"
    dklen: int = 16
    pbkdf2_iters: int = 1000
    scrypt_n: int = 1 << 14
    scrypt_r: int = 8
    scrypt_p: int = 1

    @classmethod
    def fast(cls) -> "KdfParams":
        return cls(profile="fast")

    @classmethod
    def mhf(cls) -> "KdfParams":
        return cls(profile="mhf")


def pkdf(pwd: bytes, salt: bytes, params: KdfParams) -> bytes:
    """Derive the AE key protecting the user's secret key."""
    if params.profile == "fast":
        return hashlib.pbkdf2_hmac("sha256", pwd, salt, params.pbkdf2_iters, params.dklen)
    if params.profile == "mhf":
        return hashlib.scrypt(
            pwd,
            salt=salt,
            n=params.scrypt_n,
            r=params.scrypt_r,
            p=params.scrypt_p,
            maxmem=128 * 1024 * 1024,
            dklen=params.dklen,
        )
    raise ParameterError(f"unknown KDF profile {params.profile!r}")


def _message_bytes(m: Message) -> bytes:
    return bytes(m)


# --- legacy hybrid encryption (X25519 + AES-GCM sealed box) -----------------


def _seal(pk_raw: bytes, body: bytes, rng: random.Random) -> bytes:
    eph = X25519PrivateKey.from_private_bytes(rng.getrandbits(256).to_bytes(32, "big"))
    shared = eph.exchange(X25519PublicKey.from_public_bytes(pk_raw))
    eph_pub = eph.public_key().public_bytes_raw()
    key = hashlib.sha256(shared + eph_pub + pk_raw).digest()[:16]
    nonce = rng.getrandbits(96).to_bytes(12, "big")
    return eph_pub + nonce + AESGCM(key).encrypt(nonce, body, None)


def _unseal(sk_raw: bytes, pk_raw: bytes, blob: bytes) -> bytes | None:
    if len(blob) < 32 + 12 + 16:
        return None
    eph_pub, nonce, ct = blob[:32], blob[32:44], blob[44:]
    sk = X25519PrivateKey.from_private_bytes(sk_raw)
    shared = sk.exchange(X25519PublicKey.from_public_bytes(eph_pub))
    key = hashlib.sha256(shared + eph_pub + pk_raw).digest()[:16]
    try:
        return AESGCM(key).decrypt(nonce, ct, None)
    except InvalidTag:
        return None


class _CondBackend:
    """Waitlist entries are conditional encryptions; dummies are Sim(pk) output."""

    name = "cond"

    def __init__(self, params: SchemeParams):
        self.params = params
        self.scheme = make_scheme(params)

    def keygen(self, rng: random.Random) -> tuple[bytes, bytes]:
        pk, sk = scheme_keygen(self.params, rng)
        return pk.serialize(), sk.serialize()

    def enc_password(self, pk_raw: bytes, pwd: Message, rng: random.Random) -> bytes | None:
        pk = paillier.PaillierPublicKey.deserialize(pk_raw)
        return schemes.serialize_ciphertext(self.scheme.enc(pk, pwd, rng), pk)

    def waitlist_entry(
        self, pk_raw: bytes, c_pwd_raw: bytes | None, attempt: Message, rng: random.Random
    ) -> bytes | None:
        if len(attempt) > self.params.n:
            return None  # cannot conditionally encrypt; caller stores a dummy
        pk = paillier.PaillierPublicKey.deserialize(pk_raw)
        c_pwd = schemes.deserialize_ciphertext(c_pwd_raw, pk)
        entry = self.scheme.cenc(pk, c_pwd, attempt, attempt, rng)
        if entry is None:
            return None
        return schemes.serialize_ciphertext(entry, pk)

    def dummy(self, pk_raw: bytes, rng: random.Random) -> bytes:
        pk = paillier.PaillierPublicKey.deserialize(pk_raw)
        return schemes.serialize_ciphertext(self.scheme.sim(pk, rng), pk)

    def open_entry(self, sk_raw: bytes, pk_raw: bytes, entry: bytes) -> Message | None:
        pk = paillier.PaillierPublicKey.deserialize(pk_raw)
        sk = paillier.PaillierSecretKey.deserialize(sk_raw)
        return self.scheme.dec(sk, pk, schemes.deserialize_ciphertext(entry, pk))


class _LegacyBackend:
    """Waitlist entries are plain hybrid encryptions of whatever was typed."""

    name = "legacy"

    def __init__(self, params: SchemeParams):
        self.params = params

    def keygen(self, rng: random.Random) -> tuple[bytes, bytes]:
        sk_raw = rng.getrandbits(256).to_bytes(32, "big")
        pk_raw = X25519PrivateKey.from_private_bytes(sk_raw).public_key().public_bytes_raw()
        return pk_raw, sk_raw

    def enc_password(self, pk_raw: bytes, pwd: Message, rng: random.Random) -> bytes | None:
        return None  # the original design keeps no password ciphertext

    def waitlist_entry(
        self, pk_raw: bytes, c_pwd_raw: bytes | None, attempt: Message, rng: random.Random
    ) -> bytes | None:
        body = bytes([len(attempt)]) + _message_bytes(attempt)
        return _seal(pk_raw, body, rng)

    def dummy(self, pk_raw: bytes, rng: random.Random) -> bytes:
        # worst-case-length garbage within the password policy
        garbage = tuple(rng.randrange(256) for _ in range(self.params.n))
        return self.waitlist_entry(pk_raw, None, garbage, rng)

    def open_entry(self, sk_raw: bytes, pk_raw: bytes, entry: bytes) -> Message | None:
        body = _unseal(sk_raw, pk_raw, entry)
        if body is None or not body or body[0] > len(body) - 1:
            return None
        return tuple(body[1 : 1 + body[0]])


def _make_backend(name: str, params: SchemeParams):
    if name == "cond":
        return _CondBackend(params)
    if name == "legacy":
        return _LegacyBackend(params)
    raise ParameterError(f"unknown backend {name!r}")


@dataclass
class UserRecord:
    salt: bytes
    pk: bytes
    c_pwd: bytes | None
    waitlist: list[bytes]
    cache: list[bytes]
    counter: int = 0
    kdf_profile: str = "fast"  # profile in force when the user registered

    def storage_bytes(self) -> int:
        """Raw per-user storage: every persisted field, counter as 8 bytes."""
        return (
            len(self.salt)
            + len(self.pk)
            + (len(self.c_pwd) if self.c_pwd else 0)
            + sum(len(e) for e in self.waitlist)
            + sum(len(e) for e in self.cache)
            + 8
        )


class VaultState:
    """The authentication server's state: global parameters plus one record per user."""

    def __init__(
        self,
        scheme_params: SchemeParams,
        backend: str = "cond",
        kdf: KdfParams | None = None,
        waitlist_size: int = DEFAULT_WAITLIST_SIZE,
        cache_size: int = DEFAULT_CACHE_SIZE,
    ):
        if waitlist_size < 1 or cache_size < 1:
            raise ParameterError("waitlist and cache sizes must be positive")
        self.scheme_params = scheme_params
        self.backend_name = backend
        self.kdf = kdf if kdf is not None else KdfParams.fast()
        self.waitlist_size = waitlist_size
        self.cache_size = cache_size
        self.users: dict[str, UserRecord] = {}
        self._backend = _make_backend(backend, scheme_params)

    # -- queries ------------------------------------------------------------

    def is_registered(self, user_id: str) -> bool:
        return user_id in self.users

    def user_storage_bytes(self, user_id: str) -> int:
        if user_id not in self.users:
            raise DomainError(f"unknown user {user_id!r}")
        return self.users[user_id].storage_bytes()

    # -- state machine --------------------------------------------------------

    def register_new_user(self, user_id: str, pwd, rng: random.Random) -> str:
        pwd = as_message(pwd)
        if len(pwd) > self.scheme_params.n:
            raise DomainError(
                f"password longer than the {self.scheme_params.n}-character policy"
            )
        if user_id in self.users:
            return REJECT
        salt = rng.getrandbits(8 * SALT_LEN).to_bytes(SALT_LEN, "big")
        pk_raw, sk_raw = self._backend.keygen(rng)
        c_pwd = self._backend.enc_password(pk_raw, pwd, rng)
        key = pkdf(_message_bytes(pwd), salt, self.kdf)
        cache = [authenc.auth_enc(key, sk_raw, rng)]
        waitlist = [self._backend.dummy(pk_raw, rng) for _ in range(self.waitlist_size)]
        self.users[user_id] = UserRecord(
            salt=salt,
            pk=pk_raw,
            c_pwd=c_pwd,
            waitlist=waitlist,
            cache=cache,
            kdf_profile=self.kdf.profile,
        )
        return ACCEPT

    def _user_kdf(self, rec: UserRecord) -> KdfParams:
        return KdfParams.fast() if rec.kdf_profile == "fast" else KdfParams.mhf()

    def login(self, user_id: str, pwd, rng: random.Random) -> str:
        if user_id not in self.users:
            return REJECT
        pwd = as_message(pwd)
        rec = self.users[user_id]
        key = pkdf(_message_bytes(pwd), rec.salt, self._user_kdf(rec))
        sk_raw = None
        for entry in rec.cache:
            opened = authenc.auth_dec(key, entry)
            if opened is not None:
                sk_raw = opened
                break
        rec.counter += 1
        if sk_raw is None:
            self._record_failure(rec, pwd, rng)
            return REJECT
        self._process_waitlist(rec, pwd, sk_raw, rng)
        return ACCEPT

    def _record_failure(self, rec: UserRecord, pwd: Message, rng: random.Random) -> None:
        entry = self._backend.waitlist_entry(rec.pk, rec.c_pwd, pwd, rng)
        if entry is None:
            # e.g. over-length attempt under the cond backend: store a dummy so
            # the slot update is indistinguishable from any other failure.
            entry = self._backend.dummy(rec.pk, rng)
        rec.waitlist[rec.counter % self.waitlist_size] = entry
        rng.shuffle(rec.waitlist)

    def _process_waitlist(
        self, rec: UserRecord, pwd: Message, sk_raw: bytes, rng: random.Random
    ) -> None:
        predicate = self.scheme_params.predicate
        counts: dict[Message, int] = {}
        for entry in rec.waitlist:
            candidate = self._backend.open_entry(sk_raw, rec.pk, entry)
            if candidate is None or len(candidate) > self.scheme_params.n:
                continue
            # Decryption already vouches for the registered password; re-check
            # the plaintext predicate against the password that just logged in.
            if not predicate.evaluate(pwd, candidate, self.scheme_params.alphabet):
                continue
            counts[candidate] = counts.get(candidate, 0) + 1
        self._admit(rec, counts, sk_raw, rng)
        rec.waitlist = [
            self._backend.dummy(rec.pk, rng) for _ in range(self.waitlist_size)
        ]

    def _admit(
        self,
        rec: UserRecord,
        counts: dict[Message, int],
        sk_raw: bytes,
        rng: random.Random,
    ) -> None:
        fresh = []
        kdf = self._user_kdf(rec)
        for candidate, weight in counts.items():
            cand_key = pkdf(_message_bytes(candidate), rec.salt, kdf)
            if any(authenc.auth_dec(cand_key, e) is not None for e in rec.cache):
                continue  # already grants login
            fresh.append((candidate, cand_key, weight))
        free = max(0, self.cache_size - len(rec.cache))
        # Frequency-weighted selection when there is not enough room.
        while len(fresh) > free:
            total = sum(w for _, _, w in fresh)
            drop = rng.randrange(total)
            for idx, (_, _, w) in enumerate(fresh):
                drop -= w
                if drop < 0:
                    break
            fresh.pop(idx)
        for _, cand_key, _ in fresh:
            rec.cache.append(authenc.auth_enc(cand_key, sk_raw, rng))
        tail = rec.cache[1:]
        rng.shuffle(tail)
        rec.cache[1:] = tail  # slot 0 stays the registration password's entry

    # -- persistence ----------------------------------------------------------

    def to_json(self) -> str:
        params_doc = {
            "backend": self.backend_name,
            "kdf_profile": self.kdf.profile,
            **schemes.params_to_dict(self.scheme_params),
            "waitlist_size": self.waitlist_size,
            "cache_size": self.cache_size,
        }
        doc = {
            "version": STATE_VERSION,
            "params": params_doc,
            "users": {},
        }
        for uid in sorted(self.users):
            rec = self.users[uid]
            doc["users"][uid] = {
                "salt": _b64(rec.salt),
                "pk": _b64(rec.pk),
                "c_pwd": _b64(rec.c_pwd) if rec.c_pwd is not None else None,
                "waitlist": [_b64(e) for e in rec.waitlist],
                "cache": [_b64(e) for e in rec.cache],
                "counter": rec.counter,
                "kdf_profile": rec.kdf_profile,
            }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "VaultState":
        try:
            doc = json.loads(text)
            if doc["version"] != STATE_VERSION:
                raise IntegrityError(f"unsupported state version {doc['version']!r}")
            p = doc["params"]
            params = schemes.params_from_dict(p)
            if p["kdf_profile"] not in ("fast", "mhf"):
                raise IntegrityError(f"unknown KDF profile {p['kdf_profile']!r}")
            kdf = KdfParams.fast() if p["kdf_profile"] == "fast" else KdfParams.mhf()
            state = cls(
                scheme_params=params,
                backend=p["backend"],
                kdf=kdf,
                waitlist_size=int(p["waitlist_size"]),
                cache_size=int(p["cache_size"]),
            )
            for uid, u in doc["users"].items():
                if u["kdf_profile"] not in ("fast", "mhf"):
                    raise IntegrityError(f"unknown KDF profile {u['kdf_profile']!r}")
                rec = UserRecord(
                    salt=_unb64(u["salt"]),
                    pk=_unb64(u["pk"]),
                    c_pwd=_unb64(u["c_pwd"]) if u["c_pwd"] is not None else None,
                    waitlist=[_unb64(e) for e in u["waitlist"]],
                    cache=[_unb64(e) for e in u["cache"]],
                    counter=int(u["counter"]),
                    kdf_profile=u["kdf_profile"],
                )
                if len(rec.waitlist) != state.waitlist_size:
                    raise IntegrityError(f"user {uid!r} waitlist size mismatch")
                if not 1 <= len(rec.cache) <= state.cache_size:
                    raise IntegrityError(f"user {uid!r} cache size out of bounds")
                state.users[uid] = rec
            return state
        except IntegrityError:
            raise
        except (KeyError, TypeError, ValueError, ParameterError) as exc:
            raise IntegrityError(f"corrupt vault state: {exc}") from exc


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)


def legacy_attack(
    state: VaultState, user_id: str, registered_pwd, pwd_0, pwd_1
) -> int | None:
    """The snapshot distinguishing attack against the legacy vault.

    An attacker who later learns the registered password re-derives the KDF
    key, unwraps the secret key from the cache, decrypts the waitlist and
    reports which of the two candidate passwords it finds.  Returns 0 or 1,
    or None when nothing conclusive is recoverable (which is the designed
    outcome against the conditional back-end for non-typo candidates).
    """
    if user_id not in state.users:
        return None
    rec = state.users[user_id]
    registered_pwd = as_message(registered_pwd)
    key = pkdf(_message_bytes(registered_pwd), rec.salt, state._user_kdf(rec))
    sk_raw = None
    for entry in rec.cache:
        opened = authenc.auth_dec(key, entry)
        if opened is not None:
            sk_raw = opened
            break
    if sk_raw is None:
        return None
    pwd_0 = as_message(pwd_0)
    pwd_1 = as_message(pwd_1)
    backend = state._backend
    for entry in rec.waitlist:
        candidate = backend.open_entry(sk_raw, rec.pk, entry)
        if candidate == pwd_0:
            return 0
        if candidate == pwd_1:
            return 1
    return None
