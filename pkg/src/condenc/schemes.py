"""Conditional encryption schemes with flagged ciphertexts.

Every scheme exposes the same four-algorithm surface plus a simulator:

* ``enc(pk, m, rng)``            -> flag-0 ciphertext of a hidden message
* ``cenc(pk, c, m2, m3, rng)``   -> flag-1 ciphertext that decrypts to the
  payload m3 exactly when the scheme's predicate holds between the hidden
  message and the control message m2, and to bottom (``None``) otherwise
* ``dec(sk, pk, c)``             -> message or ``None``
* ``sim(pk, rng)``               -> a flag-1 ciphertext sampled from the
  public key alone, indistinguishable from a false-predicate cenc output

``cenc`` applied to a flag-1 ciphertext is always bottom: conditional
ciphertexts cannot be re-conditioned.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

from . import authenc, paillier
from .encoding import (
    Alphabet,
    BYTES,
    Message,
    as_message,
    from_int,
    invert_case,
    pad,
    rdec,
    renc,
    to_int,
    unpad,
)
from .errors import DomainError, MalformedCiphertextError, ParameterError
from .paillier import PaillierCiphertext, PaillierPublicKey, PaillierSecretKey
from .predicates import PredicateSpec
from .secretshare import GF128, GF32, secret_recover, share_gen
from .subsetsearch import (
    DecryptStats,
    ZeroShareScanner,
    batched,
    enumerate_exclusions,
    exclusion_phases,
)

WIRE_VERSION = 1

SCHEME_EQ = 1
SCHEME_CAPS = 2
SCHEME_HAM = 3
SCHEME_ED = 4
SCHEME_OR = 5

# Below this, keys are toys and must be explicitly marked insecure.
SECURE_MODULUS_BITS = 1024


@dataclass(frozen=True)
class SchemeParams:
    """Predicate selector plus the sizing knobs that constrain key generation."""

    predicate: PredicateSpec
    n: int
    lambda_bits: int = 128
    modulus_bits: int = 1024
    alphabet: Alphabet = BYTES
    dual_field_shares: bool = False
    short_password_order: bool = False
    insecure: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")
        if self.lambda_bits != 128:
            raise ParameterError("only 128-bit AE keys are supported")
        if self.modulus_bits < SECURE_MODULUS_BITS and not self.insecure:
            raise ParameterError(
                f"moduli below {SECURE_MODULUS_BITS} bits require insecure=True"
            )


@dataclass(frozen=True)
class CondCiphertext:
    """Tagged ciphertext: flag 0 = regular encryption, flag 1 = conditional."""

    scheme_id: int
    flag: int
    slots: tuple[PaillierCiphertext, ...] = ()
    ae: bytes | None = None
    members: tuple["CondCiphertext", ...] | None = None


def _rand_plaintext(pk: PaillierPublicKey, rng: random.Random) -> PaillierCiphertext:
    """Fresh encryption of a uniform element of Z_N (the simulators' atom)."""
    return paillier.enc(pk, rng.randrange(pk.n), rng=rng)


def _eq_transform(
    pk: PaillierPublicKey,
    c: PaillierCiphertext,
    control: int,
    payload: int,
    rng: random.Random,
) -> Optional[PaillierCiphertext]:
    """c^R * (1+N)^(payload - R*control) * r^N, the equality-test core.

    Decrypts to the payload when the hidden plaintext equals ``control`` and
    to a uniform element of Z_N otherwise.  None when c is not a unit.
    """
    if math.gcd(c.value, pk.n) != 1:
        return None
    r_mask = rng.randrange(pk.n)
    masked = paillier.scalar_mul(pk, r_mask, c)
    shift = paillier.enc(pk, (payload - r_mask * control) % pk.n, rng=rng)
    return paillier.add(pk, masked, shift)


class EqualityScheme:
    """Delivers the payload exactly when the hidden message equals the control."""

    scheme_id = SCHEME_EQ

    def __init__(self, params: SchemeParams):
        self.params = params

    def keygen_constraints(self) -> tuple[int, int]:
        # min(p, q) must exceed every encoded message so plaintext differences
        # are units mod N.
        return self.params.alphabet.size ** (self.params.n + 1), 0

    def _check_len(self, m: Message) -> Message:
        if len(m) > self.params.n:
            raise DomainError(f"message longer than n={self.params.n}")
        return m

    def _control(self, m: Message) -> Message:
        return m

    def enc(self, pk: PaillierPublicKey, m, rng: random.Random) -> CondCiphertext:
        m = self._check_len(as_message(m))
        slot = paillier.enc(pk, to_int(m, self.params.alphabet), rng=rng)
        return CondCiphertext(scheme_id=self.scheme_id, flag=0, slots=(slot,))

    def cenc(
        self, pk: PaillierPublicKey, c: CondCiphertext, m2, m3, rng: random.Random
    ) -> Optional[CondCiphertext]:
        if c.flag != 0 or len(c.slots) != 1:
            return None
        m2 = self._check_len(as_message(m2))
        m3 = self._check_len(as_message(m3))
        slot = _eq_transform(
            pk,
            c.slots[0],
            to_int(self._control(m2), self.params.alphabet),
            to_int(m3, self.params.alphabet),
            rng,
        )
        if slot is None:
            return None
        return CondCiphertext(scheme_id=self.scheme_id, flag=1, slots=(slot,))

    def dec(
        self, sk: PaillierSecretKey, pk: PaillierPublicKey, c: CondCiphertext
    ) -> Optional[Message]:
        if len(c.slots) != 1:
            return None
        x = paillier.dec(sk, pk, c.slots[0])
        return from_int(x, self.params.alphabet, self.params.n)

    def sim(self, pk: PaillierPublicKey, rng: random.Random) -> CondCiphertext:
        return CondCiphertext(
            scheme_id=self.scheme_id, flag=1, slots=(_rand_plaintext(pk, rng),)
        )


class CapslockScheme(EqualityScheme):
    """Equality against the case-inverted control message; everything else shared."""

    scheme_id = SCHEME_CAPS

    def _control(self, m: Message) -> Message:
        return invert_case(m)


class HammingScheme:
    """Padded Hamming distance at most ell.

    Character-wise equality transforms deliver randomized share encodings;
    enough matching characters leave enough clean shares to rebuild the AE
    key wrapping the payload.
    """

    scheme_id = SCHEME_HAM

    def __init__(self, params: SchemeParams, ell: int):
        if not 0 <= ell < params.n:
            raise ParameterError("need 0 <= ell < n")
        self.params = params
        self.ell = ell
        self.payload_width = params.lambda_bits + (
            GF32.w if params.dual_field_shares else 0
        )

    def keygen_constraints(self) -> tuple[int, int]:
        # min(p, q) beyond the padded alphabet keeps character differences
        # invertible; N large enough keeps share embeddings near-uniform.
        return (
            self.params.alphabet.size + 1,
            2 * self.params.n * (1 << (2 * self.payload_width)),
        )

    def _padded(self, m) -> Message:
        m = as_message(m)
        if len(m) > self.params.n:
            raise DomainError(f"message longer than n={self.params.n}")
        return pad(m, self.params.n, self.params.alphabet)

    def _ae_body(self, m3: Message) -> bytes:
        # Fixed-width body: 1-byte length, payload codes, zero fill.  Keeps
        # the AE ciphertext length independent of the payload, so sizes leak
        # nothing and Sim output is shape-identical.
        body = bytes([len(m3)]) + bytes(m3)
        return body + bytes(self.params.n + 1 - len(body))

    def _ae_open(self, body: bytes) -> Optional[Message]:
        if len(body) != self.params.n + 1 or body[0] > self.params.n:
            return None
        return tuple(body[1 : 1 + body[0]])

    def ae_ciphertext_len(self) -> int:
        return authenc.OVERHEAD + self.params.n + 1

    def enc(self, pk: PaillierPublicKey, m, rng: random.Random) -> CondCiphertext:
        slots = tuple(
            paillier.enc(pk, code, rng=rng) for code in self._padded(m)
        )
        return CondCiphertext(scheme_id=self.scheme_id, flag=0, slots=slots)

    def cenc(
        self, pk: PaillierPublicKey, c: CondCiphertext, m2, m3, rng: random.Random
    ) -> Optional[CondCiphertext]:
        n = self.params.n
        if c.flag != 0 or len(c.slots) != n:
            return None
        control = self._padded(m2)
        m3 = as_message(m3)
        if len(m3) > n:
            raise DomainError(f"payload longer than n={n}")
        key = authenc.gen_key(rng)
        c_ae = authenc.auth_enc(key, self._ae_body(m3), rng)
        key_shares = share_gen(n, n - self.ell, int.from_bytes(key, "big"), GF128, rng)
        if self.params.dual_field_shares:
            zero_shares = share_gen(n, n - self.ell, 0, GF32, rng)
            payloads = [
                (z.value << self.params.lambda_bits) | s.value
                for s, z in zip(key_shares, zero_shares)
            ]
        else:
            payloads = [s.value for s in key_shares]
        slots = []
        for i in range(n):
            if math.gcd(c.slots[i].value, pk.n) != 1:
                return None
            embedded = renc(payloads[i], self.payload_width, pk.n, rng)
            # slot = Enc(embedded) + R_i * (Enc(control[i]) - c[i]): the share
            # encoding survives exactly where the characters match.
            diff = paillier.sub(pk, paillier.enc(pk, control[i], rng=rng), c.slots[i])
            masked = paillier.scalar_mul(pk, rng.randrange(pk.n), diff)
            slots.append(paillier.add(pk, paillier.enc(pk, embedded, rng=rng), masked))
        return CondCiphertext(
            scheme_id=self.scheme_id, flag=1, slots=tuple(slots), ae=c_ae
        )

    def dec(
        self,
        sk: PaillierSecretKey,
        pk: PaillierPublicKey,
        c: CondCiphertext,
        stats: DecryptStats | None = None,
    ) -> Optional[Message]:
        n = self.params.n
        if c.flag == 0:
            if len(c.slots) != n:
                return None
            codes = tuple(paillier.dec(sk, pk, s) for s in c.slots)
            return unpad(codes, self.params.alphabet)
        if len(c.slots) != n or c.ae is None:
            return None
        stats = stats if stats is not None else DecryptStats()
        lam = self.params.lambda_bits
        embedded = [rdec(paillier.dec(sk, pk, s), self.payload_width) for s in c.slots]
        if self.params.dual_field_shares:
            key_shares = [v & ((1 << lam) - 1) for v in embedded]
            zero_shares = [v >> lam for v in embedded]
            return self._search_dual(c.ae, key_shares, zero_shares, stats)
        return self._search_direct(c.ae, embedded, stats)

    def _confirm(
        self, c_ae: bytes, key_shares: list[int], exclusion: tuple[int, ...], stats: DecryptStats
    ) -> Optional[Message]:
        """Full-field recovery plus AE attempt for one candidate subset."""
        excluded = set(exclusion)
        points = [(i, key_shares[i - 1]) for i in range(1, self.params.n + 1) if i not in excluded]
        key = secret_recover(points, GF128, t=self.params.n - self.ell)
        stats.large_field_recoveries += 1
        stats.ae_attempts += 1
        body = authenc.auth_dec(key.to_bytes(authenc.KEY_LEN, "big"), c_ae)
        if body is None:
            return None
        return self._ae_open(body)

    def _search_direct(
        self, c_ae: bytes, key_shares: list[int], stats: DecryptStats
    ) -> Optional[Message]:
        for exclusion in enumerate_exclusions(
            self.params.n, self.ell, self.params.short_password_order
        ):
            stats.subset_attempts += 1
            m = self._confirm(c_ae, key_shares, exclusion, stats)
            if m is not None:
                return m
        return None

    def _search_dual(
        self,
        c_ae: bytes,
        key_shares: list[int],
        zero_shares: list[int],
        stats: DecryptStats,
    ) -> Optional[Message]:
        scanner = ZeroShareScanner(self.params.n, zero_shares)
        phases = exclusion_phases(
            self.params.n, self.ell, self.params.short_password_order
        )
        for phase in phases:
            for chunk in batched(phase):
                stats.subset_attempts += len(chunk)
                stats.small_field_recoveries += len(chunk)
                for hit in scanner.scan(chunk):
                    m = self._confirm(c_ae, key_shares, chunk[hit], stats)
                    if m is not None:
                        return m
        return None

    def sim(self, pk: PaillierPublicKey, rng: random.Random) -> CondCiphertext:
        slots = tuple(_rand_plaintext(pk, rng) for _ in range(self.params.n))
        blob = rng.getrandbits(8 * self.ae_ciphertext_len()).to_bytes(
            self.ae_ciphertext_len(), "big"
        )
        return CondCiphertext(scheme_id=self.scheme_id, flag=1, slots=slots, ae=blob)


class EditDistanceOneScheme:
    """Insert/delete edit distance at most one, via n+1 deletion variants."""

    scheme_id = SCHEME_ED

    def __init__(self, params: SchemeParams):
        self.params = params

    def keygen_constraints(self) -> tuple[int, int]:
        return self.params.alphabet.size ** (self.params.n + 1), 0

    def _check_len(self, m) -> Message:
        m = as_message(m)
        if len(m) > self.params.n:
            raise DomainError(f"message longer than n={self.params.n}")
        return m

    @staticmethod
    def _delete(m: Message, i: int) -> Message:
        """m with the i-th character (1-based) removed; m itself when i = 0 or i > |m|."""
        if i == 0 or i > len(m):
            return m
        return m[: i - 1] + m[i:]

    def enc(self, pk: PaillierPublicKey, m, rng: random.Random) -> CondCiphertext:
        m = self._check_len(m)
        slots = tuple(
            paillier.enc(pk, to_int(self._delete(m, i), self.params.alphabet), rng=rng)
            for i in range(self.params.n + 1)
        )
        return CondCiphertext(scheme_id=self.scheme_id, flag=0, slots=slots)

    def cenc(
        self, pk: PaillierPublicKey, c: CondCiphertext, m2, m3, rng: random.Random
    ) -> Optional[CondCiphertext]:
        n = self.params.n
        if c.flag != 0 or len(c.slots) != n + 1:
            return None
        m2 = self._check_len(m2)
        m3 = self._check_len(m3)
        alpha = self.params.alphabet
        payload = to_int(m3, alpha)
        slots = []
        # hidden[i] vs m2 covers deletions from the hidden message ...
        for i in range(n + 1):
            slot = _eq_transform(pk, c.slots[i], to_int(m2, alpha), payload, rng)
            if slot is None:
                return None
            slots.append(slot)
        # ... hidden[0] vs deletions of m2 covers insertions into it.
        for i in range(1, n + 1):
            slot = _eq_transform(
                pk, c.slots[0], to_int(self._delete(m2, i), alpha), payload, rng
            )
            if slot is None:
                return None
            slots.append(slot)
        return CondCiphertext(scheme_id=self.scheme_id, flag=1, slots=tuple(slots))

    def dec(
        self, sk: PaillierSecretKey, pk: PaillierPublicKey, c: CondCiphertext
    ) -> Optional[Message]:
        n = self.params.n
        if c.flag == 0:
            if len(c.slots) != n + 1:
                return None
            return from_int(paillier.dec(sk, pk, c.slots[0]), self.params.alphabet, n)
        if len(c.slots) != 2 * n + 1:
            return None
        values = [paillier.dec(sk, pk, s) for s in c.slots]
        return from_int(min(values), self.params.alphabet, n)

    def sim(self, pk: PaillierPublicKey, rng: random.Random) -> CondCiphertext:
        slots = tuple(_rand_plaintext(pk, rng) for _ in range(2 * self.params.n + 1))
        return CondCiphertext(scheme_id=self.scheme_id, flag=1, slots=slots)


class OrScheme:
    """Disjunction of member schemes sharing one Paillier key.

    Decryption returns the highest-index member's non-bottom result; the
    member order is fixed by construction and recorded in the ciphertext
    layout.
    """

    scheme_id = SCHEME_OR

    def __init__(self, params: SchemeParams, members: Sequence[object]):
        self.params = params
        self.members = tuple(members)

    def keygen_constraints(self) -> tuple[int, int]:
        bounds = [m.keygen_constraints() for m in self.members]
        return max(b[0] for b in bounds), max(b[1] for b in bounds)

    def enc(self, pk: PaillierPublicKey, m, rng: random.Random) -> CondCiphertext:
        return CondCiphertext(
            scheme_id=self.scheme_id,
            flag=0,
            members=tuple(member.enc(pk, m, rng) for member in self.members),
        )

    def cenc(
        self, pk: PaillierPublicKey, c: CondCiphertext, m2, m3, rng: random.Random
    ) -> Optional[CondCiphertext]:
        if c.flag != 0 or c.members is None or len(c.members) != len(self.members):
            return None
        parts = []
        for member, mc in zip(self.members, c.members):
            if mc.scheme_id != member.scheme_id:
                return None
            part = member.cenc(pk, mc, m2, m3, rng)
            if part is None:
                return None
            parts.append(part)
        return CondCiphertext(scheme_id=self.scheme_id, flag=1, members=tuple(parts))

    def dec(
        self, sk: PaillierSecretKey, pk: PaillierPublicKey, c: CondCiphertext
    ) -> Optional[Message]:
        if c.members is None or len(c.members) != len(self.members):
            return None
        result: Optional[Message] = None
        for member, mc in zip(self.members, c.members):
            if mc.scheme_id != member.scheme_id:
                return None
            out = member.dec(sk, pk, mc)
            if out is not None:
                result = out
        return result

    def sim(self, pk: PaillierPublicKey, rng: random.Random) -> CondCiphertext:
        return CondCiphertext(
            scheme_id=self.scheme_id,
            flag=1,
            members=tuple(member.sim(pk, rng) for member in self.members),
        )


def make_scheme(params: SchemeParams):
    """Instantiate the scheme selected by params.predicate."""
    kind = params.predicate.kind
    if kind == "eq":
        return EqualityScheme(params)
    if kind == "caps":
        return CapslockScheme(params)
    if kind == "ham":
        return HammingScheme(params, params.predicate.ell)
    if kind == "ed1":
        return EditDistanceOneScheme(params)
    if kind == "typo":
        # Fixed member order; on ties of non-bottom results the later member
        # (edit distance) wins.
        members = (
            CapslockScheme(params),
            HammingScheme(params, 2),
            EditDistanceOneScheme(params),
        )
        return OrScheme(params, members)
    raise ParameterError(f"no scheme for predicate kind {kind!r}")


def scheme_keygen(
    params: SchemeParams, rng: random.Random | None = None
) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    """One Paillier key pair satisfying the tightest member constraint."""
    scheme = make_scheme(params)
    min_prime_bound, require_n = scheme.keygen_constraints()
    return paillier.keygen(
        params.modulus_bits, min_prime_bound, require_n, rng=rng
    )


def params_to_dict(params: SchemeParams) -> dict:
    return {
        "predicate": params.predicate.text(),
        "n": params.n,
        "lambda_bits": params.lambda_bits,
        "modulus_bits": params.modulus_bits,
        "alphabet_size": params.alphabet.size,
        "dual_field_shares": params.dual_field_shares,
        "short_password_order": params.short_password_order,
        "insecure": params.insecure,
    }


def params_from_dict(d: dict) -> SchemeParams:
    return SchemeParams(
        predicate=PredicateSpec.parse(d["predicate"]),
        n=int(d["n"]),
        lambda_bits=int(d["lambda_bits"]),
        modulus_bits=int(d["modulus_bits"]),
        alphabet=Alphabet(int(d["alphabet_size"])),
        dual_field_shares=bool(d["dual_field_shares"]),
        short_password_order=bool(d["short_password_order"]),
        insecure=bool(d["insecure"]),
    )


# --- wire format -----------------------------------------------------------
#
# version (1) || scheme id (1) || flag (1) || count (4 BE) || payload.
# Slot schemes: count fixed-width Paillier values (width derived from pk),
# then for Hamming flag-1 a length-prefixed AE blob.  OR: count
# length-prefixed member ciphertexts.


def serialize_ciphertext(c: CondCiphertext, pk: PaillierPublicKey) -> bytes:
    head = struct.pack(">BBB", WIRE_VERSION, c.scheme_id, c.flag)
    if c.members is not None:
        out = [head, struct.pack(">I", len(c.members))]
        for member in c.members:
            blob = serialize_ciphertext(member, pk)
            out.append(struct.pack(">I", len(blob)))
            out.append(blob)
        return b"".join(out)
    width = paillier.ciphertext_width(pk)
    out = [head, struct.pack(">I", len(c.slots))]
    for slot in c.slots:
        out.append(slot.value.to_bytes(width, "big"))
    if c.ae is not None:
        out.append(struct.pack(">I", len(c.ae)))
        out.append(c.ae)
    return b"".join(out)


def deserialize_ciphertext(data: bytes, pk: PaillierPublicKey) -> CondCiphertext:
    c, rest = _parse_ciphertext(data, pk)
    if rest:
        raise MalformedCiphertextError("trailing bytes after ciphertext")
    return c


def _parse_ciphertext(data: bytes, pk: PaillierPublicKey) -> tuple[CondCiphertext, bytes]:
    if len(data) < 7:
        raise MalformedCiphertextError("truncated header")
    version, scheme_id, flag = struct.unpack(">BBB", data[:3])
    if version != WIRE_VERSION:
        raise MalformedCiphertextError(f"unsupported wire version {version}")
    if flag not in (0, 1):
        raise MalformedCiphertextError(f"bad flag {flag}")
    (count,) = struct.unpack(">I", data[3:7])
    body = data[7:]
    if scheme_id == SCHEME_OR:
        members = []
        for _ in range(count):
            if len(body) < 4:
                raise MalformedCiphertextError("truncated member")
            (blen,) = struct.unpack(">I", body[:4])
            if len(body) < 4 + blen:
                raise MalformedCiphertextError("truncated member body")
            member = deserialize_ciphertext(body[4 : 4 + blen], pk)
            members.append(member)
            body = body[4 + blen :]
        return (
            CondCiphertext(scheme_id=scheme_id, flag=flag, members=tuple(members)),
            body,
        )
    width = paillier.ciphertext_width(pk)
    if len(body) < count * width:
        raise MalformedCiphertextError("truncated slots")
    slots = tuple(
        PaillierCiphertext(value=int.from_bytes(body[i * width : (i + 1) * width], "big"))
        for i in range(count)
    )
    body = body[count * width :]
    ae = None
    if scheme_id == SCHEME_HAM and flag == 1:
        if len(body) < 4:
            raise MalformedCiphertextError("truncated AE length")
        (alen,) = struct.unpack(">I", body[:4])
        if len(body) < 4 + alen:
            raise MalformedCiphertextError("truncated AE blob")
        ae = body[4 : 4 + alen]
        body = body[4 + alen :]
    return CondCiphertext(scheme_id=scheme_id, flag=flag, slots=slots, ae=ae), body
