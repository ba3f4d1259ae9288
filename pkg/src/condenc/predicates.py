"""Plaintext reference predicates.

These are the ground-truth oracles the conditional schemes are tested
against, plus the canonical text form used by CLI flags:
``eq``, ``caps``, ``ham:<l>:<n>``, ``ed1``, ``typo:<n>``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .encoding import Alphabet, BYTES, Message, as_message, invert_case, pad
from .errors import DomainError


def p_eq(m1, m2) -> int:
    return int(as_message(m1) == as_message(m2))


def p_capslock(m1, m2) -> int:
    """1 iff m1 equals m2 with ASCII letter case inverted.

    Strings without letters are fixed points of the case flip, so for such
    inputs this degenerates to plain equality (e.g. two equal digit strings
    match).
    """
    return p_eq(as_message(m1), invert_case(as_message(m2)))


def p_ham(m1, m2, ell: int, n: int, alphabet: Alphabet = BYTES) -> int:
    """1 iff the padded strings differ in at most ell positions."""
    a = pad(as_message(m1), n, alphabet)
    b = pad(as_message(m2), n, alphabet)
    return int(sum(x != y for x, y in zip(a, b)) <= ell)


def _deletions(m: Message):
    yield m
    for i in range(len(m)):
        yield m[:i] + m[i + 1 :]


def p_ed1(m1, m2) -> int:
    """1 iff the strings are equal or one is the other with one character deleted.

    This is insertion/deletion edit distance <= 1; substitutions do not count
    (they are the Hamming predicate's job).
    """
    a, b = as_message(m1), as_message(m2)
    return int(b in _deletions(a) or a in _deletions(b))


def p_typo(m1, m2, n: int, alphabet: Alphabet = BYTES) -> int:
    """CAPSLOCK or padded Hamming distance <= 2 or edit distance <= 1."""
    return int(
        bool(p_capslock(m1, m2))
        or bool(p_ham(m1, m2, 2, n, alphabet))
        or bool(p_ed1(m1, m2))
    )


@dataclass(frozen=True)
class PredicateSpec:
    kind: str  # eq | caps | ham | ed1 | typo
    ell: int = 0
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("eq", "caps", "ham", "ed1", "typo"):
            raise DomainError(f"unknown predicate kind {self.kind!r}")
        if self.ell < 0 or self.n < 0:
            raise DomainError("predicate parameters must be non-negative")

    def evaluate(self, m1, m2, alphabet: Alphabet = BYTES) -> int:
        if self.kind == "eq":
            return p_eq(m1, m2)
        if self.kind == "caps":
            return p_capslock(m1, m2)
        if self.kind == "ham":
            return p_ham(m1, m2, self.ell, self.n, alphabet)
        if self.kind == "ed1":
            return p_ed1(m1, m2)
        return p_typo(m1, m2, self.n, alphabet)

    def text(self) -> str:
        if self.kind == "ham":
            return f"ham:{self.ell}:{self.n}"
        if self.kind == "typo":
            return f"typo:{self.n}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "PredicateSpec":
        parts = text.split(":")
        kind = parts[0]
        try:
            if kind == "ham":
                return cls(kind="ham", ell=int(parts[1]), n=int(parts[2]))
            if kind == "typo":
                return cls(kind="typo", n=int(parts[1]))
            if kind in ("eq", "caps", "ed1") and len(parts) == 1:
                return cls(kind=kind)
        except (IndexError, ValueError) as exc:
            raise DomainError(f"bad predicate spec {text!r}") from exc
        raise DomainError(f"bad predicate spec {text!r}")
