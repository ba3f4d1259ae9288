"""Shamir (t, n) secret sharing over binary extension fields GF(2^w).

Field elements are ints holding polynomial coefficient bits; arithmetic is
carry-less multiplication with reduction by a fixed irreducible polynomial.
Shares are evaluations of a random degree-(t-1) polynomial at x = 1..n with
the secret at x = 0; any t shares recover the secret, any t-1 are jointly
uniform.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass

from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^w) with a fixed degree-w irreducible reduction polynomial."""

    w: int
    poly: int  # full polynomial including the x^w term

    @property
    def order(self) -> int:
        return 1 << self.w

    def check(self, x: int) -> None:
        if not 0 <= x < self.order:
            raise DomainError(f"{x} is not a GF(2^{self.w}) element")

    def mul(self, a: int, b: int) -> int:
        w, poly = self.w, self.poly
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if (a >> w) & 1:
                a ^= poly
        return r

    def inv(self, a: int) -> int:
        """Inverse by the extended Euclidean algorithm on polynomials."""
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        u, v = a, self.poly
        g1, g2 = 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v = v, u
                g1, g2 = g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return g1

    def poly_eval(self, coeffs: list[int], x: int) -> int:
        """Horner evaluation; coeffs[0] is the constant term."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, x) ^ c
        return acc


# Key shares: GF(2^128), x^128 + x^7 + x^2 + x + 1.
GF128 = FieldSpec(w=128, poly=(1 << 128) | 0x87)
# Zero shares for the cheap subset pre-check: GF(2^32), x^32 + x^7 + x^3 + x^2 + 1.
GF32 = FieldSpec(w=32, poly=(1 << 32) | 0x8D)


@dataclass(frozen=True)
class Share:
    """Evaluation point (index >= 1, field element)."""

    index: int
    value: int

    def serialize(self, field: FieldSpec) -> bytes:
        return struct.pack(">H", self.index) + self.value.to_bytes(field.w // 8, "big")

    @classmethod
    def deserialize(cls, data: bytes, field: FieldSpec) -> "Share":
        (index,) = struct.unpack(">H", data[:2])
        return cls(index=index, value=int.from_bytes(data[2 : 2 + field.w // 8], "big"))


def share_gen(
    n: int, t: int, secret: int, field: FieldSpec, rng: random.Random
) -> list[Share]:
    """n shares of ``secret`` with threshold t (degree t-1 polynomial)."""
    if not 1 <= t <= n:
        raise ParameterError(f"need 1 <= t <= n, got t={t}, n={n}")
    if n >= field.order:
        raise ParameterError(f"at most {field.order - 1} shares over GF(2^{field.w})")
    field.check(secret)
    coeffs = [secret] + [rng.getrandbits(field.w) for _ in range(t - 1)]
    return [Share(index=i, value=field.poly_eval(coeffs, i)) for i in range(1, n + 1)]


def secret_recover(
    points: "list[Share] | list[tuple[int, int]]",
    field: FieldSpec,
    t: int | None = None,
) -> int:
    """Lagrange interpolation at zero through the first t points.

    With t omitted, all provided points are used.  Duplicate or zero indices
    among the used points are rejected.
    """
    pts = [(p.index, p.value) if isinstance(p, Share) else p for p in points]
    if t is not None:
        if len(pts) < t:
            raise DomainError(f"need at least {t} points, got {len(pts)}")
        pts = pts[:t]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise DomainError("duplicate share indices")
    if 0 in xs:
        raise DomainError("index 0 is reserved for the secret")
    acc = 0
    for i, (xi, yi) in enumerate(pts):
        num = 1
        den = 1
        for j, (xj, _) in enumerate(pts):
            if j == i:
                continue
            num = field.mul(num, xj)
            den = field.mul(den, xj ^ xi)
        acc ^= field.mul(yi, field.mul(num, field.inv(den)))
    return acc
