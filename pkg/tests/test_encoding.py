import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from condenc import encoding
from condenc.encoding import Alphabet, BYTES
from condenc.errors import DomainError, MalformedPaddingError

BIN = Alphabet(2)


def strings_up_to(size, n):
    for length in range(n + 1):
        yield from product(range(size), repeat=length)


class TestToInt:
    def test_empty_is_zero(self):
        assert encoding.to_int((), BYTES) == 0

    def test_single_char(self):
        assert encoding.to_int((65,), BYTES) == 66

    def test_injective_exhaustive_binary(self):
        seen = {}
        for m in strings_up_to(2, 4):
            x = encoding.to_int(m, BIN)
            assert x not in seen, f"collision {m} vs {seen[x]}"
            seen[x] = m
        # bounded by |Sigma|^(n+1)
        assert max(seen) < 2**5

    def test_image_is_contiguous(self):
        count = encoding.message_count(2, 4)
        assert count == 31
        assert set(range(count)) == {
            encoding.to_int(m, BIN) for m in strings_up_to(2, 4)
        }

    def test_code_out_of_range(self):
        with pytest.raises(DomainError):
            encoding.to_int((2,), BIN)


class TestFromInt:
    def test_zero_is_empty(self):
        assert encoding.from_int(0, BYTES) == ()

    def test_roundtrip(self):
        m = encoding.as_message("ab")
        assert encoding.from_int(encoding.to_int(m, BYTES), BYTES) == m

    def test_exhaustive_roundtrip_binary(self):
        for m in strings_up_to(2, 4):
            assert encoding.from_int(encoding.to_int(m, BIN), BIN, 4) == m

    def test_no_preimage_above_bound(self):
        # everything at or above |Sigma|^(n+1) lacks a length-<=n preimage,
        # and so does the gap between message_count and that bound
        for x in range(encoding.message_count(2, 4), 2**5 + 10):
            assert encoding.from_int(x, BIN, 4) is None

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            encoding.from_int(-1, BYTES)


class TestPadding:
    def test_pad_empty(self):
        assert encoding.pad((), 4, BIN) == (2, 2, 2, 2)

    def test_pad_partial(self):
        m = encoding.as_message("ab")
        assert encoding.pad(m, 4, BYTES) == m + (256, 256)

    def test_pad_injective_exhaustive(self):
        padded = [encoding.pad(m, 4, BIN) for m in strings_up_to(2, 4)]
        assert len(set(padded)) == len(padded)

    def test_pad_too_long(self):
        with pytest.raises(DomainError):
            encoding.pad((0, 1, 0, 1, 0), 4, BIN)

    def test_pad_rejects_pad_symbol(self):
        with pytest.raises(DomainError):
            encoding.pad((2,), 4, BIN)

    def test_unpad(self):
        assert encoding.unpad((0, 1, 2, 2), BIN) == (0, 1)
        assert encoding.unpad((2, 2, 2, 2), BIN) == ()

    def test_unpad_malformed(self):
        with pytest.raises(MalformedPaddingError):
            encoding.unpad((0, 2, 1, 2), BIN)

    @settings(max_examples=50, deadline=None)
    @given(st.binary(max_size=16))
    def test_pad_unpad_roundtrip(self, data):
        m = tuple(data)
        assert encoding.unpad(encoding.pad(m, 16, BYTES), BYTES) == m


class TestInvertCase:
    def test_flips_letters_only(self):
        m = encoding.as_message("Pass1!")
        assert bytes(encoding.invert_case(m)) == b"pASS1!"

    def test_non_ascii_fixed_point(self):
        assert encoding.invert_case((0xDF,)) == (0xDF,)

    @settings(max_examples=50, deadline=None)
    @given(st.binary(max_size=32))
    def test_involution(self, data):
        m = tuple(data)
        assert encoding.invert_case(encoding.invert_case(m)) == m


class TestRenc:
    def test_roundtrip_bulk(self, rng):
        for _ in range(10_000):
            x = rng.getrandbits(8)
            y = encoding.renc(x, 8, 12345, rng)
            assert y < 12345
            assert encoding.rdec(y, 8) == x

    def test_tight_modulus_edge(self, rng):
        # N = 2^w + 1 with payload 0: multiplier is 0 or 1
        seen = {encoding.renc(0, 4, 17, rng) for _ in range(200)}
        assert seen == {0, 16}

    def test_rdec_examples(self):
        assert encoding.rdec(1 << 8, 8) == 0
        assert encoding.rdec(5, 8) == 5

    def test_payload_out_of_range(self, rng):
        with pytest.raises(DomainError):
            encoding.renc(256, 8, 12345, rng)

    def test_modulus_too_small(self, rng):
        with pytest.raises(DomainError):
            encoding.renc(1, 8, 256, rng)

    @settings(max_examples=50, deadline=None)
    @given(
        payload=st.integers(min_value=0, max_value=255),
        seed=st.integers(min_value=0, max_value=2**16),
    )
    def test_congruence(self, payload, seed):
        y = encoding.renc(payload, 8, 100_000, random.Random(seed))
        assert y % 256 == payload

    def test_exact_distribution_distance(self):
        # Exact enumeration of the embedding of a uniform payload at w=3,
        # N=100 versus uniform Z_100.  With a = 2^w, r = N mod a the exact
        # distance is r(a-r)/(Na), within the coarser bound 2^w/(N - 2^w).
        w, n_mod = 3, 100
        a = 1 << w
        prob = {}
        for payload in range(a):
            count = ((n_mod - 1 - payload) >> w) + 1
            for mult in range(count):
                y = (mult << w) + payload
                prob[y] = prob.get(y, Fraction(0)) + Fraction(1, a) * Fraction(1, count)
        assert sum(prob.values()) == 1
        sd = sum(abs(prob.get(y, Fraction(0)) - Fraction(1, n_mod)) for y in range(n_mod)) / 2
        r = n_mod % a
        assert sd == Fraction(r * (a - r), n_mod * a)
        assert sd <= Fraction(a, n_mod - a)
