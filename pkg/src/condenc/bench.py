"""Benchmark sweeps over message length, emitting plot-ready data files.

Each row reports mean wall-clock times (milliseconds, monotonic clock, one
warmup run before ``trials`` measured runs) for regular encryption,
conditional encryption and conditional decryption, plus exact serialized
ciphertext sizes.  Worst-case decryption rows use uniformly random
predicate-false message pairs; dataset mode samples predicate-true
password/typo pairs instead.

File format: one header line ``L Enc CondEnc CondDec CtxtSize
CondCtxtSize`` followed by whitespace-separated numeric rows, one per
message length.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .encoding import Alphabet, BYTES, Message
from .errors import DomainError, ParameterError
from .predicates import PredicateSpec
from .schemes import SchemeParams, make_scheme, scheme_keygen, serialize_ciphertext

HEADER = ["L", "Enc", "CondEnc", "CondDec", "CtxtSize", "CondCtxtSize"]


@dataclass(frozen=True)
class BenchRow:
    length: int
    enc_ms: float
    cond_enc_ms: float
    cond_dec_ms: float
    ctxt_size: int
    cond_ctxt_size: int


def predicate_for_length(template: PredicateSpec, length: int) -> PredicateSpec:
    """The template predicate re-parameterized for one sweep length."""
    if template.kind == "ham":
        return PredicateSpec(kind="ham", ell=template.ell, n=length)
    if template.kind == "typo":
        return PredicateSpec(kind="typo", n=length)
    return template


def _random_message(rng: random.Random, max_len: int, alphabet: Alphabet) -> Message:
    length = rng.randint(1, max_len)
    return tuple(rng.randrange(alphabet.size) for _ in range(length))


def _false_pair(
    predicate: PredicateSpec, rng: random.Random, n: int, alphabet: Alphabet
) -> tuple[Message, Message]:
    while True:
        m1 = _random_message(rng, n, alphabet)
        m2 = _random_message(rng, n, alphabet)
        if not predicate.evaluate(m1, m2, alphabet):
            return m1, m2


def _true_pair(
    predicate: PredicateSpec,
    pairs: list[tuple[str, str]],
    rng: random.Random,
    n: int,
    alphabet: Alphabet,
) -> tuple[Message, Message]:
    usable = []
    for pwd, typo in pairs:
        a, b = tuple(pwd.encode()), tuple(typo.encode())
        if len(a) <= n and len(b) <= n and predicate.evaluate(a, b, alphabet):
            usable.append((a, b))
    if not usable:
        raise DomainError("no dataset pair satisfies the predicate at this length")
    return usable[rng.randrange(len(usable))]


def _timed(fn, trials: int) -> float:
    fn()  # warmup
    start = time.perf_counter()
    for _ in range(trials):
        fn()
    return (time.perf_counter() - start) / trials * 1000.0


def bench_length(
    template: PredicateSpec,
    length: int,
    modulus_bits: int,
    trials: int,
    rng: random.Random,
    dual_field_shares: bool = False,
    short_password_order: bool = False,
    insecure: bool = False,
    dataset: list[tuple[str, str]] | None = None,
    alphabet: Alphabet = BYTES,
) -> BenchRow:
    predicate = predicate_for_length(template, length)
    params = SchemeParams(
        predicate=predicate,
        n=length,
        modulus_bits=modulus_bits,
        alphabet=alphabet,
        dual_field_shares=dual_field_shares,
        short_password_order=short_password_order,
        insecure=insecure,
    )
    scheme = make_scheme(params)
    pk, sk = scheme_keygen(params, rng)
    if dataset is None:
        m1, m2 = _false_pair(predicate, rng, length, alphabet)
    else:
        m1, m2 = _true_pair(predicate, dataset, rng, length, alphabet)

    c1 = scheme.enc(pk, m1, rng)
    c2 = scheme.cenc(pk, c1, m2, m2, rng)
    if c2 is None:
        raise ParameterError("conditional encryption rejected a fresh ciphertext")
    enc_ms = _timed(lambda: scheme.enc(pk, m1, rng), trials)
    cond_enc_ms = _timed(lambda: scheme.cenc(pk, c1, m2, m2, rng), trials)
    cond_dec_ms = _timed(lambda: scheme.dec(sk, pk, c2), trials)
    return BenchRow(
        length=length,
        enc_ms=enc_ms,
        cond_enc_ms=cond_enc_ms,
        cond_dec_ms=cond_dec_ms,
        ctxt_size=len(serialize_ciphertext(c1, pk)),
        cond_ctxt_size=len(serialize_ciphertext(c2, pk)),
    )


def run_sweep(
    template: PredicateSpec,
    lengths: list[int],
    modulus_bits: int,
    trials: int,
    rng: random.Random,
    **kwargs,
) -> list[BenchRow]:
    return [
        bench_length(template, length, modulus_bits, trials, rng, **kwargs)
        for length in lengths
    ]


def format_dat(rows: list[BenchRow]) -> str:
    lines = [" ".join(HEADER)]
    for r in rows:
        lines.append(
            f"{r.length} {r.enc_ms:.3f} {r.cond_enc_ms:.3f} {r.cond_dec_ms:.3f} "
            f"{r.ctxt_size} {r.cond_ctxt_size}"
        )
    return "\n".join(lines) + "\n"


def parse_dat(text: str) -> list[BenchRow]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != HEADER:
        raise DomainError("missing or bad header line")
    rows = []
    for ln in lines[1:]:
        f = ln.split()
        rows.append(
            BenchRow(
                length=int(f[0]),
                enc_ms=float(f[1]),
                cond_enc_ms=float(f[2]),
                cond_dec_ms=float(f[3]),
                ctxt_size=int(f[4]),
                cond_ctxt_size=int(f[5]),
            )
        )
    return rows


def read_pairs_tsv(text: str) -> tuple[list[tuple[str, str]], int]:
    """Parse password<TAB>typo lines; returns (pairs, skipped_count)."""
    pairs = []
    skipped = 0
    for ln in text.splitlines():
        if not ln.strip():
            continue
        parts = ln.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            skipped += 1
            continue
        pairs.append((parts[0], parts[1]))
    return pairs, skipped
