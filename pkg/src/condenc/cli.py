"""Command-line surface.

Subcommands: ``keygen``, ``roundtrip``, ``bench``, ``dataset-filter``,
``typtop`` (init/register/login/inspect) and ``attack-demo``.

Exit codes: 0 success or accepted login, 1 rejected login / predicate
false, 2 usage error, 3 vault integrity error.  Set ``CONDENC_SEED`` for
reproducible randomness.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import bench as benchmod
from . import schemes, typtop
from .errors import CondEncError, DomainError, IntegrityError, ParameterError
from .predicates import PredicateSpec
from .rng import rng_from_env
from .schemes import SchemeParams, make_scheme, scheme_keygen
from .paillier import PaillierPublicKey, PaillierSecretKey

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_INTEGRITY = 3

BOTTOM = "BOTTOM"


def _build_params(args, predicate: PredicateSpec) -> SchemeParams:
    n = predicate.n if predicate.kind in ("ham", "typo") else args.n
    if n is None:
        raise DomainError("this predicate needs --n")
    return SchemeParams(
        predicate=predicate,
        n=n,
        modulus_bits=args.modulus_bits,
        dual_field_shares=args.dual_field,
        short_password_order=args.short_password,
        insecure=args.insecure,
    )


def _add_scheme_flags(p: argparse.ArgumentParser, modulus_default: int = 1024) -> None:
    p.add_argument("--predicate", required=True, help="eq | caps | ham:<l>:<n> | ed1 | typo:<n>")
    p.add_argument("--n", type=int, default=None, help="max message length (eq/caps/ed1)")
    p.add_argument("--modulus-bits", type=int, default=modulus_default)
    p.add_argument("--insecure", action="store_true", help="allow toy moduli below 1024 bits")
    p.add_argument("--dual-field", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--short-password", action=argparse.BooleanOptionalAction, default=False)


def cmd_keygen(args) -> int:
    predicate = PredicateSpec.parse(args.predicate)
    params = _build_params(args, predicate)
    rng = rng_from_env()
    pk, sk = scheme_keygen(params, rng)
    out = Path(args.out)
    out.with_suffix(".pub").write_bytes(pk.serialize())
    out.with_suffix(".key").write_bytes(sk.serialize())
    out.with_suffix(".params.json").write_text(
        json.dumps(schemes.params_to_dict(params), indent=1) + "\n"
    )
    print(f"wrote {out.with_suffix('.pub')}, {out.with_suffix('.key')}, "
          f"{out.with_suffix('.params.json')}")
    return EXIT_OK


def _load_keys(prefix: str) -> tuple[SchemeParams, PaillierPublicKey, PaillierSecretKey]:
    out = Path(prefix)
    params = schemes.params_from_dict(
        json.loads(out.with_suffix(".params.json").read_text())
    )
    pk = PaillierPublicKey.deserialize(out.with_suffix(".pub").read_bytes())
    sk = PaillierSecretKey.deserialize(out.with_suffix(".key").read_bytes())
    return params, pk, sk


def cmd_roundtrip(args) -> int:
    params, pk, sk = _load_keys(args.keys)
    scheme = make_scheme(params)
    rng = rng_from_env()
    m3 = args.m3 if args.m3 is not None else args.m2
    c1 = scheme.enc(pk, args.m1, rng)
    c2 = scheme.cenc(pk, c1, args.m2, m3, rng)
    if args.reuse_conditional and c2 is not None:
        c2 = scheme.cenc(pk, c2, args.m2, m3, rng)
        if c2 is None:
            print(f"{BOTTOM} (conditional ciphertexts cannot be re-conditioned)")
            return EXIT_REJECT
    if c2 is None:
        print(f"{BOTTOM} (conditional encryption rejected the input ciphertext)")
        return EXIT_REJECT
    out = scheme.dec(sk, pk, c2)
    if out is None:
        print(BOTTOM)
        return EXIT_REJECT
    print(bytes(out).decode("utf-8", errors="replace"))
    return EXIT_OK


def cmd_bench(args) -> int:
    predicate = PredicateSpec.parse(args.predicate)
    lengths = [int(x) for x in args.n_list.split(",") if x]
    if not lengths:
        raise DomainError("--n-list must name at least one length")
    dataset = None
    if args.dataset:
        pairs, skipped = benchmod.read_pairs_tsv(Path(args.dataset).read_text())
        if skipped:
            print(f"skipped {skipped} malformed dataset rows", file=sys.stderr)
        longest = max(lengths)
        over = sum(1 for a, b in pairs if len(a.encode()) > longest or len(b.encode()) > longest)
        if over:
            print(
                f"skipped {over} dataset rows over the {longest}-character policy",
                file=sys.stderr,
            )
        dataset = pairs
    rng = rng_from_env()
    rows = benchmod.run_sweep(
        predicate,
        lengths,
        args.modulus_bits,
        args.trials,
        rng,
        dual_field_shares=args.dual_field,
        short_password_order=args.short_password,
        insecure=args.insecure,
        dataset=dataset,
    )
    text = benchmod.format_dat(rows)
    Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_dataset_filter(args) -> int:
    predicate = PredicateSpec.parse(args.predicate)
    pairs, skipped = benchmod.read_pairs_tsv(Path(args.pairs).read_text())
    if skipped:
        print(f"warning: skipped {skipped} malformed rows", file=sys.stderr)
    kept = []
    for pwd, typo in pairs:
        a, b = tuple(pwd.encode()), tuple(typo.encode())
        if len(a) > args.max_len or len(b) > args.max_len:
            continue
        if predicate.evaluate(a, b):
            kept.append((pwd, typo))
    Path(args.out).write_text("".join(f"{p}\t{t}\n" for p, t in kept))
    print(f"kept {len(kept)}/{len(pairs)} pairs")
    return EXIT_OK


def _write_state(path: str, state: typtop.VaultState) -> None:
    """Write-temp-rename so a crash never truncates the vault."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".vault-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(state.to_json())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_state(path: str) -> typtop.VaultState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IntegrityError(f"cannot read state file: {exc}") from exc
    return typtop.VaultState.from_json(text)


def cmd_typtop(args) -> int:
    rng = rng_from_env()
    if args.action == "init":
        predicate = PredicateSpec(kind="typo", n=args.n)
        params = SchemeParams(
            predicate=predicate,
            n=args.n,
            modulus_bits=args.modulus_bits,
            dual_field_shares=args.dual_field,
            short_password_order=args.short_password,
            insecure=args.insecure,
        )
        kdf = typtop.KdfParams.fast() if args.kdf == "fast" else typtop.KdfParams.mhf()
        state = typtop.VaultState(
            scheme_params=params,
            backend=args.backend,
            kdf=kdf,
            waitlist_size=args.waitlist_size,
            cache_size=args.cache_size,
        )
        _write_state(args.state, state)
        print(f"initialized {args.backend} vault at {args.state}")
        return EXIT_OK

    state = _read_state(args.state)
    if args.action == "register":
        decision = state.register_new_user(args.user, args.password, rng)
        if decision == typtop.ACCEPT:
            _write_state(args.state, state)
        print(decision)
        return EXIT_OK if decision == typtop.ACCEPT else EXIT_REJECT
    if args.action == "login":
        decision = state.login(args.user, args.password, rng)
        _write_state(args.state, state)
        print(decision)
        return EXIT_OK if decision == typtop.ACCEPT else EXIT_REJECT
    # inspect
    users = [args.user] if args.user else sorted(state.users)
    print(f"backend={state.backend_name} kdf={state.kdf.profile} "
          f"users={len(state.users)}")
    for uid in users:
        size = state.user_storage_bytes(uid)
        print(f"{uid}: {size} bytes ({size / 1024:.2f} KB)")
    return EXIT_OK


def cmd_attack_demo(args) -> int:
    rng = rng_from_env()
    trials = args.trials
    print(f"backend={args.backend} trials={trials}")
    if trials <= 0:
        print("conclusive 0/0, correct 0/0")
        return EXIT_OK
    if args.n < 10:
        raise DomainError("attack-demo needs --n of at least 10")
    predicate = PredicateSpec(kind="typo", n=args.n)
    params = SchemeParams(
        predicate=predicate,
        n=args.n,
        modulus_bits=args.modulus_bits,
        dual_field_shares=True,
        short_password_order=True,
        insecure=args.insecure,
    )
    state = typtop.VaultState(scheme_params=params, backend=args.backend)
    registered = "correct-horse-battery"[: args.n]
    state.register_new_user("victim", registered, rng)
    conclusive = 0
    correct = 0
    for i in range(trials):
        # Fresh candidate pair per round, neither a plausible typo of the
        # registered password (the game's validity rule).
        pwd_0 = f"alp{i}"
        pwd_1 = f"jos{i}"
        assert not predicate.evaluate(registered, pwd_0)
        assert not predicate.evaluate(registered, pwd_1)
        b = rng.randrange(2)
        state.login("victim", pwd_1 if b else pwd_0, rng)
        guess = typtop.legacy_attack(state, "victim", registered, pwd_0, pwd_1)
        if guess is not None:
            conclusive += 1
            if guess == b:
                correct += 1
    print(f"conclusive {conclusive}/{trials}, correct {correct}/{trials}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condenc",
        description="Conditional encryption schemes, benchmarks and the typo vault.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate and store a scheme key pair")
    _add_scheme_flags(p)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(fn=cmd_keygen)

    p = sub.add_parser("roundtrip", help="enc -> cenc -> dec with stored keys")
    p.add_argument("--keys", required=True, help="key path prefix from keygen")
    p.add_argument("--m1", required=True, help="hidden message")
    p.add_argument("--m2", required=True, help="control message")
    p.add_argument("--m3", default=None, help="payload (defaults to m2)")
    p.add_argument(
        "--reuse-conditional",
        action="store_true",
        help="feed the conditional ciphertext back into cenc (demonstrates rejection)",
    )
    p.set_defaults(fn=cmd_roundtrip)

    p = sub.add_parser("bench", help="sweep message lengths, write a .dat table")
    _add_scheme_flags(p)
    p.add_argument("--n-list", required=True, help="comma-separated lengths")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--dataset", default=None, help="password<TAB>typo TSV for predicate-true rows")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("dataset-filter", help="keep TSV rows where the predicate holds")
    p.add_argument("--pairs", required=True, help="input TSV (password<TAB>typo)")
    p.add_argument("--predicate", required=True)
    p.add_argument("--max-len", type=int, default=32)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_dataset_filter)

    p = sub.add_parser("typtop", help="typo-vault operations")
    p.add_argument("action", choices=["init", "register", "login", "inspect"])
    p.add_argument("--state", required=True, help="vault state file")
    p.add_argument("--backend", choices=["cond", "legacy"], default="cond")
    p.add_argument("--kdf", choices=["fast", "mhf"], default="fast")
    p.add_argument("--user", default=None)
    p.add_argument("--password", default=None)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--modulus-bits", type=int, default=1024)
    p.add_argument("--insecure", action="store_true")
    p.add_argument("--dual-field", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--short-password", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--waitlist-size", type=int, default=typtop.DEFAULT_WAITLIST_SIZE)
    p.add_argument("--cache-size", type=int, default=typtop.DEFAULT_CACHE_SIZE)
    p.set_defaults(fn=cmd_typtop)

    p = sub.add_parser("attack-demo", help="run the waitlist distinguishing game")
    p.add_argument("--backend", choices=["cond", "legacy"], required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--modulus-bits", type=int, default=1024)
    p.add_argument("--insecure", action="store_true")
    p.set_defaults(fn=cmd_attack_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "typtop":
        if args.action in ("register", "login") and (not args.user or args.password is None):
            parser.error(f"typtop {args.action} needs --user and --password")
    try:
        return args.fn(args)
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (DomainError, ParameterError, CondEncError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
