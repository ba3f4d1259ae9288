import json
import random

import pytest

from condenc import authenc
from condenc.errors import DomainError, IntegrityError
from condenc.predicates import PredicateSpec
from condenc.schemes import SchemeParams
from condenc.typtop import ACCEPT, REJECT, KdfParams, VaultState, legacy_attack, pkdf
from conftest import NoShuffleRng


def vault_params(n=12, modulus_bits=512):
    return SchemeParams(
        predicate=PredicateSpec("typo", n=n),
        n=n,
        modulus_bits=modulus_bits,
        insecure=True,
        dual_field_shares=True,
        short_password_order=True,
    )


@pytest.fixture(scope="module")
def vault():
    """One registered cond-backend vault reused by read-only tests."""
    state = VaultState(vault_params(), backend="cond")
    state.register_new_user("alice", "Summer2024", random.Random(100))
    return state


class TestPkdf:
    def test_deterministic(self):
        params = KdfParams.fast()
        assert pkdf(b"pw", b"s" * 16, params) == pkdf(b"pw", b"s" * 16, params)

    def test_salt_sensitivity(self, rng):
        params = KdfParams.fast()
        base = pkdf(b"pw", bytes(16), params)
        seen = {base}
        for _ in range(1000):
            salt = rng.getrandbits(128).to_bytes(16, "big")
            key = pkdf(b"pw", salt, params)
            assert key not in seen or salt == bytes(16)
            seen.add(key)

    def test_profiles_same_length(self):
        fast = pkdf(b"pw", bytes(16), KdfParams.fast())
        mhf = pkdf(b"pw", bytes(16), KdfParams.mhf())
        assert len(fast) == len(mhf) == 16
        assert fast != mhf


class TestInitialization:
    def test_fresh_state_empty(self):
        state = VaultState(vault_params())
        assert not state.users
        assert not state.is_registered("anyone")

    def test_json_roundtrip_fresh(self):
        state = VaultState(vault_params(), backend="legacy", kdf=KdfParams.mhf())
        back = VaultState.from_json(state.to_json())
        assert back.backend_name == "legacy"
        assert back.kdf.profile == "mhf"
        assert back.scheme_params == state.scheme_params
        assert not back.users


class TestRegistration:
    def test_register_then_is_registered(self, vault):
        assert vault.is_registered("alice")
        assert not vault.is_registered("bob")

    def test_double_registration_rejected(self, vault):
        before = vault.to_json()
        assert vault.register_new_user("alice", "other", random.Random(1)) == REJECT
        assert vault.to_json() == before

    def test_over_length_password_is_policy_error(self):
        state = VaultState(vault_params(n=8))
        with pytest.raises(DomainError):
            state.register_new_user("bob", "far-too-long-password", random.Random(1))
        assert not state.is_registered("bob")

    def test_fresh_waitlist_dummies_decrypt_to_bottom(self, vault):
        rec = vault.users["alice"]
        key = pkdf(b"Summer2024", rec.salt, vault.kdf)
        sk_raw = authenc.auth_dec(key, rec.cache[0])
        assert sk_raw is not None
        backend = vault._backend
        for entry in rec.waitlist:
            assert backend.open_entry(sk_raw, rec.pk, entry) is None


class TestLogin:
    def test_unknown_user_rejected(self, vault):
        assert vault.login("nobody", "pw", random.Random(2)) == REJECT

    def test_login_correctness(self):
        rng = random.Random(3)
        state = VaultState(vault_params(), backend="cond")
        state.register_new_user("u", "hunter2bay", rng)
        for _ in range(3):
            assert state.login("u", "hunter2bay", rng) == ACCEPT

    @pytest.mark.parametrize(
        "typo",
        ["hunter2bat", "HUNTER2BAY", "hunter2ba", "hunter2bays"],
        ids=["hamming", "capslock", "deletion", "insertion"],
    )
    def test_typo_resilience_sequence(self, typo):
        rng = random.Random(4)
        state = VaultState(vault_params(), backend="cond")
        pwd = "hunter2bay"
        state.register_new_user("u", pwd, rng)
        assert state.login("u", typo, rng) == REJECT
        assert state.login("u", pwd, rng) == ACCEPT
        assert state.login("u", typo, rng) == ACCEPT

    def test_unrelated_password_never_cached(self):
        rng = random.Random(5)
        state = VaultState(vault_params(), backend="cond")
        pwd, wrong = "hunter2bay", "НеТуда!"
        state.register_new_user("u", pwd, rng)
        assert state.login("u", wrong, rng) == REJECT
        assert state.login("u", pwd, rng) == ACCEPT
        assert state.login("u", wrong, rng) == REJECT
        # and no cache entry opens under the unrelated password's key
        rec = state.users["u"]
        key = pkdf(wrong.encode(), rec.salt, state.kdf)
        assert all(authenc.auth_dec(key, e) is None for e in rec.cache)

    def test_waitlist_size_invariant(self):
        rng = random.Random(6)
        state = VaultState(vault_params(), backend="cond")
        state.register_new_user("u", "hunter2bay", rng)
        assert len(state.users["u"].waitlist) == state.waitlist_size
        for attempt in ("hunter2bat", "zzz", "hunter2bay", "hunter2bay!"):
            state.login("u", attempt, rng)
            assert len(state.users["u"].waitlist) == state.waitlist_size

    def test_counter_monotone_and_slot_placement(self):
        rng = NoShuffleRng(7)
        state = VaultState(vault_params(), backend="cond")
        state.register_new_user("u", "hunter2bay", rng)
        rec = state.users["u"]
        counters = [rec.counter]
        for k in range(3):
            before = list(rec.waitlist)
            state.login("u", f"wrong-pass{k}", rng)
            counters.append(rec.counter)
            # with shuffling pinned, the fresh entry sits at counter mod S_W
            slot = rec.counter % state.waitlist_size
            changed = [i for i in range(state.waitlist_size) if rec.waitlist[i] != before[i]]
            assert changed == [slot]
        assert counters == sorted(counters)

    def test_over_length_login_attempt_stores_dummy(self):
        rng = random.Random(8)
        state = VaultState(vault_params(n=8), backend="cond")
        state.register_new_user("u", "hunter2", rng)
        assert state.login("u", "way-too-long-attempt", rng) == REJECT
        assert len(state.users["u"].waitlist) == state.waitlist_size

    def test_cache_capacity_bounded(self):
        rng = random.Random(9)
        state = VaultState(vault_params(), backend="cond", cache_size=3)
        pwd = "hunter2bay"
        state.register_new_user("u", pwd, rng)
        typos = [pwd.upper(), pwd[:-1], pwd + "1", pwd[:-1] + "t", "x" + pwd[1:]]
        for typo in typos:
            assert state.login("u", typo, rng) == REJECT
        assert state.login("u", pwd, rng) == ACCEPT
        assert len(state.users["u"].cache) <= 3


class TestLegacyBackend:
    def test_typo_resilience_flow_matches(self):
        rng = random.Random(10)
        state = VaultState(vault_params(), backend="legacy")
        pwd, typo = "hunter2bay", "hunter2bat"
        state.register_new_user("u", pwd, rng)
        assert state.login("u", typo, rng) == REJECT
        assert state.login("u", pwd, rng) == ACCEPT
        assert state.login("u", typo, rng) == ACCEPT

    def test_unrelated_password_recoverable_from_state(self):
        # the vulnerability: any failed attempt is decryptable with sk
        rng = random.Random(11)
        state = VaultState(vault_params(), backend="legacy")
        state.register_new_user("u", "hunter2bay", rng)
        secret_attempt = "MyOtherBankPwd"
        state.login("u", secret_attempt, rng)
        rec = state.users["u"]
        key = pkdf(b"hunter2bay", rec.salt, state.kdf)
        sk_raw = authenc.auth_dec(key, rec.cache[0])
        recovered = {
            bytes(m)
            for e in rec.waitlist
            if (m := state._backend.open_entry(sk_raw, rec.pk, e)) is not None
        }
        assert secret_attempt.encode() in recovered

    def test_storage_much_smaller_than_cond(self, vault):
        rng = random.Random(12)
        legacy = VaultState(vault_params(), backend="legacy")
        legacy.register_new_user("alice", "Summer2024", rng)
        assert vault.user_storage_bytes("alice") > 50 * legacy.user_storage_bytes("alice")


class TestAttack:
    def test_legacy_attack_always_wins(self):
        rng = random.Random(13)
        state = VaultState(vault_params(), backend="legacy")
        reg = "hunter2bay"
        state.register_new_user("u", reg, rng)
        predicate = state.scheme_params.predicate
        for i in range(25):
            pwd_0, pwd_1 = f"alpine-{i}", f"joshua-{i}"
            assert not predicate.evaluate(reg, pwd_0)
            assert not predicate.evaluate(reg, pwd_1)
            b = rng.randrange(2)
            state.login("u", pwd_1 if b else pwd_0, rng)
            assert legacy_attack(state, "u", reg, pwd_0, pwd_1) == b

    def test_cond_backend_attack_inconclusive(self):
        rng = random.Random(14)
        state = VaultState(vault_params(), backend="cond")
        reg = "hunter2bay"
        state.register_new_user("u", reg, rng)
        for i in range(5):
            pwd_0, pwd_1 = f"alpine-{i}", f"joshua-{i}"
            b = rng.randrange(2)
            state.login("u", pwd_1 if b else pwd_0, rng)
            assert legacy_attack(state, "u", reg, pwd_0, pwd_1) is None

    def test_unknown_user_inconclusive(self, vault):
        assert legacy_attack(vault, "ghost", "x", "a", "b") is None


class TestPersistence:
    def test_registered_vault_roundtrip(self):
        rng = random.Random(15)
        state = VaultState(vault_params(), backend="cond")
        state.register_new_user("u", "hunter2bay", rng)
        state.login("u", "hunter2bat", rng)
        back = VaultState.from_json(state.to_json())
        assert back.login("u", "hunter2bay", rng) == ACCEPT
        assert back.login("u", "hunter2bat", rng) == ACCEPT

    def test_deterministic_serialization(self, vault):
        assert vault.to_json() == vault.to_json()

    @pytest.mark.parametrize(
        "mangle",
        [
            lambda d: d.update(version=99),
            lambda d: d["params"].update(backend="bogus"),
            lambda d: d["params"].update(kdf_profile="bogus"),
            lambda d: d["users"]["alice"].update(salt="!!not-base64!!"),
            lambda d: d["users"]["alice"].update(waitlist=[]),
            lambda d: d["users"]["alice"].update(cache=[]),
            lambda d: d.pop("params"),
        ],
    )
    def test_corrupt_state_is_integrity_error(self, vault, mangle):
        doc = json.loads(vault.to_json())
        mangle(doc)
        with pytest.raises(IntegrityError):
            VaultState.from_json(json.dumps(doc))

    def test_garbage_is_integrity_error(self):
        with pytest.raises(IntegrityError):
            VaultState.from_json("not json at all")
