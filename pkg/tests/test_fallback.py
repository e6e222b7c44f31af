import pytest

from quantum_bounty.errors import InvalidInput, KeyReuse, WrongCredentialKind
from quantum_bounty.fallback import (
    FallbackAccount,
    KeyedHashScheme,
    LamportPublicKey,
    LamportSignature,
    lamport_keygen,
    lamport_sign,
    lamport_verify,
)

SEED = bytes(range(32))


def flip_bit(msg: bytes, i: int) -> bytes:
    b = bytearray(msg)
    b[i // 8] ^= 1 << (i % 8)
    return bytes(b)


class TestLamport:
    def test_keygen_deterministic(self):
        assert lamport_keygen(SEED).public == lamport_keygen(SEED).public

    def test_distinct_seeds(self):
        a = lamport_keygen(SEED).public.pairs
        b = lamport_keygen(bytes(32)).public.pairs
        assert all(x[0] != y[0] and x[1] != y[1] for x, y in zip(a, b))

    def test_seed_length(self):
        with pytest.raises(InvalidInput):
            lamport_keygen(b"short")

    def test_round_trip_and_reuse(self):
        kp = lamport_keygen(SEED)
        sig = lamport_sign(b"hello", kp)
        assert lamport_verify(b"hello", sig, kp.public)
        with pytest.raises(KeyReuse):
            lamport_sign(b"other", kp)

    def test_bit_flip_rejected(self):
        kp = lamport_keygen(SEED)
        sig = lamport_sign(b"hello", kp)
        assert not lamport_verify(flip_bit(b"hello", 3), sig, kp.public)

    def test_zeroed_value_rejected(self):
        kp = lamport_keygen(SEED)
        sig = lamport_sign(b"msg", kp)
        bad = LamportSignature((bytes(32),) + sig.revealed[1:])
        assert not lamport_verify(b"msg", bad, kp.public)

    def test_transplanted_signature_rejected(self):
        kp = lamport_keygen(SEED)
        other = lamport_keygen(bytes(32))
        sig = lamport_sign(b"msg", kp)
        assert not lamport_verify(b"msg", sig, other.public)

    def test_serialization(self):
        kp = lamport_keygen(SEED)
        sig = lamport_sign(b"msg", kp)
        assert len(sig.to_bytes()) == 8192
        assert LamportSignature.from_bytes(sig.to_bytes()) == sig
        assert LamportPublicKey.from_bytes(kp.public.to_bytes()) == kp.public
        with pytest.raises(InvalidInput):
            LamportSignature.from_bytes(b"\x00" * 10)


class TestAccount:
    def setup_method(self):
        self.legacy = KeyedHashScheme(b"legacy key")
        self.kp = lamport_keygen(SEED)
        self.flag = False
        self.account = FallbackAccount(self.legacy, self.kp.public, lambda: self.flag)

    def test_before_flip(self):
        assert self.account.authorize(b"m", self.legacy.sign(b"m"))
        assert not self.account.authorize(b"m", self.legacy.sign(b"x"))
        # a Lamport signature goes down the legacy path and simply fails
        assert not self.account.authorize(b"m", lamport_sign(b"m", self.kp))

    def test_after_flip(self):
        self.flag = True
        with pytest.raises(WrongCredentialKind):
            self.account.authorize(b"m", self.legacy.sign(b"m"))
        assert self.account.authorize(b"m", lamport_sign(b"m", self.kp))
        assert self.account.key_used

    def test_after_flip_key_reuse_rejected(self):
        self.flag = True
        sig = lamport_sign(b"m", self.kp)
        assert self.account.authorize(b"m", sig)
        assert not self.account.authorize(b"m", sig)

    def test_invalid_lamport_does_not_burn_key(self):
        self.flag = True
        sig = lamport_sign(b"m", self.kp)
        assert not self.account.authorize(b"other", sig)
        assert not self.account.key_used
        assert self.account.authorize(b"m", sig)
