"""Accounts that switch from a legacy signature scheme to Lamport one-time
signatures the moment the bounty reports itself solved."""

from __future__ import annotations

import hmac
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Protocol

from .errors import InvalidInput, KeyReuse, WrongCredentialKind
from .hashing import DIGEST_SIZE, keccak256

BITS = 256


def _bit(digest: bytes, i: int) -> int:
    return digest[i // 8] >> (7 - i % 8) & 1


@dataclass(frozen=True, slots=True)
class LamportSignature:
    revealed: tuple[bytes, ...]

    def __post_init__(self) -> None:
        if len(self.revealed) != BITS or any(len(v) != DIGEST_SIZE for v in self.revealed):
            raise InvalidInput("a Lamport signature is 256 values of 32 bytes")

    def to_bytes(self) -> bytes:
        return b"".join(self.revealed)

    @classmethod
    def from_bytes(cls, blob: bytes) -> LamportSignature:
        if len(blob) != BITS * DIGEST_SIZE:
            raise InvalidInput("signature blob must be 8192 bytes")
        return cls(tuple(blob[i : i + DIGEST_SIZE] for i in range(0, len(blob), DIGEST_SIZE)))


@dataclass(frozen=True, slots=True)
class LamportPublicKey:
    # pairs[i] = (H(secret[i][0]), H(secret[i][1]))
    pairs: tuple[tuple[bytes, bytes], ...]

    def to_bytes(self) -> bytes:
        return b"".join(a + b for a, b in self.pairs)

    @classmethod
    def from_bytes(cls, blob: bytes) -> LamportPublicKey:
        if len(blob) != BITS * 2 * DIGEST_SIZE:
            raise InvalidInput("public key blob must be 16384 bytes")
        d = DIGEST_SIZE
        return cls(tuple((blob[i : i + d], blob[i + d : i + 2 * d]) for i in range(0, len(blob), 2 * d)))


@dataclass(slots=True)
class LamportKeyPair:
    secret: tuple[tuple[bytes, bytes], ...]
    public: LamportPublicKey
    used: bool = False


def lamport_keygen(seed: bytes) -> LamportKeyPair:
    """Derive secrets as H(seed || i || b); the same seed always gives the same key."""
    if len(seed) != 32:
        raise InvalidInput("seed must be 32 bytes")
    secret = tuple(
        (keccak256(seed, i.to_bytes(2, "big"), b"\x00"), keccak256(seed, i.to_bytes(2, "big"), b"\x01"))
        for i in range(BITS)
    )
    public = LamportPublicKey(tuple((keccak256(s0), keccak256(s1)) for s0, s1 in secret))
    return LamportKeyPair(secret, public)


def lamport_sign(message: bytes, keypair: LamportKeyPair) -> LamportSignature:
    if keypair.used:
        raise KeyReuse("this Lamport key has already signed a message")
    digest = keccak256(message)
    sig = LamportSignature(tuple(keypair.secret[i][_bit(digest, i)] for i in range(BITS)))
    keypair.used = True
    return sig


def lamport_verify(message: bytes, signature: LamportSignature, public: LamportPublicKey) -> bool:
    digest = keccak256(message)
    return all(
        hmac.compare_digest(keccak256(signature.revealed[i]), public.pairs[i][_bit(digest, i)])
        for i in range(BITS)
    )


# -- legacy scheme --------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LegacyCredential:
    tag: bytes


class LegacyVerifier(Protocol):
    def verify(self, message: bytes, credential: object) -> bool: ...


@dataclass(frozen=True, slots=True)
class KeyedHashScheme:
    """Stand-in for the chain's classical signatures: tag = H(key || message).

    Deterministic and adequate for exercising the switchover; it offers no
    public verifiability.
    """

    key: bytes

    def sign(self, message: bytes) -> LegacyCredential:
        return LegacyCredential(keccak256(self.key, message))

    def verify(self, message: bytes, credential: object) -> bool:
        if not isinstance(credential, LegacyCredential):
            return False
        return hmac.compare_digest(credential.tag, keccak256(self.key, message))


@dataclass
class FallbackAccount:
    legacy_verifier: LegacyVerifier
    lamport_public: LamportPublicKey
    flag_source: Callable[[], bool]
    key_used: bool = field(default=False)

    @property
    def quantum_mode(self) -> bool:
        return bool(self.flag_source())

    def authorize(self, message: bytes, credential: object) -> bool:
        """Legacy verification until the flag flips, Lamport only afterwards.

        A legacy credential presented after the flip raises
        ``WrongCredentialKind``; before the flip every credential goes to the
        legacy verifier. The Lamport key authorizes at most one message.
        """
        if not self.quantum_mode:
            return self.legacy_verifier.verify(message, credential)
        if not isinstance(credential, LamportSignature):
            raise WrongCredentialKind("the bounty is solved; only Lamport signatures are accepted")
        if self.key_used:
            return False
        if not lamport_verify(message, credential, self.lamport_public):
            return False
        self.key_used = True
        return True
