"""Arbitrary-precision helpers and Miller-Rabin primality testing.

Python's ``int`` is the big unsigned integer type; this module adds the
canonical byte/hex encodings used on the wire and the primality test the
verifiers rely on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import BothZero, InvalidInput, ZeroModulus
from .hashing import keccak256, u64

DEFAULT_ROUNDS = 64

# Sufficient witnesses for every n below the bound (Sorenson & Webster).
SMALL_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
SMALL_BOUND = 3_317_044_064_679_887_385_961_981


def _check_unsigned(x: int) -> None:
    if not isinstance(x, int) or isinstance(x, bool) or x < 0:
        raise InvalidInput(f"expected an unsigned integer, got {x!r}")


def to_bytes(x: int) -> bytes:
    """Big-endian bytes without leading zeros; zero encodes as ``b"\\x00"``."""
    _check_unsigned(x)
    return x.to_bytes(max(1, (x.bit_length() + 7) // 8), "big")


def from_bytes(data: bytes) -> int:
    return int.from_bytes(data, "big")


def to_hex(x: int) -> str:
    """Lowercase hex, no prefix, no leading zeros, ``"00"`` for zero."""
    _check_unsigned(x)
    return format(x, "x") if x else "00"


def from_hex(text: str) -> int:
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if not text or any(c not in "0123456789abcdef" for c in text):
        raise InvalidInput(f"not a hex integer: {text!r}")
    return int(text, 16)


def word_count(x: int, word_bits: int = 64) -> int:
    """Number of machine words in the canonical magnitude (at least one)."""
    return max(1, -(-x.bit_length() // word_bits))


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    for v in (base, exponent, modulus):
        _check_unsigned(v)
    if modulus < 2:
        raise ZeroModulus(f"modulus must be >= 2, got {modulus}")
    return pow(base, exponent, modulus)


def gcd(a: int, b: int) -> int:
    _check_unsigned(a)
    _check_unsigned(b)
    if a == 0 and b == 0:
        raise BothZero("gcd(0, 0) is undefined")
    return math.gcd(a, b)


class Verdict(enum.Enum):
    COMPOSITE = "Composite"
    PROBABLE_PRIME = "ProbablePrime"


@dataclass(frozen=True, slots=True)
class PrimalityVerdict:
    verdict: Verdict
    rounds_used: int

    @property
    def is_probable_prime(self) -> bool:
        return self.verdict is Verdict.PROBABLE_PRIME

    def __bool__(self) -> bool:
        return self.is_probable_prime


def derive_bases(n: int, rounds: int, seed: bytes | None = None) -> list[int]:
    """Witnesses in ``[2, n-2]`` expanded from ``H(seed || round || block)``.

    The seed defaults to the canonical bytes of ``n`` so that every verifier
    replaying the same check draws the same bases.
    """
    if n < 5:
        raise InvalidInput("hash-derived bases need n >= 5")
    seed = to_bytes(n) if seed is None else seed
    need = (n.bit_length() + 7) // 8 + 8  # 64 extra bits keep the reduction bias negligible
    bases = []
    for i in range(rounds):
        stream = b""
        block = 0
        while len(stream) < need:
            stream += keccak256(seed, u64(i), block.to_bytes(4, "big"))
            block += 1
        bases.append(2 + from_bytes(stream[:need]) % (n - 3))
    return bases


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def miller_rabin(n: int, rounds: int = DEFAULT_ROUNDS, seed: bytes | None = None) -> PrimalityVerdict:
    """Miller-Rabin test.

    Below ``SMALL_BOUND`` the fixed witness set makes the answer exact and
    ``rounds`` is ignored. Above it, ``rounds`` bases are derived from
    ``seed`` (see :func:`derive_bases`), giving error at most ``4**-rounds``.
    """
    _check_unsigned(n)
    if n < 2:
        raise InvalidInput(f"primality is undefined for n={n}")
    if rounds < 1:
        raise InvalidInput("rounds must be >= 1")
    if n in (2, 3):
        return PrimalityVerdict(Verdict.PROBABLE_PRIME, 0)
    if n % 2 == 0:
        return PrimalityVerdict(Verdict.COMPOSITE, 0)

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    if n < SMALL_BOUND:
        bases = [a for a in SMALL_WITNESSES if a % n]
    else:
        bases = derive_bases(n, rounds, seed)

    for used, a in enumerate(bases, start=1):
        if not _strong_probable_prime(n, a, d, s):
            return PrimalityVerdict(Verdict.COMPOSITE, used)
    return PrimalityVerdict(Verdict.PROBABLE_PRIME, len(bases))


def is_probable_prime(n: int, rounds: int = DEFAULT_ROUNDS) -> bool:
    return n >= 2 and miller_rabin(n, rounds).is_probable_prime
