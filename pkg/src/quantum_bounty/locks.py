"""Trustless lock generation: a hashed random-bytes accumulator and the
statistics that size it.

Nobody learns the factorization of a lock because nobody chooses its bytes:
each contribution is hashed together with the running buffer digest, the
parent block digest and the contributor's address before it is appended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AlreadyComplete, Incomplete, InvalidInput, OutOfRange
from .hashing import DIGEST_SIZE, keccak256

DEFAULT_FAILURE_PROBABILITY = 1e-9
ANONCOIN_HARDNESS = 0.16
DEFAULT_PRIME_BITS = 1536

EMPTY_DIGEST = bytes(DIGEST_SIZE)


def required_lock_count(failure_probability: float, per_lock_hardness: float) -> int:
    """Smallest lock count whose chance of containing no hard lock is below
    ``failure_probability``."""
    if not (0 < failure_probability < 1 and 0 < per_lock_hardness < 1):
        raise OutOfRange("both probabilities must lie strictly between 0 and 1")
    return math.ceil(math.log(failure_probability) / math.log1p(-per_lock_hardness))


def sander_hardness(xi: float, strict: bool = True) -> float:
    """Asymptotic density of integers with two distinct prime factors >= x**xi.

    The density theorem holds for 1/3 <= xi < 5/12 (the 1/3 end is admitted).
    With ``strict=False`` the closed form is evaluated anywhere on (0, 1/2].
    """
    lo, hi = (1 / 3, 5 / 12) if strict else (0.0, 0.5)
    if not (lo <= xi < hi or (not strict and xi == hi)) or xi <= 0:
        raise OutOfRange(f"xi={xi} outside the admissible range")
    return 0.5 * math.log(1 / (2 * xi)) ** 2


def expected_prime_factor_count(bits: int) -> float:
    """ln ln N for N = 2**bits (Erdos-Kac mean)."""
    if bits < 2:
        raise OutOfRange("bits must be >= 2")
    return math.log(bits * math.log(2))


@dataclass(frozen=True, slots=True)
class GenerationParams:
    lock_count: int = 119
    lock_bits: int = 3 * DEFAULT_PRIME_BITS
    failure_probability: float = DEFAULT_FAILURE_PROBABILITY
    per_lock_hardness: float = ANONCOIN_HARDNESS

    def __post_init__(self) -> None:
        if self.lock_count < 1:
            raise OutOfRange("lock_count must be >= 1")
        if self.lock_bits < 8 or self.lock_bits % 8:
            raise OutOfRange("lock_bits must be a positive multiple of 8")
        if not 0 < self.failure_probability < 1:
            raise OutOfRange("failure_probability must lie in (0, 1)")
        if not 0 <= self.per_lock_hardness < 1:
            raise OutOfRange("per_lock_hardness must lie in [0, 1)")

    @classmethod
    def from_prime_bits(cls, prime_bits: int = DEFAULT_PRIME_BITS, **kw) -> GenerationParams:
        return cls(lock_bits=3 * prime_bits, **kw)

    @property
    def prime_bits(self) -> int:
        return self.lock_bits // 3

    @property
    def lock_bytes(self) -> int:
        return self.lock_bits // 8

    @property
    def target_bytes(self) -> int:
        return self.lock_count * self.lock_bytes


def expected_hard_lock_count(params: GenerationParams) -> float:
    return params.lock_count * params.per_lock_hardness


@dataclass(slots=True)
class AccumulatorState:
    target_bytes: int
    buffer: bytes = b""
    digest: bytes = EMPTY_DIGEST  # chained digest of everything appended so far

    def __post_init__(self) -> None:
        if self.target_bytes < 1:
            raise InvalidInput("target_bytes must be >= 1")
        if len(self.buffer) > self.target_bytes:
            raise InvalidInput("buffer exceeds target")

    @property
    def complete(self) -> bool:
        return len(self.buffer) == self.target_bytes

    @property
    def remaining(self) -> int:
        return self.target_bytes - len(self.buffer)


def _word_bytes(word: int | bytes) -> bytes:
    if isinstance(word, bytes):
        if len(word) != 32:
            raise InvalidInput("contribution must be exactly 32 bytes")
        return word
    if not 0 <= word < 1 << 256:
        raise InvalidInput("contribution must be a 256-bit unsigned integer")
    return word.to_bytes(32, "big")


def contribute(
    state: AccumulatorState, word: int | bytes, block_digest: bytes, contributor: bytes
) -> AccumulatorState:
    """Mix one 256-bit contribution into the buffer.

    Returns a new state; the input state is left untouched. Any digest bytes
    that would overshoot the target are discarded.
    """
    if state.complete:
        raise AlreadyComplete("accumulator already holds every byte it needs")
    chunk = keccak256(_word_bytes(word), state.digest, block_digest, contributor)
    chunk = chunk[: state.remaining]
    return AccumulatorState(
        target_bytes=state.target_bytes,
        buffer=state.buffer + chunk,
        digest=keccak256(state.digest, chunk),
    )


@dataclass(slots=True)
class Lock:
    index: int
    value: int
    bits: int
    solved: bool = False
    solver: bytes | None = None

    def __post_init__(self) -> None:
        if self.value.bit_length() != self.bits:
            raise InvalidInput(f"lock {self.index} is not exactly {self.bits} bits")
        if self.solved and self.solver is None:
            raise InvalidInput("a solved lock must record its solver")


def extract_locks(state: AccumulatorState, params: GenerationParams) -> list[Lock]:
    """Slice the finished buffer into big-endian locks with the top bit set."""
    if not state.complete:
        raise Incomplete(f"{state.remaining} bytes still missing")
    if state.target_bytes != params.target_bytes:
        raise InvalidInput("accumulator target does not match the generation params")
    top = 1 << (params.lock_bits - 1)
    n = params.lock_bytes
    return [
        Lock(index=i, value=int.from_bytes(state.buffer[i * n : (i + 1) * n], "big") | top, bits=params.lock_bits)
        for i in range(params.lock_count)
    ]


@dataclass(slots=True)
class LockGenerator:
    """Accumulator bound to its generation parameters."""

    params: GenerationParams
    state: AccumulatorState = field(init=False)

    def __post_init__(self) -> None:
        self.state = AccumulatorState(self.params.target_bytes)

    @property
    def complete(self) -> bool:
        return self.state.complete

    def contribute(self, word: int | bytes, block_digest: bytes, contributor: bytes) -> None:
        self.state = contribute(self.state, word, block_digest, contributor)

    def locks(self) -> list[Lock]:
        return extract_locks(self.state, self.params)
