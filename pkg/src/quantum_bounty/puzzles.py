"""Puzzle solutions and their verifiers.

Prime factorization is the puzzle the bounty runs on. Order finding is kept
as the benchmarked alternative: its locks need a base that is coprime to the
modulus and not congruent to +-1, which is where its extra generation cost
comes from.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

from .errors import ExhaustedEntropy, InvalidInput, OutOfRange
from .hashing import u64
from .locks import Lock
from .numeric import DEFAULT_ROUNDS, miller_rabin, mod_pow, to_bytes

MAX_FACTORS = 64
COPRIME_PROBABILITY = 6 / math.pi**2


@dataclass(frozen=True, slots=True)
class Verification:
    accepted: bool
    reason: str | None = None
    index: int | None = None

    def __bool__(self) -> bool:
        return self.accepted


ACCEPT = Verification(True)


@dataclass(frozen=True, slots=True)
class FactorizationSolution:
    lock_index: int
    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.lock_index < 0:
            raise InvalidInput("lock_index must be >= 0")
        if any(not isinstance(f, int) or f < 0 for f in self.factors):
            raise InvalidInput("factors must be unsigned integers")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    def encode(self) -> bytes:
        """Canonical bytes: index, count, then each factor length-prefixed, ascending."""
        parts = [u64(self.lock_index), u64(len(self.factors))]
        for f in self.factors:
            raw = to_bytes(f)
            parts.append(len(raw).to_bytes(4, "big"))
            parts.append(raw)
        return b"".join(parts)


def verify_factorization(lock: Lock, solution: FactorizationSolution, rounds: int = DEFAULT_ROUNDS) -> Verification:
    """Accept iff the factors multiply to the lock value and each is prime.

    The product is checked first because it is far cheaper than primality.
    """
    factors = solution.factors
    if not factors:
        return Verification(False, "EmptyFactorList")
    if len(factors) > MAX_FACTORS:
        return Verification(False, "TooManyFactors")
    if math.prod(factors) != lock.value:
        return Verification(False, "ProductMismatch")
    for i, f in enumerate(factors):
        if f < 2 or not miller_rabin(f, rounds).is_probable_prime:
            return Verification(False, "NotPrime", i)
    return ACCEPT


@dataclass(frozen=True, slots=True)
class OrderLock:
    modulus: int
    base: int

    def __post_init__(self) -> None:
        if not 1 < self.base < self.modulus - 1:
            raise InvalidInput("base must satisfy 1 < base < modulus - 1")
        if math.gcd(self.base, self.modulus) != 1:
            raise InvalidInput("base must be coprime to the modulus")

    @property
    def max_exponent_bytes(self) -> int:
        # orders never exceed twice the modulus size
        return 2 * len(to_bytes(self.modulus))


@dataclass(frozen=True, slots=True)
class OrderSolution:
    lock_index: int
    exponent: int

    def encode(self) -> bytes:
        raw = to_bytes(self.exponent)
        return u64(self.lock_index) + len(raw).to_bytes(4, "big") + raw


def verify_order(lock: OrderLock, solution: OrderSolution) -> Verification:
    """Accept any positive exponent within the size bound with base**k == 1.

    Minimality is deliberately not checked.
    """
    k = solution.exponent
    if k <= 0:
        return Verification(False, "NonPositiveExponent")
    if len(to_bytes(k)) > lock.max_exponent_bytes:
        return Verification(False, "ExponentTooLarge")
    if mod_pow(lock.base, k, lock.modulus) != 1:
        return Verification(False, "NotUnitResult")
    return ACCEPT


def coprime_pair_count(failure_probability: float, coprime_probability: float = COPRIME_PROBABILITY) -> int:
    if not (0 < failure_probability < 1 and 0 < coprime_probability < 1):
        raise OutOfRange("both probabilities must lie strictly between 0 and 1")
    return math.ceil(math.log(failure_probability) / math.log1p(-coprime_probability))


def _top_bit_int(slice_: bytes) -> int:
    return int.from_bytes(slice_, "big") | 1 << (8 * len(slice_) - 1)


def generate_order_lock(
    slices: Iterable[bytes], mode: str = "checked", pair_count: int | None = None
) -> OrderLock | list[tuple[int, int]]:
    """Build order-finding locks from accumulator output slices.

    ``checked`` takes the first slice as the modulus (top bit forced) and
    draws bases from the following slices until one is coprime and not
    +-1 mod n. ``probabilistic`` emits ``pair_count`` unchecked
    (modulus, base) candidates, two slices per pair.
    """
    it: Iterator[bytes] = iter(slices)

    def take() -> bytes:
        try:
            s = next(it)
        except StopIteration:
            raise ExhaustedEntropy("ran out of accumulator slices") from None
        if not s:
            raise InvalidInput("empty slice")
        return s

    if mode == "checked":
        n = _top_bit_int(take())
        while True:
            a = int.from_bytes(take(), "big") % n
            if a not in (0, 1, n - 1) and math.gcd(a, n) == 1:
                return OrderLock(n, a)
    if mode == "probabilistic":
        if pair_count is None:
            pair_count = coprime_pair_count(1e-9)
        pairs = []
        for _ in range(pair_count):
            n = _top_bit_int(take())
            pairs.append((n, int.from_bytes(take(), "big") % n))
        return pairs
    raise InvalidInput(f"unknown mode {mode!r}")


def first_valid_pair(pairs: Iterable[tuple[int, int]]) -> OrderLock:
    """Pick the first candidate that would have passed the checked mode."""
    for n, a in pairs:
        if a not in (0, 1, n - 1) and math.gcd(a, n) == 1:
            return OrderLock(n, a)
    raise ExhaustedEntropy("no candidate pair was usable")
