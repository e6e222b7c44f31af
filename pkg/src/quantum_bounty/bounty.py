"""The bounty contract: funding, commit-reveal submissions and the payout.

Every public mutator validates all of its preconditions before touching any
field, so a rejected call leaves the contract exactly as it was.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

from .errors import (
    AlreadySolved,
    DigestMismatch,
    GenerationIncomplete,
    InvalidInput,
    LockAlreadySolved,
    NoCommitment,
    RevealTooEarly,
    UnknownLock,
    VerificationFailed,
    ZeroAmount,
)
from .hashing import DIGEST_SIZE, keccak256
from .locks import GenerationParams, Lock, LockGenerator
from .numeric import from_hex, to_hex
from .puzzles import FactorizationSolution, Verification, verify_factorization

ADDRESS_SIZE = 20
REVEAL_DELAY = 86_400
ESTIMATED_SOLVE_GAS = 800_000_000
GWEI = Decimal("1e-9")  # in ETH
WEI_PER_GWEI = 10**9
DEFAULT_GAS_PRICE_WEI = 23_800_000_000

Address = bytes


def address(value: str | bytes) -> Address:
    """Parse a 20-byte address from raw bytes or hex (``0x`` optional)."""
    if isinstance(value, str):
        text = value[2:] if value.lower().startswith("0x") else value
        try:
            value = bytes.fromhex(text)
        except ValueError:
            raise InvalidInput(f"bad address {text!r}") from None
    if len(value) != ADDRESS_SIZE:
        raise InvalidInput(f"address must be {ADDRESS_SIZE} bytes")
    return bytes(value)


def address_from_label(label: str) -> Address:
    """Deterministic test address, e.g. ``address_from_label("alice")``."""
    return keccak256(label.encode())[-ADDRESS_SIZE:]


def min_bounty_in_currency(gas_required, gas_price):
    """Bounty needed to cover ``gas_required`` at ``gas_price`` (any units)."""
    if gas_required < 0 or gas_price < 0:
        raise InvalidInput("gas and price must be non-negative")
    return gas_required * gas_price


def commitment_digest(solution: FactorizationSolution, solver: Address) -> bytes:
    """Binding commitment: nobody else can reuse it under their own address."""
    return keccak256(solution.encode(), address(solver))


@dataclass(frozen=True, slots=True)
class Commitment:
    digest: bytes
    solver: Address
    lock_index: int
    committed_at: int


Verifier = Callable[[Lock, Any], Verification]


@dataclass
class QuantumBounty:
    params: GenerationParams = field(default_factory=GenerationParams)
    reveal_delay: int = REVEAL_DELAY
    min_bounty: int = ESTIMATED_SOLVE_GAS * DEFAULT_GAS_PRICE_WEI
    verifier: Verifier = field(default=verify_factorization, compare=False, repr=False)

    generator: LockGenerator = field(init=False)
    locks: list[Lock] = field(init=False, default_factory=list)
    balance: int = field(init=False, default=0)
    commitments: dict[tuple[Address, int], Commitment] = field(init=False, default_factory=dict)
    payouts: dict[Address, int] = field(init=False, default_factory=dict)
    solved: bool = field(init=False, default=False)

    def __post_init__(self) -> None:
        if self.reveal_delay < 0:
            raise InvalidInput("reveal_delay must be >= 0")
        self.generator = LockGenerator(self.params)

    # -- queries --------------------------------------------------------

    @property
    def generation_complete(self) -> bool:
        return self.generator.complete

    def is_solved(self) -> bool:
        return self.solved

    @property
    def underfunded(self) -> bool:
        """Advisory only: the balance no longer covers the estimated solving cost."""
        return self.balance < self.min_bounty

    def commitment(self, solver: Address, lock_index: int) -> Commitment | None:
        return self.commitments.get((solver, lock_index))

    def _lock(self, index: int) -> Lock:
        if not self.generation_complete:
            raise GenerationIncomplete("locks are still being generated")
        if not 0 <= index < len(self.locks):
            raise UnknownLock(f"no lock with index {index}")
        return self.locks[index]

    def _require_open(self) -> None:
        if self.solved:
            raise AlreadySolved("the bounty has been claimed")

    # -- mutators -------------------------------------------------------

    def contribute(self, word: int | bytes, block_digest: bytes, contributor: Address) -> None:
        self._require_open()
        self.generator.contribute(word, block_digest, address(contributor))
        if self.generator.complete:
            self.locks = self.generator.locks()

    def fund(self, sender: Address, amount: int) -> None:
        self._require_open()
        if amount <= 0:
            raise ZeroAmount("funding amount must be positive")
        self.balance += amount

    def commit(self, solver: Address, lock_index: int, digest: bytes, now: int) -> None:
        self._require_open()
        lock = self._lock(lock_index)
        if lock.solved:
            raise LockAlreadySolved(f"lock {lock_index} is already solved")
        if len(digest) != DIGEST_SIZE:
            raise InvalidInput("commitment digest must be 32 bytes")
        solver = address(solver)
        self.commitments[(solver, lock_index)] = Commitment(bytes(digest), solver, lock_index, now)

    def withdraw_commit(self, solver: Address, lock_index: int) -> None:
        self._require_open()
        if (solver, lock_index) not in self.commitments:
            raise NoCommitment(f"no commitment for lock {lock_index}")
        del self.commitments[(solver, lock_index)]

    def reveal(self, solver: Address, solution, now: int) -> int:
        """Open a commitment; returns the payout (zero unless this was the last lock)."""
        self._require_open()
        solver = address(solver)
        index = solution.lock_index
        lock = self._lock(index)
        c = self.commitments.get((solver, index))
        if c is None:
            raise NoCommitment(f"no commitment for lock {index}")
        if now < c.committed_at + self.reveal_delay:
            raise RevealTooEarly(f"reveal allowed from t={c.committed_at + self.reveal_delay}, now t={now}")
        if keccak256(solution.encode(), solver) != c.digest:
            raise DigestMismatch("revealed solution does not open the commitment")
        if lock.solved:
            raise LockAlreadySolved(f"lock {index} is already solved")
        result = self.verifier(lock, solution)
        if not result.accepted:
            detail = None if result.index is None else f"factor {result.index}"
            raise VerificationFailed(result.reason or "rejected", detail)

        lock.solved = True
        lock.solver = solver
        del self.commitments[(solver, index)]
        if all(lk.solved for lk in self.locks):
            payout, self.balance = self.balance, 0
            self.payouts[solver] = self.payouts.get(solver, 0) + payout
            self.solved = True
            return payout
        return 0

    # -- persistence ----------------------------------------------------

    def to_dict(self) -> dict:
        acc = self.generator.state
        return {
            "accumulator": {"buffer": acc.buffer.hex(), "digest": acc.digest.hex()},
            "locks": [
                {
                    "index": lk.index,
                    "value": to_hex(lk.value),
                    "bits": lk.bits,
                    "solved": lk.solved,
                    "solver": lk.solver.hex() if lk.solver else None,
                }
                for lk in self.locks
            ],
            "balance": self.balance,
            "min_bounty": self.min_bounty,
            "commitments": [
                {
                    "solver": c.solver.hex(),
                    "lock_index": c.lock_index,
                    "digest": c.digest.hex(),
                    "committed_at": c.committed_at,
                }
                for _, c in sorted(self.commitments.items())
            ],
            "payouts": {a.hex(): v for a, v in sorted(self.payouts.items())},
            "solved": self.solved,
        }

    @classmethod
    def from_dict(cls, data: dict, params: GenerationParams, reveal_delay: int) -> QuantumBounty:
        b = cls(params=params, reveal_delay=reveal_delay, min_bounty=data["min_bounty"])
        acc = data["accumulator"]
        b.generator.state.buffer = bytes.fromhex(acc["buffer"])
        b.generator.state.digest = bytes.fromhex(acc["digest"])
        b.locks = [
            Lock(
                index=d["index"],
                value=from_hex(d["value"]),
                bits=d["bits"],
                solved=d["solved"],
                solver=bytes.fromhex(d["solver"]) if d["solver"] else None,
            )
            for d in data["locks"]
        ]
        b.balance = data["balance"]
        for d in data["commitments"]:
            c = Commitment(bytes.fromhex(d["digest"]), bytes.fromhex(d["solver"]), d["lock_index"], d["committed_at"])
            b.commitments[(c.solver, c.lock_index)] = c
        b.payouts = {bytes.fromhex(a): v for a, v in data["payouts"].items()}
        b.solved = data["solved"]
        return b
