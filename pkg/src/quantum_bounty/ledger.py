"""A small deterministic chain for driving the bounty contract.

Transactions wait in a mempool, proposers fill blocks in descending
priority-fee order up to a cost limit, the base fee follows the 1/8
adjustment rule, and a censoring proposer may drop targeted transactions.
Nothing here is random: censorship is an explicit per-block argument.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import singledispatch
from numbers import Rational

from .bounty import QuantumBounty, address
from .errors import BountyError, InvalidInput
from .hashing import DIGEST_SIZE, keccak256, u64
from .numeric import from_hex, to_hex
from .puzzles import FactorizationSolution

BLOCK_TIME = 12
COST_LIMIT = 30_000_000
INITIAL_BASE_FEE = 23_800_000_000
GENESIS_HASH = bytes(DIGEST_SIZE)


def update_base_fee(base_fee, cost_used: int, cost_target: int):
    """Next base fee: moves by at most 1/8 per block, never below 1.

    Rational inputs stay exact, so ``k`` full blocks multiply the fee by
    exactly ``(9/8)**k``.
    """
    if cost_target <= 0:
        raise InvalidInput("cost_target must be positive")
    step = Fraction(cost_used - cost_target, 8 * cost_target)
    if isinstance(base_fee, Rational):
        return max(Fraction(base_fee) * (1 + step), Fraction(1))
    return max(base_fee * (1 + float(step)), 1.0)


# -- cost model ---------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CostSchedule:
    word_bits: int = 256
    base_tx: int = 21_000
    mulmod_per_word2: float = 0.25
    hash_per_word: int = 6
    storage_write: int = 20_000
    primality_rounds: int = 64

    def words(self, bits: int) -> int:
        return max(1, -(-bits // self.word_bits))


DEFAULT_SCHEDULE = CostSchedule()


@dataclass(frozen=True, slots=True)
class ModMul:
    words: int


@dataclass(frozen=True, slots=True)
class ModPow:
    exponent_bits: int
    words: int


@dataclass(frozen=True, slots=True)
class PrimalityTest:
    bits: int
    rounds: int | None = None


@dataclass(frozen=True, slots=True)
class Hash:
    nbytes: int


@dataclass(frozen=True, slots=True)
class StorageWrite:
    slots: int = 1


@dataclass(frozen=True, slots=True)
class VerifyFactorization:
    factor_bits: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class VerifyOrder:
    exponent_bits: int
    modulus_bits: int


# Protocol calls carried by transactions.


@dataclass(frozen=True, slots=True)
class Contribute:
    word: bytes


@dataclass(frozen=True, slots=True)
class Fund:
    amount: int


@dataclass(frozen=True, slots=True)
class Commit:
    lock_index: int
    digest: bytes


@dataclass(frozen=True, slots=True)
class WithdrawCommit:
    lock_index: int


@dataclass(frozen=True, slots=True)
class Reveal:
    solution: FactorizationSolution


ProtocolCall = Contribute | Fund | Commit | WithdrawCommit | Reveal


@singledispatch
def _raw_cost(op, s: CostSchedule) -> float:
    raise InvalidInput(f"no cost rule for {type(op).__name__}")


@_raw_cost.register
def _(op: ModMul, s: CostSchedule) -> float:
    return s.mulmod_per_word2 * op.words**2


@_raw_cost.register
def _(op: ModPow, s: CostSchedule) -> float:
    # square-and-multiply: one squaring per bit plus a multiply on half of them
    return op.exponent_bits * 1.5 * _raw_cost(ModMul(op.words), s)


@_raw_cost.register
def _(op: PrimalityTest, s: CostSchedule) -> float:
    rounds = s.primality_rounds if op.rounds is None else op.rounds
    return rounds * _raw_cost(ModPow(op.bits, s.words(op.bits)), s)


@_raw_cost.register
def _(op: Hash, s: CostSchedule) -> float:
    return s.hash_per_word * -(-op.nbytes // 32)


@_raw_cost.register
def _(op: StorageWrite, s: CostSchedule) -> float:
    return s.storage_write * op.slots


@_raw_cost.register
def _(op: VerifyFactorization, s: CostSchedule) -> float:
    total = 0.0
    acc_words = 0
    for bits in op.factor_bits:
        w = s.words(bits)
        total += _raw_cost(PrimalityTest(bits), s)
        total += s.mulmod_per_word2 * max(acc_words, 1) * w  # running product
        acc_words += w
    return total


@_raw_cost.register
def _(op: VerifyOrder, s: CostSchedule) -> float:
    return _raw_cost(ModPow(op.exponent_bits, s.words(op.modulus_bits)), s)


@_raw_cost.register
def _(op: Contribute, s: CostSchedule) -> float:
    # mix hash over word, buffer digest, block digest and sender; chain hash; one slot
    return _raw_cost(Hash(32 * 3 + 20), s) + _raw_cost(Hash(64), s) + _raw_cost(StorageWrite(1), s)


@_raw_cost.register
def _(op: Fund, s: CostSchedule) -> float:
    return _raw_cost(StorageWrite(1), s)


@_raw_cost.register
def _(op: Commit, s: CostSchedule) -> float:
    return _raw_cost(StorageWrite(2), s)


@_raw_cost.register
def _(op: WithdrawCommit, s: CostSchedule) -> float:
    return _raw_cost(StorageWrite(1), s)


@_raw_cost.register
def _(op: Reveal, s: CostSchedule) -> float:
    sol = op.solution
    verify = VerifyFactorization(tuple(f.bit_length() for f in sol.factors))
    return (
        _raw_cost(Hash(len(sol.encode()) + 20), s)
        + _raw_cost(verify, s)
        + _raw_cost(StorageWrite(2), s)
    )


def metered_cost(op, schedule: CostSchedule = DEFAULT_SCHEDULE) -> float:
    """Deterministic abstract cost of one operation, excluding the per-transaction base.

    Left unrounded so the scaling laws hold exactly at every size; rounding
    happens once, in :func:`transaction_cost`.
    """
    return _raw_cost(op, schedule)


def transaction_cost(op, schedule: CostSchedule = DEFAULT_SCHEDULE) -> int:
    """Integer cost a transaction charges against the block limit."""
    return schedule.base_tx + math.ceil(metered_cost(op, schedule))


# -- serialization of calls ---------------------------------------------


def call_to_dict(op: ProtocolCall) -> dict:
    match op:
        case Contribute(word):
            return {"call": "contribute", "word": word.hex()}
        case Fund(amount):
            return {"call": "fund", "amount": amount}
        case Commit(lock_index, digest):
            return {"call": "commit", "lock_index": lock_index, "digest": digest.hex()}
        case WithdrawCommit(lock_index):
            return {"call": "withdraw_commit", "lock_index": lock_index}
        case Reveal(sol):
            return {"call": "reveal", "lock_index": sol.lock_index, "factors": [to_hex(f) for f in sol.factors]}
    raise InvalidInput(f"not a protocol call: {op!r}")


def call_from_dict(d: dict) -> ProtocolCall:
    kind = d.get("call")
    if kind == "contribute":
        return Contribute(bytes.fromhex(d["word"]))
    if kind == "fund":
        return Fund(d["amount"])
    if kind == "commit":
        return Commit(d["lock_index"], bytes.fromhex(d["digest"]))
    if kind == "withdraw_commit":
        return WithdrawCommit(d["lock_index"])
    if kind == "reveal":
        return Reveal(FactorizationSolution(d["lock_index"], tuple(from_hex(f) for f in d["factors"])))
    raise InvalidInput(f"unknown call {kind!r}")


# -- chain --------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Transaction:
    tx_id: int
    sender: bytes
    op: ProtocolCall
    priority_fee: int
    cost_estimate: int
    submitted_at: int

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "sender": self.sender.hex(),
            "op": call_to_dict(self.op),
            "priority_fee": self.priority_fee,
            "cost_estimate": self.cost_estimate,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Transaction:
        return cls(
            d["tx_id"], bytes.fromhex(d["sender"]), call_from_dict(d["op"]),
            d["priority_fee"], d["cost_estimate"], d["submitted_at"],
        )

    @property
    def digest(self) -> bytes:
        return keccak256(json.dumps(self.to_dict(), sort_keys=True).encode())


@dataclass(frozen=True, slots=True)
class Receipt:
    tx_id: int
    height: int
    status: str  # "ok" or the rejection's exception name
    message: str = ""
    cost: int = 0
    fee_paid: Fraction = Fraction(0)
    payout: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True, slots=True)
class Block:
    height: int
    time: int
    digest: bytes
    parent: bytes
    base_fee: Fraction
    cost_used: int
    censoring: bool
    receipts: tuple[Receipt, ...]


def targets_reveals(tx: Transaction) -> bool:
    return isinstance(tx.op, Reveal)


@dataclass
class LedgerState:
    height: int = 0
    time: int = 0
    base_fee: Fraction = Fraction(INITIAL_BASE_FEE)
    block_time: int = BLOCK_TIME
    cost_limit: int = COST_LIMIT
    cost_schedule: CostSchedule = DEFAULT_SCHEDULE
    head: bytes = GENESIS_HASH
    mempool: list[Transaction] = field(default_factory=list)
    next_tx_id: int = 0

    def __post_init__(self) -> None:
        if self.base_fee <= 0:
            raise InvalidInput("base_fee must be positive")
        if self.block_time <= 0 or self.cost_limit < 2:
            raise InvalidInput("block_time and cost_limit must be positive")

    @property
    def cost_target(self) -> int:
        return self.cost_limit // 2

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "time": self.time,
            "base_fee": str(self.base_fee),
            "block_time": self.block_time,
            "cost_limit": self.cost_limit,
            "head": self.head.hex(),
            "mempool": [tx.to_dict() for tx in self.mempool],
            "next_tx_id": self.next_tx_id,
        }

    @classmethod
    def from_dict(cls, d: dict, schedule: CostSchedule) -> LedgerState:
        return cls(
            height=d["height"],
            time=d["time"],
            base_fee=Fraction(d["base_fee"]),
            block_time=d["block_time"],
            cost_limit=d["cost_limit"],
            cost_schedule=schedule,
            head=bytes.fromhex(d["head"]),
            mempool=[Transaction.from_dict(t) for t in d["mempool"]],
            next_tx_id=d["next_tx_id"],
        )


def schedule_to_dict(s: CostSchedule) -> dict:
    return asdict(s)


class Ledger:
    """Owns the chain state and the bounty contract it executes against."""

    def __init__(self, bounty: QuantumBounty, state: LedgerState | None = None,
                 censor_target: Callable[[Transaction], bool] = targets_reveals):
        self.bounty = bounty
        self.state = state or LedgerState()
        self.censor_target = censor_target
        self.receipts: dict[int, Receipt] = {}

    def submit(self, sender: bytes, op: ProtocolCall, priority_fee: int = 1) -> Transaction:
        if priority_fee < 0:
            raise InvalidInput("priority_fee must be >= 0")
        st = self.state
        cost = transaction_cost(op, st.cost_schedule)
        if cost > st.cost_limit:
            raise InvalidInput(f"transaction cost {cost} exceeds the block limit {st.cost_limit}")
        tx = Transaction(st.next_tx_id, address(sender), op, priority_fee, cost, st.time)
        st.next_tx_id += 1
        st.mempool.append(tx)
        return tx

    def select(self, censoring: bool) -> list[Transaction]:
        """Greedy fill by descending priority fee; ties keep submission order."""
        room = self.state.cost_limit
        chosen = []
        for tx in sorted(self.state.mempool, key=lambda t: (-t.priority_fee, t.tx_id)):
            if censoring and self.censor_target(tx):
                continue
            if tx.cost_estimate <= room:
                chosen.append(tx)
                room -= tx.cost_estimate
        return chosen

    def _execute(self, tx: Transaction, parent: bytes, now: int) -> int:
        b, op = self.bounty, tx.op
        match op:
            case Contribute(word):
                b.contribute(word, parent, tx.sender)
            case Fund(amount):
                b.fund(tx.sender, amount)
            case Commit(lock_index, digest):
                b.commit(tx.sender, lock_index, digest, now)
            case WithdrawCommit(lock_index):
                b.withdraw_commit(tx.sender, lock_index)
            case Reveal(solution):
                return b.reveal(tx.sender, solution, now)
        return 0

    def advance_block(self, proposer_censoring: bool = False) -> Block:
        st = self.state
        parent = st.head
        height, now = st.height + 1, st.time + st.block_time
        included = self.select(proposer_censoring)
        receipts = []
        for tx in included:
            fee = (st.base_fee + tx.priority_fee) * tx.cost_estimate
            try:
                payout = self._execute(tx, parent, now)
            except BountyError as exc:
                r = Receipt(tx.tx_id, height, type(exc).__name__, str(exc), tx.cost_estimate, fee)
            else:
                r = Receipt(tx.tx_id, height, "ok", "", tx.cost_estimate, fee, payout)
            receipts.append(r)
            self.receipts[tx.tx_id] = r
        taken = {tx.tx_id for tx in included}
        st.mempool = [tx for tx in st.mempool if tx.tx_id not in taken]
        cost_used = sum(tx.cost_estimate for tx in included)
        digest = keccak256(parent, u64(height), u64(now), *(tx.digest for tx in included))
        block = Block(height, now, digest, parent, st.base_fee, cost_used, proposer_censoring, tuple(receipts))
        st.base_fee = update_base_fee(st.base_fee, cost_used, st.cost_target)
        st.height, st.time, st.head = height, now, digest
        return block

    def advance_time(self, seconds: int, proposer_censoring: bool = False) -> list[Block]:
        """Mine enough blocks for the clock to move forward by at least ``seconds``."""
        if seconds < 0:
            raise InvalidInput("cannot move time backwards")
        n = -(-seconds // self.state.block_time)
        return [self.advance_block(proposer_censoring) for _ in range(n)]

    def include(self, tx: Transaction, max_blocks: int = 10_000) -> Receipt:
        """Mine until ``tx`` has a receipt."""
        for _ in range(max_blocks):
            if tx.tx_id in self.receipts:
                break
            self.advance_block()
        else:
            raise InvalidInput(f"transaction {tx.tx_id} not included after {max_blocks} blocks")
        return self.receipts[tx.tx_id]
