"""Persistent protocol state: header, bounty, chain and the event log that
reproduces them.

All mutations go through :class:`Session`, which routes them through the
ledger as transactions and appends an event. Replaying the events from the
header must land on exactly the stored body.
"""

from __future__ import annotations

import json
import os
import secrets
from dataclasses import asdict
from pathlib import Path

from . import errors
from .bounty import QuantumBounty
from .errors import InvalidInput, StateCorrupt, StateExists
from .hashing import HASH_FAMILY
from .ledger import CostSchedule, Ledger, LedgerState, ProtocolCall, Receipt, call_from_dict, call_to_dict
from .locks import GenerationParams

FORMAT = "quantum-bounty-state"
VERSION = 1


class Session:
    def __init__(self, header: dict, bounty: QuantumBounty, ledger: Ledger, events: list[dict]):
        self.header = header
        self.bounty = bounty
        self.ledger = ledger
        self.events = events

    @classmethod
    def create(
        cls,
        params: GenerationParams,
        reveal_delay: int = 86_400,
        min_bounty: int | None = None,
        schedule: CostSchedule | None = None,
        ledger_state: LedgerState | None = None,
        instance: str | None = None,
    ) -> Session:
        schedule = schedule or CostSchedule()
        ledger_state = ledger_state or LedgerState(cost_schedule=schedule)
        ledger_state.cost_schedule = schedule
        kw = {} if min_bounty is None else {"min_bounty": min_bounty}
        bounty = QuantumBounty(params=params, reveal_delay=reveal_delay, **kw)
        header = {
            "format": FORMAT,
            "version": VERSION,
            "hash": HASH_FAMILY,
            "instance": instance or secrets.token_hex(16),
            "params": asdict(params),
            "reveal_delay": reveal_delay,
            "min_bounty": bounty.min_bounty,
            "cost_schedule": asdict(schedule),
            "genesis": ledger_state.to_dict(),
        }
        return cls(header, bounty, Ledger(bounty, ledger_state), [])

    # -- mutations ------------------------------------------------------

    def submit(self, sender: bytes, op: ProtocolCall, priority_fee: int = 1):
        tx = self.ledger.submit(sender, op, priority_fee)
        self.events.append({"kind": "submit", "sender": tx.sender.hex(), "op": call_to_dict(op), "priority_fee": priority_fee})
        return tx

    def mine(self, blocks: int = 1, censoring: bool = False) -> None:
        for _ in range(blocks):
            self.ledger.advance_block(censoring)
        if blocks:
            self.events.append({"kind": "blocks", "count": blocks, "censoring": censoring})

    def execute(self, sender: bytes, op: ProtocolCall, priority_fee: int = 1, max_blocks: int = 10_000) -> Receipt:
        """Submit and mine until included; raise the rejection if the call failed."""
        tx = self.submit(sender, op, priority_fee)
        mined = 0
        while tx.tx_id not in self.ledger.receipts:
            if mined >= max_blocks:
                raise InvalidInput(f"transaction not included after {max_blocks} blocks")
            self.ledger.advance_block()
            mined += 1
        if mined:
            self.events.append({"kind": "blocks", "count": mined, "censoring": False})
        receipt = self.ledger.receipts[tx.tx_id]
        if not receipt.ok:
            raise getattr(errors, receipt.status, errors.ProtocolRejection)(receipt.message)
        return receipt

    def advance_time(self, seconds: int) -> None:
        if seconds < 0:
            raise InvalidInput("cannot move time backwards")
        self.mine(-(-seconds // self.ledger.state.block_time))

    # -- persistence ----------------------------------------------------

    def body(self) -> dict:
        return {"bounty": self.bounty.to_dict(), "ledger": self.ledger.state.to_dict(), "events": self.events}

    def to_dict(self) -> dict:
        return {"header": self.header, "body": self.body()}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> Session:
        try:
            header, body = data["header"], data["body"]
            if header.get("format") != FORMAT or header.get("version") != VERSION:
                raise StateCorrupt("not a protocol state file of a supported version")
            if header.get("hash") != HASH_FAMILY:
                raise StateCorrupt(f"unsupported hash family {header.get('hash')!r}")
            params = GenerationParams(**header["params"])
            schedule = CostSchedule(**header["cost_schedule"])
            bounty = QuantumBounty.from_dict(body["bounty"], params, header["reveal_delay"])
            ledger = Ledger(bounty, LedgerState.from_dict(body["ledger"], schedule))
        except (KeyError, TypeError, ValueError) as exc:
            raise StateCorrupt(f"malformed state file: {exc}") from exc
        return cls(header, bounty, ledger, list(body["events"]))

    @classmethod
    def loads(cls, text: str) -> Session:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StateCorrupt(f"state file is not JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> Session:
        return cls.loads(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.dumps())
        os.replace(tmp, path)

    # -- replay ---------------------------------------------------------

    def replay(self) -> Session:
        """Rebuild the state from the header by re-applying every event."""
        h = self.header
        schedule = CostSchedule(**h["cost_schedule"])
        fresh = Session.create(
            GenerationParams(**h["params"]),
            reveal_delay=h["reveal_delay"],
            min_bounty=h["min_bounty"],
            schedule=schedule,
            ledger_state=LedgerState.from_dict(h["genesis"], schedule),
            instance=h["instance"],
        )
        for ev in self.events:
            if ev["kind"] == "submit":
                fresh.submit(bytes.fromhex(ev["sender"]), call_from_dict(ev["op"]), ev["priority_fee"])
            elif ev["kind"] == "blocks":
                for _ in range(ev["count"]):
                    fresh.ledger.advance_block(ev["censoring"])
                fresh.events.append(dict(ev))
            else:
                raise StateCorrupt(f"unknown event kind {ev['kind']!r}")
        return fresh


def create_state_file(path: str | Path, session: Session) -> None:
    path = Path(path)
    if path.exists() and path.stat().st_size > 0:
        raise StateExists(f"{path} already holds a protocol state")
    session.save(path)
