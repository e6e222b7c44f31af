"""Operator command line: ``qbounty <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 protocol rejection, 4 I/O or
state-file problem. A failing command never rewrites the state file.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from contextlib import contextmanager
from decimal import Decimal

from filelock import FileLock, Timeout

from .bounty import (
    DEFAULT_GAS_PRICE_WEI,
    ESTIMATED_SOLVE_GAS,
    GWEI,
    REVEAL_DELAY,
    address,
    address_from_label,
    commitment_digest,
    min_bounty_in_currency,
)
from .errors import BountyError, InputError, InvalidInput, ProtocolRejection
from .ledger import (
    Commit,
    Contribute,
    CostSchedule,
    Fund,
    ModMul,
    Reveal,
    VerifyFactorization,
    VerifyOrder,
    WithdrawCommit,
    metered_cost,
    transaction_cost,
)
from .locks import (
    ANONCOIN_HARDNESS,
    DEFAULT_FAILURE_PROBABILITY,
    GenerationParams,
    expected_hard_lock_count,
    expected_prime_factor_count,
    required_lock_count,
    sander_hardness,
)
from .numeric import from_hex, to_hex
from .puzzles import FactorizationSolution, coprime_pair_count
from .simulation import load_scenario
from .state import Session, create_state_file

EXIT_OK, EXIT_INPUT, EXIT_REJECTED, EXIT_IO = 0, 2, 3, 4


def parse_address(text: str) -> bytes:
    """40 hex digits (optionally 0x-prefixed) or a free-form label."""
    raw = text[2:] if text.lower().startswith("0x") else text
    if len(raw) == 40:
        try:
            return address(raw)
        except InvalidInput:
            pass
    return address_from_label(text)


def parse_factors(text: str) -> tuple[int, ...]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    if not items:
        raise InvalidInput("empty factor list")
    return tuple(from_hex(t) for t in items)


@contextmanager
def open_state(path: str, write: bool = True):
    """Load the state under a lock file; save only if the block exits cleanly."""
    lock = FileLock(path + ".lock", timeout=0)
    try:
        with lock:
            session = Session.load(path)
            yield session
            if write:
                session.save(path)
    except Timeout:
        raise OSError(f"{path} is in use by another process") from None


# -- commands ---------------------------------------------------------------


def cmd_generate(args) -> None:
    params = GenerationParams(
        lock_count=args.locks,
        lock_bits=args.lock_bits,
        failure_probability=args.failure_prob,
        per_lock_hardness=args.hardness,
    )
    if 0 < args.hardness:
        needed = required_lock_count(args.failure_prob, args.hardness)
        if needed != args.locks:
            print(f"note: {needed} locks are needed for failure probability {args.failure_prob} "
                  f"at hardness {args.hardness}; generating {args.locks}")
    min_bounty = int(ESTIMATED_SOLVE_GAS * args.gas_price_gwei * 10**9)
    session = Session.create(params, reveal_delay=args.reveal_delay, min_bounty=min_bounty)
    create_state_file(args.state, session)
    print(f"state: {args.state}")
    print(f"locks: {params.lock_count} x {params.lock_bits} bits")
    print(f"target_bytes: {params.target_bytes}")
    print(f"contributions_needed: {-(-params.target_bytes // 32)}")


def cmd_contribute(args) -> None:
    sender = parse_address(args.sender)
    with open_state(args.state) as s:
        for i in range(args.count):
            if args.word is not None:
                word = bytes.fromhex(args.word.removeprefix("0x").rjust(64, "0"))
                if len(word) != 32:
                    raise InvalidInput("--word must be at most 32 bytes of hex")
            else:
                word = os.urandom(32)
            s.execute(sender, Contribute(word))
            if s.bounty.generation_complete:
                break
        acc = s.bounty.generator.state
        print(f"accumulated: {len(acc.buffer)}/{acc.target_bytes} bytes")
        print(f"generation_complete: {str(s.bounty.generation_complete).lower()}")


def cmd_status(args) -> None:
    with open_state(args.state, write=False) as s:
        b, st = s.bounty, s.ledger.state
        acc = b.generator.state
        print(f"instance: {s.header['instance']}")
        print(f"height: {st.height}")
        print(f"time: {st.time}")
        print(f"base_fee: {float(st.base_fee):.6g}")
        print(f"accumulated: {len(acc.buffer)}/{acc.target_bytes} bytes")
        print(f"generation_complete: {str(b.generation_complete).lower()}")
        print(f"balance: {b.balance}")
        print(f"min_bounty: {b.min_bounty}{'  (underfunded)' if b.underfunded else ''}")
        print(f"commitments: {len(b.commitments)}")
        print(f"solved: {str(b.solved).lower()}")
        for lk in b.locks:
            who = lk.solver.hex() if lk.solver else "-"
            print(f"lock {lk.index}: {to_hex(lk.value)} solved={str(lk.solved).lower()} solver={who}")


def cmd_fund(args) -> None:
    with open_state(args.state) as s:
        s.execute(parse_address(args.sender), Fund(args.amount))
        print(f"balance: {s.bounty.balance}")


def cmd_commit(args) -> None:
    sender = parse_address(args.sender)
    solution = FactorizationSolution(args.lock, parse_factors(args.factors))
    digest = commitment_digest(solution, sender)
    with open_state(args.state) as s:
        s.execute(sender, Commit(args.lock, digest), args.priority_fee)
        c = s.bounty.commitment(sender, args.lock)
        print(f"digest: {digest.hex()}")
        print(f"committed_at: {c.committed_at}")
        print(f"reveal_after: {c.committed_at + s.bounty.reveal_delay}")


def cmd_withdraw(args) -> None:
    with open_state(args.state) as s:
        s.execute(parse_address(args.sender), WithdrawCommit(args.lock))
        print("withdrawn")


def cmd_reveal(args) -> None:
    sender = parse_address(args.sender)
    solution = FactorizationSolution(args.lock, parse_factors(args.factors))
    with open_state(args.state) as s:
        receipt = s.execute(sender, Reveal(solution), args.priority_fee)
        print(f"lock {args.lock}: solved")
        print(f"payout: {receipt.payout}")
        print(f"solved: {str(s.bounty.solved).lower()}")


def cmd_advance(args) -> None:
    with open_state(args.state) as s:
        if args.blocks is not None:
            s.mine(args.blocks, censoring=args.censoring)
        else:
            if args.censoring:
                s.mine(-(-args.seconds // s.ledger.state.block_time), censoring=True)
            else:
                s.advance_time(args.seconds)
        print(f"height: {s.ledger.state.height}")
        print(f"time: {s.ledger.state.time}")


def cmd_verify(args) -> None:
    with open_state(args.state, write=False) as s:
        replayed = s.replay()
        if replayed.dumps() != s.dumps():
            raise ProtocolRejection("event log does not reproduce the stored state")
        print(f"replay: ok ({len(s.events)} events)")


def cmd_simulate(args) -> None:
    scenario = load_scenario(args.scenario)
    if args.trials is not None:
        scenario = dataclasses.replace(scenario, trials=args.trials)
    sys.stdout.write(scenario.run().to_text())


def cmd_params(args) -> None:
    params = GenerationParams(
        lock_count=args.locks or required_lock_count(args.failure_prob, args.hardness),
        lock_bits=args.lock_bits,
        failure_probability=args.failure_prob,
        per_lock_hardness=args.hardness,
    )
    price = Decimal(str(args.gas_price_gwei)) * GWEI
    print(f"required_lock_count: {required_lock_count(args.failure_prob, args.hardness)}")
    print(f"sander_hardness: {sander_hardness(args.xi):.4f}")
    print(f"expected_prime_factor_count: {expected_prime_factor_count(args.lock_bits):.2f}")
    print(f"expected_hard_lock_count: {expected_hard_lock_count(params):.2f}")
    print(f"coprime_pair_count: {coprime_pair_count(args.failure_prob, args.coprime_prob)}")
    print(f"min_bounty_in_currency: {min_bounty_in_currency(args.gas, price).normalize()} ETH")


def cmd_cost_report(args) -> None:
    s = CostSchedule(primality_rounds=args.rounds)
    width = args.factor_bits
    lock_bits = args.lock_bits
    w = s.words(lock_bits)
    print(f"mod_mul[{lock_bits} bits]: {metered_cost(ModMul(w), s):.12g}")
    print(f"mod_mul[{2 * lock_bits} bits]: {metered_cost(ModMul(s.words(2 * lock_bits)), s):.12g}")
    for k in sorted({args.factors, 2 * args.factors}):
        print(f"verify_factorization[{k} x {width} bits]: {metered_cost(VerifyFactorization((width,) * k), s):.12g}")
    print(f"verify_order[max exponent, {lock_bits} bits]: {metered_cost(VerifyOrder(2 * lock_bits, lock_bits), s):.12g}")
    dummy = FactorizationSolution(0, tuple((1 << (width - 1)) | 1 for _ in range(args.factors)))
    print(f"tx contribute: {transaction_cost(Contribute(bytes(32)), s)}")
    print(f"tx fund: {transaction_cost(Fund(1), s)}")
    print(f"tx commit: {transaction_cost(Commit(0, bytes(32)), s)}")
    print(f"tx reveal[{args.factors} x {width} bits]: {transaction_cost(Reveal(dummy), s)}")


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbounty", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def stateful(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--state", required=True, help="protocol state file")
        sp.set_defaults(func=func)
        return sp

    g = stateful("generate", cmd_generate, "create a new state file and start lock generation")
    g.add_argument("--locks", type=int, default=119)
    g.add_argument("--lock-bits", type=int, default=4608)
    g.add_argument("--failure-prob", type=float, default=DEFAULT_FAILURE_PROBABILITY)
    g.add_argument("--hardness", type=float, default=ANONCOIN_HARDNESS)
    g.add_argument("--reveal-delay", type=int, default=REVEAL_DELAY)
    g.add_argument("--gas-price-gwei", type=float, default=DEFAULT_GAS_PRICE_WEI / 1e9,
                   help="price used to express the minimum bounty")

    c = stateful("contribute", cmd_contribute, "feed 256-bit words into the accumulator")
    c.add_argument("--word", help="32-byte hex word (random if omitted)")
    c.add_argument("--count", type=int, default=1, help="number of contributions to submit")
    c.add_argument("--from", dest="sender", required=True)

    stateful("status", cmd_status, "show protocol and chain state")

    f = stateful("fund", cmd_fund, "donate to the bounty")
    f.add_argument("--amount", type=int, required=True)
    f.add_argument("--from", dest="sender", required=True)

    for name, func, help_ in (("commit", cmd_commit, "commit to a factorization"),
                              ("reveal", cmd_reveal, "reveal a committed factorization")):
        sp = stateful(name, func, help_)
        sp.add_argument("--lock", type=int, required=True)
        sp.add_argument("--factors", required=True, help="comma-separated hex factors")
        sp.add_argument("--from", dest="sender", required=True)
        sp.add_argument("--priority-fee", type=int, default=1)

    wd = stateful("withdraw", cmd_withdraw, "withdraw a commitment")
    wd.add_argument("--lock", type=int, required=True)
    wd.add_argument("--from", dest="sender", required=True)

    a = stateful("advance", cmd_advance, "mine empty blocks to move the clock")
    grp = a.add_mutually_exclusive_group(required=True)
    grp.add_argument("--seconds", type=int)
    grp.add_argument("--blocks", type=int)
    a.add_argument("--censoring", action="store_true", help="blocks come from censoring proposers")

    stateful("verify", cmd_verify, "replay the event log and compare with the stored state")

    sim = sub.add_parser("simulate", help="front-running Monte Carlo from a scenario file")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--trials", type=int)
    sim.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("params", help="print the parameter calculations")
    pr.add_argument("--locks", type=int)
    pr.add_argument("--lock-bits", type=int, default=4608)
    pr.add_argument("--failure-prob", type=float, default=DEFAULT_FAILURE_PROBABILITY)
    pr.add_argument("--hardness", type=float, default=ANONCOIN_HARDNESS)
    pr.add_argument("--xi", type=float, default=1 / 3)
    pr.add_argument("--coprime-prob", type=float, default=0.6079)
    pr.add_argument("--gas", type=int, default=ESTIMATED_SOLVE_GAS)
    pr.add_argument("--gas-price-gwei", type=Decimal, default=Decimal("23.8"))
    pr.set_defaults(func=cmd_params)

    cr = sub.add_parser("cost-report", help="metered costs of verification workloads")
    cr.add_argument("--lock-bits", type=int, default=4608)
    cr.add_argument("--factor-bits", type=int, default=288)
    cr.add_argument("--factors", type=int, default=8)
    cr.add_argument("--rounds", type=int, default=64)
    cr.set_defaults(func=cmd_cost_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BountyError as exc:
        code = EXIT_REJECTED if isinstance(exc, ProtocolRejection) else EXIT_IO
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
