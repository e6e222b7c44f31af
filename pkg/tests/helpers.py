"""Shared builders for tests."""

from oracles import trial_factor
from quantum_bounty.bounty import QuantumBounty, address_from_label
from quantum_bounty.locks import GenerationParams
from quantum_bounty.puzzles import FactorizationSolution

GENERATOR = address_from_label("generator")


def generated_bounty(lock_count=3, lock_bits=24, reveal_delay=100, **kw) -> QuantumBounty:
    b = QuantumBounty(GenerationParams(lock_count=lock_count, lock_bits=lock_bits), reveal_delay=reveal_delay, **kw)
    i = 0
    while not b.generation_complete:
        b.contribute(i, i.to_bytes(32, "big"), GENERATOR)
        i += 1
    return b


def solution(bounty: QuantumBounty, index: int) -> FactorizationSolution:
    return FactorizationSolution(index, tuple(trial_factor(bounty.locks[index].value)))
