"""Trustless factoring bounty with commit-reveal claims, a simulated ledger
and accounts that fall back to Lamport signatures once the bounty is solved."""

from .bounty import QuantumBounty, address, address_from_label, commitment_digest, min_bounty_in_currency
from .fallback import FallbackAccount, KeyedHashScheme, lamport_keygen, lamport_sign, lamport_verify
from .ledger import Ledger, LedgerState, metered_cost, update_base_fee
from .locks import (
    GenerationParams,
    expected_hard_lock_count,
    expected_prime_factor_count,
    required_lock_count,
    sander_hardness,
)
from .numeric import gcd, miller_rabin, mod_pow
from .puzzles import FactorizationSolution, coprime_pair_count, verify_factorization, verify_order
from .simulation import AdversaryProfile, simulate_frontrun

__all__ = [
    "AdversaryProfile",
    "FactorizationSolution",
    "FallbackAccount",
    "GenerationParams",
    "KeyedHashScheme",
    "Ledger",
    "LedgerState",
    "QuantumBounty",
    "address",
    "address_from_label",
    "commitment_digest",
    "coprime_pair_count",
    "expected_hard_lock_count",
    "expected_prime_factor_count",
    "gcd",
    "lamport_keygen",
    "lamport_sign",
    "lamport_verify",
    "metered_cost",
    "miller_rabin",
    "min_bounty_in_currency",
    "mod_pow",
    "required_lock_count",
    "sander_hardness",
    "simulate_frontrun",
    "update_base_fee",
    "verify_factorization",
    "verify_order",
]
