"""Monte Carlo of an attacker trying to steal a revealed solution.

Timeline of one trial, with t=0 the moment the victim's reveal enters the
mempool:

* the attacker copies the factors, commits them under its own address, and
  gets that commit into block 1 (it outbids everyone);
* its own reveal becomes valid once the commit has aged ``reveal_delay``;
* meanwhile every block either includes the victim's reveal or excludes it,
  because the proposer colludes (probability ``censor_fraction``) or because
  the attacker filled the block with spam at ``base_fee * cost_limit``;
* the attack succeeds when the attacker's reveal lands no later than the
  victim's (same block counts, since the attacker pays the higher tip).

Spam only happens on blocks with an honest proposer, and each spammed block
is full, so the base fee compounds by 9/8 per spammed block.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .ledger import BLOCK_TIME, COST_LIMIT, INITIAL_BASE_FEE, update_base_fee

STRATEGIES = ("censor-reveal", "fee-spam", "copy-and-frontrun")
_CHUNK = 256


@dataclass(frozen=True, slots=True)
class AdversaryProfile:
    censor_fraction: float = 0.0
    spam_budget: float = 0.0
    strategy: str = "copy-and-frontrun"

    def __post_init__(self) -> None:
        if not 0 <= self.censor_fraction < 1:
            raise InvalidInput("censor_fraction must lie in [0, 1)")
        if not (math.isfinite(self.spam_budget) and self.spam_budget >= 0):
            raise InvalidInput("spam_budget must be finite and non-negative")
        if self.strategy not in STRATEGIES:
            raise InvalidInput(f"strategy must be one of {STRATEGIES}")

    @property
    def uses_censorship(self) -> bool:
        return self.strategy != "fee-spam"

    @property
    def uses_spam(self) -> bool:
        return self.strategy != "censor-reveal" and self.spam_budget > 0


@dataclass(frozen=True, slots=True)
class FrontrunReport:
    attack_success_rate: float
    mean_inclusion_delay_seconds: float
    attacker_spend: float  # mean per trial, fee units
    trials: int
    successes: int

    def to_text(self) -> str:
        return "".join(f"{f.name}: {getattr(self, f.name)}\n" for f in fields(self))


def spam_cost_table(budget: float, initial_base_fee: int, cost_limit: int) -> list[float]:
    """Cumulative cost of the first j spammed blocks, for every affordable j."""
    cum = [0.0]
    fee = Fraction(initial_base_fee)
    while True:
        nxt = cum[-1] + float(fee * cost_limit)
        if nxt > budget:
            return cum
        cum.append(nxt)
        fee = update_base_fee(fee, cost_limit, cost_limit // 2)


def _proposer_draws(rng: np.random.Generator, censor_fraction: float):
    """Endless stream of per-block "proposer censors" flags."""
    while True:
        yield from (rng.random(_CHUNK) < censor_fraction).tolist()


def _run_trials(args) -> tuple[int, int, float]:
    seeds, profile, reveal_delay, block_time, cum = args
    attacker_block = 1 + -(-reveal_delay // block_time)
    c = profile.censor_fraction if profile.uses_censorship else 0.0
    max_spam = len(cum) - 1 if profile.uses_spam else 0
    successes = delay_blocks = 0
    spend = 0.0
    for seed in seeds:
        k = spammed = 0
        for censored in _proposer_draws(np.random.default_rng(seed), c):
            k += 1
            if censored:
                continue
            if spammed < max_spam and k < attacker_block:
                spammed += 1
                continue
            break
        delay_blocks += k
        successes += attacker_block <= k
        spend += cum[spammed]
    return successes, delay_blocks, spend


def simulate_frontrun(
    scenario: AdversaryProfile,
    reveal_delay: int,
    trials: int,
    seed: int = 0,
    block_time: int = BLOCK_TIME,
    initial_base_fee: int = INITIAL_BASE_FEE,
    cost_limit: int = COST_LIMIT,
    workers: int = 1,
) -> FrontrunReport:
    """Estimate attack success, victim inclusion delay and attacker spend.

    Each trial draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    if reveal_delay < 0 or block_time <= 0:
        raise InvalidInput("reveal_delay must be >= 0 and block_time > 0")
    cum = spam_cost_table(scenario.spam_budget, initial_base_fee, cost_limit) if scenario.uses_spam else [0.0]
    seeds = np.random.SeedSequence(seed).spawn(trials)
    workers = max(1, min(workers, trials))
    step = -(-trials // workers)
    jobs = [(seeds[i : i + step], scenario, reveal_delay, block_time, cum) for i in range(0, trials, step)]
    if workers == 1:
        parts = [_run_trials(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_trials, jobs))
    successes = sum(p[0] for p in parts)
    blocks = sum(p[1] for p in parts)
    spend = sum(p[2] for p in parts)
    return FrontrunReport(
        attack_success_rate=successes / trials,
        mean_inclusion_delay_seconds=blocks * block_time / trials,
        attacker_spend=spend / trials,
        trials=trials,
        successes=successes,
    )


@dataclass(frozen=True, slots=True)
class Scenario:
    profile: AdversaryProfile
    reveal_delay: int = 86_400
    trials: int = 10_000
    seed: int = 0
    block_time: int = BLOCK_TIME
    initial_base_fee: int = INITIAL_BASE_FEE
    cost_limit: int = COST_LIMIT
    workers: int = 1

    def run(self) -> FrontrunReport:
        return simulate_frontrun(
            self.profile, self.reveal_delay, self.trials, self.seed,
            self.block_time, self.initial_base_fee, self.cost_limit, self.workers,
        )


_INT_KEYS = {"reveal_delay", "trials", "seed", "block_time", "initial_base_fee", "cost_limit", "workers"}
_FLOAT_KEYS = {"censor_fraction", "spam_budget"}


def parse_scenario(text: str) -> Scenario:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise InvalidInput(f"line {lineno}: expected key = value")
        try:
            if key in _INT_KEYS:
                values[key] = int(float(value)) if "e" in value.lower() else int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "strategy":
                values[key] = value
            else:
                raise InvalidInput(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise InvalidInput(f"line {lineno}: bad value for {key}: {value!r}") from None
    profile = AdversaryProfile(**{k: values.pop(k) for k in ("censor_fraction", "spam_budget", "strategy") if k in values})
    return Scenario(profile, **values)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())
