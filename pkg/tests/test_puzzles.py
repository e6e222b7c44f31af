import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import carmichael_lambda, is_prime_trial, multiplicative_order, trial_factor
from quantum_bounty.errors import ExhaustedEntropy, InvalidInput
from quantum_bounty.locks import Lock
from quantum_bounty.puzzles import (
    MAX_FACTORS,
    FactorizationSolution,
    OrderLock,
    OrderSolution,
    coprime_pair_count,
    first_valid_pair,
    generate_order_lock,
    verify_factorization,
    verify_order,
)


def lock(value, index=0):
    return Lock(index, value, value.bit_length())


class TestFactorization:
    def test_15(self):
        assert verify_factorization(lock(15), FactorizationSolution(0, (3, 5))).accepted
        v = verify_factorization(lock(15), FactorizationSolution(0, (15,)))
        assert (v.accepted, v.reason, v.index) == (False, "NotPrime", 0)

    def test_32_bit_semiprime(self):
        p, q = 4294967291, 4294967279
        assert is_prime_trial(p) and is_prime_trial(q)
        sol = FactorizationSolution(0, (p, q))
        assert sol.factors == (q, p)
        assert verify_factorization(lock(p * q), sol)

    def test_rejections(self):
        assert verify_factorization(lock(15), FactorizationSolution(0, ())).reason == "EmptyFactorList"
        assert verify_factorization(lock(15), FactorizationSolution(0, (3, 7))).reason == "ProductMismatch"
        assert verify_factorization(lock(2**65), FactorizationSolution(0, (2,) * 65)).reason == "TooManyFactors"
        assert verify_factorization(lock(2**MAX_FACTORS), FactorizationSolution(0, (2,) * MAX_FACTORS))
        v = verify_factorization(lock(9), FactorizationSolution(0, (1, 9)))
        assert v.reason == "NotPrime" and v.index == 0

    def test_repeated_prime_factors(self):
        assert verify_factorization(lock(3 * 3 * 5 * 5 * 5), FactorizationSolution(0, (5, 3, 5, 3, 5)))

    @given(st.integers(2**20, 2**40))
    def test_oracle_factorization_always_accepted(self, n):
        assert verify_factorization(lock(n), FactorizationSolution(0, tuple(trial_factor(n))))

    def test_encoding_is_order_independent(self):
        assert FactorizationSolution(3, (5, 3)).encode() == FactorizationSolution(3, (3, 5)).encode()
        assert FactorizationSolution(3, (3, 5)).encode() != FactorizationSolution(4, (3, 5)).encode()

    def test_negative_factor(self):
        with pytest.raises(InvalidInput):
            FactorizationSolution(0, (-3, -5))


class TestOrder:
    def test_15(self):
        lk = OrderLock(15, 2)
        assert verify_order(lk, OrderSolution(0, 4))
        assert verify_order(lk, OrderSolution(0, 3)).reason == "NotUnitResult"
        assert verify_order(lk, OrderSolution(0, 0)).reason == "NonPositiveExponent"
        assert verify_order(lk, OrderSolution(0, 8))  # multiples of the order are accepted

    def test_exponent_size_bound(self):
        n = (1 << 4607) | 1
        lk = OrderLock(n, 5 if n % 3 == 0 else 3)
        assert lk.max_exponent_bytes == 1152
        too_big = 1 << (8 * 1152)
        assert verify_order(lk, OrderSolution(0, too_big)).reason == "ExponentTooLarge"

    @given(st.integers(3, 10**5), st.integers(2, 10**5))
    def test_oracle_orders_accepted(self, n, a):
        a %= n
        if a in (0, 1, n - 1) or math.gcd(a, n) != 1:
            return
        lk = OrderLock(n, a)
        r = multiplicative_order(a, n)
        assert verify_order(lk, OrderSolution(0, r))
        assert verify_order(lk, OrderSolution(0, carmichael_lambda(n)))
        if r > 1:
            assert not verify_order(lk, OrderSolution(0, r - 1))

    @pytest.mark.parametrize("n,a", [(15, 1), (15, 14), (15, 5), (15, 0)])
    def test_bad_lock(self, n, a):
        with pytest.raises(InvalidInput):
            OrderLock(n, a)


class TestOrderGeneration:
    def test_coprime_pair_count(self):
        assert coprime_pair_count(1e-9, 0.6079) == 23
        assert coprime_pair_count(0.5, 0.5) == 1
        # ln(1e-9)/ln(0.39) = 22.008..., whose ceiling is 23
        assert math.log(1e-9) / math.log(0.39) > 22
        assert coprime_pair_count(1e-9, 0.61) == 23

    def test_resamples_unit_base(self):
        n_slice = b"\x00\x0f"  # top bit forced: 0x800f
        n = 0x800F
        ones = (1).to_bytes(2, "big")
        minus_one = (n - 1).to_bytes(2, "big")
        good = (2).to_bytes(2, "big")
        lk = generate_order_lock([n_slice, ones, minus_one, good])
        assert (lk.modulus, lk.base) == (n, 2)

    def test_resamples_non_coprime_base(self):
        n = 0x8001  # divisible by 3
        lk = generate_order_lock([n.to_bytes(2, "big"), (3).to_bytes(2, "big"), (2).to_bytes(2, "big")])
        assert (lk.modulus, lk.base) == (n, 2)

    def test_exhausted(self):
        with pytest.raises(ExhaustedEntropy):
            generate_order_lock([b"\x00\x0f", b"\x00\x01"])

    def test_probabilistic(self):
        slices = [bytes([i, i + 1]) for i in range(46)]
        pairs = generate_order_lock(slices, mode="probabilistic")
        assert len(pairs) == 23
        assert all(n >> 15 == 1 and 0 <= a < n for n, a in pairs)
        first_valid_pair(pairs)

    def test_unknown_mode(self):
        with pytest.raises(InvalidInput):
            generate_order_lock([b"\x01"], mode="nope")
