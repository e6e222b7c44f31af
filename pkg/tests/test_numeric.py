import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import is_prime_trial, primality_table
from quantum_bounty.errors import BothZero, InvalidInput, ZeroModulus
from quantum_bounty.numeric import (
    SMALL_BOUND,
    Verdict,
    derive_bases,
    from_bytes,
    from_hex,
    gcd,
    miller_rabin,
    mod_pow,
    to_bytes,
    to_hex,
    word_count,
)


def slow_pow(b, e, m):
    r = 1
    for _ in range(e):
        r = r * b % m
    return r


class TestModPow:
    def test_small(self):
        assert mod_pow(2, 10, 1000) == 24

    @pytest.mark.parametrize("a,n", [(0, 2), (5, 7), (12345, 99991), (2**200, 2**61 - 1)])
    def test_zero_exponent(self, a, n):
        assert mod_pow(a, 0, n) == 1

    def test_carmichael_561(self):
        expected = slow_pow(7, 560, 561)
        assert expected == 1
        assert mod_pow(7, 560, 561) == expected

    @pytest.mark.parametrize("m", [0, 1])
    def test_rejects_tiny_modulus(self, m):
        with pytest.raises(ZeroModulus):
            mod_pow(3, 4, m)

    @given(st.integers(0, 2**64), st.integers(0, 300), st.integers(2, 2**64))
    def test_matches_repeated_multiplication(self, b, e, m):
        assert mod_pow(b, e, m) == slow_pow(b, e, m)


class TestGcd:
    def test_examples(self):
        assert gcd(12, 18) == 6
        assert gcd(1, 987654321) == 1
        assert gcd(2**64, 3**40) == 1

    def test_both_zero(self):
        with pytest.raises(BothZero):
            gcd(0, 0)

    @given(st.integers(0, 2**64), st.integers(1, 2**64))
    def test_divides_both(self, a, b):
        g = gcd(a, b)
        assert a % g == 0 and b % g == 0
        assert gcd(a // g, b // g) == 1


class TestMillerRabin:
    def test_561_composite(self):
        assert not is_prime_trial(561)
        assert miller_rabin(561).verdict is Verdict.COMPOSITE

    def test_two(self):
        assert miller_rabin(2).verdict is Verdict.PROBABLE_PRIME

    def test_mersenne_31(self):
        n = 2147483647
        assert is_prime_trial(n)
        assert miller_rabin(n).is_probable_prime

    @pytest.mark.parametrize("n", [0, 1])
    def test_invalid(self, n):
        with pytest.raises(InvalidInput):
            miller_rabin(n)

    def test_even_is_immediate(self):
        v = miller_rabin(10**30)
        assert v.verdict is Verdict.COMPOSITE and v.rounds_used == 0

    @pytest.mark.parametrize("n", [2047, 1373653, 25326001, 3215031751, 2152302898747, 3474749660383,
                                   341550071728321, 3825123056546413051])
    def test_strong_pseudoprimes_to_small_base_sets(self, n):
        # each is a strong pseudoprime to the first few prime bases
        assert miller_rabin(n).verdict is Verdict.COMPOSITE

    def test_agrees_with_trial_division_up_to_20000(self):
        table = primality_table(20_000)
        for n in range(2, 20_001):
            assert miller_rabin(n).is_probable_prime == bool(table[n]), n

    def test_large_known_primes_and_composites(self):
        m89, m107, m521 = 2**89 - 1, 2**107 - 1, 2**521 - 1
        assert miller_rabin(m521).is_probable_prime
        assert miller_rabin(m521).rounds_used == 64
        assert miller_rabin(m89 * m107).verdict is Verdict.COMPOSITE
        assert miller_rabin(m107 * m107).verdict is Verdict.COMPOSITE

    def test_above_small_bound_uses_derived_bases(self):
        # 2**89 - 1 exceeds the fixed-witness bound
        assert 2**89 - 1 > SMALL_BOUND
        assert miller_rabin(2**89 - 1, rounds=5).rounds_used == 5

    def test_fermat_consistency(self):
        table = primality_table(10**6)
        primes = [p for p in range(3, 10**6) if table[p]]
        rng = random.Random(11)
        for p in rng.sample(primes, 300):
            for a in (rng.randrange(2, p - 1) for _ in range(3)) if p > 3 else ():
                assert mod_pow(a, p - 1, p) == 1


class TestBaseDerivation:
    def test_deterministic_and_in_range(self):
        n = 2**127 - 1
        bases = derive_bases(n, 32)
        assert bases == derive_bases(n, 32)
        assert all(2 <= a <= n - 2 for a in bases)
        assert len(set(bases)) == 32

    def test_seed_changes_bases(self):
        n = 2**127 - 1
        assert derive_bases(n, 4, b"a") != derive_bases(n, 4, b"b")


class TestEncoding:
    def test_zero(self):
        assert to_bytes(0) == b"\x00"
        assert to_hex(0) == "00"
        assert from_hex("00") == 0

    def test_no_leading_zeros(self):
        assert to_bytes(256) == b"\x01\x00"
        assert to_hex(4095) == "fff"

    def test_hex_rejects_junk(self):
        with pytest.raises(InvalidInput):
            from_hex("xyz")

    def test_negative_rejected(self):
        with pytest.raises(InvalidInput):
            to_bytes(-1)

    def test_round_trip_10000_values_up_to_4608_bits(self):
        rng = random.Random(4608)
        for _ in range(10_000):
            x = rng.getrandbits(rng.randint(1, 4608))
            assert from_bytes(to_bytes(x)) == x
            assert from_hex(to_hex(x)) == x

    @given(st.integers(0, 2**64 - 1))
    def test_word_count(self, x):
        assert word_count(x) == (1 if x < 2**64 else 2)
