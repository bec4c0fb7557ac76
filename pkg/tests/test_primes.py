import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from primehit.errors import PreconditionError, ResourceLimitError
from primehit.primes import (
    PrimeTable,
    build_prime_table,
    pnt_rhs_upper,
    verify_pnt_lower_bound,
)


def trial_division(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def test_small_table_exact_primes():
    t = build_prime_table(10)
    assert [n for n in range(11) if t.is_prime(n)] == [2, 3, 5, 7]


def test_smallest_table():
    t = build_prime_table(2)
    assert t.is_prime(2)
    assert not t.is_prime(1) and not t.is_prime(0)
    with pytest.raises(IndexError):
        t.is_prime(3)


@pytest.mark.parametrize("limit", [1, 0, -5])
def test_rejects_tiny_limit(limit):
    with pytest.raises(PreconditionError):
        build_prime_table(limit)


def test_memory_budget():
    with pytest.raises(ResourceLimitError):
        build_prime_table(10**9, memory_budget=1 << 20)


def test_agrees_with_trial_division(small_table):
    expected = [trial_division(n) for n in range(10_001)]
    assert small_table.is_prime_bits[:10_001].tolist() == expected


def test_first_roll_values(small_table):
    assert small_table.is_prime(2)
    assert not small_table.is_prime(1)
    assert not small_table.is_prime(4)
    assert not small_table.is_prime(6)


@pytest.mark.parametrize("n, count", [(6, 3), (4, 2), (2, 0), (0, 0), (1, 0), (3, 1)])
def test_pi_strict_small(small_table, n, count):
    assert small_table.pi_strict(n) == count


def test_pi_strict_1000(small_table):
    assert small_table.pi_strict(1000) == sum(trial_division(n) for n in range(1000))


def test_prefix_increments_match_bits(small_table):
    prefix = small_table.strict_count_prefix.astype(np.int64)
    assert (np.diff(prefix) == small_table.is_prime_bits[:-1]).all()


@given(st.integers(0, 99_999))
def test_pi_strict_step(n):
    t = _shared_table()
    step = t.pi_strict(n + 1) - t.pi_strict(n)
    assert step in (0, 1)
    assert step == int(t.is_prime(n))


_cache = {}


def _shared_table():
    if "t" not in _cache:
        _cache["t"] = build_prime_table(100_000)
    return _cache["t"]


def test_count_below_ten_million(big_table):
    # independent oracle: sympy's combinatorial prime counting
    assert big_table.pi_strict(10_000_000) == sympy.primepi(10_000_000 - 1) == 664_579


def test_table_is_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.is_prime_bits[4] = True


def test_out_of_range_queries(small_table):
    with pytest.raises(IndexError):
        small_table.pi_strict(small_table.limit + 1)
    with pytest.raises(IndexError):
        small_table.is_prime(-1)


def test_pnt_single_point(small_table):
    check = verify_pnt_lower_bound(small_table, 1001, 1001)
    assert check.passed
    assert small_table.pi_strict(1001) == 168


def test_pnt_sweep_small_range(small_table):
    assert verify_pnt_lower_bound(small_table, 1001, small_table.limit).passed


def test_pnt_inverted_range(small_table):
    with pytest.raises(PreconditionError):
        verify_pnt_lower_bound(small_table, 2000, 1500)


def test_pnt_beyond_table(small_table):
    with pytest.raises(PreconditionError):
        verify_pnt_lower_bound(small_table, 1001, small_table.limit + 1)


def test_pnt_reports_first_failure():
    # a table claiming no primes at all fails right at the start of the range
    bits = np.zeros(2001, dtype=bool)
    t = PrimeTable(2000, bits, np.zeros(2001, dtype=np.int32))
    check = verify_pnt_lower_bound(t, 1500, 2000)
    assert not check.passed and check.first_failure == 1500


def test_pnt_rhs_is_rounded_up():
    import mpmath

    mpmath.mp.prec = 200
    for n in [1001, 4096, 99_991, 10**7]:
        exact = mpmath.mpf("0.9") * n / mpmath.log(n)
        assert pnt_rhs_upper(np.array([n]))[0] > exact
