"""Sieve-backed primality table and strict prime counting.

``pi_strict(n)`` counts primes *strictly below* ``n``. This is not the
textbook pi(n) (which counts p <= n); the two agree on composite ``n`` and
differ by one on primes. The tail bounds only ever evaluate it on non-prime
sums, and where they do not, a smaller count gives a larger (safer) bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from primehit.errors import PreconditionError, ResourceLimitError

DEFAULT_SIEVE_LIMIT = 10_000_000
DEFAULT_MEMORY_BUDGET = 1 << 30  # bytes

PNT_CONSTANT = 0.9

# Relative slack applied to the float right-hand side 0.9*n/ln(n). numpy's
# log, the multiply and the divide each contribute well under 2 ulp, so
# 2**-40 dwarfs the accumulated rounding error.
_RHS_SLACK = 1.0 + 2.0**-40


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Immutable primality bits and strict prime-count prefix over ``0..limit``."""

    limit: int
    is_prime_bits: np.ndarray
    strict_count_prefix: np.ndarray

    def _check(self, n: int) -> None:
        if n < 0 or n > self.limit:
            raise IndexError(f"n={n} outside prime table range [0, {self.limit}]")

    def is_prime(self, n: int) -> bool:
        self._check(n)
        return bool(self.is_prime_bits[n])

    def pi_strict(self, n: int) -> int:
        """Number of primes p with p < n."""
        self._check(n)
        return int(self.strict_count_prefix[n])

    def prime_count(self) -> int:
        """Number of primes p <= limit."""
        return int(self.strict_count_prefix[self.limit]) + int(self.is_prime_bits[self.limit])


def _estimated_bytes(limit: int) -> int:
    itemsize = 4 if limit < 2**31 else 8
    return (limit + 1) * (1 + itemsize)


def build_prime_table(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> PrimeTable:
    """Sieve of Eratosthenes over ``0..limit``.

    Raises :class:`PreconditionError` for ``limit < 2`` and
    :class:`ResourceLimitError` when the table would not fit ``memory_budget``.
    """
    limit = int(limit)
    if limit < 2:
        raise PreconditionError(f"prime table limit must be >= 2, got {limit}")
    need = _estimated_bytes(limit)
    if need > memory_budget:
        raise ResourceLimitError(
            f"prime table for limit {limit} needs ~{need} bytes, budget is {memory_budget}"
        )

    bits = np.ones(limit + 1, dtype=bool)
    bits[:2] = False
    bits[4::2] = False
    for p in range(3, int(limit**0.5) + 1, 2):
        if bits[p]:
            bits[p * p :: 2 * p] = False
    bits.setflags(write=False)

    dtype = np.int32 if limit < 2**31 else np.int64
    prefix = np.zeros(limit + 1, dtype=dtype)
    np.cumsum(bits[:-1], dtype=dtype, out=prefix[1:])
    prefix.setflags(write=False)
    return PrimeTable(limit=limit, is_prime_bits=bits, strict_count_prefix=prefix)


@dataclass(frozen=True)
class PntCheck:
    """Outcome of a sweep of pi_strict(n) > 0.9 n / ln n over ``[start, stop]``."""

    start: int
    stop: int
    first_failure: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.first_failure is None


def pnt_rhs_upper(n: np.ndarray) -> np.ndarray:
    """Upward-rounded float evaluation of 0.9 * n / ln(n) for integer ``n >= 2``."""
    n = np.asarray(n, dtype=np.float64)
    rhs = PNT_CONSTANT * n / np.log(n)
    return np.nextafter(rhs * _RHS_SLACK, np.inf)


def verify_pnt_lower_bound(
    table: PrimeTable, start: int, stop: int, chunk: int = 1 << 20
) -> PntCheck:
    """Check ``pi_strict(n) > 0.9 n / ln n`` for every integer n in ``[start, stop]``.

    The right-hand side is rounded up before comparing, so a pass cannot be
    an artefact of floating-point rounding. Returns the smallest failing n,
    if any.
    """
    if not 2 <= start <= stop:
        raise PreconditionError(f"need 2 <= start <= stop, got start={start}, stop={stop}")
    if stop > table.limit:
        raise PreconditionError(f"stop={stop} exceeds prime table limit {table.limit}")

    for lo in range(start, stop + 1, chunk):
        hi = min(lo + chunk, stop + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        counts = table.strict_count_prefix[lo:hi]
        bad = np.flatnonzero(counts <= pnt_rhs_upper(n))
        if bad.size:
            return PntCheck(start, stop, first_failure=int(n[bad[0]]))
    return PntCheck(start, stop)
