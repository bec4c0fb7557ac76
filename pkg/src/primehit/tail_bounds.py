"""Certified upper bounds on the truncation remainders of the moment series.

Every survival probability beyond depth K is dominated through the bound

    p(k, n) < (1/3) * (5/6) ** pi_strict(n)          (any k, non-prime n)

and, for n >= 1000, pi_strict(n) > 0.9 n / ln n, which turns it into the
smooth majorant ``b(n) = (1/3) * (5/6) ** (0.9 n / ln n)``.

With P(tau >= k) equal to the mass of DP layer k - 1, the remainders are

    R_K  = sum_{j >= K} mass(j)            <= sum_{n >= K} (n - K + 1) b(n)
    R2_K = sum_{j >= K} (2j + 1) mass(j)   <= sum_{n >= K} ((n + 1)^2 - K^2) b(n)

since layer j only occupies sums n >= j. Both sums are evaluated with
outward-rounded interval arithmetic: term by term up to ``n_cut``, then
over doubling blocks until the geometric leftover is negligible.

All arithmetic goes through ``mpmath.libmp`` interval primitives with an
explicit precision, so these functions hold no global state and are safe to
call from several threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from mpmath import libmp, mp
from mpmath.libmp import (
    from_int,
    mpf_add,
    mpi_div,
    mpi_exp,
    mpi_log,
    mpi_mul,
    mpi_pow_int,
)

from primehit.errors import (
    CertificationUnavailable,
    PreconditionError,
    TailCertificationError,
)
from primehit.exact_dp import SurvivalSeries
from primehit.primes import PrimeTable, verify_pnt_lower_bound

DEFAULT_PREC = 96  # bits
DEFAULT_N_CUT = 200_000
MIN_K = 1000
BLOCK_STOP = Fraction(1, 10**30)
MAX_BLOCKS = 256


def _pt(n: int):
    v = from_int(n)
    return (v, v)


@lru_cache(maxsize=None)
def _constants(prec: int):
    ln_five_sixths = mpi_log(mpi_div(_pt(5), _pt(6), prec), prec)
    nine_tenths = mpi_div(_pt(9), _pt(10), prec)
    third = mpi_div(_pt(1), _pt(3), prec)
    five_sixths = mpi_div(_pt(5), _pt(6), prec)
    return ln_five_sixths, nine_tenths, third, five_sixths


def _pnt_majorant(x, prec: int):
    """Interval for (1/3) * (5/6) ** (0.9 * x / ln x), ``x`` an interval with x > 1."""
    ln56, c, third, _ = _constants(prec)
    expo = mpi_div(mpi_mul(c, x, prec), mpi_log(x, prec), prec)
    return mpi_mul(third, mpi_exp(mpi_mul(expo, ln56, prec), prec), prec)


@lru_cache(maxsize=None)
def _base(n: int, prec: int):
    return _pnt_majorant(_pt(n), prec)


@lru_cache(maxsize=4096)
def _base_pi(count: int, prec: int):
    _, _, third, five_sixths = _constants(prec)
    return mpi_mul(third, mpi_pow_int(five_sixths, count, prec), prec)


def _to_fraction(raw) -> Fraction:
    p, q = libmp.to_rational(raw)
    return Fraction(p, q)


def _to_mpf(raw):
    return mp.make_mpf(raw)


# ---------------------------------------------------------------------------
# Proposition bound and the f / g majorants


def proposition_bound(n: int, primes: PrimeTable) -> Fraction:
    """Exact (1/3) * (5/6) ** pi_strict(n)."""
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    return Fraction(1, 3) * Fraction(5, 6) ** primes.pi_strict(n)


def _weight_f(n: int, K: int) -> int:
    return n - K


def _weight_g(n: int, K: int) -> int:
    return n * n - K * K


_WEIGHTS = {"f": _weight_f, "g": _weight_g}


def tail_interval(kind: str, n: int, K: int = MIN_K, prec: int = DEFAULT_PREC):
    """Enclosing interval (raw libmp pair) of f_K(n) or g_K(n)."""
    w = _WEIGHTS[kind](n, K)
    return mpi_mul(_pt(w), _base(n, prec), prec)


def f_tail(n: int, K: int = MIN_K, prec: int = DEFAULT_PREC):
    """Upward-rounded (n - K) * (1/3) * (5/6) ** (0.9 n / ln n)."""
    if n < K:
        raise PreconditionError(f"f is defined for n >= {K}, got {n}")
    return _to_mpf(tail_interval("f", n, K, prec)[1])


def g_tail(n: int, K: int = MIN_K, prec: int = DEFAULT_PREC):
    """Upward-rounded (n^2 - K^2) * (1/3) * (5/6) ** (0.9 n / ln n)."""
    if n < K:
        raise PreconditionError(f"g is defined for n >= {K}, got {n}")
    return _to_mpf(tail_interval("g", n, K, prec)[1])


# ---------------------------------------------------------------------------
# Two-phase summation


@dataclass(frozen=True)
class TailSum:
    """Upper bound on one remainder, split by phase."""

    upper: Fraction
    exact_part: Fraction
    block_part: Fraction
    n_cut: int
    blocks: int


def _r_weight(n: int, K: int) -> int:
    return n - K + 1


def _r2_weight(n: int, K: int) -> int:
    return (n + 1) ** 2 - K * K


@lru_cache(maxsize=64)
def _exact_phase(K: int, n_cut: int, prec: int, primes: Optional[PrimeTable]):
    """Upward-rounded sums of both weighted series over ``[K, n_cut]``.

    With ``primes`` given, b(n) is replaced by the sharper (1/3)(5/6)^pi_strict(n).
    """
    zero = libmp.fzero
    s_r = s_r2 = zero
    for n in range(K, n_cut + 1):
        b = _base_pi(primes.pi_strict(n), prec) if primes is not None else _base(n, prec)
        s_r = mpf_add(s_r, mpi_mul(_pt(_r_weight(n, K)), b, prec)[1], prec, "u")
        s_r2 = mpf_add(s_r2, mpi_mul(_pt(_r2_weight(n, K)), b, prec)[1], prec, "u")
    return s_r, s_r2


def _block_bound(L: int, K: int, weight, prec: int):
    """Interval majorant for sum_{n in [L, 2L)} weight(n) b(n).

    n / ln n is increasing for n >= 3, so over the block the exponent is at
    least 0.9 L / ln(2L); the weight is largest at the right end.
    """
    return mpi_mul(_pt(L * weight(2 * L - 1, K)), _block_majorant(L, prec), prec)


def _block_majorant(L: int, prec: int):
    """Interval for (1/3) * (5/6) ** (0.9 L / ln 2L)."""
    ln56, c, third, _ = _constants(prec)
    expo = mpi_div(mpi_mul(c, _pt(L), prec), mpi_log(_pt(2 * L), prec), prec)
    return mpi_mul(third, mpi_exp(mpi_mul(expo, ln56, prec), prec), prec)


def _block_phase(K: int, n_cut: int, weight, prec: int) -> tuple[Fraction, int]:
    """Sum of doubling-block majorants from ``n_cut + 1`` to infinity.

    Block j covers [L_j, 2 L_j) with L_j = 2^j (n_cut + 1). The ratio of
    consecutive block majorants is 2 * (weight ratio) * (5/6)^(0.9 D_j) where
    the weight ratio decreases in L and D_j = L ln L / (ln 2L ln 4L) increases,
    so once one ratio is <= 1/2 all later ones are too and the rest of the
    series is at most the last block summed so far.
    """
    total = Fraction(0)
    L = n_cut + 1
    cur = _block_bound(L, K, weight, prec)
    for j in range(MAX_BLOCKS):
        nxt = _block_bound(2 * L, K, weight, prec)
        cur_hi = _to_fraction(cur[1])
        total += cur_hi
        cur_lo = _to_fraction(cur[0])
        if cur_hi < BLOCK_STOP and cur_lo > 0 and _to_fraction(nxt[1]) * 2 <= cur_lo:
            return total + cur_hi, j + 1
        L *= 2
        cur = nxt
    raise TailCertificationError(
        f"block tail did not certify convergence within {MAX_BLOCKS} blocks (n_cut={n_cut})"
    )


def _check_k(K: int, n_cut: int) -> None:
    if K < MIN_K:
        raise PreconditionError(
            f"tail bounds need K >= {MIN_K} (the 0.9 n/ln n premise covers n >= 1000), got {K}"
        )
    if n_cut < K:
        raise PreconditionError(f"n_cut ({n_cut}) must be >= K ({K})")


def _tail_sum(kind: str, K: int, primes, n_cut: int, prec: int, sharp: bool) -> TailSum:
    _check_k(K, n_cut)
    if sharp:
        if primes is None or primes.limit < n_cut:
            raise PreconditionError("sharp mode needs a prime table covering [K, n_cut]")
    s_r, s_r2 = _exact_phase(K, n_cut, prec, primes if sharp else None)
    exact = _to_fraction(s_r if kind == "r" else s_r2)
    weight = _r_weight if kind == "r" else _r2_weight
    blocks, count = _block_phase(K, n_cut, weight, prec)
    return TailSum(upper=exact + blocks, exact_part=exact, block_part=blocks, n_cut=n_cut, blocks=count)


def bound_r(
    K: int,
    primes: Optional[PrimeTable] = None,
    n_cut: int = DEFAULT_N_CUT,
    prec: int = DEFAULT_PREC,
    sharp: bool = False,
) -> Fraction:
    """Certified upper bound on R_K = sum_{k > K} P(tau >= k).

    The result is an exact dyadic rational that is >= the true remainder.
    """
    return _tail_sum("r", K, primes, n_cut, prec, sharp).upper


def bound_r2(
    K: int,
    primes: Optional[PrimeTable] = None,
    n_cut: int = DEFAULT_N_CUT,
    prec: int = DEFAULT_PREC,
    sharp: bool = False,
) -> Fraction:
    """Certified upper bound on R2_K = sum_{k > K} (2k - 1) P(tau >= k)."""
    return _tail_sum("r2", K, primes, n_cut, prec, sharp).upper


def bound_rv(series: SurvivalSeries, r_upper, r2_upper) -> Fraction:
    """Upper bound on |RV_K| where RV_K = R2_K - 2 E_K R_K - R_K^2.

    With 0 <= R_K <= r and 0 <= R2_K <= r2, RV_K lies in
    [-(2 E_K r + r^2), r2]. Computed exactly.
    """
    r = Fraction(r_upper)
    r2 = Fraction(r2_upper)
    if r < 0 or r2 < 0:
        raise PreconditionError("remainder bounds must be non-negative")
    return max(r2, 2 * series.E_K * r + r * r)


# ---------------------------------------------------------------------------
# Report


@dataclass
class TailReport:
    K: int
    R_upper: Fraction
    R2_upper: Fraction
    RV_abs_upper: Fraction
    E_interval: tuple[Fraction, Fraction]
    Var_interval: tuple[Fraction, Fraction]
    assumptions: list[str] = field(default_factory=list)
    n_cut: int = DEFAULT_N_CUT
    prec: int = DEFAULT_PREC
    sharp: bool = False
    pnt_verified: tuple[int, int] = (0, 0)


def certify(
    series: SurvivalSeries,
    K: int,
    primes: PrimeTable,
    n_cut: int = DEFAULT_N_CUT,
    prec: int = DEFAULT_PREC,
    sharp: bool = False,
) -> TailReport:
    """Enclosing intervals for E(tau) and Var(tau) from a depth-K series."""
    if not series.targets_primes:
        raise CertificationUnavailable("tail certification unavailable for custom targets")
    if series.sides != 6:
        raise CertificationUnavailable(
            f"tail certification is only available for 6-sided dice, got sides={series.sides}"
        )
    if series.k_max != K:
        raise PreconditionError(f"series depth {series.k_max} does not match K={K}")
    _check_k(K, n_cut)
    if primes.limit < K:
        raise PreconditionError(f"prime table limit {primes.limit} is below K={K}")

    pnt = verify_pnt_lower_bound(primes, K, primes.limit)
    if not pnt.passed:
        raise TailCertificationError(
            f"pi_strict(n) > 0.9 n/ln n fails at n={pnt.first_failure}"
        )

    r = bound_r(K, primes, n_cut, prec, sharp)
    r2 = bound_r2(K, primes, n_cut, prec, sharp)
    rv = bound_rv(series, r, r2)
    assumptions = [
        f"pi_strict(n) > 0.9*n/ln(n) for all n > {primes.limit} "
        f"(prime number theorem input; sieve-verified on [{K}, {primes.limit}])"
    ]
    return TailReport(
        K=K,
        R_upper=r,
        R2_upper=r2,
        RV_abs_upper=rv,
        E_interval=(series.E_K, series.E_K + r),
        Var_interval=(series.Var_K - rv, series.Var_K + rv),
        assumptions=assumptions,
        n_cut=n_cut,
        prec=prec,
        sharp=sharp,
        pnt_verified=(K, primes.limit),
    )


# ---------------------------------------------------------------------------
# Scans of f and g


@dataclass(frozen=True)
class ArgmaxScan:
    kind: str
    start: int
    stop: int
    argmax: int
    unique: bool
    peak: Fraction  # lower end of the enclosure at argmax
    runner_up: Fraction  # largest upper end among all other n in the window
    beyond_window_ok: bool


def scan_argmax(
    kind: str, start: int = MIN_K, stop: int = 100_000, K: int = MIN_K, prec: int = DEFAULT_PREC
) -> ArgmaxScan:
    """Exhaustive certified argmax of f_K or g_K over integers in ``[start, stop]``.

    Uniqueness means the lower enclosure at the argmax beats every other upper
    enclosure in the window. ``beyond_window_ok`` additionally shows through
    decaying doubling blocks that nothing past ``stop`` comes close.
    """
    if kind not in _WEIGHTS:
        raise PreconditionError(f"kind must be 'f' or 'g', got {kind!r}")
    if not K <= start <= stop:
        raise PreconditionError(f"need {K} <= start <= stop")
    best_n, best_lo, best_hi = start, None, None
    uppers = {}
    for n in range(start, stop + 1):
        iv_ = tail_interval(kind, n, K, prec)
        uppers[n] = iv_[1]
        if best_hi is None or libmp.mpf_gt(iv_[1], best_hi):
            best_n, best_lo, best_hi = n, iv_[0], iv_[1]
    runner = max((_to_fraction(u) for n, u in uppers.items() if n != best_n), default=Fraction(0))
    peak = _to_fraction(best_lo)

    weight = _WEIGHTS[kind]
    L = stop + 1
    cur = _block_max(L, K, weight, prec)
    nxt = _block_max(2 * L, K, weight, prec)
    # block maxima decay monotonically once their ratio drops below 1
    beyond = _to_fraction(cur[1]) < peak and _to_fraction(nxt[1]) < _to_fraction(cur[0])
    return ArgmaxScan(kind, start, stop, best_n, peak > runner, peak, runner, beyond)


def _block_max(L: int, K: int, weight, prec: int):
    """Interval majorant for max_{n in [L, 2L)} weight(n) b(n)."""
    return mpi_mul(_pt(weight(2 * L, K)), _block_majorant(L, prec), prec)


@dataclass(frozen=True)
class HalvingScan:
    kind: str
    start: int
    stop: int
    first_failure: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.first_failure is None


def _shifts(n: int, prec: int) -> set[int]:
    """Candidate values of ceil(13 ln n), both if the enclosure straddles an integer."""
    lo, hi = mpi_mul(_pt(13), mpi_log(_pt(n), prec), prec)
    return {math.ceil(_to_fraction(lo)), math.ceil(_to_fraction(hi))}


def scan_halving(
    kind: str, start: int, stop: int = 100_000, K: int = MIN_K, prec: int = DEFAULT_PREC
) -> HalvingScan:
    """Check h(n + ceil(13 ln n)) < h(n) / 2 for every n in ``[start, stop]``."""
    if kind not in _WEIGHTS:
        raise PreconditionError(f"kind must be 'f' or 'g', got {kind!r}")
    if not K < start <= stop:
        raise PreconditionError(f"need {K} < start <= stop")
    two = from_int(2)
    for n in range(start, stop + 1):
        here_lo = tail_interval(kind, n, K, prec)[0]
        for d in _shifts(n, prec):
            there_hi = tail_interval(kind, n + d, K, prec)[1]
            if not libmp.mpf_lt(libmp.mpf_mul(two, there_hi), here_lo):
                return HalvingScan(kind, start, stop, first_failure=n)
    return HalvingScan(kind, start, stop)
