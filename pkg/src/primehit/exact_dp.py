"""Exact dynamic program for the first time a running dice sum hits a target set.

Layer ``k`` holds, for every non-target sum ``n`` in ``[k, sides*k]``, the
integer count of roll sequences of length ``k`` that end at ``n`` without any
partial sum landing in the target set. Dividing by ``sides**k`` gives the
probability p(k, n). Counts are plain Python ints, so nothing is ever
rounded; rationals are only formed when reporting.

Since every episode survives its zeroth step, P(tau >= k) is the total mass
of layer ``k - 1``. In particular P(tau >= 1) = 1 and P(tau >= 2) is the
fraction of non-target faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterator, Optional, Union

from primehit.errors import PreconditionError, SizingError
from primehit.primes import PrimeTable

PRIMES = "primes"


@dataclass(frozen=True)
class DpConfig:
    sides: int = 6
    k_max: int = 1000
    target: Union[str, FrozenSet[int]] = PRIMES

    def __post_init__(self):
        if self.sides < 2:
            raise PreconditionError(f"sides must be >= 2, got {self.sides}")
        if self.k_max < 1:
            raise PreconditionError(f"k_max must be >= 1, got {self.k_max}")
        if isinstance(self.target, str):
            if self.target != PRIMES:
                raise PreconditionError(f"unknown target {self.target!r}")
        else:
            members = frozenset(int(m) for m in self.target)
            if any(m < 2 for m in members):
                raise PreconditionError("explicit target members must all be >= 2")
            object.__setattr__(self, "target", members)

    @property
    def targets_primes(self) -> bool:
        return self.target == PRIMES

    @property
    def required_limit(self) -> int:
        """Smallest prime-table limit that covers every reachable state and successor."""
        return self.sides * self.k_max + self.sides


@dataclass
class DpLayer:
    """Survivor counts after ``k`` rolls, densely indexed from ``n = k``.

    ``numerators[i]`` is the count for sum ``k + i``; target sums hold 0.
    ``absorbed`` is the cumulative number of sequences (scaled to
    ``sides**k``) that have already hit the target.
    """

    k: int
    sides: int
    numerators: list
    absorbed: int = 0

    @property
    def lo(self) -> int:
        return self.k

    @property
    def hi(self) -> int:
        return self.sides * self.k

    @property
    def denominator(self) -> int:
        return self.sides**self.k

    def get(self, n: int) -> int:
        if self.lo <= n <= self.hi:
            return self.numerators[n - self.lo]
        return 0

    def items(self) -> Iterator[tuple[int, int]]:
        """Yield ``(n, count)`` for reachable states (count > 0)."""
        for i, c in enumerate(self.numerators):
            if c:
                yield self.lo + i, c

    def as_dict(self) -> dict[int, int]:
        return dict(self.items())

    def probability(self, n: int) -> Fraction:
        return Fraction(self.get(n), self.denominator)

    def total(self) -> int:
        return sum(self.numerators)


@dataclass
class SurvivalSeries:
    """P(tau >= k) for k = 1..K and the truncated moment sums.

    ``numerators[k-1] / sides**(k-1)`` equals P(tau >= k).
    """

    sides: int
    k_max: int
    numerators: list
    E_K: Fraction
    E2_K: Fraction
    target: Union[str, FrozenSet[int]] = PRIMES
    Var_K: Fraction = field(init=False)

    def __post_init__(self):
        self.Var_K = self.E2_K - self.E_K * self.E_K

    @property
    def targets_primes(self) -> bool:
        return self.target == PRIMES

    @property
    def p(self) -> list[Fraction]:
        return [Fraction(c, self.sides**j) for j, c in enumerate(self.numerators)]

    def survival_at(self, k: int) -> Fraction:
        """P(tau >= k), 1 <= k <= K."""
        if not 1 <= k <= self.k_max:
            raise IndexError(f"k={k} outside 1..{self.k_max}")
        return Fraction(self.numerators[k - 1], self.sides ** (k - 1))


def _target_mask(config: DpConfig, primes: Optional[PrimeTable], upto: int) -> list[bool]:
    if config.targets_primes:
        if primes is None:
            raise SizingError("the primes target needs a prime table", config.required_limit)
        if primes.limit < config.required_limit:
            raise SizingError(
                f"prime table limit {primes.limit} too small for sides={config.sides}, "
                f"k_max={config.k_max}",
                config.required_limit,
            )
        return primes.is_prime_bits[: upto + 1].tolist()
    mask = [False] * (upto + 1)
    for m in config.target:
        if m <= upto:
            mask[m] = True
    return mask


def dp_init(config: DpConfig, primes: Optional[PrimeTable] = None, *, _mask=None) -> DpLayer:
    """Layer ``k = 1``: one sequence per non-target face."""
    mask = _mask if _mask is not None else _target_mask(config, primes, config.required_limit)
    nums = [0 if mask[n] else 1 for n in range(1, config.sides + 1)]
    return DpLayer(k=1, sides=config.sides, numerators=nums, absorbed=config.sides - sum(nums))


def dp_step(
    layer: DpLayer, config: DpConfig, primes: Optional[PrimeTable] = None, *, _mask=None
) -> DpLayer:
    """Advance one roll: count[k][n] = sum of count[k-1][n-i] over faces i."""
    s = config.sides
    if layer.sides != s:
        raise PreconditionError("layer and config disagree on the number of sides")
    k = layer.k + 1
    mask = _mask if _mask is not None else _target_mask(config, primes, s * k)
    if len(mask) <= s * k:
        raise SizingError(f"target mask too short for layer {k}", s * k)

    prev = layer.numerators
    prev_lo = layer.k
    # prefix[j] = sum(prev[:j])
    prefix = [0] * (len(prev) + 1)
    acc = 0
    for j, c in enumerate(prev):
        acc += c
        prefix[j + 1] = acc

    nums = [0] * (s * k - k + 1)
    absorbed_now = 0
    last = len(prev)
    for n in range(k, s * k + 1):
        # predecessors n-s .. n-1, clipped to the previous layer's support
        a = max(n - s - prev_lo, 0)
        b = min(n - 1 - prev_lo + 1, last)
        w = prefix[b] - prefix[a]
        if mask[n]:
            absorbed_now += w
        else:
            nums[n - k] = w

    absorbed = layer.absorbed * s + absorbed_now
    if sum(nums) + absorbed != s**k:
        raise RuntimeError(f"mass conservation violated at layer {k}")
    return DpLayer(k=k, sides=s, numerators=nums, absorbed=absorbed)


def survival(layer: DpLayer) -> Fraction:
    """Probability that the first ``layer.k`` partial sums all avoid the target.

    This is P(tau > k) = P(tau >= k + 1).
    """
    return Fraction(layer.total(), layer.denominator)


def iter_layers(config: DpConfig, primes: Optional[PrimeTable] = None) -> Iterator[DpLayer]:
    """Yield layers ``1, 2, ..., config.k_max``."""
    mask = _target_mask(config, primes, config.required_limit)
    layer = dp_init(config, _mask=mask)
    yield layer
    for _ in range(config.k_max - 1):
        layer = dp_step(layer, config, _mask=mask)
        yield layer


def run_dp(config: DpConfig, primes: Optional[PrimeTable] = None) -> SurvivalSeries:
    """Exact P(tau >= k) for k = 1..K together with E_K, E2_K and Var_K.

    E_K = sum_k P(tau >= k) and E2_K = sum_k (2k - 1) P(tau >= k), k = 1..K.
    """
    s, K = config.sides, config.k_max
    numerators = [1]  # layer 0: the empty sequence
    if K > 1:
        truncated = DpConfig(sides=s, k_max=K - 1, target=config.target)
        mask = _target_mask(config, primes, config.required_limit)
        layer = dp_init(truncated, _mask=mask)
        numerators.append(layer.total())
        for _ in range(K - 2):
            layer = dp_step(layer, truncated, _mask=mask)
            numerators.append(layer.total())
    elif config.targets_primes:
        _target_mask(config, primes, 0)  # sizing check only

    # Horner accumulation over the common denominator sides**(K-1)
    e_num = 0
    e2_num = 0
    for j, c in enumerate(numerators):
        e_num = e_num * s + c
        e2_num = e2_num * s + (2 * j + 1) * c
    denom = s ** (K - 1)
    return SurvivalSeries(
        sides=s,
        k_max=K,
        numerators=numerators,
        E_K=Fraction(e_num, denom),
        E2_K=Fraction(e2_num, denom),
        target=config.target,
    )


def render_decimal(x: Fraction, digits: int, rounding: str = "nearest") -> str:
    """Decimal string of ``x`` with exactly ``digits`` fractional digits.

    ``rounding`` is ``"nearest"`` (ties to even), ``"up"`` (toward +inf) or
    ``"down"`` (toward -inf).
    """
    if digits < 1:
        raise PreconditionError(f"digits must be >= 1, got {digits}")
    x = Fraction(x)
    scaled = x * 10**digits
    q, r = divmod(scaled.numerator, scaled.denominator)  # floor
    if rounding == "down":
        m = q
    elif rounding == "up":
        m = q + (r != 0)
    elif rounding == "nearest":
        twice = 2 * r
        if twice > scaled.denominator or (twice == scaled.denominator and q % 2):
            m = q + 1
        else:
            m = q
    else:
        raise PreconditionError(f"unknown rounding mode {rounding!r}")
    sign = "-" if m < 0 else ""
    whole, frac = divmod(abs(m), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
