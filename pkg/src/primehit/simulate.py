"""Seeded Monte Carlo estimate of the first time a running dice sum is prime.

Episodes are simulated in vectorised batches: every live episode rolls once
per step, and those whose sum lands on a prime are retired with tau equal to
the step index. Only per-step retirement counts are kept, so the mean,
variance and histogram come out of exact integer moments.

Reproducibility: ``np.random.SeedSequence(seed).spawn(workers)`` gives one
independent PCG64 stream per worker; worker ``w`` runs
``reps // workers`` episodes (plus one if ``w < reps % workers``) in batches
of ``batch`` episodes. The summary is therefore a function of
``(reps, seed, workers, batch)`` only.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from primehit.errors import CapOverflowError, PreconditionError, SizingError
from primehit.primes import PrimeTable

DEFAULT_CAP = 10_000
DEFAULT_HIST_CAP = 100
DEFAULT_BATCH = 1 << 20


def roll_until_prime(
    rolls: Iterable[int], sides: int, primes: PrimeTable, cap: int = DEFAULT_CAP
) -> Optional[int]:
    """Feed ``rolls`` into a running sum and return the first step at which it is prime.

    Returns ``None`` if the cap is exceeded or the rolls run out first.
    """
    if sides < 2:
        raise PreconditionError(f"sides must be >= 2, got {sides}")
    if cap * sides > primes.limit:
        raise SizingError(f"cap={cap} with sides={sides} overruns the prime table", cap * sides)
    total = 0
    for step, r in enumerate(rolls, start=1):
        if step > cap:
            return None
        if not 1 <= r <= sides:
            raise PreconditionError(f"roll {r} is not a face of a {sides}-sided die")
        total += r
        if primes.is_prime_bits[total]:
            return step
    return None


def rng_rolls(rng: np.random.Generator, sides: int, chunk: int = 64):
    """Endless iterator of fair die rolls drawn from ``rng``."""
    while True:
        yield from rng.integers(1, sides + 1, size=chunk).tolist()


def _episode_counts(rng, n: int, sides: int, is_prime: np.ndarray, cap: int) -> np.ndarray:
    """Retirement counts per step for ``n`` fresh episodes; index 0 holds overflow."""
    counts = np.zeros(cap + 1, dtype=np.int64)
    sums = np.zeros(n, dtype=np.int64)
    step = 0
    while sums.size and step < cap:
        step += 1
        sums += rng.integers(1, sides + 1, size=sums.size)
        hit = is_prime[sums]
        counts[step] = np.count_nonzero(hit)
        sums = sums[~hit]
    counts[0] = sums.size
    return counts


def _worker(args) -> np.ndarray:
    seed_seq, n, sides, is_prime, cap, batch = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    counts = np.zeros(cap + 1, dtype=np.int64)
    done = 0
    while done < n:
        m = min(batch, n - done)
        counts += _episode_counts(rng, m, sides, is_prime, cap)
        done += m
    return counts


@dataclass
class SimulationSummary:
    reps: int
    seed: int
    workers: int
    sides: int
    cap: int
    mean: float
    variance: float
    max: int
    histogram: list[int]
    histogram_overflow: int
    cap_overflow: int = 0
    degenerate: bool = False
    tau_sum: int = 0
    tau_sq_sum: int = 0
    notes: list[str] = field(default_factory=list)

    def survival(self, k: int) -> float:
        """Empirical P(tau >= k) for 1 <= k <= len(histogram) + 1."""
        if not 1 <= k <= len(self.histogram) + 1:
            raise IndexError(f"k={k} outside the histogram range")
        return (self.reps - sum(self.histogram[: k - 1])) / self.reps


def summarize(
    counts: np.ndarray, reps: int, seed: int, workers: int, sides: int, hist_cap: int
) -> SimulationSummary:
    """Fold per-step retirement counts (index 0 = cap overflow) into a summary."""
    cap = len(counts) - 1
    steps = np.arange(cap + 1, dtype=object)
    c = counts.astype(object)
    absorbed = int(c[1:].sum())
    tau_sum = int((steps[1:] * c[1:]).sum())
    tau_sq_sum = int((steps[1:] ** 2 * c[1:]).sum())
    nz = np.flatnonzero(counts[1:])
    tmax = int(nz[-1]) + 1 if nz.size else 0

    notes = []
    if absorbed == 0:
        raise CapOverflowError(f"all {reps} episodes exceeded the cap of {cap} rolls")
    mean = Fraction(tau_sum, absorbed)
    if absorbed > 1:
        var = Fraction(absorbed * tau_sq_sum - tau_sum**2, absorbed * (absorbed - 1))
        degenerate = False
    else:
        var = Fraction(0)
        degenerate = True
        notes.append("single episode: unbiased variance undefined, reported as 0")
    if counts[0]:
        notes.append(f"{int(counts[0])} episodes exceeded the cap of {cap} rolls")

    hist = [int(x) for x in counts[1 : hist_cap + 1]]
    hist += [0] * (hist_cap - len(hist))
    overflow = reps - sum(hist)
    return SimulationSummary(
        reps=reps,
        seed=seed,
        workers=workers,
        sides=sides,
        cap=cap,
        mean=float(mean),
        variance=float(var),
        max=tmax,
        histogram=hist,
        histogram_overflow=overflow,
        cap_overflow=int(counts[0]),
        degenerate=degenerate,
        tau_sum=tau_sum,
        tau_sq_sum=tau_sq_sum,
        notes=notes,
    )


def run_simulation(
    reps: int,
    seed: int,
    sides: int = 6,
    primes: Optional[PrimeTable] = None,
    workers: int = 1,
    cap: int = DEFAULT_CAP,
    hist_cap: int = DEFAULT_HIST_CAP,
    batch: int = DEFAULT_BATCH,
    strict: bool = True,
) -> SimulationSummary:
    """Simulate ``reps`` independent episodes and summarise tau.

    With ``strict`` set, any episode that outlives ``cap`` rolls raises
    :class:`CapOverflowError`; at the default cap this has negligible
    probability and signals a bug.
    """
    if reps < 1:
        raise PreconditionError(f"reps must be >= 1, got {reps}")
    if workers < 1:
        raise PreconditionError(f"workers must be >= 1, got {workers}")
    if sides < 2:
        raise PreconditionError(f"sides must be >= 2, got {sides}")
    if not 0 <= seed < 2**64:
        raise PreconditionError("seed must be a 64-bit unsigned integer")
    if primes is None:
        raise SizingError("run_simulation needs a prime table", cap * sides)
    if cap * sides > primes.limit:
        raise SizingError(f"cap={cap} with sides={sides} overruns the prime table", cap * sides)

    is_prime = np.ascontiguousarray(primes.is_prime_bits[: cap * sides + 1])
    streams = np.random.SeedSequence(seed).spawn(workers)
    base, extra = divmod(reps, workers)
    jobs = [
        (streams[w], base + (w < extra), sides, is_prime, cap, batch) for w in range(workers)
    ]
    if workers == 1:
        parts = [_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_worker, jobs))
    counts = np.sum(parts, axis=0)

    summary = summarize(counts, reps, seed, workers, sides, hist_cap)
    if strict and summary.cap_overflow:
        raise CapOverflowError(
            f"{summary.cap_overflow} of {reps} episodes exceeded the cap of {cap} rolls"
        )
    return summary
