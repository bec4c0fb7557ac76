"""Verification sweeps backing the certified results.

Each sweep returns a :class:`SweepResult`; a failing sweep names its first
witness. The brute-force oracle here deliberately shares no code with the
dynamic program or the sieve: it enumerates every roll sequence and tests
primality by trial division.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from primehit.exact_dp import DpConfig, iter_layers
from primehit.primes import PrimeTable, verify_pnt_lower_bound
from primehit.tail_bounds import MIN_K, scan_argmax, scan_halving


@dataclass
class SweepResult:
    name: str
    passed: bool
    detail: str
    witness: Optional[tuple] = None


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def enumerate_survivors(k: int, sides: int = 6) -> dict[int, int]:
    """Count length-``k`` roll sequences whose partial sums are all non-prime, by final sum."""
    faces = np.arange(1, sides + 1, dtype=np.int16)
    grids = np.meshgrid(*([faces] * k), indexing="ij")
    seqs = np.stack([g.ravel() for g in grids], axis=1)
    partial = np.cumsum(seqs, axis=1)
    composite = np.array([not is_prime_trial(n) for n in range(sides * k + 1)])
    alive = composite[partial].all(axis=1)
    finals = np.bincount(partial[alive, -1], minlength=sides * k + 1)
    return {n: int(c) for n, c in enumerate(finals) if c}


def oracle_sweep(primes: PrimeTable, k_max: int = 8, sides: int = 6) -> SweepResult:
    """DP layer counts must equal brute-force enumeration for k = 1..k_max."""
    config = DpConfig(sides=sides, k_max=k_max)
    for layer in iter_layers(config, primes):
        expected = enumerate_survivors(layer.k, sides)
        got = layer.as_dict()
        if got != expected:
            bad = min(set(got) ^ set(expected) or {n for n in got if got[n] != expected[n]})
            return SweepResult(
                "dp_vs_enumeration",
                False,
                f"layer {layer.k} differs from enumeration at n={bad}",
                (layer.k, bad),
            )
    return SweepResult(
        "dp_vs_enumeration", True, f"layers 1..{k_max} match {sides}^k enumeration exactly"
    )


def proposition_sweep(primes: PrimeTable, k_max: int = 30) -> SweepResult:
    """p(k, n) < (1/3)(5/6)^pi_strict(n) for every stored state with k <= k_max.

    Compared in integers: count / 6^k < 5^pi / (3 * 6^pi).
    """
    config = DpConfig(sides=6, k_max=k_max)
    states = 0
    for layer in iter_layers(config, primes):
        denom = 6**layer.k
        for n, count in layer.items():
            pi = primes.pi_strict(n)
            if not 3 * count * 6**pi < denom * 5**pi:
                return SweepResult(
                    "proposition",
                    False,
                    f"p({layer.k},{n}) = {count}/6^{layer.k} violates the bound",
                    (layer.k, n),
                )
            states += 1
    return SweepResult("proposition", True, f"{states} states with k <= {k_max} satisfy the bound")


def pnt_sweep(primes: PrimeTable, start: int = MIN_K + 1, stop: Optional[int] = None) -> SweepResult:
    stop = primes.limit if stop is None else stop
    check = verify_pnt_lower_bound(primes, start, stop)
    if check.passed:
        return SweepResult("pnt_lower_bound", True, f"pi_strict(n) > 0.9 n/ln n on [{start}, {stop}]")
    return SweepResult(
        "pnt_lower_bound",
        False,
        f"pi_strict(n) > 0.9 n/ln n fails at n={check.first_failure}",
        (check.first_failure,),
    )


def tail_scan_sweep(stop: int = 100_000) -> SweepResult:
    """Argmax of f at 1050 and g at 1051, and the halving ratios after them."""
    problems = []
    for kind, expected in (("f", 1050), ("g", 1051)):
        scan = scan_argmax(kind, MIN_K, stop)
        if scan.argmax != expected or not scan.unique or not scan.beyond_window_ok:
            problems.append(f"{kind}: argmax {scan.argmax} unique={scan.unique}")
        halving = scan_halving(kind, expected, stop)
        if not halving.passed:
            problems.append(f"{kind}: halving fails at n={halving.first_failure}")
    if problems:
        return SweepResult("tail_scans", False, "; ".join(problems))
    return SweepResult(
        "tail_scans",
        True,
        f"unique argmax f=1050, g=1051 on [1000, {stop}]; halving holds up to {stop}",
    )


def run_verification(
    primes: PrimeTable,
    proposition_k: int = 30,
    oracle_k: int = 8,
    scan_stop: int = 100_000,
) -> list[SweepResult]:
    return [
        proposition_sweep(primes, proposition_k),
        pnt_sweep(primes),
        tail_scan_sweep(scan_stop),
        oracle_sweep(primes, oracle_k),
    ]
