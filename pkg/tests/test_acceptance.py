"""Exit criteria for the paper instance: 6-sided die, primes target, K = 1000.

Each test records a PASS/FAIL line, printed in the terminal summary under
"acceptance criteria".
"""

import math
import time
from fractions import Fraction

from primehit.checks import enumerate_survivors, oracle_sweep, proposition_sweep
from primehit.exact_dp import DpConfig, render_decimal, run_dp
from primehit.primes import build_prime_table, verify_pnt_lower_bound
from primehit.simulate import run_simulation
from primehit.tail_bounds import bound_r, bound_r2, bound_rv, certify, scan_argmax


def test_ac01_exact_expectation(big_table, criterion):
    t = time.perf_counter()
    series = run_dp(DpConfig(6, 1000), big_table)
    elapsed = time.perf_counter() - t
    got = render_decimal(series.E_K, 15)
    ok = got == "2.428497913693504" and elapsed < 60
    criterion("AC1 E_1000", ok, f"{got} in {elapsed:.1f}s")
    assert got == "2.428497913693504"
    assert elapsed < 60


def test_ac02_exact_variance(series_1000, criterion):
    got = render_decimal(series_1000.Var_K, 15)
    criterion("AC2 Var_1000", got == "6.242778668279075", got)
    assert got == "6.242778668279075"


def test_ac03a_bound_r(criterion):
    r = bound_r(1000)
    ok = r <= Fraction(7, 10**8)
    criterion("AC3a R_1000 <= 7e-8", ok, f"{float(r):.6e}")
    assert ok


def test_ac03b_bound_r2(big_table, criterion):
    r2 = bound_r2(1000)
    ok = r2 <= Fraction(31, 10**6)
    # informational only: the exact-pi variant is reported, not judged
    sharp = bound_r2(1000, big_table, sharp=True)
    criterion(
        "AC3b R2_1000 <= 3.1e-5",
        ok,
        f"{float(r2):.6e} (0.9n/ln n majorant); exact-pi mode {float(sharp):.3e}",
    )
    assert ok


def test_ac03c_bound_rv(series_1000, criterion):
    rv = bound_rv(series_1000, bound_r(1000), bound_r2(1000))
    ok = rv < Fraction(1, 10**4)
    criterion("AC3c |RV_1000| < 1e-4", ok, f"{float(rv):.6e}")
    assert ok


def test_ac04_certified_intervals(series_1000, big_table, criterion):
    rep = certify(series_1000, 1000, big_table)
    lo, hi = rep.E_interval
    vlo, vhi = rep.Var_interval
    e_ok = Fraction("2.42849791") <= lo and hi <= Fraction("2.42849799")
    v_ok = vhi - vlo < Fraction(2, 10**4) and vlo <= Fraction("6.2427786") <= vhi
    criterion(
        "AC4 certified intervals",
        e_ok and v_ok,
        f"E in [{float(lo):.10f}, {float(hi):.10f}], Var width {float(vhi - vlo):.3e}",
    )
    assert e_ok and v_ok


def test_ac05_oracle_equivalence(small_table, criterion):
    t = time.perf_counter()
    res = oracle_sweep(small_table, k_max=8)
    series = run_dp(DpConfig(6, 9), small_table)
    survival_ok = all(
        series.survival_at(j + 1) == Fraction(sum(enumerate_survivors(j).values()), 6**j)
        for j in range(1, 9)
    )
    elapsed = time.perf_counter() - t
    ok = res.passed and survival_ok and elapsed < 60
    criterion("AC5 DP == enumeration, k<=8", ok, f"{res.detail} ({elapsed:.1f}s)")
    assert ok


def test_ac06_proposition_sweep(big_table, criterion):
    res = proposition_sweep(big_table, k_max=30)
    criterion("AC6 proposition, k<=30", res.passed, res.detail)
    assert res.passed


def test_ac07_pnt_sweep(criterion):
    t = time.perf_counter()
    table = build_prime_table(10**7)
    check = verify_pnt_lower_bound(table, 1001, 10**7)
    elapsed = time.perf_counter() - t
    ok = check.passed and elapsed < 30
    criterion("AC7 pi(n) > 0.9 n/ln n, 1000<n<=1e7", ok, f"{elapsed:.1f}s")
    assert ok


def test_ac08_argmax(criterion):
    f = scan_argmax("f", 1000, 10**5)
    g = scan_argmax("g", 1000, 10**5)
    ok = (f.argmax, g.argmax) == (1050, 1051) and f.unique and g.unique
    criterion("AC8 argmax f=1050, g=1051", ok, f"f->{f.argmax}, g->{g.argmax}")
    assert ok


def test_ac09_monte_carlo(big_table, series_1000, criterion):
    reps = 10**7
    t = time.perf_counter()
    s = run_simulation(reps, seed=20240101, primes=big_table)
    elapsed = time.perf_counter() - t
    mean_ok = abs(s.mean - 2.42850) <= 0.01
    var_ok = abs(s.variance - 6.24278) <= 0.05
    worst = 0.0
    for k in range(1, 11):
        p = float(series_1000.survival_at(k))
        se = math.sqrt(p * (1 - p) / reps)
        dev = abs(s.survival(k) - p)
        worst = max(worst, dev / se if se else (0.0 if dev == 0 else math.inf))
    ok = mean_ok and var_ok and worst <= 5 and s.max >= 20 and elapsed < 120
    criterion(
        "AC9 Monte Carlo 1e7",
        ok,
        f"mean {s.mean:.5f}, var {s.variance:.5f}, max {s.max}, worst {worst:.2f} SE, {elapsed:.1f}s",
    )
    assert ok


def test_ac10_soundness(series_1000, big_table, criterion):
    longer = run_dp(DpConfig(6, 1100), big_table)
    de = longer.E_K - series_1000.E_K
    de2 = longer.E2_K - series_1000.E2_K
    ok = 0 <= de <= bound_r(1000) and 0 <= de2 <= bound_r2(1000)
    criterion("AC10 E_1100-E_1000 <= R bound", ok, f"dE={float(de):.3e}, dE2={float(de2):.3e}")
    assert ok
