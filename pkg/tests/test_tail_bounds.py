import math
from fractions import Fraction

import mpmath
import pytest

from primehit.errors import CertificationUnavailable, PreconditionError
from primehit.exact_dp import DpConfig, run_dp
from primehit.tail_bounds import (
    bound_r,
    bound_r2,
    bound_rv,
    certify,
    f_tail,
    g_tail,
    proposition_bound,
    scan_argmax,
    scan_halving,
    tail_interval,
)


def as_fraction(x):
    return Fraction(*mpmath.libmp.to_rational(x._mpf_))


def majorant_float(n):
    return (1 / 3) * (5 / 6) ** (0.9 * n / math.log(n))


def majorant_mp(n):
    with mpmath.workdps(60):
        return mpmath.mpf(1) / 3 * (mpmath.mpf(5) / 6) ** (mpmath.mpf(9) / 10 * n / mpmath.log(n))


def test_proposition_bound_base_cases(small_table):
    assert proposition_bound(6, small_table) == Fraction(125, 648)
    assert Fraction(1, 6) < Fraction(125, 648)
    assert proposition_bound(1, small_table) == Fraction(1, 3)
    assert proposition_bound(4, small_table) == Fraction(25, 108)
    with pytest.raises(PreconditionError):
        proposition_bound(0, small_table)


def test_f_g_vanish_at_1000():
    assert f_tail(1000) == 0
    assert g_tail(1000) == 0


@pytest.mark.parametrize("n", [1001, 1050, 1051, 1500, 5000, 20_000])
def test_f_g_enclose_reference(n):
    ref = majorant_mp(n)
    lo, hi = (mpmath.mp.make_mpf(x) for x in tail_interval("f", n))
    with mpmath.workdps(60):
        assert lo <= (n - 1000) * ref <= hi
        assert f_tail(n) >= (n - 1000) * ref
        assert g_tail(n) >= (n * n - 1000**2) * ref


def test_f_g_domain():
    with pytest.raises(PreconditionError):
        f_tail(999)
    with pytest.raises(PreconditionError):
        g_tail(999)


def test_argmax_small_window_float_oracle():
    # plain float scan agrees with the certified scan on a window around the peak
    f_best = max(range(1000, 3001), key=lambda n: (n - 1000) * majorant_float(n))
    g_best = max(range(1000, 3001), key=lambda n: (n * n - 10**6) * majorant_float(n))
    assert (f_best, g_best) == (1050, 1051)
    assert scan_argmax("f", 1000, 3000).argmax == 1050
    assert scan_argmax("g", 1000, 3000).argmax == 1051


def test_argmax_full_window():
    f = scan_argmax("f")
    g = scan_argmax("g")
    assert (f.argmax, f.unique, f.beyond_window_ok) == (1050, True, True)
    assert (g.argmax, g.unique, g.beyond_window_ok) == (1051, True, True)
    assert f.peak > f.runner_up


def test_halving_scans():
    assert scan_halving("f", 1050).passed
    assert scan_halving("g", 1051).passed


def test_halving_detects_failure():
    # before the peak the function is increasing, so halving must fail at once
    assert scan_halving("f", 1001, 1010).first_failure == 1001


def test_bound_r_paper_value():
    r = bound_r(1000)
    assert r <= Fraction(7, 10**8)
    assert r >= as_fraction(f_tail(1050))


def test_bound_r_close_to_float_sum():
    r = bound_r(1000)
    approx = sum((n - 999) * majorant_float(n) for n in range(1000, 20_000))
    # the float reference carries its own ~1e-14 relative rounding error
    assert float(r) >= approx * (1 - 1e-12)
    assert float(r) == pytest.approx(approx, rel=1e-9)


def test_bound_r2_close_to_float_sum():
    r2 = bound_r2(1000)
    approx = sum(((n + 1) ** 2 - 10**6) * majorant_float(n) for n in range(1000, 20_000))
    assert float(r2) >= approx * (1 - 1e-12)
    assert float(r2) == pytest.approx(approx, rel=1e-9)
    assert r2 >= as_fraction(g_tail(1051))


def test_bounds_shrink_with_k():
    assert bound_r(2000) < bound_r(1000)
    assert bound_r2(2000) < bound_r2(1000)


def test_precision_doubling_never_loosens():
    lo = bound_r(1000, n_cut=3000, prec=96)
    hi = bound_r(1000, n_cut=3000, prec=192)
    assert hi <= lo
    assert lo - hi <= lo * Fraction(1, 2**80)
    lo2 = bound_r2(1000, n_cut=3000, prec=96)
    hi2 = bound_r2(1000, n_cut=3000, prec=192)
    assert hi2 <= lo2


def test_small_n_cut_uses_several_blocks():
    # a short exact phase is still certified, only looser
    r_short = bound_r(1000, n_cut=1200)
    assert r_short >= bound_r(1000)
    assert r_short < Fraction(1, 10**5)


def test_sharp_mode_is_sharper(big_table):
    sharp = bound_r2(1000, big_table, sharp=True)
    assert sharp < bound_r2(1000)
    assert sharp <= Fraction(31, 10**6)


def test_sharp_mode_needs_table():
    with pytest.raises(PreconditionError):
        bound_r(1000, None, sharp=True)


@pytest.mark.parametrize("K", [999, 10])
def test_k_precondition(K):
    with pytest.raises(PreconditionError):
        bound_r(K)


def test_bound_rv_formula(series_1000):
    assert bound_rv(series_1000, 0, 0) == 0
    r, r2 = Fraction(7, 10**8), Fraction(31, 10**6)
    rv = bound_rv(series_1000, r, r2)
    assert rv == r2
    cross = 2 * series_1000.E_K * r + r * r
    assert float(cross) == pytest.approx(3.4e-7, rel=0.01)
    big_r = Fraction(1, 10)
    assert bound_rv(series_1000, big_r, 0) == 2 * series_1000.E_K * big_r + big_r**2


def test_certify_paper_instance(series_1000, big_table):
    rep = certify(series_1000, 1000, big_table)
    lo, hi = rep.E_interval
    assert Fraction("2.4284979") <= lo and hi <= Fraction("2.4284980")
    vlo, vhi = rep.Var_interval
    assert vhi - vlo < Fraction(2, 10**4)
    assert vlo <= Fraction("6.2427786") <= vhi
    assert hi - lo == rep.R_upper
    assert vhi - vlo == 2 * rep.RV_abs_upper
    assert any("10000000" in a for a in rep.assumptions)


def test_certify_refuses_custom_target(small_table):
    series = run_dp(DpConfig(6, 5, frozenset({4, 9})))
    with pytest.raises(CertificationUnavailable, match="custom targets"):
        certify(series, 5, small_table)


def test_certify_refuses_other_dice(small_table):
    series = run_dp(DpConfig(4, 1000), small_table)
    with pytest.raises(CertificationUnavailable):
        certify(series, 1000, small_table)


def test_certify_depth_mismatch(series_1000, big_table):
    with pytest.raises(PreconditionError):
        certify(series_1000, 1100, big_table)
