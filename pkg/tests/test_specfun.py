"""Special-function layer: oracles are scipy, mpmath, and direct quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sps
from scipy import stats

from ncwishart import specfun as sf


def rel_err(v, ref):
    if ref == 0.0:
        return abs(v)
    return abs(v - ref) / abs(ref)


# ---------------------------------------------------------------------------
# incomplete gamma pair
# ---------------------------------------------------------------------------

def test_completeness_identity():
    """gamma(p,x) + Gamma(p,x) = (p-1)! to 1e-12 relative on the full box."""
    worst = 0.0
    for p in range(1, 31):
        fact = math.factorial(p - 1)
        for x in np.linspace(0.0, 100.0, 41):
            tot = sf.lower_incomplete_gamma(p, x) + sf.upper_incomplete_gamma(p, x)
            worst = max(worst, rel_err(tot, fact))
    assert worst < 1e-12


def test_gamma_against_scipy():
    for p in (1, 2, 5, 12, 25):
        x = np.array([0.0, 1e-8, 0.3, 1.0, float(p), 10.0 * p, 300.0])
        lo = sf.lower_incomplete_gamma(p, x)
        hi = sf.upper_incomplete_gamma(p, x)
        assert np.allclose(lo, sps.gammainc(p, x) * math.factorial(p - 1), rtol=5e-14)
        assert np.allclose(hi, sps.gammaincc(p, x) * math.factorial(p - 1), rtol=5e-14)


def test_lower_gamma_small_x_relative():
    # the subtraction-free branch must hold relative accuracy where
    # gamma(p,x) ~ x^p/p is far below 1-ulp of (p-1)!
    p, x = 20, 1e-3
    v = sf.lower_incomplete_gamma(p, x)
    ref = float(sps.gammainc(p, x)) * math.factorial(p - 1)
    assert ref > 0
    assert rel_err(v, ref) < 1e-12


def test_gamma_domain_errors():
    with pytest.raises(ValueError):
        sf.lower_incomplete_gamma(0, 1.0)
    with pytest.raises(ValueError):
        sf.upper_incomplete_gamma(3, -1.0)


# ---------------------------------------------------------------------------
# Bessel I and 0F1
# ---------------------------------------------------------------------------

def test_bessel_vs_scipy():
    for q in (0, 1, 2, 5, 11):
        x = np.array([0.0, 1e-6, 0.5, 3.0, 29.9, 30.1, 80.0, 400.0, 690.0])
        mine = sf.bessel_i(q, x)
        ref = sps.iv(q, x)
        assert np.allclose(mine, ref, rtol=2e-13, atol=1e-300)


def test_bessel_log_far_range():
    # log form stays usable way past linear overflow
    lv = sf.bessel_i(3, 5000.0, log=True)
    ref = math.log(sps.ive(3, 5000.0)) + 5000.0
    assert abs(lv - ref) < 1e-10 * abs(ref)


def test_bessel_overflow_error():
    with pytest.raises(OverflowError):
        sf.bessel_i(0, 800.0)


def test_hyp0f1_series_agreement():
    """Agrees with a straightforward truncated series to 1e-13 for x <= 50."""
    rng = np.random.default_rng(3)
    for b in (1, 2, 3, 6):
        for x in rng.uniform(0.0, 50.0, size=12):
            term, ssum = 1.0, 1.0
            for k in range(200):
                term *= x / ((b + k) * (k + 1.0))
                ssum += term
            assert rel_err(sf.hyp0f1(b, float(x)), ssum) < 1e-13


def test_hyp0f1_bessel_branch_continuity():
    v1 = sf.hyp0f1(3, 2499.0, log=True)
    v2 = sf.hyp0f1(3, 2501.0, log=True)
    interp = v1 + (v2 - v1) * 0.5
    vmid = sf.hyp0f1(3, 2500.0, log=True)
    assert abs(vmid - interp) < 1e-6 * abs(vmid)


# ---------------------------------------------------------------------------
# Marcum Q / P
# ---------------------------------------------------------------------------

def test_marcum_vs_ncx2():
    """Q_mu(a,b) is the noncentral-chi-square tail in disguise."""
    for mu in (1, 2, 5):
        for a in (0.0, 0.7, 2.0, 6.0):
            b = np.array([0.0, 0.4, 1.0, 3.0, 8.0])
            mine = sf.marcum_q(mu, a, b)
            ref = stats.ncx2.sf(b * b, 2 * mu, a * a) if a > 0 else stats.chi2.sf(b * b, 2 * mu)
            assert np.allclose(mine, ref, rtol=5e-12, atol=1e-15)


def test_marcum_complement_consistency():
    for mu in (1, 3):
        for a in (0.5, 2.0, 5.0):
            b = np.linspace(0.0, 9.0, 25)
            q = sf.marcum_q(mu, a, b)
            p = sf.marcum_p(mu, a, b)
            assert np.all(np.abs(q + p - 1.0) < 1e-13)


def test_marcum_deep_tails_relative():
    # upper tail: Q_1(2, 10) ~ 1.4e-15 must keep relative accuracy
    q = sf.marcum_q(1, 2.0, 10.0)
    ref = float(stats.ncx2.sf(100.0, 2, 4.0))
    assert rel_err(q, ref) < 1e-10
    # lower tail: P_1(6, 0.05) ~ e^{-18}-scale, subtraction-free
    p = sf.marcum_p(1, 6.0, 0.05)
    ref = float(stats.ncx2.cdf(0.0025, 2, 36.0))
    assert ref > 0
    assert rel_err(p, ref) < 1e-9


@settings(max_examples=150, deadline=None)
@given(
    mu=st.integers(1, 6),
    a=st.floats(0.0, 12.0),
    b1=st.floats(0.0, 12.0),
    b2=st.floats(0.0, 12.0),
)
def test_marcum_properties(mu, a, b1, b2):
    lo, hi = sorted((b1, b2))
    q_lo = sf.marcum_q(mu, a, lo)
    q_hi = sf.marcum_q(mu, a, hi)
    assert 0.0 <= q_hi <= q_lo <= 1.0
    # nondecreasing in a
    assert sf.marcum_q(mu, a + 0.5, hi) >= q_hi - 1e-13
    # boundary: Q(a, 0) = 1 up to the documented series truncation
    assert sf.marcum_q(mu, a, 0.0) == pytest.approx(1.0, abs=5e-14)


# ---------------------------------------------------------------------------
# Nuttall Q
# ---------------------------------------------------------------------------

def nuttall_cases(pq_cap=11):
    for p in range(1, pq_cap + 1):
        for q in range(0, p):
            if (p + q) % 2 == 1 and p + q <= pq_cap:
                yield p, q


def test_nuttall_vs_quadrature_sample():
    """Unit-test slice of the full acceptance grid (which uses p+q <= 17)."""
    worst = 0.0
    for p, q in nuttall_cases(9):
        for a in (0.0, 1.0, 5.0):
            for b in (0.0, 0.5, 2.0, 10.0):
                ref = sf.nuttall_q_quad(p, q, a, b)
                v = sf.nuttall_q(p, q, a, float(b))
                worst = max(worst, rel_err(v, ref) if ref > 1e-300 else abs(v))
    assert worst < 1e-10


def test_nuttall_marcum_base_case():
    b = np.linspace(0.0, 8.0, 30)
    assert np.allclose(sf.nuttall_q(1, 0, 2.0, b), sf.marcum_q(1, 2.0, b), rtol=1e-13)


def test_nuttall_domain_errors():
    with pytest.raises(ValueError):
        sf.nuttall_q(4, 2, 1.0, 1.0)  # p+q even
    with pytest.raises(ValueError):
        sf.nuttall_q(2, 3, 1.0, 1.0)  # p < q+1
    with pytest.raises(ValueError):
        sf.nuttall_q(5, 2, -1.0, 1.0)


def test_nuttall_dq_completeness():
    """dq(a,b) + Q(a,b) = Q(a,0) across both internal branches."""
    for p, q in ((3, 0), (5, 2), (8, 1), (9, 4)):
        q0 = sf.nuttall_q(p, q, 3.0, 0.0)
        for b in (1e-3, 0.5, 1.9, 2.1, 4.0, 9.0):
            tot = sf.nuttall_dq(p, q, 3.0, b) + sf.nuttall_q(p, q, 3.0, float(b))
            assert rel_err(tot, q0) < 1e-12


def test_nuttall_dq_small_b_relative():
    """The head integral keeps relative precision when it is ~1e-33."""
    p, q, a, b = 13, 4, 4.2, 1e-4
    v = sf.nuttall_dq(p, q, a, b)
    # independent check: direct quadrature of the head integral
    from scipy.integrate import quad

    ref, _ = quad(
        lambda x: x**p * sps.ive(q, a * x) * math.exp(-0.5 * (x - a) ** 2),
        0.0, b, epsabs=1e-320, epsrel=1e-12,
    )
    assert ref > 0
    assert rel_err(v, ref) < 1e-9


def test_nuttall_dq_zero_a():
    # a = 0: only the q = 0 reduction survives; q > 0 head integrals vanish
    # in the Bessel prefactor
    v = sf.nuttall_dq(3, 0, 0.0, 1.0)
    from scipy.integrate import quad

    ref, _ = quad(lambda x: x**3 * math.exp(-0.5 * x * x), 0.0, 1.0)
    assert rel_err(v, ref) < 1e-12


# ---------------------------------------------------------------------------
# Laguerre and the gamma product
# ---------------------------------------------------------------------------

def test_laguerre_vs_direct_sum():
    """Recurrence equals the binomial sum to 1e-11 for k <= 12, |x| <= 200.

    The sum is evaluated in exact rational arithmetic: in floats its
    alternating ~1e19-sized terms lose more digits than the bound itself
    at the positive end of the x range.
    """
    from fractions import Fraction

    rng = np.random.default_rng(11)
    for k in range(0, 13):
        for n in (0, 1, 2, 5):
            for x in rng.uniform(-200.0, 200.0, size=8):
                xf = Fraction(float(x))
                direct = sum(
                    (-1) ** j * math.comb(k + n, k - j) * xf**j
                    / math.factorial(j)
                    for j in range(k + 1)
                )
                v = sf.laguerre(k, n, float(x))
                assert rel_err(v, float(direct)) < 1e-11


def test_laguerre_scipy_crosscheck():
    x = np.linspace(-50, 50, 11)
    assert np.allclose(sf.laguerre(7, 2, x), sps.genlaguerre(7, 2)(x), rtol=1e-11)


def test_multivariate_gamma_norm_examples():
    sign, logmag = sf.multivariate_gamma_norm(1, 1)
    assert (sign, logmag) == (1, 0.0)
    sign, logmag = sf.multivariate_gamma_norm(3, 3)
    assert sign == 1 and math.exp(logmag) == pytest.approx(2.0, rel=1e-14)
    sign, logmag = sf.multivariate_gamma_norm(3, 8)
    assert sign == 1 and math.exp(logmag) == pytest.approx(435456000.0, rel=1e-12)
    sign, logmag = sf.multivariate_gamma_norm(0, 5)
    assert (sign, logmag) == (1, 0.0)
    with pytest.raises(ValueError):
        sf.multivariate_gamma_norm(3, 2)
