"""Special-function checks against frozen oracle values and scipy/mpmath.

The frozen constants were produced once by the scripts in tests/oracles/
(quadrature + bisection for the normal tail, direct Monte Carlo for the
noncentral chi-square, mpmath series/closed forms for Bessel and the
matched-density normalizer) and pinned here; scipy and mpmath also appear
inline as independent routes.  The library code under test never calls
either.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ummtest import specfun
from ummtest.errors import DomainError, RangeError

# ---- frozen oracle values (tests/oracles/oracle_normal.py) ----
Q_12816 = 9.9991500097675157e-02
QINV_01 = 1.2815515655446004
Q_2_MINUS_QINV_01 = 2.3624041589411687e-01
Q_1 = 1.5865525393145705e-01
QINV_0025 = 1.9599639845400545
Q_025 = 4.0129367431707630e-01
Q_8 = 6.2209605742717908e-16

# ---- frozen oracle values (tests/oracles/oracle_ncx2_mc.py, 1e7 trials) ----
NCX2_TAIL_MC = 0.54226740        # P(X > -2 ln 0.1), X ~ ncx2(k=2, lam=4)
NCX2_TAIL_MC_3SIG = 4.726e-4
NCX2_Q90_MC = 12.06151467        # empirical 0.9-quantile of the same X
NCX2_Q90_MC_3SIG = 1.099e-2

# ---- frozen oracle values (tests/oracles/oracle_bessel_vmf.py, mpmath) ----
LOG_I_HALF_1 = -0.064351991073531798753
LOG_I_1_2 = 0.46413447354615974426
LOG_I_0_1 = 0.23591435850717864869
LOG_BESSEL_STRESS = [
    (0.0, 50.0, 47.127575501871804584),
    (31.0, 100.0, 91.988975079706840893),
    (15.5, 3.0, -22.857207836604422871),
    (2.5, 10000.0, 9994.4755912658072361),
    (31.0, 10000.0, 9994.4278514171634661),
]
LOG_C3_1 = -2.6924636085404864266
LOG_C3_2 = -3.1262444390235136136


# ---------------------------------------------------------------------------
# normal tail

def test_normal_tail_pinned_values():
    assert abs(specfun.normal_tail(1.2816) - Q_12816) < 1e-12
    assert abs(specfun.normal_tail(1.0) - Q_1) < 1e-12
    assert abs(specfun.normal_tail(0.25) - Q_025) < 1e-12
    assert abs(specfun.normal_tail(8.0) - Q_8) < 1e-12 * Q_8 + 1e-30
    assert abs(specfun.normal_tail_inv(0.1) - QINV_01) < 1e-12
    assert abs(specfun.normal_tail_inv(0.025) - QINV_0025) < 1e-12
    assert abs(specfun.normal_tail(2.0 - QINV_01) - Q_2_MINUS_QINV_01) < 1e-12


def test_normal_tail_symmetry_and_monotone():
    zs = np.linspace(-8.0, 8.0, 401)
    vals = np.array([specfun.normal_tail(z) for z in zs])
    assert np.max(np.abs(vals + vals[::-1] - 1.0)) <= 1e-12
    assert np.all(np.diff(vals) < 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-10, max_value=1.0 - 1e-10))
def test_normal_inverse_roundtrip(p):
    z = specfun.normal_tail_inv(p)
    assert abs(specfun.normal_tail(z) - p) < 1e-12 * max(p, 1e-3)


def test_normal_tail_domain():
    with pytest.raises(DomainError):
        specfun.normal_tail_inv(0.0)
    with pytest.raises(DomainError):
        specfun.normal_tail_inv(1.0)
    with pytest.raises(DomainError):
        specfun.normal_tail(float("nan"))


# ---------------------------------------------------------------------------
# noncentral chi-square

def test_chisq_tail_against_mc_oracle():
    t = -2.0 * math.log(0.1)
    assert abs(specfun.chisq_tail(2, 4.0, t) - NCX2_TAIL_MC) < NCX2_TAIL_MC_3SIG
    assert abs(specfun.chisq_tail_inv(2, 4.0, 0.1) - NCX2_Q90_MC) < NCX2_Q90_MC_3SIG


def test_chisq_tail_against_scipy_grid():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(120):
        k = int(rng.integers(1, 40))
        lam = float(rng.uniform(0.0, 60.0))
        t = float(rng.uniform(0.0, 3.0 * (k + lam) + 5.0))
        ours = specfun.chisq_tail(k, lam, t)
        ref = stats.ncx2.sf(t, k, lam) if lam > 0 else stats.chi2.sf(t, k)
        worst = max(worst, abs(ours - ref))
    assert worst < 1e-9


def test_chisq_central_k1_is_folded_normal():
    for t in np.geomspace(0.01, 50.0, 40):
        ref = 2.0 * specfun.normal_tail(math.sqrt(t))
        assert abs(specfun.chisq_tail(1, 0.0, t) - ref) <= 1e-11


def test_chisq_tail_monotone_in_t_and_lam():
    ts = np.linspace(0.1, 30.0, 25)
    vals = [specfun.chisq_tail(3, 2.0, t) for t in ts]
    assert np.all(np.diff(vals) < 0.0)
    lams = np.linspace(0.0, 40.0, 25)
    vals = [specfun.chisq_tail(3, lam, 8.0) for lam in lams]
    assert np.all(np.diff(vals) > 0.0)


@settings(max_examples=150, deadline=None)
@given(
    st.integers(min_value=1, max_value=50),
    st.floats(min_value=0.0, max_value=80.0),
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
)
def test_chisq_inverse_roundtrip(k, lam, p):
    t = specfun.chisq_tail_inv(k, lam, p)
    assert abs(specfun.chisq_tail(k, lam, t) - p) < 1e-9


def test_chisq_normal_approx_error_shrinks_with_k():
    # probability-scale error of the approximate quantile, central case
    errs = []
    for k in (10, 100, 1000):
        t = specfun.chisq_tail_inv_approx(k, 0.0, 0.1)
        errs.append(abs(specfun.chisq_tail(k, 0.0, t) - 0.1))
    assert errs[0] > errs[1] > errs[2]


def test_chisq_domain_errors():
    with pytest.raises(DomainError):
        specfun.chisq_tail(0, 1.0, 1.0)
    with pytest.raises(DomainError):
        specfun.chisq_tail(2, -0.5, 1.0)
    with pytest.raises(DomainError):
        specfun.chisq_tail(2, 1.0, -1.0)
    with pytest.raises(DomainError):
        specfun.chisq_tail_inv(2, 1.0, 1.5)


# ---------------------------------------------------------------------------
# Bessel / matched-density normalizer

def test_log_bessel_pinned():
    assert abs(specfun.log_bessel_i(0.5, 1.0) - LOG_I_HALF_1) < 1e-12
    assert abs(specfun.log_bessel_i(1.0, 2.0) - LOG_I_1_2) < 1e-12
    assert abs(specfun.log_bessel_i(0.0, 1.0) - LOG_I_0_1) < 1e-12
    for nu, tau, ref in LOG_BESSEL_STRESS:
        assert abs(specfun.log_bessel_i(nu, tau) - ref) < 1e-9 * max(1.0, abs(ref))


def test_log_vmf_const_pinned():
    assert abs(specfun.log_vmf_const(3, 1.0) - LOG_C3_1) < 1e-12
    assert abs(specfun.log_vmf_const(3, 2.0) - LOG_C3_2) < 1e-12
    assert abs(specfun.log_vmf_const(3, 0.0) - math.log(1.0 / (4.0 * math.pi))) < 1e-12


def test_log_vmf_const_decreasing_in_tau():
    taus = np.geomspace(1e-3, 200.0, 60)
    for k in (2, 3, 5, 8, 16, 33, 64):
        vals = [specfun.log_vmf_const(k, t) for t in taus]
        assert np.all(np.diff(vals) < 0.0), f"not decreasing at k={k}"
        assert specfun.log_vmf_const(k, 0.0) > vals[0]


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=32), st.floats(min_value=1e-3, max_value=500.0))
def test_vmf_const_inverse_roundtrip(k, tau):
    back = specfun.vmf_const_inv(k, specfun.log_vmf_const(k, tau))
    assert abs(back - tau) < 1e-7 * max(1.0, tau)


def test_vmf_const_inv_range_errors():
    top = specfun.log_vmf_const(4, 0.0)
    assert specfun.vmf_const_inv(4, top) == 0.0
    with pytest.raises(RangeError):
        specfun.vmf_const_inv(4, top + 1.0)
