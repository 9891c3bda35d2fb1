"""Tail probabilities and sphere-integral constants used by every detector.

Scalar, dependency-free implementations of the normal tail Q and its
inverse, the (non)central chi-square tail and inverse, the log modified
Bessel function of the first kind, and the von Mises-Fisher normalizing
constant c_k with its inverse.  All Bessel/c_k arithmetic happens in log
scale; c_k underflows rapidly in both k and tau otherwise.

Private ``*_vec`` variants (numpy) back the Monte Carlo hot paths; the
public scalar functions are the audited reference implementations.
"""

import math

import numpy as np

from .errors import DomainError, RangeError

__all__ = [
    "normal_tail",
    "normal_tail_inv",
    "chisq_tail",
    "chisq_tail_inv",
    "chisq_tail_inv_approx",
    "log_bessel_i",
    "log_vmf_const",
    "vmf_const_inv",
]

_LN_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# regularized incomplete gamma (scalar)

def _gamma_q_series(a, x):
    # Q(a,x) = 1 - P(a,x); series for P converges well for x < a + 1.
    term = 1.0 / a
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * 1e-17 or n > 10_000:
            break
    logp = a * math.log(x) - x - math.lgamma(a)
    return 1.0 - total * math.exp(logp)


def _gamma_q_cf(a, x):
    # Modified Lentz continued fraction for Q(a,x); stable for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(a * math.log(x) - x - math.lgamma(a)) * h


def _reg_gamma_q(a, x):
    """Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return min(max(_gamma_q_series(a, x), 0.0), 1.0)
    return min(max(_gamma_q_cf(a, x), 0.0), 1.0)


# ---------------------------------------------------------------------------
# normal tail

def normal_tail(z: float) -> float:
    """P(Z > z) for standard normal Z.

    Computed through the regularized incomplete gamma at a = 1/2, which
    keeps relative error ~1e-14 deep into the tail (|z| <= 8 audited).
    """
    z = float(z)
    if not math.isfinite(z):
        raise DomainError("normal_tail: z must be finite")
    q = 0.5 * _reg_gamma_q(0.5, 0.5 * z * z)
    return q if z >= 0.0 else 1.0 - q


# Acklam's rational approximation for the normal quantile: |error| < 1.2e-9,
# then polished by Newton to machine precision.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)


def _norm_ppf_approx(p):
    # lower-tail quantile; p in (0,1)
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_ACK_C[0] * q + _ACK_C[1]) * q + _ACK_C[2]) * q + _ACK_C[3]) * q + _ACK_C[4]) * q + _ACK_C[5]
        den = (((_ACK_D[0] * q + _ACK_D[1]) * q + _ACK_D[2]) * q + _ACK_D[3]) * q + 1.0
        return num / den
    if p > 1.0 - 0.02425:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        num = ((((_ACK_C[0] * q + _ACK_C[1]) * q + _ACK_C[2]) * q + _ACK_C[3]) * q + _ACK_C[4]) * q + _ACK_C[5]
        den = (((_ACK_D[0] * q + _ACK_D[1]) * q + _ACK_D[2]) * q + _ACK_D[3]) * q + 1.0
        return -num / den
    q = p - 0.5
    r = q * q
    num = (((((_ACK_A[0] * r + _ACK_A[1]) * r + _ACK_A[2]) * r + _ACK_A[3]) * r + _ACK_A[4]) * r + _ACK_A[5]) * q
    den = ((((_ACK_B[0] * r + _ACK_B[1]) * r + _ACK_B[2]) * r + _ACK_B[3]) * r + _ACK_B[4]) * r + 1.0
    return num / den


def normal_tail_inv(p: float) -> float:
    """z with normal_tail(z) = p, for p in the open interval (0, 1)."""
    p = float(p)
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise DomainError("normal_tail_inv: p must lie in (0,1)")
    z = -_norm_ppf_approx(p)  # upper-tail convention
    for _ in range(3):
        err = normal_tail(z) - p
        pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        if pdf <= 0.0:
            break
        z += err / pdf
    return z


# ---------------------------------------------------------------------------
# (non)central chi-square

def _check_chisq_params(k, lam):
    if int(k) != k or k < 1:
        raise DomainError("chi-square dof k must be a positive integer")
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0.0:
        raise DomainError("noncentrality must be finite and nonnegative")
    return int(k), lam


def _g_term(nu, x):
    # x^nu e^-x / Gamma(nu+1), evaluated in log scale (fresh each call so a
    # single underflow cannot poison a recurrence chain)
    return math.exp(nu * math.log(x) - x - math.lgamma(nu + 1.0))


def _chisq_tail_pdf(k, lam, t):
    """(tail, pdf) of the noncentral chi-square at t; certified truncation.

    Poisson(lam/2) mixture of central chi-square tails, swept outward from
    the mode weight.  Central tails follow the one-step recurrence
    Q(a+1,x) = Q(a,x) + g(a,x); the sweep stops once the unused Poisson
    mass plus the running term drops below 1e-14 (each mixed tail is <= 1,
    so the unused mass bounds the truncation error).
    """
    a = 0.5 * k
    x = 0.5 * t
    h = 0.5 * lam
    if t <= 0.0:
        # pdf at 0 is infinite for k=1, positive for k=2; callers only use
        # the pdf inside Newton where t > 0 holds
        return 1.0, 0.0
    if h < 1e-300:
        tail = _reg_gamma_q(a, x)
        return tail, 0.5 * _g_term(a - 1.0, x)
    j0 = int(h)
    lw0 = j0 * math.log(h) - h - math.lgamma(j0 + 1.0)
    w0 = math.exp(lw0)
    c0 = _reg_gamma_q(a + j0, x)
    tail = w0 * c0
    pdf = w0 * _g_term(a + j0 - 1.0, x)
    # upward from the mode; stop once the geometric bound on the unswept
    # upper Poisson mass (times the tail bound 1) is negligible
    w, c = w0, c0
    j = j0
    while True:
        g = _g_term(a + j, x)
        j += 1
        w *= h / j
        c = min(c + g, 1.0)
        tail += w * c
        pdf += w * _g_term(a + j - 1.0, x)
        if j + 2.0 > h:
            r = h / (j + 2.0)
            if w * (h / (j + 1.0)) / (1.0 - r) < 1e-15:
                break
        if j > j0 + 1_000_000:
            break
    # downward from the mode, with the mirrored mass bound
    w, c = w0, c0
    j = j0
    while j > 0:
        w *= j / h
        j -= 1
        c = max(c - _g_term(a + j, x), 0.0)
        tail += w * c
        pdf += w * _g_term(a + j - 1.0, x)
        if j - 1.0 < h and j > 0:
            if w * (j / h) / (1.0 - (j - 1.0) / h) < 1e-15:
                break
    return min(max(tail, 0.0), 1.0), 0.5 * max(pdf, 0.0)


def chisq_tail(k: int, lam: float, t: float) -> float:
    """P(X > t) for X ~ noncentral chi-square with k dof, noncentrality lam.

    lam = 0 reduces exactly to the central chi-square (regularized upper
    incomplete gamma).  Absolute error <= 1e-11 by certified truncation of
    the Poisson mixture.
    """
    k, lam = _check_chisq_params(k, lam)
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError("chisq_tail: t must be finite and >= 0")
    return _chisq_tail_pdf(k, lam, t)[0]


def chisq_tail_inv_approx(k: int, lam: float, p: float) -> float:
    """Normal approximation to the noncentral chi-square upper quantile.

    Returns sqrt(2(k + 2 lam)) * normal_tail_inv(p) + k + lam; the
    correction term is O(1/sqrt(max(k, lam))), so this degrades gracefully
    and is used as the Newton starting point for the exact inverse.
    """
    k, lam = _check_chisq_params(k, lam)
    if not (0.0 < p < 1.0):
        raise DomainError("chisq_tail_inv_approx: p must lie in (0,1)")
    return math.sqrt(2.0 * (k + 2.0 * lam)) * normal_tail_inv(p) + k + lam


def chisq_tail_inv(k: int, lam: float, p: float) -> float:
    """t with chisq_tail(k, lam, t) = p, driven to ~1e-12 on the p scale."""
    k, lam = _check_chisq_params(k, lam)
    p = float(p)
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise DomainError("chisq_tail_inv: p must lie in (0,1)")
    t = chisq_tail_inv_approx(k, lam, p)
    if t <= 0.0:
        t = 1e-8
    # bracket, then safeguarded Newton (tail is strictly decreasing in t)
    lo, hi = 0.0, t
    while _chisq_tail_pdf(k, lam, hi)[0] > p:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        tail, pdf = _chisq_tail_pdf(k, lam, t)
        err = tail - p
        if abs(err) < 1e-12:
            return t
        if err > 0.0:
            lo = t
        else:
            hi = t
        if pdf > 0.0:
            step = err / pdf
            tn = t + step
        else:
            tn = 0.5 * (lo + hi)
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) < 1e-13 * max(t, 1.0):
            return tn
        t = tn
    return t


# ---------------------------------------------------------------------------
# log modified Bessel I and the vMF constant

def _log_bessel_series(nu, tau):
    # ascending series; fine for tau < 20 at small nu
    y = 0.25 * tau * tau
    term = 1.0
    total = 1.0
    m = 0
    while True:
        m += 1
        term *= y / (m * (nu + m))
        total += term
        if term < total * 1e-17 or m > 500:
            break
    return nu * math.log(0.5 * tau) - math.lgamma(nu + 1.0) + math.log(total)


def _log_bessel_asym(nu, tau):
    # large-argument expansion at fixed small order (0 <= nu < 1); optimal
    # truncation error ~ e^(-2 tau), far below 1e-10 for tau >= 20
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    m = 0
    while True:
        m += 1
        factor = -(mu - (2 * m - 1) ** 2) / (8.0 * m * tau)
        term *= factor
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-18 or m > 200:
            break
    return tau - 0.5 * math.log(2.0 * math.pi * tau) + math.log(total)


def _log_ratio_climb(base, steps, tau):
    """Sum of log(I_{base+s+1}/I_{base+s}) for s = 0..steps-1.

    One backward continued-fraction pass r_{nu-1} = tau/(2 nu + tau r_nu),
    started deep enough past max(order, tau) that the seed value washes out.
    """
    depth = steps + int(1.6 * tau) + 60
    r = 0.0
    acc = 0.0
    for i in range(depth, 0, -1):
        r = tau / (2.0 * (base + i) + tau * r)
        if i <= steps:
            acc += math.log(r)
    return acc


def _bessel_ratio(nu, tau):
    """I_{nu+1}(tau) / I_{nu}(tau)."""
    return math.exp(_log_ratio_climb(nu, 1, tau))


def log_bessel_i(order: float, tau: float) -> float:
    """log I_order(tau) for order >= 0, tau >= 0.

    Anchored at the fractional base order (closed form for half-integers,
    series / large-argument expansion otherwise), then climbed to the
    requested order through backward continued-fraction ratios, which stay
    accurate at large order where a fixed-order asymptotic series would
    diverge.  exp(result) carries relative error <= 1e-10 for tau <= 1e4.
    """
    order = float(order)
    tau = float(tau)
    if order < 0.0 or not math.isfinite(order):
        raise DomainError("log_bessel_i: order must be finite and >= 0")
    if tau < 0.0 or not math.isfinite(tau):
        raise DomainError("log_bessel_i: tau must be finite and >= 0")
    if tau == 0.0:
        return 0.0 if order == 0.0 else -math.inf
    base = order - math.floor(order)
    if base == 0.5:
        # I_{1/2} = sqrt(2/(pi tau)) sinh(tau), in overflow-safe form
        lb = 0.5 * math.log(2.0 / (math.pi * tau)) + tau + math.log1p(-math.exp(-2.0 * tau)) - math.log(2.0)
    elif tau < 20.0:
        lb = _log_bessel_series(base, tau)
    else:
        lb = _log_bessel_asym(base, tau)
    steps = int(round(order - base))
    if steps == 0:
        return lb
    return lb + _log_ratio_climb(base, steps, tau)


def _check_vmf(k, tau):
    if int(k) != k or k < 2:
        raise DomainError("vMF constant: k must be an integer >= 2")
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0.0:
        raise DomainError("vMF constant: tau must be finite and >= 0")
    return int(k), tau


def log_vmf_const(k: int, tau: float) -> float:
    """log c_k(tau), the von Mises-Fisher normalizing constant (log scale).

    c_k(tau) = tau^(k/2-1) / ((2 pi)^(k/2) I_{k/2-1}(tau)); strictly
    decreasing in tau.  tau = 0 is the uniform-on-sphere limit, finite and
    computed from the series leading term.
    """
    k, tau = _check_vmf(k, tau)
    nu = 0.5 * k - 1.0
    if tau == 0.0:
        return nu * math.log(2.0) + math.lgamma(0.5 * k) - 0.5 * k * _LN_2PI
    return nu * math.log(tau) - 0.5 * k * _LN_2PI - log_bessel_i(nu, tau)


def vmf_const_inv(k: int, log_target: float) -> float:
    """tau >= 0 with log_vmf_const(k, tau) = log_target (unique by monotonicity)."""
    k, _ = _check_vmf(k, 0.0)
    log_target = float(log_target)
    if not math.isfinite(log_target):
        raise DomainError("vmf_const_inv: log_target must be finite")
    top = log_vmf_const(k, 0.0)
    if log_target > top + 1e-12:
        raise RangeError("vmf_const_inv: target above log c_k(0) = %.12g" % top)
    if log_target >= top:
        return 0.0
    nu = 0.5 * k - 1.0
    hi = 1.0
    while log_vmf_const(k, hi) > log_target:
        hi *= 2.0
        if hi > 1e12:
            raise RangeError("vmf_const_inv: target unreachable below tau = 1e12")
    lo = 0.0
    tau = 0.5 * hi
    for _ in range(200):
        f = log_vmf_const(k, tau) - log_target
        if abs(f) < 1e-11:
            return tau
        if f > 0.0:
            lo = tau
        else:
            hi = tau
        slope = -_bessel_ratio(nu, tau)  # d/dtau log c_k
        tn = tau - f / slope if slope < 0.0 else 0.5 * (lo + hi)
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - tau) < 1e-15 * max(tau, 1.0):
            return tn
        tau = tn
    return tau


# ---------------------------------------------------------------------------
# vectorized private kernels (Monte Carlo hot paths)

def _reg_gamma_q_vec(a, x):
    """Q(a, x) for scalar a > 0 and ndarray x >= 0."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    pos = x > 0.0
    ser = pos & (x < a + 1.0)
    cf = pos & ~ser
    if ser.any():
        xs = x[ser]
        term = np.full_like(xs, 1.0 / a)
        total = term.copy()
        n = 0
        live = np.ones(xs.shape, dtype=bool)
        while live.any() and n < 10_000:
            n += 1
            term[live] *= xs[live] / (a + n)
            total[live] += term[live]
            live[live] = np.abs(term[live]) >= np.abs(total[live]) * 1e-17
        out[ser] = 1.0 - total * np.exp(a * np.log(xs) - xs - math.lgamma(a))
    if cf.any():
        xc = x[cf]
        tiny = 1e-300
        b = xc + 1.0 - a
        c = np.full_like(xc, 1.0 / tiny)
        d = 1.0 / b
        hsum = d.copy()
        # freeze each element's product at its first convergence, like the
        # scalar path's break; late-iteration wobble must not reopen it
        done = np.zeros(xc.shape, dtype=bool)
        for i in range(1, 10_000):
            an = -i * (i - a)
            b = b + 2.0
            d = an * d + b
            np.copyto(d, tiny, where=np.abs(d) < tiny)
            c = b + an / c
            np.copyto(c, tiny, where=np.abs(c) < tiny)
            d = 1.0 / d
            delta = d * c
            hsum = np.where(done, hsum, hsum * delta)
            done |= np.abs(delta - 1.0) < 1e-16
            if done.all():
                break
        out[cf] = np.exp(a * np.log(xc) - xc - math.lgamma(a)) * hsum
    return np.clip(out, 0.0, 1.0)


def _normal_tail_vec(z):
    z = np.asarray(z, dtype=float)
    q = 0.5 * _reg_gamma_q_vec(0.5, 0.5 * z * z)
    return np.where(z >= 0.0, q, 1.0 - q)


def _norm_ppf_approx_vec(p):
    p = np.asarray(p, dtype=float)
    z = np.empty_like(p)
    lo = p < 0.02425
    hi = p > 1.0 - 0.02425
    mid = ~(lo | hi)
    for mask, pp, sign in ((lo, p, 1.0), (hi, 1.0 - p, -1.0)):
        if mask.any():
            q = np.sqrt(-2.0 * np.log(pp[mask]))
            num = ((((_ACK_C[0] * q + _ACK_C[1]) * q + _ACK_C[2]) * q + _ACK_C[3]) * q + _ACK_C[4]) * q + _ACK_C[5]
            den = (((_ACK_D[0] * q + _ACK_D[1]) * q + _ACK_D[2]) * q + _ACK_D[3]) * q + 1.0
            z[mask] = sign * num / den
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        num = (((((_ACK_A[0] * r + _ACK_A[1]) * r + _ACK_A[2]) * r + _ACK_A[3]) * r + _ACK_A[4]) * r + _ACK_A[5]) * q
        den = ((((_ACK_B[0] * r + _ACK_B[1]) * r + _ACK_B[2]) * r + _ACK_B[3]) * r + _ACK_B[4]) * r + 1.0
        z[mid] = num / den
    return z


def _normal_tail_inv_vec(p):
    p = np.asarray(p, dtype=float)
    z = -_norm_ppf_approx_vec(p)
    for _ in range(3):
        err = _normal_tail_vec(z) - p
        pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        z = z + err / pdf
    return z


_CHUNK = 4096


def _chisq_window(hmax):
    return int(math.ceil(9.0 * math.sqrt(hmax + 1.0))) + 15


def _chisq_tail_pdf_vec(k, lam, t):
    """Vector (tail, pdf) for shared dof k, ndarrays lam >= 0 and t > 0.

    Elements are processed in chunks sorted by noncentrality so that one
    Poisson j-window is shared per chunk; each mixture increment is an
    independent log-scale evaluation (no underflow chains).
    """
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(t, dtype=float)
    a = 0.5 * k
    order = np.argsort(lam, kind="stable")
    tail = np.empty_like(lam)
    pdf = np.empty_like(lam)
    for start in range(0, lam.size, _CHUNK):
        idx = order[start:start + _CHUNK]
        h = 0.5 * lam[idx]
        x = np.maximum(0.5 * t[idx], 1e-300)
        hmax = float(h[-1]) if h.size else 0.0
        jlo = max(int(h[0]) - _chisq_window(hmax), 0)
        jhi = int(hmax) + _chisq_window(hmax)
        lnh = np.log(np.maximum(h, 1e-300))
        lnx = np.log(x)
        # anchor at jlo, then sweep upward; every Poisson weight and every
        # tail increment is a fresh log-scale exp so an underflowed value
        # cannot poison the rest of the sweep
        w = np.exp(jlo * lnh - h - math.lgamma(jlo + 1.0))
        c = _reg_gamma_q_vec(a + jlo, x)
        tl = w * c
        pf = w * np.exp((a + jlo - 1.0) * lnx - x - math.lgamma(a + jlo))
        used = w.copy()
        for j in range(jlo + 1, jhi + 2):
            e = np.exp((a + j - 1.0) * lnx - x - math.lgamma(a + j))
            w = np.exp(j * lnh - h - math.lgamma(j + 1.0))
            c = np.minimum(c + e, 1.0)
            tl += w * c
            pf += w * e
            used += w
            if float(np.max(1.0 - used)) < 1e-15:
                break
        tail[idx] = np.clip(tl, 0.0, 1.0)
        pdf[idx] = 0.5 * np.maximum(pf, 0.0)
    return tail, pdf


def _chisq_tail_vec(k, lam, t):
    return _chisq_tail_pdf_vec(k, lam, t)[0]


def _chisq_tail_inv_vec(k, lam, p):
    """Vector upper quantile at shared dof k and probability p."""
    lam = np.asarray(lam, dtype=float)
    z = normal_tail_inv(p)
    t = np.maximum(np.sqrt(2.0 * (k + 2.0 * lam)) * z + k + lam, 1e-6)
    lo = np.zeros_like(t)
    hi = np.full_like(t, np.inf)
    active = np.arange(t.size)
    for _ in range(100):
        ta = t[active]
        tail, pdf = _chisq_tail_pdf_vec(k, lam[active], ta)
        err = tail - p
        live = np.abs(err) >= 1e-12
        active = active[live]
        if active.size == 0:
            break
        ta, err, pdf = ta[live], err[live], pdf[live]
        la, ha = lo[active], hi[active]
        np.copyto(la, ta, where=err > 0.0)
        np.copyto(ha, ta, where=err <= 0.0)
        tn = ta + err / np.maximum(pdf, 1e-300)
        mid = np.where(np.isfinite(ha), 0.5 * (la + ha), 2.0 * np.maximum(ta, 1.0))
        bad = (tn <= la) | (tn >= ha) | ~np.isfinite(tn)
        tn = np.where(bad, mid, tn)
        lo[active], hi[active], t[active] = la, ha, tn
    return t
