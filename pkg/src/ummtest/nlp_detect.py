"""Detectors for testing the mean of a Gaussian with known covariance.

Three tests of H0: mean = mu0 against a composite alternative at
Mahalanobis distance delta, all expressed in standardized coordinates
z = Sigma^{-1/2}(y - mu0):

* matched filter (``lrt_*``)  -- alternative mean known exactly; accept
  when mu1' z < T;
* energy test (``glrt_*``)    -- direction unknown; accept when ||z||^2
  is below a central chi-square quantile;
* training test (``umm_*``)   -- a noisy labeled sample x of the
  alternative is available with precision rho; accept when
  ||rho x + z||^2 < Q_{(k), ||rho x||^2}^{-1}(p_fa).

The training rule holds its false-alarm level conditionally on every
realization of x, and its tradeoff curve sits between the other two,
approaching the matched filter as rho grows.

Decision rules and analytic curves are pure functions; Monte Carlo
estimation goes through the kernel protocol in ``montecarlo``.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg, montecarlo, specfun
from .errors import ConfigError, DomainError, RangeError
from .montecarlo import McConfig, McEstimate
from .specfun import _chisq_tail_inv_vec, _chisq_tail_vec

__all__ = [
    "NlpProblem",
    "DetectorVerdict",
    "TradeoffCurve",
    "RegionBoundary",
    "LrtDetector",
    "GlrtDetector",
    "UmmTrainDetector",
    "lrt_decide",
    "lrt_curve",
    "glrt_decide",
    "glrt_curve",
    "umm_train_decide",
    "umm_pmd",
    "umm_curve",
    "bayes_lrt_radius",
    "region_boundary",
]


# ---------------------------------------------------------------------------
# problem and result types

@dataclass(eq=False)
class NlpProblem:
    """One location-testing instance.

    The alternative is either an explicit mean vector ``mu1`` or just a
    separation radius ``delta`` (direction unknown); exactly one must be
    given.  ``mu0``/``cov`` default to the origin and the identity.
    ``rho`` is the training precision: a labeled sample x ~ N(mu1, cov/rho)
    accompanies each test observation when rho > 0.
    """

    k: int
    delta: Optional[float] = None
    mu1: Optional[np.ndarray] = None
    mu0: Optional[np.ndarray] = None
    cov: Optional[np.ndarray] = None
    rho: float = 0.0

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise DomainError(f"dimension k must be a positive integer, got {self.k!r}")
        self.k = int(self.k)
        if (self.delta is None) == (self.mu1 is None):
            raise ConfigError("give exactly one of delta or mu1")
        if self.delta is not None:
            self.delta = float(self.delta)
            if not self.delta > 0.0 or not math.isfinite(self.delta):
                raise DomainError(f"delta must be a positive real, got {self.delta!r}")
        if self.mu1 is not None:
            self.mu1 = np.asarray(self.mu1, dtype=float)
            if self.mu1.shape != (self.k,):
                raise ConfigError(f"mu1 must have shape ({self.k},), got {self.mu1.shape}")
        if self.mu0 is not None:
            self.mu0 = np.asarray(self.mu0, dtype=float)
            if self.mu0.shape != (self.k,):
                raise ConfigError(f"mu0 must have shape ({self.k},), got {self.mu0.shape}")
        if self.cov is not None:
            self.cov = np.asarray(self.cov, dtype=float)
            if self.cov.shape != (self.k, self.k):
                raise ConfigError(f"cov must have shape ({self.k}, {self.k})")
        self.rho = float(self.rho)
        if not (self.rho >= 0.0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be a finite nonnegative real, got {self.rho!r}")
        if self.mu1 is not None:
            base = self.mu1 if self.mu0 is None else self.mu1 - self.mu0
            if not np.linalg.norm(base) > 0.0:
                raise DomainError("mu1 must differ from the null mean")

    def standardize(self, y):
        """Map raw observations to standardized coordinates."""
        y = np.asarray(y, dtype=float)
        if self.cov is None:
            return y - self.mu0 if self.mu0 is not None else y
        mu0 = self.mu0 if self.mu0 is not None else np.zeros(self.k)
        return linalg.standardize(y, mu0, self.cov)

    def standardized_mu1(self):
        """Alternative mean in standardized coordinates.

        With a radius-only alternative the direction is immaterial (every
        statistic below depends on the mean through its norm alone), so the
        first coordinate axis stands in.
        """
        if self.mu1 is None:
            z = np.zeros(self.k)
            z[0] = self.delta
            return z
        return self.standardize(self.mu1)

    def separation(self) -> float:
        """Mahalanobis distance between the two hypothesis means."""
        if self.delta is not None:
            return self.delta
        return float(np.linalg.norm(self.standardized_mu1()))

    @property
    def label(self) -> str:
        return f"nlp k={self.k} delta={self.separation():g} rho={self.rho:g}"


@dataclass(frozen=True)
class DetectorVerdict:
    decision: str  # "accept-H0" | "reject-H0"
    statistic: float
    threshold: float

    @property
    def accepted(self) -> bool:
        return self.decision == "accept-H0"


def _verdict(stat: float, thr: float) -> DetectorVerdict:
    # ties reject: a measure-zero event, pinned one way for determinism
    dec = "accept-H0" if stat < thr else "reject-H0"
    return DetectorVerdict(dec, float(stat), float(thr))


@dataclass(eq=False)
class TradeoffCurve:
    """Error tradeoff along a false-alarm grid.

    ``p_fa`` is the nominal grid.  Analytic curves fill only ``p_md``;
    simulated curves add the missed-detection interval and, when the sweep
    measured it, the empirical false-alarm side.
    """

    p_fa: np.ndarray
    p_md: np.ndarray
    provenance: str  # "analytic" | "simulated"
    problem: str = ""
    ci_low: Optional[np.ndarray] = None
    ci_high: Optional[np.ndarray] = None
    fa_hat: Optional[np.ndarray] = None
    fa_ci_low: Optional[np.ndarray] = None
    fa_ci_high: Optional[np.ndarray] = None

    @property
    def points(self):
        return list(zip(self.p_fa.tolist(), self.p_md.tolist()))


@dataclass(eq=False)
class RegionBoundary:
    """Acceptance-region boundary: a sphere or a hyperplane.

    Spheres carry ``center``/``radius``; hyperplanes carry a ``normal``
    and the ``offset`` t of the set {z : normal' z = t}.
    """

    shape: str  # "sphere" | "hyperplane"
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    normal: Optional[np.ndarray] = None
    offset: Optional[float] = None


# ---------------------------------------------------------------------------
# shared argument checks

def _check_pfa(p_fa):
    if not (0.0 < p_fa < 1.0):
        raise DomainError(f"p_fa must lie in (0, 1), got {p_fa!r}")


def _check_grid(grid):
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("p_fa grid must be a non-empty 1-d sequence")
    if np.any(g <= 0.0) or np.any(g >= 1.0) or np.any(np.diff(g) <= 0.0):
        raise DomainError("p_fa grid must be strictly increasing inside (0, 1)")
    return g


def _check_hypothesis(hypothesis):
    if hypothesis not in ("H0", "H1"):
        raise ConfigError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")


def _rowsq(a):
    return np.einsum("ij,ij->i", a, a)


# ---------------------------------------------------------------------------
# decision rules

def lrt_decide(y, problem: NlpProblem, threshold: float) -> DetectorVerdict:
    """Matched-filter verdict: statistic mu1' z against a fixed threshold."""
    if problem.mu1 is None:
        raise ConfigError("matched filter needs an explicit alternative mean")
    z = problem.standardize(y)
    m = problem.standardized_mu1()
    return _verdict(float(m @ z), threshold)


def glrt_decide(y, problem: NlpProblem, p_fa) -> DetectorVerdict:
    """Energy-test verdict at significance level p_fa."""
    _check_pfa(p_fa)
    z = problem.standardize(y)
    thr = specfun.chisq_tail_inv(problem.k, 0.0, p_fa)
    return _verdict(float(z @ z), thr)


def _train_verdict(zx, zy, rho, k, p_fa) -> DetectorVerdict:
    # shared by the training test here and the plug-in rule in lan_models,
    # so the two agree bit-for-bit on identical standardized inputs
    s = rho * zx + zy
    th0 = rho * rho * float(zx @ zx)
    thr = specfun.chisq_tail_inv(k, th0, p_fa)
    return _verdict(float(s @ s), thr)


def umm_train_decide(x, y, problem: NlpProblem, p_fa) -> DetectorVerdict:
    """Training-test verdict; the threshold adapts to the training sample.

    The acceptance sphere for z is centered at -rho zx with squared radius
    equal to the noncentral quantile at noncentrality ||rho zx||^2, which
    makes the conditional false-alarm probability exactly p_fa for every
    x.  rho = 0 reduces to the energy test.
    """
    _check_pfa(p_fa)
    zx = problem.standardize(x)
    zy = problem.standardize(y)
    return _train_verdict(zx, zy, problem.rho, problem.k, p_fa)


# ---------------------------------------------------------------------------
# analytic curves

def lrt_curve(delta, p_fa_grid) -> TradeoffCurve:
    """Matched-filter tradeoff: Q^{-1}(p_fa) + Q^{-1}(p_md) = delta."""
    delta = float(delta)
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    g = _check_grid(p_fa_grid)
    md = np.array([specfun.normal_tail(delta - specfun.normal_tail_inv(p)) for p in g])
    return TradeoffCurve(g, md, "analytic", f"lrt delta={delta:g}")


def glrt_curve(k, delta, p_fa_grid) -> TradeoffCurve:
    """Energy-test tradeoff; also the best guaranteed-level tradeoff without training."""
    delta = float(delta)
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    g = _check_grid(p_fa_grid)
    lam = delta * delta
    md = np.array([
        1.0 - specfun.chisq_tail(k, lam, specfun.chisq_tail_inv(k, 0.0, p)) for p in g
    ])
    return TradeoffCurve(g, md, "analytic", f"glrt k={k} delta={delta:g}")


# ---------------------------------------------------------------------------
# Monte Carlo kernels (see the kernel protocol in montecarlo)

class _LrtKernel:
    """The matched-filter statistic is scalar: mu1' z ~ N(0 or delta^2, delta^2)."""

    nu = 1

    def __init__(self, delta, threshold, under_h1):
        self.delta = delta
        self.threshold = threshold
        self.under_h1 = under_h1

    def values(self, u):
        stat = self.delta * montecarlo.gaussians(u[:, 0])
        if self.under_h1:
            stat += self.delta * self.delta
            return (stat < self.threshold).astype(float)
        return (stat >= self.threshold).astype(float)


class _QuadKernel:
    """||center + z||^2 against a fixed threshold, z ~ N(mean, I)."""

    def __init__(self, k, mean, center, threshold, under_h1):
        self.nu = k
        self.mean = mean  # None under H0
        self.center = center  # None for the energy test
        self.threshold = threshold
        self.under_h1 = under_h1

    def values(self, u):
        z = montecarlo.gaussians(u)
        if self.mean is not None:
            z = z + self.mean
        if self.center is not None:
            z = z + self.center
        stat = _rowsq(z)
        miss = stat < self.threshold
        return (miss if self.under_h1 else ~miss).astype(float)


class _UmmTrainKernel:
    """Joint draw of training and test data; per-trial adaptive threshold."""

    def __init__(self, k, mu1, rho, p_fa, under_h1):
        self.nu = 2 * k
        self.k = k
        self.mu1 = mu1
        self.rho = rho
        self.p_fa = p_fa
        self.under_h1 = under_h1

    def values(self, u):
        g = montecarlo.gaussians(u)
        # training is labeled with the alternative under both hypotheses
        rx = self.rho * self.mu1 + math.sqrt(self.rho) * g[:, : self.k]
        z = g[:, self.k :]
        if self.under_h1:
            z = z + self.mu1
        stat = _rowsq(rx + z)
        thr = _chisq_tail_inv_vec(self.k, _rowsq(rx), self.p_fa)
        miss = stat < thr
        return (miss if self.under_h1 else ~miss).astype(float)


class _UmmPmdKernel:
    """Rao-Blackwellized miss probability: exact test-side tail given training."""

    def __init__(self, k, delta, rho, p_fa):
        self.nu = k
        self.k = k
        self.rho = rho
        self.p_fa = p_fa
        self.mu1 = np.zeros(k)
        self.mu1[0] = delta

    def values(self, u):
        g = montecarlo.gaussians(u)
        rx = self.rho * self.mu1 + math.sqrt(self.rho) * g  # rho X, X ~ N(mu1, I/rho)
        th0 = _rowsq(rx)
        th1 = _rowsq(rx + self.mu1)
        thr = _chisq_tail_inv_vec(self.k, th0, self.p_fa)
        return 1.0 - _chisq_tail_vec(self.k, th1, thr)


# ---------------------------------------------------------------------------
# detector objects (decision + simulation kernel under one handle)

class LrtDetector:
    """Matched filter operated at a fixed threshold or a nominal level.

    The level form resolves threshold = delta * Q^{-1}(p_fa) against the
    problem's separation.
    """

    def __init__(self, threshold=None, p_fa=None):
        if (threshold is None) == (p_fa is None):
            raise ConfigError("give exactly one of threshold, p_fa")
        if p_fa is not None:
            _check_pfa(p_fa)
        self.threshold = threshold
        self.p_fa = p_fa

    def _resolve(self, problem):
        if self.threshold is not None:
            return float(self.threshold)
        return problem.separation() * specfun.normal_tail_inv(self.p_fa)

    def decide(self, y, problem):
        return lrt_decide(y, problem, self._resolve(problem))

    def mc_kernel(self, problem, hypothesis):
        _check_hypothesis(hypothesis)
        return _LrtKernel(problem.separation(), self._resolve(problem), hypothesis == "H1")


class GlrtDetector:
    """Energy test at significance level p_fa."""

    def __init__(self, p_fa):
        _check_pfa(p_fa)
        self.p_fa = p_fa

    def decide(self, y, problem):
        return glrt_decide(y, problem, self.p_fa)

    def mc_kernel(self, problem, hypothesis):
        _check_hypothesis(hypothesis)
        thr = specfun.chisq_tail_inv(problem.k, 0.0, self.p_fa)
        mean = problem.standardized_mu1() if hypothesis == "H1" else None
        return _QuadKernel(problem.k, mean, None, thr, hypothesis == "H1")


class UmmTrainDetector:
    """Training test at level p_fa, optionally conditioned on a fixed x.

    With ``x`` given, simulation freezes the training sample and draws only
    test data (the conditional-significance check); otherwise each trial
    draws a fresh x ~ N(mu1, I/rho).
    """

    def __init__(self, p_fa, x=None):
        _check_pfa(p_fa)
        self.p_fa = p_fa
        self.x = None if x is None else np.asarray(x, dtype=float)

    def decide(self, x, y, problem):
        return umm_train_decide(x, y, problem, self.p_fa)

    def mc_kernel(self, problem, hypothesis):
        _check_hypothesis(hypothesis)
        k = problem.k
        rho = problem.rho
        under_h1 = hypothesis == "H1"
        mean = problem.standardized_mu1() if under_h1 else None
        if self.x is not None:
            zx = problem.standardize(self.x)
            th0 = rho * rho * float(zx @ zx)
            thr = specfun.chisq_tail_inv(k, th0, self.p_fa)
            return _QuadKernel(k, mean, rho * zx, thr, under_h1)
        if rho == 0.0:
            thr = specfun.chisq_tail_inv(k, 0.0, self.p_fa)
            return _QuadKernel(k, mean, None, thr, under_h1)
        return _UmmTrainKernel(k, problem.standardized_mu1(), rho, self.p_fa, under_h1)


# ---------------------------------------------------------------------------
# training-test performance

def umm_pmd(p_fa, delta, rho, k, mc: McConfig) -> McEstimate:
    """Missed-detection probability of the training test.

    Averages the exact conditional miss probability
    1 - Q_{(k), th1}(Q_{(k), th0}^{-1}(p_fa)) over training draws, where
    th0 = ||rho X||^2 and th1 = ||rho X + mu1||^2 share the same X.  The
    result depends on mu1 only through delta, so the integration runs along
    a fixed axis.  rho = 0 needs no training average and returns the exact
    energy-test value with a zero-width interval.
    """
    _check_pfa(p_fa)
    delta = float(delta)
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    rho = float(rho)
    if not (rho >= 0.0 and math.isfinite(rho)):
        raise DomainError(f"rho must be a finite nonnegative real, got {rho!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"dimension k must be a positive integer, got {k!r}")
    if rho == 0.0:
        v = 1.0 - specfun.chisq_tail(k, delta * delta, specfun.chisq_tail_inv(k, 0.0, p_fa))
        return McEstimate(p_hat=v, trials=mc.trials, ci_low=v, ci_high=v, seed=mc.seed)
    p = montecarlo.run_kernel(_UmmPmdKernel(int(k), delta, rho, p_fa), mc)
    lo, hi = montecarlo.wilson_interval(p, mc.trials)
    return McEstimate(p_hat=p, trials=mc.trials, ci_low=lo, ci_high=hi, seed=mc.seed)


def umm_curve(delta, rho, k, p_fa_grid, mc: McConfig) -> TradeoffCurve:
    """Training-test tradeoff along a grid: pointwise umm_pmd."""
    g = _check_grid(p_fa_grid)
    if float(rho) == 0.0:
        curve = glrt_curve(k, delta, g)
        curve.problem = f"umm k={k} delta={float(delta):g} rho=0"
        return curve
    md = np.empty(g.size)
    lo = np.empty(g.size)
    hi = np.empty(g.size)
    for i, p in enumerate(g):
        est = umm_pmd(float(p), delta, rho, k, mc)
        md[i], lo[i], hi[i] = est.p_hat, est.ci_low, est.ci_high
    return TradeoffCurve(
        g, md, "simulated", f"umm k={k} delta={float(delta):g} rho={float(rho):g}",
        ci_low=lo, ci_high=hi,
    )


def bayes_lrt_radius(delta, rho, k, x_norm, T) -> float:
    """Radius of the training-sample likelihood-ratio acceptance sphere.

    The likelihood-ratio region for the spherical prior reduces to
    ||rho x + y|| < psi with psi = c_k^{-1}(T c_k(delta ||rho x||)) / delta,
    where c_k is the spherical normalizing constant; everything runs in log
    scale.  Thresholds outside the constant's range have no sphere: the
    region is empty (T too large) or the whole space (T too small), and the
    two cases raise distinct messages.
    """
    delta = float(delta)
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    rho = float(rho)
    if not (rho >= 0.0 and math.isfinite(rho)):
        raise DomainError(f"rho must be a finite nonnegative real, got {rho!r}")
    x_norm = float(x_norm)
    if not x_norm >= 0.0:
        raise DomainError(f"x_norm must be nonnegative, got {x_norm!r}")
    T = float(T)
    if not T > 0.0:
        raise DomainError(f"threshold T must be positive, got {T!r}")
    tau0 = delta * rho * x_norm
    log_target = math.log(T) + specfun.log_vmf_const(k, tau0)
    if log_target > specfun.log_vmf_const(k, 0.0) + 1e-12:
        raise RangeError("empty acceptance region: T c_k(delta ||rho x||) exceeds c_k(0)")
    try:
        tau = specfun.vmf_const_inv(k, log_target)
    except RangeError as exc:
        raise RangeError(f"acceptance region is the whole space: {exc}") from exc
    return tau / delta


def region_boundary(problem: NlpProblem, detector: str, p_fa, x=None) -> RegionBoundary:
    """Acceptance-region boundary in standardized coordinates.

    The matched filter gives the hyperplane mu1' z = T; the energy test an
    origin-centered sphere; the training test a sphere centered at -rho zx
    whose radius grows with the training noncentrality.
    """
    _check_pfa(p_fa)
    k = problem.k
    if detector == "lrt":
        m = problem.standardized_mu1()
        t = problem.separation() * specfun.normal_tail_inv(p_fa)
        return RegionBoundary("hyperplane", normal=m, offset=float(t))
    if detector == "glrt":
        r = math.sqrt(specfun.chisq_tail_inv(k, 0.0, p_fa))
        return RegionBoundary("sphere", center=np.zeros(k), radius=r)
    if detector == "umm_train":
        if x is None:
            raise ConfigError("training-test boundary needs the training sample x")
        zx = problem.standardize(x)
        rho = problem.rho
        th0 = rho * rho * float(zx @ zx)
        r = math.sqrt(specfun.chisq_tail_inv(k, th0, p_fa))
        return RegionBoundary("sphere", center=-rho * zx, radius=r)
    raise ConfigError(f"unknown detector {detector!r}; expected lrt, glrt, or umm_train")
