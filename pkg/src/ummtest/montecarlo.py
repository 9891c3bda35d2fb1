"""Seeded Monte Carlo harness with reproducible parallel fan-out.

Trials are split into fixed-size blocks and every block draws from its own
counter-based stream keyed by ``(seed, block index)``.  Which thread runs a
block therefore has no effect on the numbers it produces, and the final
reduction walks blocks in index order, so an estimate is bit-for-bit
reproducible for a given ``(trials, seed)`` pair at any worker count.

A simulation kernel is any object with

    nu          number of uniform variates consumed per trial
    values(u)   map a ``(trials, nu)`` array of open-interval uniforms to
                per-trial values in ``[0, 1]``

Indicator kernels return 0/1; conditional-expectation kernels may return
fractional values, for which the Wilson interval is conservative (a
Bernoulli draw with the same mean has the largest variance).
"""

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .specfun import _normal_tail_inv_vec

__all__ = [
    "BLOCK",
    "McConfig",
    "McEstimate",
    "block_uniforms",
    "gaussians",
    "wilson_interval",
    "run_kernel",
    "estimate_error_probs",
    "roc_sweep",
]

# trials per stream block; fixed so trial t always lands in block t // BLOCK
BLOCK = 4096

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class McConfig:
    """Simulation size, seed, and fan-out width."""

    trials: int = 100_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 100:
            raise ConfigError(f"trials must be an integer >= 100, got {self.trials!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.workers, (int, np.integer)) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")


@dataclass(frozen=True)
class McEstimate:
    """A single estimated probability with its 95% Wilson interval."""

    p_hat: float
    trials: int
    ci_low: float
    ci_high: float
    seed: int


def block_uniforms(seed, index, rows, nu):
    """Uniform variates for one block, independent of scheduling.

    Draws ``rows * nu`` values row-major from the stream keyed by
    ``(seed, index)``; a short final block consumes a prefix of the same
    stream, so trial ``t`` sees identical variates however the work is
    partitioned.  Values lie strictly inside (0, 1) for inverse-CDF use.
    """
    gen = np.random.Generator(np.random.Philox(key=[seed, index]))
    raw = gen.integers(0, 1 << 53, size=(rows, nu), dtype=np.int64)
    return (raw + 0.5) * 2.0**-53


def gaussians(u):
    """Standard normal deviates from open-interval uniforms (inverse CDF).

    Monotone increasing in u, so kernels that rank-couple through shared
    uniforms (quantile coupling across blocklengths or estimators) keep a
    positive pairing.
    """
    return -_normal_tail_inv_vec(np.asarray(u, dtype=float))


def wilson_interval(p_hat, trials):
    """Two-sided 95% Wilson score interval.

    Stays inside [0, 1] and keeps positive width at p_hat in {0, 1}, where
    the Wald interval collapses; always contains p_hat.
    """
    n = float(trials)
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    half = _Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def _block_value_sum(kernel, seed, index, rows):
    u = block_uniforms(seed, index, rows, kernel.nu)
    vals = np.asarray(kernel.values(u), dtype=float)
    if vals.shape != (rows,):
        raise ConfigError(
            f"kernel returned shape {vals.shape}, expected ({rows},)"
        )
    return float(np.sum(vals))


def run_kernel(kernel, config: McConfig) -> float:
    """Mean kernel value over ``config.trials`` trials.

    Per-block sums are reduced in block order, making the result identical
    for any ``config.workers``.
    """
    n = config.trials
    nblocks = -(-n // BLOCK)
    sums = np.empty(nblocks)
    if config.workers == 1 or nblocks == 1:
        for i in range(nblocks):
            sums[i] = _block_value_sum(kernel, config.seed, i, min(BLOCK, n - i * BLOCK))
    else:
        with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
            futs = {
                pool.submit(
                    _block_value_sum, kernel, config.seed, i, min(BLOCK, n - i * BLOCK)
                ): i
                for i in range(nblocks)
            }
            for fut in concurrent.futures.as_completed(futs):
                sums[futs[fut]] = fut.result()
    return float(np.sum(sums)) / n


def estimate_error_probs(detector, problem, hypothesis, config: McConfig) -> McEstimate:
    """Empirical error probability of ``detector`` under one hypothesis.

    ``hypothesis`` "H0" estimates the false-alarm probability (reject when
    the null generated the data), "H1" the missed-detection probability.
    The detector supplies the simulation kernel via
    ``detector.mc_kernel(problem, hypothesis)``; kernels that cannot be
    built for the given problem raise ConfigError.
    """
    if hypothesis not in ("H0", "H1"):
        raise ConfigError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    make = getattr(detector, "mc_kernel", None)
    if make is None:
        raise ConfigError(
            f"{type(detector).__name__} does not provide a simulation kernel"
        )
    kernel = make(problem, hypothesis)
    p = run_kernel(kernel, config)
    lo, hi = wilson_interval(p, config.trials)
    return McEstimate(p_hat=p, trials=config.trials, ci_low=lo, ci_high=hi, seed=config.seed)


def roc_sweep(detector_family, problem, p_fa_grid, config: McConfig):
    """Simulated tradeoff curve for ``detector_family`` over a grid.

    ``detector_family(p_fa)`` must build the detector operated at nominal
    false-alarm level ``p_fa``.  Both error probabilities are estimated at
    every grid point; the same trial streams are reused across points
    (common random numbers), so sweeps of a nested acceptance-region family
    come out monotone in the threshold.

    Returns a curve with provenance "simulated": ``p_fa`` holds the nominal
    grid, ``p_md``/``ci_*`` the missed-detection estimates, and the
    ``fa_hat``/``fa_ci_*`` fields the measured false-alarm side.
    """
    # deferred import: the detector module builds on this one
    from .nlp_detect import TradeoffCurve

    grid = np.asarray(p_fa_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("p_fa_grid must be a non-empty 1-d grid")
    if np.any(grid <= 0.0) or np.any(grid >= 1.0) or np.any(np.diff(grid) <= 0.0):
        raise ConfigError("p_fa_grid must be strictly increasing inside (0, 1)")

    md = np.empty(grid.size)
    md_lo = np.empty(grid.size)
    md_hi = np.empty(grid.size)
    fa = np.empty(grid.size)
    fa_lo = np.empty(grid.size)
    fa_hi = np.empty(grid.size)
    for i, p in enumerate(grid):
        det = detector_family(float(p))
        e0 = estimate_error_probs(det, problem, "H0", config)
        e1 = estimate_error_probs(det, problem, "H1", config)
        fa[i], fa_lo[i], fa_hi[i] = e0.p_hat, e0.ci_low, e0.ci_high
        md[i], md_lo[i], md_hi[i] = e1.p_hat, e1.ci_low, e1.ci_high
    return TradeoffCurve(
        p_fa=grid,
        p_md=md,
        provenance="simulated",
        problem=getattr(problem, "label", str(problem)),
        ci_low=md_lo,
        ci_high=md_hi,
        fa_hat=fa,
        fa_ci_low=fa_lo,
        fa_ci_high=fa_hi,
    )
