"""The Gaussian determinant estimator for permanents.

For a nonnegative square matrix ``a``, draw G with i.i.d. standard normal
entries and evaluate ``det^2(sqrt(a) o G)`` (entrywise square root,
entrywise product).  This squared determinant is an unbiased estimator of
``per(a)``; the module records its natural log per trial and aggregates
log-scale statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._mc import chunk_bounds, map_chunks, stacked_gaussians
from .errors import DomainError
from .exact import SignedLogValue, permanent_ryser
from .matrices import SeedSpec, entrywise_sqrt, matrix_fingerprint, require_square


def log_det_squared(w) -> float | None:
    """``log det^2(w)`` from a partial-pivoting LU factorization
    (2 * sum of log |pivot|; the determinant sign is irrelevant once
    squared).  Returns None on a degenerate draw: an exactly singular
    factorization or a non-finite result."""
    w = require_square(w)
    sign, logabs = np.linalg.slogdet(w)
    if sign == 0.0 or not np.isfinite(logabs):
        return None
    return 2.0 * float(logabs)


def log_sum_exp(x) -> float:
    """Stable log(sum(exp(x))) for a nonempty 1-D array."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise DomainError("log_sum_exp of an empty array")
    hi = float(np.max(x))
    if not math.isfinite(hi):
        return hi
    return hi + math.log(float(np.sum(np.exp(x - hi))))


@dataclass(frozen=True)
class EstimatorRun:
    """Seeded batch of log det^2 samples.  Degenerate draws (singular or
    non-finite) are excluded from ``samples`` and counted instead, so the
    recorded values are always finite."""

    samples: np.ndarray
    seed: SeedSpec
    degenerate_count: int
    matrix_fingerprint: str
    trials: int


@dataclass(frozen=True)
class EstimatorStats:
    mean_log_det2: float
    std_log_det2: float
    log_per_estimate: SignedLogValue
    sample_count: int


def run_estimator(a, samples: int, seed: SeedSpec, workers: int = 1) -> EstimatorRun:
    """Draw ``samples`` independent copies of log det^2(sqrt(a) o G).

    Trial t uses stream ``seed.stream + t``; trials are evaluated in fixed
    chunks whose layout does not depend on ``workers``, so parallel and
    serial runs record identical sample arrays.
    """
    a = require_square(a)
    if (a < 0).any():
        raise DomainError("estimator requires nonnegative entries")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    half = entrywise_sqrt(a)
    n = a.shape[0]

    def do_chunk(bounds):
        lo, hi = bounds
        g = stacked_gaussians(seed, lo, hi, (n, n))
        w = half * g
        sign, logabs = np.linalg.slogdet(w)
        vals = 2.0 * logabs
        ok = (sign != 0.0) & np.isfinite(vals)
        return vals, ok

    parts = map_chunks(do_chunk, chunk_bounds(samples, n * n), workers)
    vals = np.concatenate([v for v, _ in parts])
    ok = np.concatenate([k for _, k in parts])
    return EstimatorRun(
        samples=vals[ok],
        seed=seed,
        degenerate_count=int((~ok).sum()),
        matrix_fingerprint=matrix_fingerprint(a),
        trials=samples,
    )


def summarize(run: EstimatorRun) -> EstimatorStats:
    """Mean/std (ddof=1) of the log det^2 samples, plus the unbiased
    permanent estimate mean(det^2) computed as log-sum-exp minus log N so
    it never overflows."""
    x = run.samples
    if x.size < 2:
        raise DomainError("need at least 2 non-degenerate samples")
    lse = log_sum_exp(x) - math.log(x.size)
    return EstimatorStats(
        mean_log_det2=float(np.mean(x)),
        std_log_det2=float(np.std(x, ddof=1)),
        log_per_estimate=SignedLogValue(1, lse),
        sample_count=int(x.size),
    )


@dataclass(frozen=True)
class ErrorReport:
    """Realized absolute log errors of the estimator against the exact
    permanent, with the sqrt(n log n) normalizer the error theory is
    phrased in."""

    log_per_exact: float
    abs_log_errors: np.ndarray
    median_abs_error: float
    max_abs_error: float
    normalizer: float
    run: EstimatorRun


def estimator_error_report(
    a, samples: int, seed: SeedSpec, workers: int = 1
) -> ErrorReport:
    """Per-sample |log det^2 - log per(a)| for n <= 30 (exact-oracle range)."""
    a = require_square(a)
    n = a.shape[0]
    per = permanent_ryser(a)
    if per.sign != 1:
        raise DomainError("error report needs per(a) > 0")
    run = run_estimator(a, samples, seed, workers=workers)
    if run.samples.size == 0:
        raise DomainError("all draws degenerate; no error distribution")
    errs = np.abs(run.samples - per.log_magnitude)
    if n > 1:
        normalizer = math.sqrt(n * math.log(n))
    else:
        normalizer = float("nan")  # log 1 = 0: no meaningful scale
    return ErrorReport(
        log_per_exact=per.log_magnitude,
        abs_log_errors=errs,
        median_abs_error=float(np.median(errs)),
        max_abs_error=float(np.max(errs)),
        normalizer=normalizer,
        run=run,
    )
