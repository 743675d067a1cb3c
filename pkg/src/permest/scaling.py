"""Sinkhorn scaling to an approximately doubly stochastic matrix.

Alternating exact row and column normalization of a nonnegative square
matrix ``a`` yields positive diagonal vectors d1, d2 with
``b = diag(d1) @ a @ diag(d2)`` having all row and column sums near 1.
The permanent transfers multiplicatively:
``per(b) = per(a) * prod(d1) * prod(d2)``, so
``log per(a) = log per(b) - sum(log d1) - sum(log d2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, StructuralError
from .matrices import require_square

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000

# Weak acceptance band for row/column sums when the tolerance target is
# not reached within the iteration budget.
BAND_LOW = 0.5
BAND_HIGH = 2.0


@dataclass(frozen=True)
class ScalingResult:
    d1: np.ndarray
    d2: np.ndarray
    b: np.ndarray
    iterations: int
    max_row_dev: float
    max_col_dev: float
    converged: bool  # True when every sum is within tol of 1


def _scaled(a, d1, d2):
    return d1[:, None] * a * d2[None, :]


def _deviations(b):
    return (
        float(np.max(np.abs(b.sum(axis=1) - 1.0))),
        float(np.max(np.abs(b.sum(axis=0) - 1.0))),
    )


def sinkhorn_scale(
    a, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> ScalingResult:
    """Scale ``a`` toward doubly stochastic by alternating normalization.

    Succeeds when every row and column sum is within ``tol`` of 1, or --
    failing that within ``max_iter`` iterations -- when all sums at least
    lie in [1/2, 2].  Otherwise raises ConvergenceError carrying the best
    result so far.  Rows or columns that are entirely zero are structural
    failures: no scaling can fix them.
    """
    a = require_square(a)
    if (a < 0).any():
        raise DomainError("scaling requires nonnegative entries")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if (a.sum(axis=1) == 0).any():
        raise StructuralError("matrix has an all-zero row")
    if (a.sum(axis=0) == 0).any():
        raise StructuralError("matrix has an all-zero column")

    n = a.shape[0]
    d1 = np.ones(n)
    d2 = np.ones(n)
    iterations = 0
    for _ in range(max_iter):
        b = _scaled(a, d1, d2)
        row_dev, col_dev = _deviations(b)
        if row_dev <= tol and col_dev <= tol:
            break
        d1 = d1 / b.sum(axis=1)
        b = _scaled(a, d1, d2)
        d2 = d2 / b.sum(axis=0)
        iterations += 1

    b = _scaled(a, d1, d2)
    row_dev, col_dev = _deviations(b)
    result = ScalingResult(
        d1=d1,
        d2=d2,
        b=b,
        iterations=iterations,
        max_row_dev=row_dev,
        max_col_dev=col_dev,
        converged=(row_dev <= tol and col_dev <= tol),
    )
    if result.converged:
        return result
    row_sums = b.sum(axis=1)
    col_sums = b.sum(axis=0)
    in_band = (
        (row_sums >= BAND_LOW).all()
        and (row_sums <= BAND_HIGH).all()
        and (col_sums >= BAND_LOW).all()
        and (col_sums <= BAND_HIGH).all()
    )
    if in_band:
        return result
    raise ConvergenceError(
        f"row/column sums not within [{BAND_LOW}, {BAND_HIGH}] after "
        f"{max_iter} iterations (row dev {row_dev:.3g}, col dev {col_dev:.3g})",
        result=result,
    )


def log_permanent_offset(result: ScalingResult) -> float:
    """log per(a) - log per(b) for the scaling b = diag(d1) a diag(d2)."""
    return -float(np.sum(np.log(result.d1)) + np.sum(np.log(result.d2)))


def permanent_band_certificate(result: ScalingResult) -> dict:
    """Row/column sum extremes of the scaled matrix, for reports."""
    rs = result.b.sum(axis=1)
    cs = result.b.sum(axis=0)
    return {
        "row_sum_min": float(rs.min()),
        "row_sum_max": float(rs.max()),
        "col_sum_min": float(cs.min()),
        "col_sum_max": float(cs.max()),
        "within_band": bool(
            rs.min() >= BAND_LOW
            and rs.max() <= BAND_HIGH
            and cs.min() >= BAND_LOW
            and cs.max() <= BAND_HIGH
        ),
        "iterations": result.iterations,
        "max_row_dev": result.max_row_dev,
        "max_col_dev": result.max_col_dev,
    }
