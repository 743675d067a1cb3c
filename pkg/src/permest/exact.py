"""Exact permanent oracles.

The permanent of a square matrix is the permutation sum
``per(A) = sum_pi prod_i a[i, pi(i)]`` (no sign alternation).  Two
independent routes are provided: explicit permutation enumeration
(``permanent_naive``, factorial cost, n <= 10) and Ryser's
inclusion-exclusion over column subsets in Gray-code order
(``permanent_ryser``, O(2^n * n), n <= 30).  Results are returned as
sign + natural-log magnitude so callers can compare permanents whose
linear values overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError
from .matrices import require_square

NAIVE_CAP = 10
RYSER_CAP = 30


@dataclass(frozen=True)
class SignedLogValue:
    """sign * exp(log_magnitude); sign == 0 encodes an exact zero (the
    log magnitude is ignored and stored as -inf)."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError("sign must be -1, 0, or +1")
        if self.sign == 0:
            object.__setattr__(self, "log_magnitude", float("-inf"))

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if x == 0.0:
            return cls(0, float("-inf"))
        if not math.isfinite(x):
            raise DomainError("cannot represent a non-finite value")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def value(self) -> float:
        """Linear-scale value; overflows to +-inf when the magnitude
        exceeds float64 range."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    @property
    def log10_magnitude(self) -> float:
        return self.log_magnitude / math.log(10.0)

    def rel_close(self, other: "SignedLogValue", rtol: float = 1e-9) -> bool:
        """Relative comparison in log scale: signs agree and the log
        magnitudes differ by at most ~rtol.  Exact zeros only match exact
        zeros."""
        if self.sign == 0 or other.sign == 0:
            return self.sign == other.sign
        if self.sign != other.sign:
            return False
        return abs(self.log_magnitude - other.log_magnitude) <= math.log1p(rtol)


def permanent_naive(a) -> SignedLogValue:
    """Permanent by explicit permutation enumeration, n <= 10.

    The n! products are accumulated with ``math.fsum`` (exactly rounded
    compensated summation).
    """
    a = require_square(a)
    n = a.shape[0]
    if n > NAIVE_CAP:
        raise CapacityError(f"permanent_naive capped at n <= {NAIVE_CAP}")
    rows = a.tolist()

    def products():
        for perm in permutations(range(n)):
            p = 1.0
            for i in range(n):
                p *= rows[i][perm[i]]
            yield p

    return SignedLogValue.from_float(math.fsum(products()))


@njit(cache=True)
def _ryser_sum(a):  # pragma: no cover - exercised through permanent_ryser
    n = a.shape[0]
    row_sums = np.zeros(n)
    total = 0.0
    comp = 0.0
    abs_mass = 0.0
    sign = 1.0
    for s in range(1, 1 << n):
        # Gray code: the bit flipped between step s-1 and s is ctz(s)
        j = 0
        t = s
        while t & 1 == 0:
            t >>= 1
            j += 1
        added = (((s ^ (s >> 1)) >> j) & 1) == 1
        if added:
            for i in range(n):
                row_sums[i] += a[i, j]
        else:
            for i in range(n):
                row_sums[i] -= a[i, j]
        sign = -sign
        term = sign
        for i in range(n):
            term *= row_sums[i]
        # Kahan-compensated accumulation of the signed terms
        y = term - comp
        acc = total + y
        comp = (acc - total) - y
        total = acc
        abs_mass += abs(term)
    if n & 1:
        total = -total
    return total, abs_mass


def permanent_ryser(a) -> SignedLogValue:
    """Permanent via Ryser's formula,
    ``per(A) = (-1)^n sum_{S != {}} (-1)^{|S|} prod_i sum_{j in S} a[i, j]``,
    iterating column subsets in Gray-code order, n <= 30.

    Terms are accumulated in linear scale with Kahan compensation (log
    scale is impossible mid-sum because terms cancel in sign); for entries
    of order 1 and n <= 30 every intermediate stays representable.  A total
    below the roundoff scale of the accumulated term mass is reported as an
    exact zero: such cancellation is structural (e.g. a matrix with no
    nonzero generalized diagonal) and the residue carries no information.
    """
    a = require_square(a)
    n = a.shape[0]
    if n > RYSER_CAP:
        raise CapacityError(f"permanent_ryser capped at n <= {RYSER_CAP}")
    total, abs_mass = _ryser_sum(np.ascontiguousarray(a))
    if abs(total) <= 32.0 * np.finfo(np.float64).eps * abs_mass:
        total = 0.0
    return SignedLogValue.from_float(float(total))


def identity_plus_offdiag(n: int, alpha: float) -> np.ndarray:
    """The n x n matrix with 1 on the diagonal and alpha/n off the diagonal.

    An approximately doubly stochastic family (row sums 1 + (n-1)alpha/n)
    on which the Gaussian determinant estimator is known to concentrate
    exponentially far from the permanent.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    b = np.full((n, n), alpha / n)
    np.fill_diagonal(b, 1.0)
    return b


def permanent_identity_plus_offdiag(n: int, alpha: float) -> SignedLogValue:
    """Exact permanent of :func:`identity_plus_offdiag` via Ryser (n <= 30)."""
    return permanent_ryser(identity_plus_offdiag(n, alpha))


def _derangements(k: int) -> list[int]:
    """D(0..k) via D(j) = j*D(j-1) + (-1)^j, exact integers."""
    d = [1]
    for j in range(1, k + 1):
        d.append(j * d[-1] + (1 if j % 2 == 0 else -1))
    return d


def permanent_identity_plus_offdiag_series(n: int, alpha: float) -> SignedLogValue:
    """Independent closed-form cross-check for the same permanent.

    Group permutations by their fixed-point count l: each permutation with
    exactly l fixed points contributes (alpha/n)^(n-l), and there are
    C(n, l) * D(n-l) of them (D = derangement numbers), so

        per = sum_l C(n, l) * D(n - l) * (alpha/n)^(n - l).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    d = _derangements(n)
    x = alpha / n
    terms = [math.comb(n, l) * d[n - l] * x ** (n - l) for l in range(n + 1)]
    return SignedLogValue.from_float(math.fsum(terms))
