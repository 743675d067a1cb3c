"""Singular spectra, small-singular-value tail experiments, truncated
log-determinants, and concentration experiments.

The tail experiments are empirical: theory bounds quantities like
``P(s_n(W) sqrt(n) <= t)`` by ``t`` plus an exponentially small term, with
non-explicit constants, so the harness measures frequencies over seeded
trials and reports the functional form (monotonicity, doubling ratios,
log-log slopes) rather than absolute constants.

The truncated log-determinant replaces each singular value ``s_{n-l}`` by
``max(s_{n-l}, eps(l))`` with level floors from a geometric schedule
``n_k = n * 2^{-4k}``, ``eps_k = c0 * n_k / sqrt(n)``; the truncated sum is
Lipschitz in the matrix entries, which is what makes Gaussian
concentration applicable to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._mc import chunk_bounds, map_chunks, stacked_gaussians
from .errors import CapacityError, DimensionError, DomainError, NumericError
from .estimator import run_estimator
from .exact import identity_plus_offdiag, permanent_ryser
from .matrices import (
    MeanMatrix,
    SeedSpec,
    VarianceProfile,
    as_matrix,
    matrix_fingerprint,
)

DEFAULT_C0 = 0.05
DEFAULT_SMALLEST_GRID = (0.01, 0.02, 0.05, 0.1)
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values in descending order, all nonnegative."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise DimensionError("expected a nonempty 1-D spectrum")
        if (v < 0).any() or (np.diff(v) > 0).any():
            raise DomainError("spectrum must be descending and nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def smallest(self) -> float:
        return float(self.values[-1])


def singular_values(w) -> SingularSpectrum:
    """Full SVD spectrum of ``w`` (any rectangular shape), descending."""
    w = as_matrix(w)
    try:
        vals = np.linalg.svd(w, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"SVD failed to converge (matrix {matrix_fingerprint(w)[:16]})"
        ) from exc
    return SingularSpectrum(vals)


def mean_norm_check(mean: MeanMatrix) -> dict:
    """Optional diagnostic for the declared operator-norm bound: reports
    ``|B|_op / sqrt(rows)`` and whether it is <= the declared bound."""
    norm = float(np.linalg.norm(mean.matrix, 2))
    rows = mean.matrix.shape[0]
    ratio = norm / math.sqrt(rows)
    return {
        "operator_norm": norm,
        "ratio_to_sqrt_rows": ratio,
        "declared_bound": mean.norm_bound,
        "within_declared_bound": None
        if mean.norm_bound is None
        else bool(ratio <= mean.norm_bound),
    }


def wilson_interval(hits: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == trials else min(1.0, center + half)
    return lo, hi


# ---------------------------------------------------------------------------
# Tail experiments


@dataclass(frozen=True)
class TailExperimentConfig:
    """Configuration of a singular-value tail experiment.

    ``codim`` selects the probed singular value: index ``n - codim`` in
    descending order, so codim 0 probes the smallest singular value and
    codim l probes ``s_{n-l}``.
    """

    profile: VarianceProfile
    codim: int
    trials: int
    grid: tuple[float, ...]
    seed: SeedSpec
    mean: MeanMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        if not self.grid or self.grid[0] <= 0:
            raise DomainError("threshold grid must be positive")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise DomainError("threshold grid must be strictly ascending")
        if self.codim < 0:
            raise DomainError("codim must be >= 0")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.mean is not None and self.mean.matrix.shape != self.profile.shape:
            raise DimensionError("mean shape must match profile shape")


@dataclass(frozen=True)
class TailCurve:
    thresholds: tuple[float, ...]
    counts: tuple[int, ...]
    freqs: tuple[float, ...]
    wilson_low: tuple[float, ...]
    wilson_high: tuple[float, ...]
    trials: int
    event: str

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "counts": list(self.counts),
            "freqs": list(self.freqs),
            "wilson_low": list(self.wilson_low),
            "wilson_high": list(self.wilson_high),
            "trials": self.trials,
            "event": self.event,
        }


def _sample_spectra(
    profile: VarianceProfile,
    mean: MeanMatrix | None,
    trials: int,
    seed: SeedSpec,
    workers: int = 1,
) -> np.ndarray:
    rows, cols = profile.shape
    std = profile.matrix
    mu = None if mean is None else mean.matrix

    def do_chunk(bounds):
        lo, hi = bounds
        w = std * stacked_gaussians(seed, lo, hi, (rows, cols))
        if mu is not None:
            w += mu
        return np.linalg.svd(w, compute_uv=False)

    parts = map_chunks(do_chunk, chunk_bounds(trials, rows * cols), workers)
    return np.vstack(parts)


def _curve(values: np.ndarray, thresholds, trials: int, event: str) -> TailCurve:
    counts, freqs, lows, highs = [], [], [], []
    for t in thresholds:
        k = int(np.sum(values <= t))
        lo, hi = wilson_interval(k, trials)
        counts.append(k)
        freqs.append(k / trials)
        lows.append(lo)
        highs.append(hi)
    return TailCurve(
        tuple(thresholds), tuple(counts), tuple(freqs),
        tuple(lows), tuple(highs), trials, event,
    )


def smallest_sv_tail(config: TailExperimentConfig, workers: int = 1) -> TailCurve:
    """Empirical ``P(s_n(W) * sqrt(n) <= t)`` over the threshold grid, with
    Wilson 95% intervals.  Requires a square profile, codim 0, and at
    least 1000 trials (the curve is meaningless below that)."""
    rows, cols = config.profile.shape
    if rows != cols:
        raise DimensionError("smallest_sv_tail needs a square profile")
    if config.codim != 0:
        raise DomainError("smallest_sv_tail probes codim 0")
    if config.trials < 1000:
        raise DomainError("smallest_sv_tail requires >= 1000 trials")
    spectra = _sample_spectra(
        config.profile, config.mean, config.trials, config.seed, workers
    )
    scaled = spectra[:, -1] * math.sqrt(rows)
    return _curve(scaled, config.grid, config.trials, "s_n * sqrt(n) <= t")


@dataclass(frozen=True)
class IntermediateTailReport:
    curve: TailCurve
    slope: float
    slope_ci_low: float
    slope_ci_high: float
    bootstrap_rounds: int
    codim: int

    def to_dict(self) -> dict:
        d = self.curve.to_dict()
        d.update(
            slope=self.slope,
            slope_ci_low=self.slope_ci_low,
            slope_ci_high=self.slope_ci_high,
            bootstrap_rounds=self.bootstrap_rounds,
            codim=self.codim,
        )
        return d


def _loglog_slope(ts: np.ndarray, freqs: np.ndarray) -> float:
    mask = freqs > 0
    if mask.sum() < 2:
        return float("nan")
    x = np.log(ts[mask])
    y = np.log(freqs[mask])
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def intermediate_sv_tail(
    config: TailExperimentConfig,
    workers: int = 1,
    bootstrap_rounds: int = 500,
) -> IntermediateTailReport:
    """Empirical ``P(s_m(W) <= t * (n-m)/sqrt(n))`` for ``m = n - codim``,
    with the fitted log-log slope of frequency against t and a bootstrap
    95% interval for the slope.

    The probed index must satisfy ``n/2 < m <= n - 4``.
    """
    rows, cols = config.profile.shape
    if rows != cols:
        raise DimensionError("intermediate_sv_tail needs a square profile")
    n = rows
    m = n - config.codim
    if not (n / 2 < m <= n - 4):
        raise DomainError(
            f"codim {config.codim} leaves m={m}; need n/2 < m <= n-4 for n={n}"
        )
    spectra = _sample_spectra(
        config.profile, config.mean, config.trials, config.seed, workers
    )
    s_m = spectra[:, m - 1]
    scale = config.codim / math.sqrt(n)
    thresholds = np.asarray(config.grid)
    curve = _curve(
        s_m / scale, config.grid, config.trials,
        "s_m <= t * (n-m)/sqrt(n)",
    )
    slope = _loglog_slope(thresholds, np.asarray(curve.freqs))

    rng = config.seed.trial(config.trials).rng()
    ordered = np.sort(s_m)
    boot = np.empty(bootstrap_rounds)
    T = config.trials
    for b in range(bootstrap_rounds):
        res = np.sort(ordered[rng.integers(0, T, T)])
        freqs = np.searchsorted(res, thresholds * scale, side="right") / T
        boot[b] = _loglog_slope(thresholds, freqs)
    finite = boot[np.isfinite(boot)]
    if finite.size:
        lo, hi = np.quantile(finite, [0.025, 0.975])
    else:
        lo = hi = float("nan")
    return IntermediateTailReport(
        curve, slope, float(lo), float(hi), bootstrap_rounds, config.codim
    )


# ---------------------------------------------------------------------------
# Truncation schedule and truncated log-determinant


def max_truncation_levels(n: int) -> int:
    """Deepest level count: the largest k with n * 2^{-4k} >= 1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (n.bit_length() - 1) // 4


@dataclass(frozen=True)
class TruncationSchedule:
    """Levels ``n_k = floor(n * 2^{-4k})`` for k = 0..levels, floors
    ``eps_k = c0 * n_k / sqrt(n)``, and tail size ``l_star = n_{levels}``.

    Codimension l is floored at ``eps_k`` for ``l in [n_k + 1, n_{k-1}]``
    and at ``eps_{levels}`` for ``l <= l_star``.
    """

    n: int
    levels: int
    c0: float
    sizes: tuple[int, ...] = field(init=False)
    floors: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.levels < 0:
            raise DomainError("levels must be >= 0")
        if self.c0 <= 0:
            raise DomainError("c0 must be positive")
        if self.levels > max_truncation_levels(self.n):
            raise CapacityError(
                f"levels={self.levels} too deep: need n * 2^(-4k) >= 1, "
                f"max feasible is {max_truncation_levels(self.n)} for n={self.n}"
            )
        sizes = tuple(max(1, self.n // (16 ** k)) for k in range(self.levels + 1))
        if any(b >= a for a, b in zip(sizes, sizes[1:])):
            raise DomainError("level sizes must be strictly decreasing")
        floors = tuple(self.c0 * s / math.sqrt(self.n) for s in sizes)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "floors", floors)

    @property
    def tail_size(self) -> int:
        """l_star, the size of the deepest level."""
        return self.sizes[self.levels]

    def floor_for_codim(self, l: int) -> float:
        if not 0 <= l <= self.n:
            raise DomainError(f"codimension {l} out of range for n={self.n}")
        if l <= self.tail_size:
            return self.floors[self.levels]
        for k in range(self.levels, 0, -1):
            if self.sizes[k] + 1 <= l <= self.sizes[k - 1]:
                return self.floors[k]
        raise DomainError(f"codimension {l} not covered by the level map")

    def floors_by_codim(self) -> np.ndarray:
        """eps(l) for l = 0..n-1, matching the singular values
        s_n, s_{n-1}, ..., s_1 in that order."""
        return np.array([self.floor_for_codim(l) for l in range(self.n)])

    def thresholds(self, tau: float) -> tuple[float, ...]:
        """Concentration thresholds t_k = sqrt(tau) * 2^{k + levels}."""
        if tau <= 0:
            raise DomainError("tau must be positive")
        return tuple(
            math.sqrt(tau) * 2.0 ** (k + self.levels)
            for k in range(self.levels + 1)
        )


def truncation_schedule(
    n: int, levels: int | None = None, c0: float = DEFAULT_C0
) -> TruncationSchedule:
    """Build the schedule; ``levels=None`` picks the deepest feasible."""
    if levels is None:
        levels = max_truncation_levels(n)
    return TruncationSchedule(n=n, levels=levels, c0=c0)


def truncated_log_det(spectrum: SingularSpectrum, schedule: TruncationSchedule) -> float:
    """``sum_l 2 log(max(s_{n-l}, eps(l)))`` over l = 0..n-1.

    Always >= the raw log det^2 and finite even for singular matrices.
    """
    vals = spectrum.values
    if vals.size != schedule.n:
        raise DimensionError(
            f"spectrum size {vals.size} != schedule dimension {schedule.n}"
        )
    ascending = vals[::-1]  # index l holds s_{n-l}
    return float(2.0 * np.sum(np.log(np.maximum(ascending, schedule.floors_by_codim()))))


# ---------------------------------------------------------------------------
# Concentration and moment experiments


@dataclass(frozen=True)
class ConcentrationEntry:
    n: int
    trials: int
    degenerate: int
    mean_log_det2: float
    std_log_det2: float
    mean_truncated: float
    std_truncated: float
    deviation_quantiles: tuple[float, ...]
    deviation_quantiles_truncated: tuple[float, ...]
    levels: int
    c0: float
    tail_size: int
    truncation_bound: float
    within_truncation_bound_fraction: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "degenerate": self.degenerate,
            "mean_log_det2": self.mean_log_det2,
            "std_log_det2": self.std_log_det2,
            "mean_truncated": self.mean_truncated,
            "std_truncated": self.std_truncated,
            "deviation_quantiles": list(self.deviation_quantiles),
            "deviation_quantiles_truncated": list(self.deviation_quantiles_truncated),
            "levels": self.levels,
            "c0": self.c0,
            "tail_size": self.tail_size,
            "truncation_bound": self.truncation_bound,
            "within_truncation_bound_fraction": self.within_truncation_bound_fraction,
        }


@dataclass(frozen=True)
class ConcentrationReport:
    entries: tuple[ConcentrationEntry, ...]
    quantile_probs: tuple[float, ...]
    std_slope: float
    std_slope_truncated: float

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "quantile_probs": list(self.quantile_probs),
            "std_slope": self.std_slope,
            "std_slope_truncated": self.std_slope_truncated,
        }


def concentration_experiment(
    ns,
    trials: int,
    seed: SeedSpec,
    c0: float = DEFAULT_C0,
    levels: int | None = None,
    workers: int = 1,
    quantile_probs: tuple[float, ...] = (0.05, 0.25, 0.5, 0.75, 0.95),
) -> ConcentrationReport:
    """Spread of log det^2 across a dimension sweep of complete profiles.

    Per dimension: std and centered deviation quantiles of log det^2, the
    same for its truncated counterpart (whose mean estimates the truncated
    expectation), and the fraction of draws where the raw and truncated
    values differ by at most ``(3/2) l_star log n``.  Across dimensions:
    the log-log slope of std against n.

    Dimension i of the sweep uses streams ``[i * trials, (i+1) * trials)``
    offset from ``seed``, so entries are reproducible independently.
    """
    ns = [int(n) for n in ns]
    if not ns or any(n < 1 for n in ns):
        raise DomainError("dimension sweep must contain positive sizes")
    if trials < 2:
        raise DomainError("need at least 2 trials")
    entries = []
    for i, n in enumerate(ns):
        sched = truncation_schedule(n, levels=levels, c0=c0)
        sub_seed = SeedSpec(seed.root, seed.stream + i * trials)
        spectra = _sample_spectra(
            VarianceProfile.complete(n), None, trials, sub_seed, workers
        )
        with np.errstate(divide="ignore"):
            raw = 2.0 * np.sum(np.log(spectra), axis=1)
        ok = np.isfinite(raw)
        ascending = spectra[:, ::-1]
        floors = sched.floors_by_codim()
        trunc = 2.0 * np.sum(np.log(np.maximum(ascending, floors[None, :])), axis=1)
        raw_ok = raw[ok]
        if raw_ok.size < 2:
            raise NumericError(f"all draws degenerate at n={n}")
        # vacuous at n=1 (log 1 = 0): report the honest fraction anyway
        bound = 1.5 * sched.tail_size * math.log(n)
        within = float(np.mean(np.abs(raw_ok - trunc[ok]) <= bound))
        dev_q = np.quantile(raw_ok - raw_ok.mean(), quantile_probs)
        dev_q_trunc = np.quantile(trunc - trunc.mean(), quantile_probs)
        entries.append(
            ConcentrationEntry(
                n=n,
                trials=trials,
                degenerate=int((~ok).sum()),
                mean_log_det2=float(raw_ok.mean()),
                std_log_det2=float(np.std(raw_ok, ddof=1)),
                mean_truncated=float(trunc.mean()),
                std_truncated=float(np.std(trunc, ddof=1)),
                deviation_quantiles=tuple(float(q) for q in dev_q),
                deviation_quantiles_truncated=tuple(float(q) for q in dev_q_trunc),
                levels=sched.levels,
                c0=c0,
                tail_size=sched.tail_size,
                truncation_bound=bound,
                within_truncation_bound_fraction=within,
            )
        )
    sizes = np.asarray(ns, dtype=np.float64)
    std_slope = (
        _loglog_slope(sizes, np.asarray([e.std_log_det2 for e in entries]))
        if len(ns) >= 2
        else float("nan")
    )
    std_slope_trunc = (
        _loglog_slope(sizes, np.asarray([e.std_truncated for e in entries]))
        if len(ns) >= 2
        else float("nan")
    )
    return ConcentrationReport(
        entries=tuple(entries),
        quantile_probs=tuple(quantile_probs),
        std_slope=std_slope,
        std_slope_truncated=std_slope_trunc,
    )


def _has_nonzero_generalized_diagonal(a: np.ndarray) -> bool:
    """Kuhn's augmenting-path matching on the nonzero pattern: is there a
    permutation pi with a[i, pi(i)] != 0 for every row i?"""
    n = a.shape[0]
    support = [np.nonzero(a[i])[0].tolist() for i in range(n)]
    match_col = [-1] * n

    def try_row(i, seen):
        for j in support[i]:
            if not seen[j]:
                seen[j] = True
                if match_col[j] == -1 or try_row(match_col[j], seen):
                    match_col[j] = i
                    return True
        return False

    return all(try_row(i, [False] * n) for i in range(n))


@dataclass(frozen=True)
class SecondMomentEntry:
    n: int
    trials: int
    degenerate: int
    mean_sq_log_det2: float
    se_mean_sq: float
    ratio_to_n_cubed: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "degenerate": self.degenerate,
            "mean_sq_log_det2": self.mean_sq_log_det2,
            "se_mean_sq": self.se_mean_sq,
            "ratio_to_n_cubed": self.ratio_to_n_cubed,
        }


@dataclass(frozen=True)
class SecondMomentReport:
    entries: tuple[SecondMomentEntry, ...]
    max_ratio: float

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "max_ratio": self.max_ratio,
        }


def second_moment_check(
    profiles, trials: int, seed: SeedSpec, workers: int = 1
) -> SecondMomentReport:
    """Empirical ``E[(log det^2)^2]`` and its ratio to n^3 across profiles.

    Each profile must be square with a nonzero generalized diagonal
    (otherwise the determinant vanishes identically and the second moment
    is meaningless).  Sweep item i uses streams offset by ``i * trials``.
    """
    if isinstance(profiles, VarianceProfile):
        profiles = [profiles]
    profiles = list(profiles)
    if not profiles:
        raise DomainError("need at least one profile")
    if trials < 2:
        raise DomainError("need at least 2 trials")
    entries = []
    for i, profile in enumerate(profiles):
        rows, cols = profile.shape
        if rows != cols:
            raise DimensionError("second moment check needs square profiles")
        if not _has_nonzero_generalized_diagonal(profile.matrix):
            raise DomainError(
                "profile lacks a nonzero generalized diagonal; det == 0 a.s."
            )
        sub_seed = SeedSpec(seed.root, seed.stream + i * trials)

        def do_chunk(bounds, _profile=profile, _seed=sub_seed, _n=rows):
            lo, hi = bounds
            w = _profile.matrix * stacked_gaussians(_seed, lo, hi, (_n, _n))
            sign, logabs = np.linalg.slogdet(w)
            vals = 2.0 * logabs
            return vals, (sign != 0.0) & np.isfinite(vals)

        parts = map_chunks(do_chunk, chunk_bounds(trials, rows * rows), workers)
        vals = np.concatenate([v for v, _ in parts])
        ok = np.concatenate([k for _, k in parts])
        x2 = vals[ok] ** 2
        if x2.size < 2:
            raise NumericError(f"all draws degenerate for profile {i}")
        entries.append(
            SecondMomentEntry(
                n=rows,
                trials=trials,
                degenerate=int((~ok).sum()),
                mean_sq_log_det2=float(x2.mean()),
                se_mean_sq=float(np.std(x2, ddof=1) / math.sqrt(x2.size)),
                ratio_to_n_cubed=float(x2.mean() / rows**3),
            )
        )
    return SecondMomentReport(
        entries=tuple(entries),
        max_ratio=max(e.ratio_to_n_cubed for e in entries),
    )


def complete_profile_sweep(ns) -> list[VarianceProfile]:
    """All-ones profiles for a dimension sweep."""
    return [VarianceProfile.complete(int(n)) for n in ns]


# ---------------------------------------------------------------------------
# The estimator-defeating family: expectation-of-log vs log-of-expectation


@dataclass(frozen=True)
class GapReport:
    """Jensen gap ``log per(b) - E log det^2(sqrt(b) o G)`` for the matrix
    with unit diagonal and alpha/n off-diagonal.  Nonnegative by Jensen;
    growth linear in n means the estimator concentrates exponentially far
    from the permanent."""

    n: int
    alpha: float
    trials: int
    degenerate: int
    log_per: float
    mean_log_det2: float
    gap: float
    gap_per_n: float
    se_gap: float
    gap_ci_low: float
    gap_ci_high: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "trials": self.trials,
            "degenerate": self.degenerate,
            "log_per": self.log_per,
            "mean_log_det2": self.mean_log_det2,
            "gap": self.gap,
            "gap_per_n": self.gap_per_n,
            "se_gap": self.se_gap,
            "gap_ci_low": self.gap_ci_low,
            "gap_ci_high": self.gap_ci_high,
        }


def jensen_gap_experiment(
    n: int, alpha: float, trials: int, seed: SeedSpec, workers: int = 1
) -> GapReport:
    if n > 20:
        raise CapacityError("gap experiment capped at n <= 20 (exact-oracle range)")
    b = identity_plus_offdiag(n, alpha)
    log_per = permanent_ryser(b).log_magnitude
    run = run_estimator(b, trials, seed, workers=workers)
    x = run.samples
    if x.size < 2:
        raise NumericError("all draws degenerate")
    mean = float(x.mean())
    se = float(np.std(x, ddof=1) / math.sqrt(x.size))
    gap = log_per - mean
    return GapReport(
        n=n,
        alpha=alpha,
        trials=trials,
        degenerate=run.degenerate_count,
        log_per=log_per,
        mean_log_det2=mean,
        gap=gap,
        gap_per_n=gap / n,
        se_gap=se,
        gap_ci_low=gap - _Z95 * se,
        gap_ci_high=gap + _Z95 * se,
    )
