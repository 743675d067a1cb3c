"""Dense matrices, variance profiles, and seeded Gaussian sampling.

Matrices are plain float64 numpy arrays, validated once on entry: two
dimensional, every entry finite.  Random matrices are drawn through
:class:`SeedSpec`, which pins the generator construction so that the same
(root, stream) pair always yields bit-identical samples under a fixed
numpy version.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError

_UINT64_MASK = 0xFFFFFFFFFFFFFFFF


def as_matrix(data) -> np.ndarray:
    """Coerce ``data`` to a 2-D float64 array, rejecting NaN/Inf entries."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.size == 0:
        raise DimensionError("matrix must have at least one row and column")
    if not np.isfinite(a).all():
        raise DomainError("matrix entries must be finite (no NaN/Inf)")
    return a


def require_square(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got {a.shape}")
    return a


def hadamard(a, b) -> np.ndarray:
    """Entrywise (Schur) product of two equally shaped matrices."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def entrywise_sqrt(a) -> np.ndarray:
    """Entrywise square root; every entry must be nonnegative."""
    a = as_matrix(a)
    if (a < 0).any():
        raise DomainError("entrywise_sqrt requires nonnegative entries")
    return np.sqrt(a)


def matrix_fingerprint(a) -> str:
    """SHA-256 of shape and raw row-major bytes; identifies a matrix exactly."""
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    h = hashlib.sha256()
    h.update(repr(a.shape).encode())
    h.update(a.tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus stream index addressing one reproducible sample stream.

    Trial ``t`` of a multi-trial experiment runs on stream ``stream + t``,
    so parallel and serial executions consume identical randomness.

    The sample map is fixed as: PCG64 keyed by
    ``SeedSequence(entropy=root mod 2**64, spawn_key=(stream,))``, normal
    variates via ``Generator.standard_normal`` (ziggurat), filled row-major.
    """

    root: int
    stream: int = 0

    def __post_init__(self):
        if self.stream < 0:
            raise DomainError("stream index must be >= 0")

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.root & _UINT64_MASK, spawn_key=(self.stream,)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def trial(self, t: int) -> "SeedSpec":
        """Seed for trial ``t`` of an experiment rooted at this seed."""
        return SeedSpec(self.root, self.stream + t)


def sample_gaussian_matrix(rows: int, cols: int, seed: SeedSpec) -> np.ndarray:
    """An i.i.d. standard normal matrix, reproducible per SeedSpec."""
    if rows < 1 or cols < 1:
        raise DimensionError("rows and cols must be >= 1")
    return seed.rng().standard_normal((rows, cols))


@dataclass(frozen=True)
class VarianceProfile:
    """Matrix of per-entry standard deviations with a positive floor.

    Every entry is either exactly zero or lies in ``[floor, 1]``; the
    nonzero pattern defines the bipartite support graph of the random
    matrices drawn from this profile.
    """

    matrix: np.ndarray
    floor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        if not (0.0 < self.floor <= 1.0):
            raise DomainError("floor must lie in (0, 1]")
        nz = self.matrix[self.matrix != 0.0]
        if nz.size and ((nz < self.floor).any() or (nz > 1.0).any()):
            raise DomainError(
                "profile entries must be exactly 0 or lie in [floor, 1]"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def complete(cls, n: int, m: int | None = None) -> "VarianceProfile":
        """All-ones profile: every entry N(0,1) (complete support)."""
        return cls(np.ones((n, n if m is None else m)), floor=1.0)

    @classmethod
    def from_zero_one(cls, a) -> "VarianceProfile":
        """Profile from a 0/1 adjacency-style matrix."""
        a = as_matrix(a)
        if not np.isin(a, (0.0, 1.0)).all():
            raise DomainError("expected a 0/1 matrix")
        return cls(a, floor=1.0)


@dataclass(frozen=True)
class MeanMatrix:
    """Entrywise means, optionally annotated with a user-declared operator
    norm bound ``norm_bound`` (never verified automatically; see
    :func:`permest.spectrum.mean_norm_check` for the optional diagnostic)."""

    matrix: np.ndarray
    norm_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        if self.norm_bound is not None and self.norm_bound < 1.0:
            raise DomainError("norm_bound, when given, must be >= 1")


def sample_inhomogeneous_gaussian(
    profile: VarianceProfile,
    mean: MeanMatrix | None,
    seed: SeedSpec,
) -> np.ndarray:
    """One matrix with independent normal entries: per-entry standard
    deviation from ``profile``, per-entry mean from ``mean`` (zero if absent).

    Entries with zero standard deviation and zero mean are exactly 0.0 in
    every sample.
    """
    rows, cols = profile.shape
    g = sample_gaussian_matrix(rows, cols, seed)
    w = profile.matrix * g
    if mean is not None:
        if mean.matrix.shape != profile.shape:
            raise DimensionError(
                f"mean shape {mean.matrix.shape} != profile shape {profile.shape}"
            )
        w = w + mean.matrix
    return w


# ---------------------------------------------------------------------------
# Matrix file formats: CSV (one row per line) and a JSON envelope
# {"rows": r, "cols": c, "data": [row-major]}.  Both readers reject NaN/Inf
# through as_matrix.

def load_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_matrix_json(path)
    return load_matrix_csv(path)


def save_matrix(path, a) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        save_matrix_json(path, a)
    else:
        save_matrix_csv(path, a)


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(tok) for tok in row])
            except ValueError as exc:
                raise DomainError(f"{path}:{line_no}: non-numeric entry") from exc
    if not rows:
        raise DimensionError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionError(f"{path}: ragged rows")
    return as_matrix(rows)


def save_matrix_csv(path, a) -> None:
    a = as_matrix(a)
    with open(path, "w", newline="") as fh:
        for row in a:
            # repr round-trips float64 exactly
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        obj = json.load(fh)
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"{path}: expected rows/cols/data envelope") from exc
    if len(data) != rows * cols:
        raise DimensionError(
            f"{path}: data length {len(data)} != rows*cols = {rows * cols}"
        )
    flat = [float(v) for v in data]
    if any(not math.isfinite(v) for v in flat):
        raise DomainError(f"{path}: matrix entries must be finite")
    return as_matrix(np.asarray(flat).reshape(rows, cols))


def save_matrix_json(path, a) -> None:
    a = as_matrix(a)
    obj = {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [float(v) for v in a.ravel()],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh)
        fh.write("\n")
