"""Bipartite graphs and the broad-connectedness checker.

A bipartite graph here has ``m`` left vertices (matrix rows) and ``n``
right vertices (matrix columns); ``j -> i`` means left vertex ``j`` is
connected to right vertex ``i``.

The graph is (delta, kappa)-broadly connected when

  1. every right vertex has degree >= delta*m,
  2. every left vertex has degree >= delta*n,
  3. for every nonempty J of left vertices, the broad neighbor set
     ``I(J) = {i : at least floor(delta/2 * |J|) members of J point to i}``
     has size at least ``min((1+kappa)*|J|, n)``.

Condition 3 only needs checking for ``|J| <= (1 - delta/2) * m``: once
condition 1 holds, any larger J has every right vertex as a broad
neighbor, since i can miss at most ``m - |J| <= (delta/2) m`` members of J.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations, islice
from pathlib import Path

import numpy as np

from .errors import CapacityError, DimensionError, DomainError
from .matrices import SeedSpec, as_matrix, require_square

VERIFIED = "verified"
REFUTED = "refuted"
NOT_REFUTED = "not_refuted"

# Absorbs float representation error in products like (delta/2)*|J| that are
# mathematically integral; used identically by the checker and by
# broad_neighbors so witnesses replay exactly.
_EPS = 1e-9

DEFAULT_EXHAUSTIVE_CAP = 22
_BATCH = 4096


@dataclass(frozen=True)
class BipartiteGraph:
    """Adjacency lists: for each left vertex, its sorted right neighbors."""

    m: int
    n: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DimensionError("graph sides must be >= 1")
        if len(self.neighbors) != self.m:
            raise DimensionError("need one neighbor list per left vertex")
        canonical = []
        for j, nbrs in enumerate(self.neighbors):
            t = tuple(sorted(set(int(i) for i in nbrs)))
            if len(t) != len(nbrs):
                raise DomainError(f"duplicate edges at left vertex {j}")
            if t and (t[0] < 0 or t[-1] >= self.n):
                raise DomainError(f"neighbor index out of range at left vertex {j}")
            canonical.append(t)
        object.__setattr__(self, "neighbors", tuple(canonical))

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.m, self.n))
        for j, nbrs in enumerate(self.neighbors):
            a[j, list(nbrs)] = 1.0
        return a

    def left_degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.neighbors], dtype=np.int64)

    def right_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for nbrs in self.neighbors:
            for i in nbrs:
                deg[i] += 1
        return deg

    def edges(self) -> list[tuple[int, int]]:
        return [(j, i) for j, nbrs in enumerate(self.neighbors) for i in nbrs]

    @classmethod
    def complete(cls, m: int, n: int) -> "BipartiteGraph":
        return cls(m, n, tuple(tuple(range(n)) for _ in range(m)))

    @classmethod
    def perfect_matching(cls, n: int) -> "BipartiteGraph":
        return cls(n, n, tuple((j,) for j in range(n)))

    @classmethod
    def from_edges(cls, m: int, n: int, edges) -> "BipartiteGraph":
        nbrs = [[] for _ in range(m)]
        for j, i in edges:
            if not (0 <= j < m):
                raise DomainError(f"left vertex {j} out of range")
            nbrs[j].append(i)
        return cls(m, n, tuple(tuple(x) for x in nbrs))


def graph_from_matrix(a) -> BipartiteGraph:
    """Support graph of a matrix: edge j -> i whenever ``a[j, i] != 0``."""
    a = as_matrix(a)
    m, n = a.shape
    nbrs = tuple(tuple(np.nonzero(a[j])[0].tolist()) for j in range(m))
    return BipartiteGraph(m, n, nbrs)


def graph_from_threshold(b, r: float) -> BipartiteGraph:
    """Threshold graph of a square matrix: edge i -> j iff ``b[i, j] >= r/n``."""
    b = require_square(b)
    if r <= 0:
        raise DomainError("threshold parameter r must be positive")
    n = b.shape[0]
    cut = r / n
    nbrs = tuple(tuple(np.nonzero(b[i] >= cut)[0].tolist()) for i in range(n))
    return BipartiteGraph(n, n, nbrs)


def broad_threshold(delta: float, size: int) -> int:
    """floor(delta/2 * size), nudged so mathematically integral products do
    not land one ulp short. Threshold 0 admits every right vertex."""
    return int(math.floor(delta / 2.0 * size + _EPS))


def broad_neighbors(g: BipartiteGraph, left_set, delta: float) -> set[int]:
    """The broad neighbor set I(J): right vertices adjacent to at least
    ``floor(delta/2 * |J|)`` members of J."""
    J = sorted(set(int(j) for j in left_set))
    if not J:
        raise DomainError("left set J must be nonempty")
    if J[0] < 0 or J[-1] >= g.m:
        raise DomainError("left set J must be a subset of the left vertices")
    thresh = broad_threshold(delta, len(J))
    count = np.zeros(g.n, dtype=np.int64)
    for j in J:
        for i in g.neighbors[j]:
            count[i] += 1
    return set(np.nonzero(count >= thresh)[0].tolist())


@dataclass(frozen=True)
class ConnectivityParams:
    delta: float
    kappa: float

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise DomainError("delta must lie in (0, 1]")
        if self.kappa <= 0.0:
            raise DomainError("kappa must be positive")
        if not self.delta / 2.0 > self.kappa:
            raise DomainError("parameters must satisfy delta/2 > kappa")


@dataclass(frozen=True)
class ConnectivityReport:
    verdict: str
    witness: dict | None
    subsets_examined: int
    mode: str
    delta: float
    kappa: float
    max_cardinality: int = 0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "subsets_examined": self.subsets_examined,
            "mode": self.mode,
            "delta": self.delta,
            "kappa": self.kappa,
            "max_cardinality": self.max_cardinality,
            "notes": self.notes,
        }


def _degree_violation(g: BipartiteGraph, p: ConnectivityParams) -> dict | None:
    right = g.right_degrees()
    need_right = p.delta * g.m
    for i in range(g.n):
        if right[i] + _EPS < need_right:
            return {
                "condition": 1,
                "side": "right",
                "vertex": int(i),
                "degree": int(right[i]),
                "required": need_right,
            }
    left = g.left_degrees()
    need_left = p.delta * g.n
    for j in range(g.m):
        if left[j] + _EPS < need_left:
            return {
                "condition": 2,
                "side": "left",
                "vertex": int(j),
                "degree": int(left[j]),
                "required": need_left,
            }
    return None


def pruned_cardinality_bound(g: BipartiteGraph, p: ConnectivityParams) -> int:
    """Largest subset size that needs checking: ceil((1 - delta/2) * m),
    clamped to m."""
    return min(g.m, int(math.ceil((1.0 - p.delta / 2.0) * g.m - _EPS)))


def _expansion_violation_batch(
    adj: np.ndarray, subsets: np.ndarray, p: ConnectivityParams
) -> tuple[int, int] | None:
    """Check condition 3 on a batch of equally sized subsets.

    ``subsets`` is a (batch, c) array of left-vertex indices.  Returns the
    (row, broad neighbor count) of the first violating subset, or None.
    """
    batch, c = subsets.shape
    n = adj.shape[1]
    indicator = np.zeros((batch, adj.shape[0]))
    indicator[np.arange(batch)[:, None], subsets] = 1.0
    counts = indicator @ adj  # integral-valued in float64
    thresh = broad_threshold(p.delta, c)
    sizes = (counts >= thresh).sum(axis=1)
    need = min((1.0 + p.kappa) * c, float(n))
    bad = np.nonzero(sizes + _EPS < need)[0]
    if bad.size:
        row = int(bad[0])
        return row, int(sizes[row])
    return None


def check_broadly_connected(
    g: BipartiteGraph,
    p: ConnectivityParams,
    mode: str = "exhaustive",
    trials: int | None = None,
    seed: SeedSpec | int | None = None,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
    prune: bool = True,
) -> ConnectivityReport:
    """Verify or refute (delta, kappa)-broad connectedness.

    Degree conditions (1) and (2) are always checked exactly.  In
    ``exhaustive`` mode, condition (3) is checked over every nonempty J up
    to the pruned cardinality bound (subsets grouped by cardinality,
    lexicographic within, first violation wins), and the verdict is
    ``verified`` or ``refuted``.  In ``randomized`` mode, ``trials``
    uniform subsets across those cardinalities are sampled with ``seed``;
    the verdict is ``refuted`` (with witness) or ``not_refuted``.

    ``prune=False`` disables the cardinality bound (validation only; the
    verdicts provably agree).
    """
    mode = mode.lower()
    if mode not in ("exhaustive", "randomized"):
        raise DomainError(f"unknown mode {mode!r}")

    witness = _degree_violation(g, p)
    cap_card = pruned_cardinality_bound(g, p) if prune else g.m
    if witness is not None:
        return ConnectivityReport(
            REFUTED, witness, 0, mode, p.delta, p.kappa, cap_card
        )

    adj = g.adjacency_matrix()
    examined = 0

    if mode == "exhaustive":
        if g.m > exhaustive_cap:
            raise CapacityError(
                f"exhaustive check capped at m <= {exhaustive_cap} "
                f"(got m={g.m}); use randomized mode"
            )
        for c in range(1, cap_card + 1):
            combos = combinations(range(g.m), c)
            while True:
                block = list(islice(combos, _BATCH))
                if not block:
                    break
                subsets = np.array(block, dtype=np.int64)
                examined += len(block)
                hit = _expansion_violation_batch(adj, subsets, p)
                if hit is not None:
                    row, size = hit
                    J = [int(x) for x in block[row]]
                    return ConnectivityReport(
                        REFUTED,
                        {
                            "condition": 3,
                            "subset": J,
                            "broad_neighbor_count": size,
                            "required": min((1.0 + p.kappa) * c, float(g.n)),
                        },
                        examined,
                        mode,
                        p.delta,
                        p.kappa,
                        cap_card,
                    )
        return ConnectivityReport(
            VERIFIED, None, examined, mode, p.delta, p.kappa, cap_card
        )

    # randomized refutation search
    if trials is None or trials < 1:
        raise DomainError("randomized mode requires trials >= 1")
    if seed is None:
        raise DomainError("randomized mode requires a seed for reproducibility")
    if isinstance(seed, int):
        seed = SeedSpec(seed)
    rng = seed.rng()
    for _ in range(trials):
        c = int(rng.integers(1, cap_card + 1))
        J = np.sort(rng.choice(g.m, size=c, replace=False)).astype(np.int64)
        examined += 1
        hit = _expansion_violation_batch(adj, J[None, :], p)
        if hit is not None:
            _, size = hit
            return ConnectivityReport(
                REFUTED,
                {
                    "condition": 3,
                    "subset": [int(x) for x in J],
                    "broad_neighbor_count": size,
                    "required": min((1.0 + p.kappa) * c, float(g.n)),
                },
                examined,
                mode,
                p.delta,
                p.kappa,
                cap_card,
                notes={"trials": trials},
            )
    return ConnectivityReport(
        NOT_REFUTED, None, examined, mode, p.delta, p.kappa, cap_card,
        notes={"trials": trials},
    )


# ---------------------------------------------------------------------------
# Graph file format: JSON {"m": ..., "n": ..., "edges": [[j, i], ...]}

def graph_to_dict(g: BipartiteGraph) -> dict:
    return {"m": g.m, "n": g.n, "edges": [[j, i] for j, i in g.edges()]}


def graph_from_dict(obj: dict) -> BipartiteGraph:
    try:
        m, n, edges = int(obj["m"]), int(obj["n"]), obj["edges"]
    except (KeyError, TypeError) as exc:
        raise DomainError("expected an m/n/edges graph object") from exc
    return BipartiteGraph.from_edges(m, n, [(int(j), int(i)) for j, i in edges])


def load_graph(path) -> BipartiteGraph:
    with open(Path(path)) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(path, g: BipartiteGraph) -> None:
    with open(Path(path), "w") as fh:
        json.dump(graph_to_dict(g), fh)
        fh.write("\n")
