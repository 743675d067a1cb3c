"""Chunked trial execution shared by the Monte Carlo experiments.

Trial t always consumes stream ``seed.stream + t``, and chunk boundaries
are a pure function of the trial count, so a threaded run returns the same
arrays, bit for bit, as a serial one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .matrices import SeedSpec

_CHUNK_ELEMENT_BUDGET = 1 << 22


def chunk_bounds(total: int, per_trial_elements: int) -> list[tuple[int, int]]:
    chunk = max(1, min(4096, _CHUNK_ELEMENT_BUDGET // max(1, per_trial_elements)))
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def stacked_gaussians(seed: SeedSpec, lo: int, hi: int, shape) -> np.ndarray:
    out = np.empty((hi - lo, *shape))
    for k, t in enumerate(range(lo, hi)):
        out[k] = seed.trial(t).rng().standard_normal(shape)
    return out


def map_chunks(fn, bounds, workers: int = 1) -> list:
    """Apply ``fn`` to each (lo, hi) chunk, preserving order.  With
    workers > 1 the chunks run on a thread pool (numpy releases the GIL
    inside LAPACK), still reduced in submission order."""
    if workers <= 1:
        return [fn(b) for b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, bounds))
