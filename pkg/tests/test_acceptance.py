"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with its runtime against the stated budget.  Run with

    pytest tests/test_acceptance.py -v -s
"""

import json
import math
import time

import numpy as np
import pytest

from oracles import log_chi2_1_moments
from permest.cli import main as cli_main
from permest.estimator import run_estimator
from permest.exact import permanent_naive, permanent_ryser
from permest.graphs import (
    REFUTED,
    VERIFIED,
    BipartiteGraph,
    ConnectivityParams,
    check_broadly_connected,
    graph_from_matrix,
    save_graph,
)
from permest.matrices import SeedSpec, VarianceProfile, save_matrix_csv
from permest.scaling import log_permanent_offset, sinkhorn_scale
from permest.spectrum import (
    TailExperimentConfig,
    concentration_experiment,
    intermediate_sv_tail,
    jensen_gap_experiment,
    second_moment_check,
    smallest_sv_tail,
)


class Budget:
    def __init__(self, number, name, seconds):
        self.number = number
        self.name = name
        self.seconds = seconds
        self.t0 = time.perf_counter()

    def finish(self, ok: bool) -> None:
        elapsed = time.perf_counter() - self.t0
        verdict = "PASS" if ok and elapsed <= self.seconds else "FAIL"
        print(
            f"[{verdict}] criterion {self.number:02d} ({self.name}): "
            f"{elapsed:.1f}s of {self.seconds}s budget"
        )
        assert ok, f"criterion {self.number} failed"
        assert elapsed <= self.seconds, f"criterion {self.number} over budget"


LOG_RTOL_1E9 = math.log1p(1e-9)


def test_criterion_01_exact_oracle_equivalence():
    budget = Budget(1, "exact-oracle equivalence", 60)
    bits = ((np.arange(65536)[:, None] >> np.arange(16)) & 1).astype(np.float64)
    mats = bits.reshape(65536, 4, 4)
    ok = True
    for a in mats:
        ry = permanent_ryser(a)
        nv = permanent_naive(a)
        if not ry.rel_close(nv, 1e-9):
            ok = False
            break
    rng = np.random.default_rng(101)
    for _ in range(1000):
        a = rng.uniform(0.0, 1.0, size=(5, 5))
        if not permanent_ryser(a).rel_close(permanent_naive(a), 1e-9):
            ok = False
            break
    budget.finish(ok)


def test_criterion_02_unbiasedness():
    budget = Budget(2, "estimator unbiasedness (4 SE at N=1e5)", 120)
    rng = np.random.default_rng(202)
    matrices = [np.eye(3), np.ones((4, 4))]
    matrices += [rng.uniform(0.0, 1.0, size=(5, 5)) for _ in range(5)]
    ok = True
    for k, a in enumerate(matrices):
        per = permanent_ryser(a)
        run = run_estimator(a, 100_000, SeedSpec(3000 + k))
        ratios = np.exp(run.samples - per.log_magnitude)
        se = ratios.std(ddof=1) / math.sqrt(ratios.size)
        if abs(float(ratios.mean()) - 1.0) > 4 * se:
            ok = False
    budget.finish(ok)


def test_criterion_03_broad_connectedness_checker():
    budget = Budget(3, "broad-connectedness checker", 120)
    ok = True

    rep = check_broadly_connected(
        BipartiteGraph.complete(8, 8), ConnectivityParams(1.0, 0.4)
    )
    ok &= rep.verdict == VERIFIED

    rep = check_broadly_connected(
        BipartiteGraph.perfect_matching(8), ConnectivityParams(0.5, 0.2)
    )
    ok &= rep.verdict == REFUTED and rep.witness["condition"] == 1

    rng = np.random.default_rng(303)
    params = ConnectivityParams(0.5, 0.2)
    for _ in range(100):
        m = int(rng.integers(3, 13))
        n = int(rng.integers(3, 13))
        g = graph_from_matrix((rng.random((m, n)) < rng.uniform(0.3, 0.95)).astype(float))
        pruned = check_broadly_connected(g, params, prune=True)
        full = check_broadly_connected(g, params, prune=False)
        if pruned.verdict != full.verdict:
            ok = False
            break
    budget.finish(ok)


def test_criterion_04_scaling_round_trip():
    budget = Budget(4, "Sinkhorn round trip (1e-8 relative)", 60)
    rng = np.random.default_rng(404)
    ok = True
    for _ in range(100):
        a = rng.uniform(0.1, 1.0, size=(8, 8))
        res = sinkhorn_scale(a, tol=1e-6, max_iter=10_000)
        rs, cs = res.b.sum(axis=1), res.b.sum(axis=0)
        ok &= bool(rs.min() >= 0.5 and rs.max() <= 2.0)
        ok &= bool(cs.min() >= 0.5 and cs.max() <= 2.0)
        ok &= res.iterations <= 10_000
        delta = (
            permanent_ryser(res.b).log_magnitude
            + log_permanent_offset(res)
            - permanent_ryser(a).log_magnitude
        )
        ok &= abs(delta) <= 1e-8
    budget.finish(ok)


def test_criterion_05_smallest_singular_value_tail_form():
    budget = Budget(5, "smallest singular value tail form", 180)
    curve = smallest_sv_tail(
        TailExperimentConfig(
            profile=VarianceProfile.complete(16),
            codim=0,
            trials=10_000,
            grid=(0.01, 0.02, 0.05, 0.1),
            seed=SeedSpec(505),
        )
    )
    freqs = np.array(curve.freqs)
    ok = bool((np.diff(freqs) >= 0).all())
    for i in range(len(freqs) - 1):
        if curve.counts[i] >= 30:
            ratio = freqs[i + 1] / freqs[i]
            ok &= 1.0 <= ratio <= 6.0
    budget.finish(ok)


def test_criterion_06_intermediate_singular_value_exponent():
    budget = Budget(6, "intermediate singular value exponent", 180)
    rep = intermediate_sv_tail(
        TailExperimentConfig(
            profile=VarianceProfile.complete(16),
            codim=4,  # m = 12
            trials=10_000,
            grid=(1.1, 1.25, 1.4, 1.6),
            seed=SeedSpec(606),
        ),
        bootstrap_rounds=500,
    )
    ok = rep.slope >= 0.7 and rep.slope_ci_low > 0.0
    budget.finish(ok)


def test_criterion_07_concentration_scaling():
    budget = Budget(7, "concentration scaling in n", 600)
    rep = concentration_experiment([8, 16, 32, 64], 1000, SeedSpec(707))
    ok = rep.std_slope <= 0.6
    budget.finish(ok)


def test_criterion_08_truncation_inequality():
    budget = Budget(8, "truncation inequality (3/2 l* log n)", 300)
    rep = concentration_experiment([64], 1000, SeedSpec(808))
    entry = rep.entries[0]
    ok = (
        entry.within_truncation_bound_fraction >= 0.99
        and entry.truncation_bound == pytest.approx(1.5 * 4 * math.log(64))
    )
    budget.finish(ok)


def test_criterion_09_jensen_gap_growth():
    budget = Budget(9, "estimator-defeating gap growth", 600)
    reports = {
        n: jensen_gap_experiment(n, 0.1, 10_000, SeedSpec(909 + n))
        for n in (6, 10, 14, 18)
    }
    ok = all(r.gap >= 0.0 for r in reports.values())
    g6, g18 = reports[6], reports[18]
    ok &= g18.gap_per_n >= 0.5 * g6.gap_per_n > 0
    half_width = g18.gap_ci_high - g18.gap
    ok &= g18.gap > 3 * half_width
    budget.finish(ok)


def test_criterion_10_second_moment_sanity():
    budget = Budget(10, "second moment vs n^3", 180)
    profiles = [VarianceProfile.complete(n) for n in (4, 8, 16)]
    rep = second_moment_check(profiles, 10_000, SeedSpec(1010))
    ok = rep.max_ratio <= 10 * rep.entries[0].ratio_to_n_cubed

    single = second_moment_check(VarianceProfile.complete(1), 10_000, SeedSpec(1011))
    _, m2 = log_chi2_1_moments()
    ok &= abs(single.entries[0].mean_sq_log_det2 - m2) <= 0.10 * m2
    budget.finish(ok)


def test_criterion_11_determinism(tmp_path, capsys):
    budget = Budget(11, "byte-for-byte determinism", 120)
    ok = True

    ones4 = tmp_path / "ones4.csv"
    save_matrix_csv(ones4, np.ones((4, 4)))
    pos6 = tmp_path / "pos6.csv"
    save_matrix_csv(pos6, np.random.default_rng(7).uniform(0.1, 1.0, (6, 6)))
    prof8 = tmp_path / "prof8.csv"
    save_matrix_csv(prof8, np.ones((8, 8)))
    prof16 = tmp_path / "prof16.csv"
    save_matrix_csv(prof16, np.ones((16, 16)))
    graph8 = tmp_path / "complete8.json"
    save_graph(graph8, BipartiteGraph.complete(8, 8))
    out = tmp_path / "report.json"

    stochastic_invocations = [
        ["estimate", "--matrix", str(ones4), "--samples", "2000", "--seed", "21"],
        ["check-graph", "--graph", str(graph8), "--delta", "0.9", "--kappa", "0.3",
         "--mode", "randomized", "--trials", "500", "--seed", "22"],
        ["spectrum", "tail", "--profile", str(prof8), "--trials", "1000",
         "--seed", "23"],
        ["spectrum", "intermediate-tail", "--profile", str(prof16), "--codim", "4",
         "--grid", "1.1,1.3,1.6", "--trials", "1000", "--seed", "24",
         "--bootstrap", "100"],
        ["spectrum", "concentration", "--n-sweep", "4,8", "--trials", "200",
         "--seed", "25"],
        ["spectrum", "second-moment", "--n-sweep", "1,4", "--trials", "500",
         "--seed", "26"],
        ["spectrum", "counterexample", "--n", "6", "--alpha", "0.1",
         "--trials", "1000", "--seed", "27"],
        ["pipeline", "--matrix", str(pos6), "--r", "0.5", "--delta", "0.3",
         "--kappa", "0.1", "--samples", "500", "--seed", "28",
         "--out-dir", str(tmp_path)],
    ]
    for argv in stochastic_invocations:
        full = argv + ["--out", str(out)]
        code1 = cli_main(full)
        first = out.read_bytes()
        code2 = cli_main(full)
        ok &= code1 == code2 == 0
        ok &= out.read_bytes() == first
    capsys.readouterr()

    # parallel and serial runs record identical sample arrays
    a = np.random.default_rng(8).uniform(0.1, 1.0, (6, 6))
    serial = run_estimator(a, 4000, SeedSpec(29), workers=1)
    parallel = run_estimator(a, 4000, SeedSpec(29), workers=4)
    ok &= bool(np.array_equal(serial.samples, parallel.samples))
    ok &= serial.degenerate_count == parallel.degenerate_count

    cfg = TailExperimentConfig(
        profile=VarianceProfile.complete(8), codim=0, trials=2000,
        grid=(0.05, 0.2), seed=SeedSpec(30),
    )
    ok &= smallest_sv_tail(cfg, workers=1).counts == smallest_sv_tail(cfg, workers=4).counts
    budget.finish(ok)
