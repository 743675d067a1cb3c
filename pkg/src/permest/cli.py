"""Command-line entry point: ``permest <subcommand> ...``.

Every subcommand prints one JSON report to stdout embedding a manifest
(command, full parameter echo, root seed, tool version, artifact paths),
so a report alone suffices to rerun it.  Stochastic subcommands require an
explicit ``--seed``; together with the fixed chunk layout this makes every
emitted report byte-for-byte reproducible.  Wall-clock timestamps are kept
out of the report (they would break reproducibility) and go to the
optional ``--manifest`` sidecar and stderr instead.

Exit codes: 0 success, 1 usage/domain error, 2 refutation or convergence
failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionError,
    DomainError,
    NumericError,
    StructuralError,
)
from .estimator import run_estimator, summarize
from .exact import permanent_naive, permanent_ryser
from .graphs import (
    REFUTED,
    ConnectivityParams,
    check_broadly_connected,
    graph_from_threshold,
    graph_to_dict,
    load_graph,
)
from .matrices import SeedSpec, VarianceProfile, load_matrix, save_matrix_csv
from .scaling import log_permanent_offset, permanent_band_certificate, sinkhorn_scale
from .spectrum import (
    DEFAULT_C0,
    DEFAULT_SMALLEST_GRID,
    TailExperimentConfig,
    complete_profile_sweep,
    concentration_experiment,
    intermediate_sv_tail,
    jensen_gap_experiment,
    second_moment_check,
    smallest_sv_tail,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REFUTED = 2
EXIT_NUMERIC = 3

OUTPUT_DIR_ENV = "PERMEST_OUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


@dataclass
class ExperimentManifest:
    command: str
    parameters: dict
    root_seed: int | None
    version: str
    artifacts: list = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def report_dict(self) -> dict:
        # deterministic subset: no timestamps
        return {
            "command": self.command,
            "parameters": self.parameters,
            "root_seed": self.root_seed,
            "version": self.version,
            "artifacts": list(self.artifacts),
        }

    def full_dict(self) -> dict:
        d = self.report_dict()
        d["started_at"] = self.started_at
        d["finished_at"] = self.finished_at
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _out_dir(args) -> Path:
    explicit = getattr(args, "out_dir", None)
    if explicit:
        d = Path(explicit)
    else:
        d = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise _UsageError(f"expected a comma-separated float list, got {text!r}") from exc


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise _UsageError(f"expected a comma-separated int list, got {text!r}") from exc


def _profile_from_file(path, floor: float | None) -> VarianceProfile:
    m = load_matrix(path)
    if floor is None:
        nz = m[m != 0.0]
        if nz.size == 0:
            raise DomainError("profile matrix is all zero; no floor can be inferred")
        floor = float(nz.min())
    return VarianceProfile(m, floor=floor)


def _slv_dict(slv) -> dict:
    value = slv.value()
    return {
        "sign": slv.sign,
        "log_magnitude": slv.log_magnitude,
        "log10_magnitude": slv.log10_magnitude,
        "value_if_representable": value if math.isfinite(value) else None,
    }


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (exit_code, results, csv_rows)


def _cmd_exact(args):
    a = load_matrix(args.matrix)
    fn = permanent_naive if args.method == "naive" else permanent_ryser
    return EXIT_OK, {"method": args.method, "permanent": _slv_dict(fn(a))}, None


def _cmd_estimate(args):
    a = load_matrix(args.matrix)
    run = run_estimator(a, args.samples, SeedSpec(args.seed), workers=args.workers)
    stats = summarize(run)
    results = {
        "mean_log_det2": stats.mean_log_det2,
        "std_log_det2": stats.std_log_det2,
        "log_per_estimate": stats.log_per_estimate.log_magnitude,
        "n_degenerate": run.degenerate_count,
        "sample_count": stats.sample_count,
        "matrix_fingerprint": run.matrix_fingerprint,
    }
    if args.exact:
        results["log_per_exact"] = permanent_ryser(a).log_magnitude
    return EXIT_OK, results, None


def _cmd_check_graph(args):
    g = load_graph(args.graph)
    params = ConnectivityParams(args.delta, args.kappa)
    seed = SeedSpec(args.seed) if args.seed is not None else None
    report = check_broadly_connected(
        g, params, mode=args.mode, trials=args.trials, seed=seed,
        exhaustive_cap=args.cap,
    )
    code = EXIT_REFUTED if report.verdict == REFUTED else EXIT_OK
    return code, report.to_dict(), None


def _cmd_scale(args):
    a = load_matrix(args.matrix)
    result = sinkhorn_scale(a, tol=args.tol, max_iter=args.max_iter)
    b_path = _out_dir(args) / (Path(args.matrix).stem + ".scaled.csv")
    save_matrix_csv(b_path, result.b)
    results = {
        "d1": result.d1.tolist(),
        "d2": result.d2.tolist(),
        "b_file": str(b_path),
        "row_dev": result.max_row_dev,
        "col_dev": result.max_col_dev,
        "iters": result.iterations,
        "converged": result.converged,
        "log_per_offset": log_permanent_offset(result),
        "certificate": permanent_band_certificate(result),
    }
    return EXIT_OK, results, None


def _tail_csv(curve_dict) -> list[dict]:
    keys = ("thresholds", "counts", "freqs", "wilson_low", "wilson_high")
    return [
        {
            "t": curve_dict["thresholds"][i],
            "count": curve_dict["counts"][i],
            "freq": curve_dict["freqs"][i],
            "wilson_low": curve_dict["wilson_low"][i],
            "wilson_high": curve_dict["wilson_high"][i],
        }
        for i in range(len(curve_dict[keys[0]]))
    ]


def _cmd_spectrum_tail(args):
    profile = _profile_from_file(args.profile, args.floor)
    config = TailExperimentConfig(
        profile=profile,
        codim=args.codim,
        trials=args.trials,
        grid=_parse_float_list(args.grid),
        seed=SeedSpec(args.seed),
    )
    if args.codim == 0:
        results = smallest_sv_tail(config, workers=args.workers).to_dict()
    else:
        results = intermediate_sv_tail(
            config, workers=args.workers, bootstrap_rounds=args.bootstrap
        ).to_dict()
    return EXIT_OK, results, _tail_csv(results)


def _cmd_spectrum_intermediate(args):
    if args.codim < 1:
        raise _UsageError("intermediate-tail requires --codim >= 1")
    return _cmd_spectrum_tail(args)


def _cmd_spectrum_concentration(args):
    report = concentration_experiment(
        _parse_int_list(args.n_sweep),
        args.trials,
        SeedSpec(args.seed),
        c0=args.c0,
        levels=args.levels,
        workers=args.workers,
    )
    results = report.to_dict()
    rows = [
        {k: v for k, v in e.items() if not isinstance(v, list)}
        for e in results["entries"]
    ]
    return EXIT_OK, results, rows


def _cmd_spectrum_second_moment(args):
    report = second_moment_check(
        complete_profile_sweep(_parse_int_list(args.n_sweep)),
        args.trials,
        SeedSpec(args.seed),
        workers=args.workers,
    )
    results = report.to_dict()
    return EXIT_OK, results, [e for e in results["entries"]]


def _cmd_spectrum_counterexample(args):
    report = jensen_gap_experiment(
        args.n, args.alpha, args.trials, SeedSpec(args.seed), workers=args.workers
    )
    results = report.to_dict()
    return EXIT_OK, results, [results]


def _cmd_pipeline(args):
    a = load_matrix(args.matrix)
    seed = SeedSpec(args.seed)
    stages: dict = {}
    results = {"stages": stages}
    stage = "scaling"

    try:
        scaled = sinkhorn_scale(a, tol=args.tol, max_iter=args.max_iter)
        offset = log_permanent_offset(scaled)
        b_path = _out_dir(args) / (Path(args.matrix).stem + ".scaled.csv")
        save_matrix_csv(b_path, scaled.b)
        stages["scaling"] = {
            "b_file": str(b_path),
            "iters": scaled.iterations,
            "row_dev": scaled.max_row_dev,
            "col_dev": scaled.max_col_dev,
            "log_per_offset": offset,
            "certificate": permanent_band_certificate(scaled),
        }

        stage = "graph"
        graph = graph_from_threshold(scaled.b, args.r)
        stages["graph"] = {
            "m": graph.m,
            "n": graph.n,
            "edge_count": len(graph.edges()),
            "min_left_degree": int(graph.left_degrees().min()),
            "min_right_degree": int(graph.right_degrees().min()),
        }

        stage = "connectivity"
        params = ConnectivityParams(args.delta, args.kappa)
        mode = args.check_mode
        if mode == "auto":
            mode = "exhaustive" if graph.m <= args.check_cap else "randomized"
        check = check_broadly_connected(
            graph, params, mode=mode,
            trials=args.check_trials if mode == "randomized" else None,
            seed=seed if mode == "randomized" else None,
            exhaustive_cap=args.check_cap,
        )
        stages["connectivity"] = check.to_dict()
        if check.verdict == REFUTED:
            return EXIT_REFUTED, results, None

        stage = "estimate"
        run = run_estimator(scaled.b, args.samples, seed, workers=args.workers)
        stats = summarize(run)
        stages["estimate"] = {
            "mean_log_det2": stats.mean_log_det2,
            "std_log_det2": stats.std_log_det2,
            "log_per_estimate": stats.log_per_estimate.log_magnitude,
            "n_degenerate": run.degenerate_count,
            "sample_count": stats.sample_count,
        }
    except (StructuralError, ConvergenceError) as exc:
        stages[stage] = {"error": str(exc), "error_type": type(exc).__name__}
        return EXIT_REFUTED, results, None
    except (NumericError, np.linalg.LinAlgError) as exc:
        stages[stage] = {"error": str(exc), "error_type": type(exc).__name__}
        return EXIT_NUMERIC, results, None
    except (DimensionError, DomainError, CapacityError, ValueError) as exc:
        stages[stage] = {"error": str(exc), "error_type": type(exc).__name__}
        return EXIT_USAGE, results, None

    results["log_per_estimate_scaled"] = stats.log_per_estimate.log_magnitude
    results["log_per_offset"] = offset
    results["log_per_estimate"] = stats.log_per_estimate.log_magnitude + offset
    return EXIT_OK, results, None


# ---------------------------------------------------------------------------
# Parser


def _add_common_output_flags(p):
    p.add_argument("--out", help="also write the JSON report to this file")
    p.add_argument("--csv", help="write a CSV table of per-point results")
    p.add_argument("--manifest", help="write a manifest (with timestamps) here")
    p.add_argument("--out-dir", help=f"artifact directory (default ${OUTPUT_DIR_ENV} or .)")


def build_parser() -> _Parser:
    parser = _Parser(prog="permest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact permanent of a matrix file")
    p.add_argument("--method", choices=("naive", "ryser"), default="ryser")
    p.add_argument("--matrix", required=True)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_exact)

    p = sub.add_parser("estimate", help="Monte Carlo permanent estimate")
    p.add_argument("--matrix", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="also compute per exactly")
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("check-graph", help="broad-connectedness verdict")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--mode", choices=("exhaustive", "randomized"), default="exhaustive")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=int, default=22, help="exhaustive size cap")
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_check_graph)

    p = sub.add_parser("scale", help="Sinkhorn scaling toward doubly stochastic")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10_000)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_scale)

    spectrum = sub.add_parser("spectrum", help="singular-value experiments")
    spec_sub = spectrum.add_subparsers(dest="spectrum_command", required=True)

    p = spec_sub.add_parser("tail", help="smallest singular value tail curve")
    p.add_argument("--profile", required=True, help="matrix file of std deviations")
    p.add_argument("--floor", type=float, help="profile floor (default: min nonzero)")
    p.add_argument("--codim", type=int, default=0)
    p.add_argument("--grid", default=",".join(str(t) for t in DEFAULT_SMALLEST_GRID))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bootstrap", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum_tail)

    p = spec_sub.add_parser("intermediate-tail", help="s_{n-l} tail with slope fit")
    p.add_argument("--profile", required=True)
    p.add_argument("--floor", type=float)
    p.add_argument("--codim", type=int, required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bootstrap", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum_intermediate)

    p = spec_sub.add_parser("concentration", help="spread of log det^2 vs dimension")
    p.add_argument("--n-sweep", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--c0", type=float, default=DEFAULT_C0)
    p.add_argument("--levels", type=int)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum_concentration)

    p = spec_sub.add_parser("second-moment", help="E[(log det^2)^2] vs n^3")
    p.add_argument("--n-sweep", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum_second_moment)

    p = spec_sub.add_parser("counterexample", help="Jensen gap on the unit-diagonal family")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_spectrum_counterexample)

    p = sub.add_parser("pipeline", help="scale, threshold graph, check, estimate")
    p.add_argument("--matrix", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--check-mode", choices=("auto", "exhaustive", "randomized"),
                   default="auto")
    p.add_argument("--check-trials", type=int, default=2000)
    p.add_argument("--check-cap", type=int, default=22)
    p.add_argument("--workers", type=int, default=1)
    _add_common_output_flags(p)
    p.set_defaults(handler=_cmd_pipeline)

    return parser


def _command_name(args) -> str:
    name = args.command
    spec_cmd = getattr(args, "spectrum_command", None)
    return f"{name} {spec_cmd}" if spec_cmd else name


def _parameters(args) -> dict:
    skip = {"handler", "command", "spectrum_command"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _write_csv(path, rows):
    if not rows:
        return
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in keys})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else EXIT_USAGE

    manifest = ExperimentManifest(
        command=_command_name(args),
        parameters=_parameters(args),
        root_seed=getattr(args, "seed", None),
        version=__version__,
        started_at=datetime.now(timezone.utc).isoformat(),
    )
    print(f"permest: started {manifest.command}", file=sys.stderr)

    code = EXIT_OK
    try:
        code, results, csv_rows = args.handler(args)
    except _UsageError as exc:
        code, results, csv_rows = EXIT_USAGE, {"error": str(exc)}, None
    except (DimensionError, DomainError, CapacityError, ValueError,
            OSError, json.JSONDecodeError) as exc:
        code, results, csv_rows = EXIT_USAGE, {
            "error": str(exc), "error_type": type(exc).__name__}, None
    except (StructuralError, ConvergenceError) as exc:
        code, results, csv_rows = EXIT_REFUTED, {
            "error": str(exc), "error_type": type(exc).__name__}, None
    except (NumericError, np.linalg.LinAlgError) as exc:
        code, results, csv_rows = EXIT_NUMERIC, {
            "error": str(exc), "error_type": type(exc).__name__}, None

    if args.csv and csv_rows:
        _write_csv(args.csv, csv_rows)
        manifest.artifacts.append(str(args.csv))
    if isinstance(results, dict):
        for key in ("b_file",):
            if key in results:
                manifest.artifacts.append(results[key])
        for stage in results.get("stages", {}).values():
            if isinstance(stage, dict) and "b_file" in stage:
                manifest.artifacts.append(stage["b_file"])

    report = {
        "manifest": manifest.report_dict(),
        "results": _jsonable(results),
        "exit_code": code,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)

    manifest.finished_at = datetime.now(timezone.utc).isoformat()
    if args.manifest:
        Path(args.manifest).write_text(
            json.dumps(manifest.full_dict(), indent=2, sort_keys=True) + "\n"
        )
    print(f"permest: finished {manifest.command} (exit {code})", file=sys.stderr)
    return code


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
