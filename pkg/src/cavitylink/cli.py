"""Batch command-line front end.

Subcommands::

    cavitylink simulate --config run.ini [--out PATH] [--format json|csv]
    cavitylink sweep    --config run.ini [--out PATH] [--workers N]
    cavitylink validate [--out PATH]

Exit codes: 0 success, 2 configuration error, 3 simulation error,
4 validation failure.  Outputs are deterministic for a given config; sweep
rows are written in axis order regardless of worker count.  ``--seed`` is
accepted and recorded for forward compatibility; the current pipeline is
fully deterministic.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import measures, protocols, validate
from .config import RunConfig, load_config
from .errors import CavityLinkError, ConfigurationError
from .protocols import Engine, ProtocolKind, RunResult

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_VALIDATION = 4


def _params_dict(params) -> dict:
    out = {}
    for name in ("g_a", "g_b", "omega_a", "omega_b", "delta_a", "delta_b",
                 "big_delta", "t_a", "t_b", "omega_0", "omega_l", "nu_a", "nu_b"):
        value = getattr(params, name)
        if value is not None:
            out[name] = value
    return out


def _branches_payload(result: RunResult) -> list[dict]:
    rows = []
    for branch in result.branches:
        rows.append(
            {
                "outcome": branch.outcome,
                "probability": branch.probability,
                "target_fidelity": result.target_fidelities.get(branch.outcome),
            }
        )
    return rows


def _convergence_payload(result: RunResult):
    if result.convergence is None:
        return None
    return [
        {
            "steps": info.steps,
            "doublings": info.doublings,
            "residual": info.residual,
            "tolerance": info.tolerance,
            "folded_periods": info.folded_periods,
        }
        for info in result.convergence
    ]


def _run_one(config: RunConfig, overrides: dict | None = None) -> dict:
    """Run the configured protocol (and reference engine / noise budget)."""
    params = config.resolve_params(overrides)
    primary = protocols.run_protocol(
        config.protocol,
        params,
        engine=config.engines[0],
        dims=config.dims,
        measure_basis=config.measure_basis,
        tolerance=config.tolerance,
        leak_tol=config.leak_tol,
    )
    agreement = None
    if len(config.engines) == 2:
        reference = protocols.run_protocol(
            config.protocol,
            params,
            engine=config.engines[1],
            dims=primary.dims,
            measure_basis=config.measure_basis,
            tolerance=config.tolerance,
            leak_tol=config.leak_tol,
        )
        agreement = measures.fidelity(primary.final_joint_state, reference.final_joint_state)
    noise_budget = None
    if config.noise is not None and config.noise.any_active():
        budget = protocols.run_decoherence_budget(
            config.protocol, params, config.noise, dims=primary.dims
        )
        noise_budget = {
            "fidelity_vs_ideal": budget.fidelity,
            "max_trace_drift": budget.max_trace_drift,
            "min_eigenvalue": budget.min_eigenvalue,
            "steps": budget.steps,
            "kappa_a": config.noise.kappa_a,
            "kappa_b": config.noise.kappa_b,
            "gamma_atom": config.noise.gamma_atom,
        }
    return {
        "result": primary,
        "params": params,
        "engine_agreement": agreement,
        "noise_budget": noise_budget,
    }


def _simulate_payload(config: RunConfig, run: dict, wall_clock: float, seed: int | None) -> dict:
    result: RunResult = run["result"]
    return {
        "schema_version": SCHEMA_VERSION,
        "protocol": result.protocol.value,
        "engine": result.engine.value,
        "engines": [e.value for e in config.engines],
        "dims": {"n_a": result.dims.n_a, "n_b": result.dims.n_b},
        "params_rad_per_s": _params_dict(run["params"]),
        "unit_conversions": list(config.conversions),
        "branches": _branches_payload(result),
        "target_fidelities": result.target_fidelities,
        "expected_branch": protocols.expected_branch(result.protocol),
        "atom_purity": result.atom_purity,
        "validity": result.validity.as_dict(),
        "leakage": result.leakage,
        "timings": {
            "t_a": result.timings.t_a,
            "t_b": result.timings.t_b,
            "total": result.timings.total,
        },
        "engine_agreement": run["engine_agreement"],
        "noise_budget": run["noise_budget"],
        "convergence": _convergence_payload(result),
        "wall_clock_s": wall_clock,
        "seed": seed,
    }


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


_SIM_CSV_HEADER = [
    "protocol", "engine", "branch", "probability", "target_fidelity",
    "atom_purity", "leakage", "t_a", "t_b", "total_time", "engine_agreement",
]


def _simulate_csv(payload: dict) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SIM_CSV_HEADER)
    branches = payload["branches"] or [{"outcome": "", "probability": "", "target_fidelity": ""}]
    for row in branches:
        writer.writerow(
            [
                payload["protocol"],
                payload["engine"],
                row["outcome"],
                row["probability"],
                _fmt(row["target_fidelity"]),
                payload["atom_purity"],
                payload["leakage"],
                payload["timings"]["t_a"],
                payload["timings"]["t_b"],
                payload["timings"]["total"],
                _fmt(payload["engine_agreement"]),
            ]
        )
    return buf.getvalue()


def _fmt(value):
    return "" if value is None else value


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    out_format = args.format or config.out_format
    out_path = args.out or config.out_path
    start = time.perf_counter()
    run = _run_one(config)
    wall = time.perf_counter() - start
    payload = _simulate_payload(config, run, wall, args.seed)
    if out_format == "json":
        _write_text(out_path, json.dumps(payload, indent=2, sort_keys=True))
    else:
        _write_text(out_path, _simulate_csv(payload))
    return EXIT_OK


_SWEEP_CSV_BASE = [
    "branch", "probability", "target_fidelity", "atom_purity", "leakage", "engine_agreement",
]


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    if not config.sweep:
        raise ConfigurationError("sweep requires a [sweep] section with at least axis_1")
    axes = config.sweep
    points = list(itertools.product(*(axis.values for axis in axes)))
    overrides = [dict(zip((axis.name for axis in axes), point)) for point in points]

    workers = max(1, args.workers)
    if workers == 1:
        runs = [_run_one(config, ov) for ov in overrides]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda ov: _run_one(config, ov), overrides))

    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([axis.name for axis in axes] + _SWEEP_CSV_BASE)
    for point, run in zip(points, runs):
        result: RunResult = run["result"]
        rows = result.branches or (protocols.MeasurementBranch("", 1.0, None),)
        for branch in rows:
            writer.writerow(
                list(point)
                + [
                    branch.outcome,
                    branch.probability,
                    _fmt(result.target_fidelities.get(branch.outcome)),
                    result.atom_purity,
                    result.leakage,
                    _fmt(run["engine_agreement"]),
                ]
            )
    _write_text(args.out or config.out_path, buf.getvalue())
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validate.run_checks()
    report = validate.format_report(results)
    _write_text(args.out, report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitylink",
        description="Simulate sequential atom-cavity entanglement protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path ('-' for stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help="recorded in the output; the pipeline is deterministic")

    p_sim = sub.add_parser("simulate", parents=[common], help="run one configured protocol")
    p_sim.add_argument("--config", required=True, help="INI run configuration")
    p_sim.add_argument("--format", choices=("json", "csv"), default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", parents=[common], help="run a 1- or 2-axis parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--workers", type=int, default=1, help="concurrent sweep points")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CavityLinkError as exc:
        print(f"simulation error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
