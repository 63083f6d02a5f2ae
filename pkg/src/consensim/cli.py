"""Scenario-driven command line: design gains, check certificates, run
simulations, evaluate residual bounds, and aggregate reports.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 divergence.  Warnings (adaptive-weight clamps beyond tolerance) surface as
exit code 3 so CI treats degraded runs as failures.
"""

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import compute_constants, consensus_metrics, render_metrics, residual_bound
from .errors import (
    ConfigurationError,
    ConsensimError,
    DivergenceError,
    NumericalError,
)
from .gains import load_gains, save_gains
from .matio import format_float
from .scenario import (
    certify_scenario,
    design_gains,
    graph_certificate,
    load_scenario,
    scenario_omega,
)
from .simulate import simulate, trace_to_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DIVERGED = 4


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _prepare(scenario):
    scenario.out_dir.mkdir(parents=True, exist_ok=True)
    gains = design_gains(scenario)
    report = certify_scenario(scenario, gains)
    return gains, report


def cmd_design(scenario):
    gains, report = _prepare(scenario)
    save_gains(scenario.out_dir / "gains.txt", gains)
    (scenario.out_dir / "certificate.txt").write_text(report.render() + "\n")
    print(f"[{scenario.name}] gains written to {scenario.out_dir / 'gains.txt'}")
    print(report.render())
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


def cmd_check(scenario):
    gains_path = scenario.out_dir / "gains.txt"
    if gains_path.exists():
        gains = load_gains(gains_path)
        report = certify_scenario(scenario, gains)
    else:
        _, report = _prepare(scenario)
    (scenario.out_dir / "certificate.txt").write_text(report.render() + "\n")
    print(f"[{scenario.name}]")
    print(report.render())
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


def cmd_simulate(scenario):
    gains_path = scenario.out_dir / "gains.txt"
    if gains_path.exists():
        gains = load_gains(gains_path)
        report = certify_scenario(scenario, gains)
    else:
        gains, report = _prepare(scenario)
        save_gains(gains_path, gains)
        (scenario.out_dir / "certificate.txt").write_text(report.render() + "\n")
    if not report.all_passed:
        print(f"[{scenario.name}] gain certificate failed", file=sys.stderr)
        print(report.render(), file=sys.stderr)
        return EXIT_NUMERIC

    try:
        trace = simulate(
            scenario.kind, scenario.graph, scenario.bundle, scenario.model,
            gains, scenario.leader, scenario.config,
            metadata={"scenario": scenario.name, "scenario_hash": scenario.fingerprint},
        )
    except DivergenceError as err:
        if err.partial_trace is not None:
            trace_to_csv(err.partial_trace, scenario.out_dir / "trace_partial.csv")
        print(f"[{scenario.name}] diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED

    trace_to_csv(trace, scenario.out_dir / "trace.csv")
    metrics = consensus_metrics(trace)
    (scenario.out_dir / "metrics.txt").write_text(render_metrics(metrics) + "\n")
    _write_csv(
        scenario.out_dir / "metrics.csv",
        ["scenario", "kind", "trailing_sup", "trailing_rms", "trailing_sup_sq",
         "time_to_threshold", "d_final_max", "d_variation_max", "clamp_warnings"],
        [[scenario.name, scenario.kind.value,
          format_float(metrics.trailing_sup), format_float(metrics.trailing_rms),
          format_float(metrics.trailing_sup_sq), format_float(metrics.time_to_threshold),
          format_float(np.max(metrics.d_final)), format_float(np.max(metrics.d_trailing_variation)),
          trace.metadata["clamp_warnings"]]],
    )
    print(f"[{scenario.name}] trace written to {scenario.out_dir / 'trace.csv'}")
    print(render_metrics(metrics))
    if trace.metadata["clamp_warnings"] > 0:
        print(
            f"[{scenario.name}] {trace.metadata['clamp_warnings']} adaptive-weight "
            f"clamp warning(s), max {trace.metadata['clamp_max']:.3e}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_bound(scenario):
    gains, report = _prepare(scenario)
    certificate = graph_certificate(scenario)
    omega = scenario_omega(scenario)
    constants = compute_constants(
        scenario.kind, scenario.model, gains, certificate,
        bundle=scenario.bundle, omega_bound=omega,
    )
    bound = residual_bound(
        scenario.kind, constants, gains, omega, scenario.bundle, certificate
    )
    lines = [
        f"residual bound on ||xi||^2:  {bound.bound_sq:.9e}",
        f"  leak (sigma) term:         {bound.sigma_term:.9e}",
        f"  per-follower (Pi) term:    {bound.pi_term:.9e}",
        f"    kappa-linear part:       {bound.pi_kappa_linear:.9e}",
        f"    kappa-quadratic part:    {bound.pi_kappa_quadratic:.9e}",
        f"  boundary-layer term:       {bound.boundary_term:.9e}",
        f"  omega = {omega:g}, beta = {gains.beta:g}",
        "constants:",
        f"  alpha = {constants.alpha:.6e}, lambda0 = {constants.lambda0:.6e}, "
        f"delta = {constants.delta:.6e}",
    ]
    if constants.gamma is not None:
        lines.append(
            f"  gamma = {constants.gamma:.6e}, gamma1 = {constants.gamma1:.6e}, "
            f"gamma2 = {constants.gamma2:.6e}"
        )
    (scenario.out_dir / "bound.txt").write_text("\n".join(lines) + "\n")
    header = ["scenario", "kind", "bound_sq", "sigma_term", "pi_term", "boundary_term",
              "pi_kappa_linear", "pi_kappa_quadratic", "omega", "beta", "delta",
              "alpha", "lambda0"]
    values = [bound.bound_sq, bound.sigma_term, bound.pi_term, bound.boundary_term,
              bound.pi_kappa_linear, bound.pi_kappa_quadratic, omega, gains.beta,
              constants.delta, constants.alpha, constants.lambda0]
    if constants.gamma is not None:
        header += ["gamma", "gamma1", "gamma2"]
        values += [constants.gamma, constants.gamma1, constants.gamma2]
    _write_csv(
        scenario.out_dir / "bound.csv",
        header,
        [[scenario.name, scenario.kind.value] + [format_float(v) for v in values]],
    )
    print(f"[{scenario.name}]")
    print("\n".join(lines))
    return EXIT_OK


def cmd_report(paths, out):
    """Aggregate per-scenario metrics.csv / bound.csv files into one
    long-format CSV with columns source, scenario, key, value."""
    out = Path(out or ".")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for source in ("metrics", "bound"):
        for path in paths:
            candidate = Path(path) / f"{source}.csv"
            if not candidate.exists():
                continue
            with open(candidate, encoding="utf-8") as fh:
                reader = csv.reader(fh)
                file_header = next(reader)
                for row in reader:
                    record = dict(zip(file_header, row))
                    name = record.pop("scenario", Path(path).name)
                    for key, value in record.items():
                        rows.append([source, name, key, value])
    if not rows:
        print("no metrics.csv or bound.csv found under the given directories", file=sys.stderr)
        return EXIT_CONFIG
    report_path = out / "report.csv"
    _write_csv(report_path, ["source", "scenario", "key", "value"], rows)
    print(f"aggregated {len(rows)} record(s) into {report_path}")
    return EXIT_OK


def _run_one(args_tuple):
    command, path, seed, dt, t_end, out = args_tuple
    scenario = load_scenario(path, seed=seed, dt=dt, t_end=t_end, out=out)
    return {
        "design": cmd_design,
        "check": cmd_check,
        "simulate": cmd_simulate,
        "bound": cmd_bound,
    }[command](scenario)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="consensim",
        description="adaptive consensus protocols: gain design, simulation, certification",
    )
    parser.add_argument("command", choices=["design", "simulate", "check", "bound", "report"])
    parser.add_argument("--scenario", action="append", default=[],
                        help="scenario file; repeat for batch runs")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--report-dir", action="append", default=[],
                        help="scenario output directory to aggregate (report command)")
    parser.add_argument("--parallel", action="store_true",
                        help="run a scenario batch in parallel processes")
    args = parser.parse_args(argv)

    try:
        if args.command == "report":
            dirs = args.report_dir or args.scenario
            return cmd_report(dirs, args.out)
        if not args.scenario:
            print("at least one --scenario is required", file=sys.stderr)
            return EXIT_CONFIG
        multiple = len(args.scenario) > 1
        jobs = []
        for path in args.scenario:
            out = args.out
            if out is not None and multiple:
                out = str(Path(out) / Path(path).stem)
            jobs.append((args.command, path, args.seed, args.dt, args.t_end, out))
        if multiple and args.parallel:
            with ProcessPoolExecutor(max_workers=min(len(jobs), 4)) as pool:
                codes = list(pool.map(_run_one, jobs))
        else:
            codes = [_run_one(job) for job in jobs]
        return max(codes)
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConsensimError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
