#!/usr/bin/env python3
"""Regenerate the frontend test fixtures from the shipped scenarios.

Uses a coarser recording stride than the acceptance runs so the fixture
CSVs stay small; everything else matches the scenario files.
Run from the repository root:  python3 frontend/scripts/make_fixtures.py
"""

from pathlib import Path

from consensim.analysis import compute_constants, residual_bound
from consensim.scenario import design_gains, graph_certificate, load_scenario, scenario_omega
from consensim.simulate import simulate, trace_to_csv

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "frontend" / "test" / "fixtures"


def make(name, stride=100):
    scenario = load_scenario(ROOT / "scenarios" / f"{name}.scenario")
    scenario.config.record_every = stride
    gains = design_gains(scenario)
    trace = simulate(
        scenario.kind, scenario.graph, scenario.bundle, scenario.model,
        gains, scenario.leader, scenario.config,
        metadata={"scenario": scenario.name, "scenario_hash": scenario.fingerprint},
    )
    trace_to_csv(trace, FIXTURES / f"{name}.csv")
    print(f"wrote {name}.csv ({trace.record_count} rows)")
    return scenario, gains


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make("example1")
    make("example2")
    make("manifold")
    scenario, gains = make("lf_sinusoid")
    certificate = graph_certificate(scenario)
    omega = scenario_omega(scenario)
    constants = compute_constants(
        scenario.kind, scenario.model, gains, certificate,
        bundle=scenario.bundle, omega_bound=omega,
    )
    bound = residual_bound(
        scenario.kind, constants, gains, omega, scenario.bundle, certificate
    )
    (FIXTURES / "lf_sinusoid.bound").write_text(f"{bound.bound_sq:.17g}\n")
    print(f"wrote lf_sinusoid.bound ({bound.bound_sq:.6e})")


if __name__ == "__main__":
    main()
