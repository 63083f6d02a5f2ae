"""Declarative scenario files: one INI-style document wiring a model file, a
graph file, a protocol kind, gain overrides, and the simulation schedule.

Sections and keys:

    [scenario]  name, protocol, seed
    [model]     file                     (key-matrix model file)
    [graph]     file                     (edge-list graph file)
    [gains]     file (optional key-matrix overrides),
                beta, kappa, phi, omega  (inline scalar overrides)
    [sim]       dt, t_end, record_every, integrator, init_scale, init_mode,
                d0, leader_x0 (whitespace-separated)
    [output]    dir

Paths are resolved relative to the scenario file.  Command-line flags
(--seed, --dt, --t-end, --out) override file values.
"""

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import leader_omega, load_model
from .errors import ConfigurationError
from .gains import (
    DEFAULT_BOUNDARY_WIDTH,
    DEFAULT_LEAK_RATE,
    GainSet,
    certify,
    choose_beta,
    design_output_gains,
    design_q,
    design_state_gains,
    load_gains,
)
from .graphs import build_laplacian, read_graph_file, spectral_certificate
from .linalg import DEFAULT_POLICY
from .protocols import ProtocolKind
from .simulate import SimConfig, scenario_fingerprint


@dataclass
class Scenario:
    name: str
    kind: ProtocolKind
    model: object
    leader: object
    graph: object
    bundle: object
    config: SimConfig
    overrides: GainSet
    omega_override: float
    out_dir: Path
    fingerprint: str
    path: Path


def _get(parser, section, key, fallback=None):
    if parser.has_option(section, key):
        return parser.get(section, key)
    return fallback


def load_scenario(path, seed=None, dt=None, t_end=None, out=None):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scenario file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read(path)
    base = path.parent
    for section in ("scenario", "model", "graph", "sim"):
        if not parser.has_section(section):
            raise ConfigurationError(f"{path}: missing [{section}] section")

    name = _get(parser, "scenario", "name", path.stem)
    try:
        kind = ProtocolKind(_get(parser, "scenario", "protocol", ""))
    except ValueError:
        valid = ", ".join(k.value for k in ProtocolKind)
        raise ConfigurationError(
            f"{path}: unknown protocol {_get(parser, 'scenario', 'protocol')!r}; one of {valid}"
        ) from None

    model_ref = _get(parser, "model", "file")
    graph_ref = _get(parser, "graph", "file")
    if model_ref is None or graph_ref is None:
        raise ConfigurationError(f"{path}: [model] and [graph] sections need a 'file' key")
    model_path = base / model_ref
    graph_path = base / graph_ref
    if not model_path.exists():
        raise ConfigurationError(f"{path}: model file not found: {model_path}")
    if not graph_path.exists():
        raise ConfigurationError(f"{path}: graph file not found: {graph_path}")
    model, leader = load_model(model_path)
    graph = read_graph_file(graph_path)
    bundle = build_laplacian(graph)

    overrides = GainSet()
    omega_override = None
    gains_blob = b""
    if parser.has_section("gains"):
        gains_file = _get(parser, "gains", "file")
        if gains_file is not None:
            gains_path = base / gains_file
            if not gains_path.exists():
                raise ConfigurationError(f"{path}: gains file not found: {gains_path}")
            overrides = load_gains(gains_path)
            gains_blob = gains_path.read_bytes()
        if _get(parser, "gains", "beta") is not None:
            overrides = overrides.replace(beta=parser.getfloat("gains", "beta"))
        if _get(parser, "gains", "kappa") is not None:
            overrides = overrides.replace(kappa=np.array([parser.getfloat("gains", "kappa")]))
        if _get(parser, "gains", "phi") is not None:
            overrides = overrides.replace(phi=np.array([parser.getfloat("gains", "phi")]))
        if _get(parser, "gains", "omega") is not None:
            omega_override = parser.getfloat("gains", "omega")

    leader_x0 = _get(parser, "sim", "leader_x0")
    config = SimConfig(
        dt=dt if dt is not None else parser.getfloat("sim", "dt", fallback=1e-3),
        t_end=t_end if t_end is not None else parser.getfloat("sim", "t_end", fallback=10.0),
        record_every=parser.getint("sim", "record_every", fallback=10),
        integrator=_get(parser, "sim", "integrator", "rk4"),
        seed=seed if seed is not None else parser.getint("scenario", "seed", fallback=0),
        init_scale=parser.getfloat("sim", "init_scale", fallback=1.0),
        d0=parser.getfloat("sim", "d0", fallback=1.0),
        init_mode=_get(parser, "sim", "init_mode", "random"),
        leader_x0=np.array([float(v) for v in leader_x0.split()]) if leader_x0 else None,
    )

    if out is not None:
        out_dir = Path(out)
    elif parser.has_section("output") and _get(parser, "output", "dir"):
        out_dir = base / _get(parser, "output", "dir")
    else:
        out_dir = base / "out" / name
    fingerprint = scenario_fingerprint(
        [path.read_bytes(), model_path.read_bytes(), graph_path.read_bytes(), gains_blob,
         config.dt, config.t_end, config.seed, config.record_every, config.init_scale,
         config.d0, config.init_mode, kind.value]
    )
    return Scenario(
        name=name, kind=kind, model=model, leader=leader, graph=graph, bundle=bundle,
        config=config, overrides=overrides, omega_override=omega_override,
        out_dir=Path(out_dir), fingerprint=fingerprint, path=path,
    )


def scenario_omega(scenario):
    """Certified leader-input bound: explicit override, else from the leader."""
    if scenario.omega_override is not None:
        return float(scenario.omega_override)
    return leader_omega(scenario.leader)


def design_gains(scenario, policy=None):
    """Synthesize the full gain set the scenario's protocol needs, honoring
    overrides: an overridden S re-derives (Pbar, F); an overridden P
    re-derives (K, Omega) unless those are explicitly supplied; beta given in
    the scenario is used verbatim (the certificate flags beta < omega)."""
    policy = policy or DEFAULT_POLICY
    kind = scenario.kind
    model = scenario.model
    over = scenario.overrides
    followers = scenario.graph.follower_count
    gains = GainSet()

    if kind.disagreement_metric == "S" or kind.has_observers:
        k, f, s, pbar = design_output_gains(
            model, policy, s_override=over.S, k_override=over.K
        )
        gains = gains.replace(K=k, F=over.F if over.F is not None else f, S=s, Pbar=pbar)
    if kind.disagreement_metric == "Pinv":
        k_state, p, omega_mat = design_state_gains(model, policy)
        if over.P is not None:
            p = over.P
            k_state = -model.B.T @ np.linalg.inv(p)
            omega_mat = k_state.T @ k_state
        if over.K is not None:
            k_state = np.atleast_2d(np.asarray(over.K, dtype=float))
        if over.Omega is not None:
            omega_mat = over.Omega
        gains = gains.replace(K=k_state, P=p, Omega=omega_mat)
        if kind is ProtocolKind.LEADERLESS_INPUT_INJECTION and gains.F is None:
            _, f, _, _ = design_output_gains(model, policy)
            gains = gains.replace(F=f)
    if kind in (ProtocolKind.TRACKING_OUTPUT_DISCONTINUOUS, ProtocolKind.TRACKING_OUTPUT_CONTINUOUS):
        gains = gains.replace(Q=over.Q if over.Q is not None else design_q(model, gains.K, policy))
    if kind.needs_leader:
        omega = scenario_omega(scenario)
        beta = over.beta if over.beta is not None else choose_beta(omega)
        gains = gains.replace(beta=float(beta))
    if kind.smoothed:
        kappa = over.kappa if over.kappa is not None else DEFAULT_BOUNDARY_WIDTH
        phi = over.phi if over.phi is not None else DEFAULT_LEAK_RATE
        gains = gains.replace(
            kappa=np.broadcast_to(np.asarray(kappa, dtype=float), (followers,)).copy(),
            phi=np.broadcast_to(np.asarray(phi, dtype=float), (followers,)).copy(),
        )
    return gains


def certify_scenario(scenario, gains):
    omega = scenario_omega(scenario) if scenario.kind.needs_leader else None
    return certify(gains, scenario.model, omega_bound=omega)


def graph_certificate(scenario):
    return spectral_certificate(scenario.graph, scenario.bundle)
