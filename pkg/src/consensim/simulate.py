"""Deterministic fixed-step integration of the coupled network dynamics,
with trajectory recording, CSV export, and Lyapunov-function monitoring."""

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError, SchemaError
from .matio import format_float
from .protocols import NetworkState, ProtocolContext, ProtocolKind

CLAMP_WARN_THRESHOLD = 1e-6


def rk4_step(f, t, y, dt):
    """One classic Runge-Kutta step of y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f, t, y, dt):
    return y + dt * f(t, y)


@dataclass
class SimConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 10
    integrator: str = "rk4"           # "rk4" or "euler"
    seed: int = 0
    init_scale: float = 1.0           # half-width of the uniform initial draw
    d0: float = 1.0                   # initial adaptive weights
    init_mode: str = "random"         # "random" or "manifold"
    leader_x0: np.ndarray = None      # explicit leader initial state

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ConfigurationError("t_end must be at least one step")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")
        if self.integrator not in ("rk4", "euler"):
            raise ConfigurationError(f"unknown integrator {self.integrator!r}")
        if self.init_mode not in ("random", "manifold"):
            raise ConfigurationError(f"unknown init_mode {self.init_mode!r}")


@dataclass
class SimulationTrace:
    kind: ProtocolKind
    times: np.ndarray                 # (T,)
    x: np.ndarray                     # (T, N, n) follower states
    d: np.ndarray                     # (T, N)
    u: np.ndarray                     # (T, N, p) follower inputs
    xi: np.ndarray                    # (T, N, n) consensus error rows
    norm_xi: np.ndarray               # (T,)
    v: np.ndarray = None              # (T, N, n)
    w: np.ndarray = None              # (T, N, n)
    x0: np.ndarray = None             # (T, n) leader state
    v0: np.ndarray = None             # (T, n)
    metadata: dict = field(default_factory=dict)

    @property
    def record_count(self):
        return len(self.times)

    def state_at(self, index):
        pick = lambda a: None if a is None else a[index].copy()
        return NetworkState(
            x=self.x[index].copy(), d=self.d[index].copy(),
            v=pick(self.v), w=pick(self.w), x0=pick(self.x0), v0=pick(self.v0),
        )


def initial_state(kind, graph, model, config, rng=None):
    """Draw the initial NetworkState: uniform(-init_scale, init_scale) per
    component, all agents sharing one draw in manifold mode, leader state
    taken from config.leader_x0 when given."""
    kind = ProtocolKind(kind)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = model.state_dim
    followers = graph.follower_count
    scale = config.init_scale

    def draw(shape):
        return rng.uniform(-scale, scale, size=shape)

    if config.init_mode == "manifold":
        x = np.tile(draw(n), (followers, 1))
        v = np.tile(draw(n), (followers, 1))
        w = np.tile(draw(n), (followers, 1))
    else:
        x = draw((followers, n))
        v = draw((followers, n))
        w = draw((followers, n))
    d = np.full(followers, float(config.d0))
    if not kind.needs_leader:
        return NetworkState(x=x, v=v, w=w, d=d)
    x0 = (
        np.asarray(config.leader_x0, dtype=float)
        if config.leader_x0 is not None
        else draw(n)
    )
    if x0.shape != (n,):
        raise ConfigurationError(f"leader initial state must have shape ({n},)")
    if kind.has_observers:
        return NetworkState(x=x, v=v, w=w, d=d, x0=x0, v0=draw(n))
    return NetworkState(x=x, d=d, x0=x0)


class _Layout:
    """Flat-vector packing of NetworkState for the integrator."""

    def __init__(self, kind, followers, n):
        self.kind = ProtocolKind(kind)
        self.followers = followers
        self.n = n
        self.has_leader = self.kind.needs_leader
        self.has_observers = self.kind.has_observers
        size = followers * n + followers
        if self.has_observers:
            size += 2 * followers * n
        if self.has_leader:
            size += n
            if self.has_observers:
                size += n
        self.size = size

    def pack(self, state):
        parts = [state.x.ravel()]
        if self.has_observers:
            parts += [state.v.ravel(), state.w.ravel()]
        if self.has_leader:
            parts.append(state.x0)
            if self.has_observers:
                parts.append(state.v0)
        parts.append(state.d)
        return np.concatenate(parts)

    def unpack(self, flat):
        nf, n = self.followers, self.n
        pos = 0

        def take(count):
            nonlocal pos
            chunk = flat[pos:pos + count]
            pos += count
            return chunk

        x = take(nf * n).reshape(nf, n)
        v = w = x0 = v0 = None
        if self.has_observers:
            v = take(nf * n).reshape(nf, n)
            w = take(nf * n).reshape(nf, n)
        if self.has_leader:
            x0 = take(n)
            if self.has_observers:
                v0 = take(n)
        d = take(nf)
        return NetworkState(x=x, d=d, v=v, w=w, x0=x0, v0=v0)


def simulate(kind, graph, bundle, model, gains, leader, config, initial=None, metadata=None):
    """Fixed-step RK4 (or Euler) integration of the selected protocol.

    Deterministic: identical inputs produce bit-identical traces.  After each
    step the adaptive weights are clamped at their theoretical floor to absorb
    integration round-off; any clamp beyond 1e-6 emits a warning and is
    counted in the trace metadata.  Non-finite state raises DivergenceError
    carrying the trace recorded so far.
    """
    kind = ProtocolKind(kind)
    ctx = ProtocolContext(kind, graph, bundle, model, gains, leader)
    if initial is None:
        initial = initial_state(kind, graph, model, config)
    ctx.check_initial_weights(initial.d)
    layout = _Layout(kind, graph.follower_count, model.state_dim)

    steps = int(round(config.t_end / config.dt))
    dt = config.dt
    floor = kind.coupling_floor
    clamp_max = 0.0
    clamp_warnings = 0

    def rhs(t, flat):
        deriv, _ = ctx.derivative(layout.unpack(flat), t)
        return layout.pack(deriv)

    record_steps = list(range(0, steps + 1, config.record_every))
    if record_steps[-1] != steps:
        record_steps.append(steps)
    records = {
        "times": [], "x": [], "v": [], "w": [], "x0": [], "v0": [],
        "d": [], "u": [], "xi": [],
    }

    def record(step, flat):
        state = layout.unpack(flat)
        t = step * dt
        _, u = ctx.derivative(state, t)
        sig = ctx.signals(state)
        records["times"].append(t)
        records["x"].append(state.x.copy())
        records["d"].append(state.d.copy())
        records["u"].append(u.copy())
        records["xi"].append(sig.xi.copy())
        if layout.has_observers:
            records["v"].append(state.v.copy())
            records["w"].append(state.w.copy())
        if layout.has_leader:
            records["x0"].append(state.x0.copy())
            if layout.has_observers:
                records["v0"].append(state.v0.copy())

    def build_trace():
        stack = lambda key: np.array(records[key]) if records[key] else None
        xi = np.array(records["xi"])
        meta = dict(metadata or {})
        meta.update(
            kind=kind.value, dt=dt, t_end=config.t_end, seed=config.seed,
            integrator=config.integrator, record_every=config.record_every,
            clamp_max=clamp_max, clamp_warnings=clamp_warnings,
        )
        return SimulationTrace(
            kind=kind, times=np.array(records["times"]),
            x=np.array(records["x"]), d=np.array(records["d"]),
            u=np.array(records["u"]), xi=xi,
            norm_xi=np.linalg.norm(xi.reshape(len(xi), -1), axis=1),
            v=stack("v"), w=stack("w"), x0=stack("x0"), v0=stack("v0"),
            metadata=meta,
        )

    flat = layout.pack(initial)
    record_cursor = 0
    if record_steps[record_cursor] == 0:
        record(0, flat)
        record_cursor += 1
    d_slice = slice(layout.size - layout.followers, layout.size)

    step_fn = rk4_step if config.integrator == "rk4" else euler_step
    for step in range(1, steps + 1):
        t = (step - 1) * dt
        # overflow on a diverging run is reported as DivergenceError below
        with np.errstate(over="ignore", invalid="ignore"):
            flat = step_fn(rhs, t, flat, dt)
        d_vals = flat[d_slice]
        deficit = float(np.max(floor - d_vals, initial=0.0))
        if deficit > 0.0:
            clamp_max = max(clamp_max, deficit)
            if deficit > CLAMP_WARN_THRESHOLD:
                clamp_warnings += 1
                warnings.warn(
                    f"adaptive weight clamped by {deficit:.3e} at t={step * dt:.6f}",
                    RuntimeWarning,
                )
            np.maximum(d_vals, floor, out=d_vals)
        if not np.all(np.isfinite(flat)):
            raise DivergenceError(
                f"non-finite state at t={step * dt:.6f}", partial_trace=build_trace()
            )
        if record_cursor < len(record_steps) and record_steps[record_cursor] == step:
            record(step, flat)
            record_cursor += 1

    return build_trace()


def _column_names(trace):
    names = ["t"]
    n = trace.x.shape[2]
    p = trace.u.shape[2]
    followers = trace.x.shape[1]
    if trace.x0 is not None:
        names += [f"x0_{k + 1}" for k in range(n)]
    for i in range(followers):
        names += [f"x{i + 1}_{k + 1}" for k in range(n)]
    if trace.v is not None:
        if trace.v0 is not None:
            names += [f"v0_{k + 1}" for k in range(n)]
        for i in range(followers):
            names += [f"v{i + 1}_{k + 1}" for k in range(n)]
        for i in range(followers):
            names += [f"w{i + 1}_{k + 1}" for k in range(n)]
    names += [f"d{i + 1}" for i in range(followers)]
    for i in range(followers):
        names += [f"u{i + 1}_{k + 1}" for k in range(p)]
    names.append("norm_xi")
    return names


def trace_row(trace, index):
    row = [trace.times[index]]
    if trace.x0 is not None:
        row += list(trace.x0[index])
    row += list(trace.x[index].ravel())
    if trace.v is not None:
        if trace.v0 is not None:
            row += list(trace.v0[index])
        row += list(trace.v[index].ravel())
        row += list(trace.w[index].ravel())
    row += list(trace.d[index])
    row += list(trace.u[index].ravel())
    row.append(trace.norm_xi[index])
    return row


def trace_to_csv(trace, path):
    """One row per recorded step; '#'-prefixed metadata lines precede the
    header; floats carry 17 significant digits."""
    lines = [f"# {key}: {value}" for key, value in sorted(trace.metadata.items())]
    lines.append(",".join(_column_names(trace)))
    for idx in range(trace.record_count):
        lines.append(",".join(format_float(v) for v in trace_row(trace, idx)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path):
    """Read back a trace CSV as (metadata, column names, data array)."""
    metadata = {}
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise SchemaError(f"{path}: no header row found")
    return metadata, header, np.array(rows)


def scenario_fingerprint(chunks):
    """Stable hash over the byte content of everything a run depends on."""
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk if isinstance(chunk, bytes) else str(chunk).encode())
        digest.update(b"\x1f")
    return digest.hexdigest()[:16]


def lyapunov_monitor(trace, graph, bundle, model, gains, certificate, constants):
    """Evaluate the variant's certified energy function at every recorded step.

    Leaderless variants use the weighted disagreement energy
        0.5 sum_i r_i (2 d_i + rho_i) varrho_i' M varrho_i
      + 0.5 sum_i r_i (d_i - alpha)^2
    with M = S or P^{-1}.  Tracking output-feedback variants use the
    G-weighted analogue plus gamma e0' S e0 (discontinuous), and the
    continuous variant wraps it with the eta/zeta terms
        eta'(I x Q) eta + gamma1 zeta'(I x S) zeta + gamma2 V_track.
    State-feedback variants use 0.5 sum_i g_i (2 d_i + rho_i) rho_i
      + 0.5 sum_i g_i (d_i - alpha)^2.
    """
    kind = trace.kind
    values = np.zeros(trace.record_count)
    alpha = constants.alpha
    if not kind.needs_leader:
        ctx = ProtocolContext(kind, graph, bundle, model, gains, leader=None)
        for idx in range(trace.record_count):
            state = trace.state_at(idx)
            sig = ctx.signals(state)
            # rho_i is the same quadratic form that weights the energy
            values[idx] = 0.5 * float(
                certificate.r @ ((2.0 * state.d + sig.rho) * sig.rho)
                + certificate.r @ (state.d - alpha) ** 2
            )
        return values
    for idx in range(trace.record_count):
        values[idx] = _tracking_energy(
            kind, bundle, model, gains, certificate, constants, trace.state_at(idx)
        )
    return values


def _tracking_energy(kind, bundle, model, gains, certificate, constants, state):
    block = bundle.followers_block
    g = certificate.g
    if kind in (ProtocolKind.TRACKING_STATE_DISCONTINUOUS, ProtocolKind.TRACKING_STATE_CONTINUOUS):
        pinv = np.linalg.inv(gains.P)
        xi = block @ (state.x - state.x0)
        rho = np.einsum("ij,jk,ik->i", xi, pinv, xi)
        return 0.5 * float(g @ ((2.0 * state.d + rho) * rho) + g @ (state.d - constants.alpha) ** 2)
    eta = block @ (state.v - state.v0)
    psi = block @ state.w
    varrho = psi - eta
    e0 = state.v0 - state.x0
    rho = np.einsum("ij,jk,ik->i", varrho, gains.S, varrho)
    core = 0.5 * float(
        g @ ((2.0 * state.d + rho) * rho) + g @ (state.d - constants.alpha) ** 2
    ) + constants.gamma * float(e0 @ gains.S @ e0)
    if kind is ProtocolKind.TRACKING_OUTPUT_DISCONTINUOUS:
        return core
    xi = block @ (state.x - state.x0)
    zeta = eta - xi
    return (
        float(np.einsum("ij,jk,ik->", eta, gains.Q, eta))
        + constants.gamma1 * float(np.einsum("ij,jk,ik->", zeta, gains.S, zeta))
        + constants.gamma2 * core
    )
