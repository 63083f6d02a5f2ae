"""Agent dynamics: the shared linear model dx = A x + B u, y = C x, and the
leader input signals (zero, bounded sinusoid, or a Chua-circuit
nonlinearity fed back from the leader's own state)."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError
from . import matio


@dataclass(frozen=True)
class AgentModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_2d(np.asarray(self.B, dtype=float))
        c = np.atleast_2d(np.asarray(self.C, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise DimensionError(f"B has {b.shape[0]} rows but A is {a.shape[0]}x{a.shape[0]}")
        if c.shape[1] != a.shape[0]:
            raise DimensionError(f"C has {c.shape[1]} columns but A is {a.shape[0]}x{a.shape[0]}")
        for name, m in (("A", a), ("B", b), ("C", c)):
            if not np.all(np.isfinite(m)):
                raise DimensionError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)

    @property
    def state_dim(self):
        return self.A.shape[0]

    @property
    def input_dim(self):
        return self.B.shape[1]

    @property
    def output_dim(self):
        return self.C.shape[0]


def agent_derivative(model, x, u):
    """Open-loop agent dynamics A x + B u."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (model.state_dim,):
        raise DimensionError(f"state must have shape ({model.state_dim},), got {x.shape}")
    if u.shape != (model.input_dim,):
        raise DimensionError(f"input must have shape ({model.input_dim},), got {u.shape}")
    return model.A @ x + model.B @ u


@dataclass(frozen=True)
class ZeroLeader:
    """Leader that applies no control input."""

    variant = "zero"


@dataclass(frozen=True)
class ChuaLeader:
    """Chua-circuit leader: its input is the circuit's own piecewise-linear
    nonlinearity, evaluated on the first state component."""

    a: float = 9.0
    b: float = 18.0
    m01: float = -3.0 / 4.0
    m02: float = -4.0 / 3.0
    variant = "chua"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.m01 < 0 and self.m02 < 0):
            raise ConfigurationError(
                "Chua parameters require a > 0, b > 0, m01 < 0, m02 < 0"
            )


@dataclass(frozen=True)
class SinusoidLeader:
    """Per-channel sinusoid u0_k(t) = amplitude_k sin(2 pi frequency_k t + phase_k)."""

    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray = None
    variant = "sinusoid"

    def __post_init__(self):
        amp = np.atleast_1d(np.asarray(self.amplitude, dtype=float))
        freq = np.atleast_1d(np.asarray(self.frequency, dtype=float))
        phase = (
            np.zeros_like(amp)
            if self.phase is None
            else np.atleast_1d(np.asarray(self.phase, dtype=float))
        )
        if not (amp.shape == freq.shape == phase.shape):
            raise DimensionError("amplitude, frequency, phase must share one shape per channel")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "frequency", freq)
        object.__setattr__(self, "phase", phase)


def chua_input(leader, x0):
    """f0(x0) = (a/2)(m01 - m02)(|x01 + 1| - |x01 - 1|), a scalar."""
    x01 = float(np.asarray(x0, dtype=float).ravel()[0])
    return 0.5 * leader.a * (leader.m01 - leader.m02) * (abs(x01 + 1.0) - abs(x01 - 1.0))


def leader_omega(leader):
    """Certified sup-norm bound on the leader input over all time."""
    if isinstance(leader, ZeroLeader):
        return 0.0
    if isinstance(leader, ChuaLeader):
        # saturation bound: |x01+1| - |x01-1| stays in [-2, 2]
        return leader.a * abs(leader.m01 - leader.m02) * 2.0
    if isinstance(leader, SinusoidLeader):
        return float(np.linalg.norm(leader.amplitude))
    raise ConfigurationError(f"unknown leader variant {leader!r}")


def leader_input(leader, t, x0, input_dim):
    """Leader control input at time t; shape (input_dim,)."""
    if isinstance(leader, ZeroLeader):
        return np.zeros(input_dim)
    if isinstance(leader, ChuaLeader):
        if input_dim != 1:
            raise DimensionError("the Chua leader drives a single input channel")
        return np.array([chua_input(leader, x0)])
    if isinstance(leader, SinusoidLeader):
        if leader.amplitude.shape[0] != input_dim:
            raise DimensionError(
                f"sinusoid has {leader.amplitude.shape[0]} channels, model expects {input_dim}"
            )
        return leader.amplitude * np.sin(2.0 * np.pi * leader.frequency * t + leader.phase)
    raise ConfigurationError(f"unknown leader variant {leader!r}")


def chua_system(a=9.0, b=18.0, m01=-3.0 / 4.0, m02=-4.0 / 3.0):
    """Dimensionless Chua-circuit model and its leader input description.  The linear part
    is shared by the followers; C = I exposes the full state."""
    leader = ChuaLeader(a=a, b=b, m01=m01, m02=m02)
    model = AgentModel(
        A=np.array([[-a * (m01 + 1.0), a, 0.0], [1.0, -1.0, 1.0], [0.0, -b, 0.0]]),
        B=np.array([[1.0], [0.0], [0.0]]),
        C=np.eye(3),
    )
    return model, leader


def save_model(path, model, leader=ZeroLeader()):
    entries = {"A": model.A, "B": model.B, "C": model.C, "leader_variant": leader.variant}
    if isinstance(leader, ChuaLeader):
        entries["chua_params"] = np.array([[leader.a, leader.b, leader.m01, leader.m02]])
    elif isinstance(leader, SinusoidLeader):
        entries["sinusoid_amplitude"] = leader.amplitude.reshape(1, -1)
        entries["sinusoid_frequency"] = leader.frequency.reshape(1, -1)
        entries["sinusoid_phase"] = leader.phase.reshape(1, -1)
    matio.write_entries(path, entries)


def load_model(path):
    entries = matio.read_entries(path)
    for key in ("A", "B", "C"):
        if key not in entries:
            raise ConfigurationError(f"{path}: model file is missing matrix {key!r}")
    model = AgentModel(A=entries["A"], B=entries["B"], C=entries["C"])
    variant = entries.get("leader_variant", "zero")
    if variant == "zero":
        leader = ZeroLeader()
    elif variant == "chua":
        params = np.asarray(entries["chua_params"]).ravel()
        leader = ChuaLeader(a=params[0], b=params[1], m01=params[2], m02=params[3])
    elif variant == "sinusoid":
        amplitude = entries["sinusoid_amplitude"].ravel()
        leader = SinusoidLeader(
            amplitude=amplitude,
            frequency=entries["sinusoid_frequency"].ravel(),
            phase=entries.get("sinusoid_phase", np.zeros_like(amplitude)).ravel(),
        )
    else:
        raise ConfigurationError(f"{path}: unknown leader variant {variant!r}")
    return model, leader
