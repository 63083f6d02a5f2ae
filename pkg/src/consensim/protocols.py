"""Right-hand sides of the six adaptive consensus protocols.

Two leaderless variants run on strongly connected graphs: both use the
local-observer / distributed-observer pair (v_i, w_i), and differ in how the
distributed observer injects the neighborhood disagreement (through F C or
through B K) and in the adaptive-law weight (C^T C or Omega).

Four tracking variants run on leader graphs (node 0 is the leader).  The
output-feedback pair keeps the observers and adds a dominance term
-beta * direction(.) against the leader's unknown bounded input, either with
the exact unit direction (discontinuous) or its boundary-layer smoothing
(continuous, with sigma-modified adaptation).  The state-feedback pair drops
the observers and acts directly on the local tracking disagreement.

All evaluations are pure functions of the frozen inputs.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .agents import leader_input
from .errors import ConfigurationError
from .graphs import has_spanning_tree_rooted_at, is_strongly_connected


class ProtocolKind(str, Enum):
    LEADERLESS_OUTPUT_INJECTION = "leaderless-output-injection"
    LEADERLESS_INPUT_INJECTION = "leaderless-input-injection"
    TRACKING_OUTPUT_DISCONTINUOUS = "tracking-output-discontinuous"
    TRACKING_OUTPUT_CONTINUOUS = "tracking-output-continuous"
    TRACKING_STATE_DISCONTINUOUS = "tracking-state-discontinuous"
    TRACKING_STATE_CONTINUOUS = "tracking-state-continuous"

    @property
    def needs_leader(self):
        return self not in (
            ProtocolKind.LEADERLESS_OUTPUT_INJECTION,
            ProtocolKind.LEADERLESS_INPUT_INJECTION,
        )

    @property
    def has_observers(self):
        return self in (
            ProtocolKind.LEADERLESS_OUTPUT_INJECTION,
            ProtocolKind.LEADERLESS_INPUT_INJECTION,
            ProtocolKind.TRACKING_OUTPUT_DISCONTINUOUS,
            ProtocolKind.TRACKING_OUTPUT_CONTINUOUS,
        )

    @property
    def smoothed(self):
        """Boundary-layer (continuous) variants."""
        return self in (
            ProtocolKind.TRACKING_OUTPUT_CONTINUOUS,
            ProtocolKind.TRACKING_STATE_CONTINUOUS,
        )

    @property
    def sigma_modified(self):
        return self.smoothed

    @property
    def disagreement_metric(self):
        """Matrix weighting the state-dependent gain rho_i: 'S' for
        output-feedback variants, 'Pinv' for state-feedback ones."""
        if self in (
            ProtocolKind.LEADERLESS_INPUT_INJECTION,
            ProtocolKind.TRACKING_STATE_DISCONTINUOUS,
            ProtocolKind.TRACKING_STATE_CONTINUOUS,
        ):
            return "Pinv"
        return "S"

    @property
    def coupling_floor(self):
        """Theoretical floor of the adaptive weights d_i."""
        return 1.0 if self.sigma_modified else 0.0


REQUIRED_GAINS = {
    ProtocolKind.LEADERLESS_OUTPUT_INJECTION: ("K", "F", "S"),
    ProtocolKind.LEADERLESS_INPUT_INJECTION: ("K", "F", "P", "Omega"),
    ProtocolKind.TRACKING_OUTPUT_DISCONTINUOUS: ("K", "F", "S", "Q", "beta"),
    ProtocolKind.TRACKING_OUTPUT_CONTINUOUS: ("K", "F", "S", "Q", "beta", "kappa", "phi"),
    ProtocolKind.TRACKING_STATE_DISCONTINUOUS: ("K", "P", "Omega", "beta"),
    ProtocolKind.TRACKING_STATE_CONTINUOUS: ("K", "P", "Omega", "beta", "kappa", "phi"),
}


@dataclass
class NetworkState:
    """Stacked network state; agent rows are followers 1..N, leader fields
    are None for leaderless variants, observer fields are None for
    state-feedback variants."""

    x: np.ndarray            # (N, n) follower states
    d: np.ndarray            # (N,) adaptive coupling weights
    v: np.ndarray = None     # (N, n) local-observer states
    w: np.ndarray = None     # (N, n) distributed-observer states
    x0: np.ndarray = None    # (n,) leader state
    v0: np.ndarray = None    # (n,) leader's local-observer state

    def copy(self):
        dup = lambda a: None if a is None else a.copy()
        return NetworkState(x=self.x.copy(), d=self.d.copy(), v=dup(self.v),
                            w=dup(self.w), x0=dup(self.x0), v0=dup(self.v0))


@dataclass
class DerivedSignals:
    xi: np.ndarray            # (N, n) consensus error rows
    rho: np.ndarray           # (N,) state-dependent gains
    eta: np.ndarray = None    # (N, n) observer disagreement rows
    psi: np.ndarray = None    # (N, n) distributed-observer disagreement rows
    varrho: np.ndarray = None # (N, n) psi - eta
    e0: np.ndarray = None     # (n,) leader estimation error v0 - x0


def unit_direction(z):
    """z / ||z|| for nonzero z, the zero vector otherwise."""
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z)
    if norm == 0.0:
        return np.zeros_like(z)
    return z / norm


def boundary_layer_direction(z, width):
    """Continuous surrogate of unit_direction: z / ||z|| outside the
    boundary layer, z / width inside (||z|| <= width)."""
    if width <= 0.0:
        raise ConfigurationError(f"boundary-layer width must be positive, got {width}")
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z)
    if norm > width:
        return z / norm
    return z / width


def _unit_rows(rows):
    norms = np.linalg.norm(rows, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    return rows / safe[:, None] * (norms > 0.0)[:, None]


def _boundary_rows(rows, widths):
    norms = np.linalg.norm(rows, axis=1)
    divisor = np.where(norms > widths, norms, widths)
    return rows / divisor[:, None]


def _quad_rows(rows, weight):
    """Per-row quadratic form rows_i^T weight rows_i."""
    return np.einsum("ij,jk,ik->i", rows, weight, rows)


class ProtocolContext:
    """Precomputed products for repeated derivative evaluation of one
    (kind, graph, model, gains, leader) configuration."""

    def __init__(self, kind, graph, bundle, model, gains, leader=None):
        self.kind = ProtocolKind(kind)
        self.graph = graph
        self.bundle = bundle
        self.model = model
        self.gains = gains
        self.leader = leader
        self._validate()

        self.n = model.state_dim
        self.p = model.input_dim
        self.followers = graph.follower_count
        self.A = model.A
        self.B = model.B
        self.C = model.C
        self.K = gains.K
        self.coupling = (
            bundle.followers_block if graph.has_leader else bundle.laplacian
        )
        if gains.F is not None:
            self.FC = gains.F @ model.C
        metric = self.kind.disagreement_metric
        if metric == "S":
            self.rho_weight = gains.S
        else:
            self.rho_weight = np.linalg.inv(gains.P)
        if self.kind in (
            ProtocolKind.TRACKING_OUTPUT_DISCONTINUOUS,
            ProtocolKind.TRACKING_OUTPUT_CONTINUOUS,
        ):
            self.SB = gains.S @ model.B
            self.QB = gains.Q @ model.B
        if self.kind in (
            ProtocolKind.TRACKING_STATE_DISCONTINUOUS,
            ProtocolKind.TRACKING_STATE_CONTINUOUS,
        ):
            self.PinvB = self.rho_weight @ model.B
        if self.kind.smoothed:
            self.kappa = np.broadcast_to(
                np.asarray(gains.kappa, dtype=float), (self.followers,)
            ).copy()
            self.phi = np.broadcast_to(
                np.asarray(gains.phi, dtype=float), (self.followers,)
            ).copy()
            if np.any(self.kappa <= 0) or np.any(self.phi <= 0):
                raise ConfigurationError("boundary widths and leak rates must be positive")

    def _validate(self):
        kind, graph, gains = self.kind, self.graph, self.gains
        for name in REQUIRED_GAINS[kind]:
            if getattr(gains, name) is None:
                raise ConfigurationError(
                    f"protocol '{kind.value}' requires gain component {name!r}"
                )
        if kind.needs_leader:
            if not graph.has_leader:
                raise ConfigurationError(
                    f"protocol '{kind.value}' needs a leader-flagged graph"
                )
            if not has_spanning_tree_rooted_at(graph, 0):
                raise ConfigurationError(
                    "leader graph lacks a spanning tree rooted at the leader"
                )
        else:
            if graph.has_leader:
                raise ConfigurationError(
                    f"protocol '{kind.value}' runs on leaderless graphs"
                )
            if not is_strongly_connected(graph):
                raise ConfigurationError(
                    "leaderless protocols require a strongly connected graph"
                )

    def check_initial_weights(self, d):
        kind = self.kind
        if kind.sigma_modified:
            if np.any(d < 1.0):
                raise ConfigurationError(
                    f"protocol '{kind.value}' requires every d_i(0) >= 1"
                )
        elif kind.needs_leader:
            if np.any(d < 0.0):
                raise ConfigurationError("tracking protocols require d_i(0) >= 0")
        elif np.any(d <= 0.0):
            raise ConfigurationError("leaderless protocols require d_i(0) > 0")

    def _direction_rows(self, rows):
        if self.kind.smoothed:
            return _boundary_rows(rows, self.kappa)
        return _unit_rows(rows)

    def signals(self, state):
        """Consensus error, observer disagreements, per-agent rho, and the
        leader estimation error for the current state."""
        kind = self.kind
        if not kind.needs_leader:
            lap = self.coupling
            xi = lap @ state.x
            eta = lap @ state.v
            psi = lap @ state.w
            varrho = psi - eta
            return DerivedSignals(
                xi=xi, eta=eta, psi=psi, varrho=varrho,
                rho=_quad_rows(varrho, self.rho_weight),
            )
        block = self.coupling
        xi = block @ (state.x - state.x0)
        if not kind.has_observers:
            return DerivedSignals(xi=xi, rho=_quad_rows(xi, self.rho_weight))
        eta = block @ (state.v - state.v0)
        psi = block @ state.w
        varrho = psi - eta
        return DerivedSignals(
            xi=xi, eta=eta, psi=psi, varrho=varrho,
            rho=_quad_rows(varrho, self.rho_weight),
            e0=state.v0 - state.x0,
        )

    def derivative(self, state, t):
        """Time derivative of the full network state plus the follower
        control inputs applied at (state, t)."""
        kind = self.kind
        if not kind.needs_leader:
            return self._leaderless_derivative(state)
        if kind.has_observers:
            return self._tracking_output_derivative(state, t)
        return self._tracking_state_derivative(state, t)

    def _leaderless_derivative(self, state):
        sig = self.signals(state)
        x, v, w, d = state.x, state.v, state.w, state.d
        u = w @ self.K.T
        bu = u @ self.B.T
        innovation = (v - x) @ self.FC.T
        gain = (d + sig.rho)[:, None]
        if self.kind is ProtocolKind.LEADERLESS_OUTPUT_INJECTION:
            coupling = gain * (sig.varrho @ self.FC.T)
            d_dot = np.einsum("ij,ij->i", sig.varrho @ self.C.T, sig.varrho @ self.C.T)
        else:
            bk = self.B @ self.K
            coupling = gain * (sig.varrho @ bk.T)
            d_dot = _quad_rows(sig.varrho, self.gains.Omega)
        deriv = NetworkState(
            x=x @ self.A.T + bu,
            v=v @ self.A.T + bu + innovation,
            w=w @ self.A.T + bu + coupling + innovation,
            d=d_dot,
        )
        return deriv, u

    def _tracking_output_derivative(self, state, t):
        sig = self.signals(state)
        x, v, w, d = state.x, state.v, state.w, state.d
        u0 = leader_input(self.leader, t, state.x0, self.p)
        dir_obs = self._direction_rows(sig.varrho @ self.SB)
        dir_ctl = self._direction_rows(sig.eta @ self.QB)
        u = w @ self.K.T - self.gains.beta * dir_ctl
        innovation = (v - x) @ self.FC.T
        gain = (d + sig.rho)[:, None]
        deriv = NetworkState(
            x=x @ self.A.T + u @ self.B.T,
            v=v @ self.A.T + u @ self.B.T + innovation,
            w=w @ self.A.T
            + (u - self.gains.beta * dir_obs) @ self.B.T
            + gain * (sig.varrho @ self.FC.T)
            + innovation,
            d=self._weight_law(sig.varrho @ self.C.T, d),
            x0=self.A @ state.x0 + self.B @ u0,
            v0=self.A @ state.v0 + self.B @ u0 + self.FC @ (state.v0 - state.x0),
        )
        return deriv, u

    def _tracking_state_derivative(self, state, t):
        sig = self.signals(state)
        x, d = state.x, state.d
        u0 = leader_input(self.leader, t, state.x0, self.p)
        dir_ctl = self._direction_rows(sig.xi @ self.PinvB)
        u = (d + sig.rho)[:, None] * (sig.xi @ self.K.T) - self.gains.beta * dir_ctl
        growth = _quad_rows(sig.xi, self.gains.Omega)
        deriv = NetworkState(
            x=x @ self.A.T + u @ self.B.T,
            d=growth if not self.kind.sigma_modified else growth - self.phi * (d - 1.0),
            x0=self.A @ state.x0 + self.B @ u0,
        )
        return deriv, u

    def _weight_law(self, output_disagreement, d):
        growth = np.einsum("ij,ij->i", output_disagreement, output_disagreement)
        if self.kind.sigma_modified:
            return growth - self.phi * (d - 1.0)
        return growth


def derive_signals(kind, graph, bundle, model, gains, state, leader=None):
    """One-shot signal derivation; see ProtocolContext.signals."""
    return ProtocolContext(kind, graph, bundle, model, gains, leader).signals(state)


def protocol_derivative(kind, graph, bundle, model, gains, leader, state, t):
    """One-shot derivative evaluation; see ProtocolContext.derivative."""
    return ProtocolContext(kind, graph, bundle, model, gains, leader).derivative(state, t)


def closed_loop_error_derivative(
    kind, bundle, model, gains, zeta, varrho, d, e0=None, u0=None, kappa=None
):
    """Transformed error dynamics, for cross-validation of the protocol
    right-hand sides.

    Leaderless variants:
        zeta'  = (I (x) (A + F C)) zeta
        varrho' = (I (x) A + L (D + rho) (x) J) varrho,
    with J = F C (output injection) or B K (input injection).  Tracking
    output-feedback variants additionally carry the dominance and leader
    estimation terms driven by u0 and e0.  Not defined for the
    state-feedback variants, which have no (zeta, varrho) pair.
    """
    from .errors import NotApplicableError

    kind = ProtocolKind(kind)
    if kind in (ProtocolKind.TRACKING_STATE_DISCONTINUOUS, ProtocolKind.TRACKING_STATE_CONTINUOUS):
        raise NotApplicableError("state-feedback variants have no (zeta, varrho) dynamics")
    a, b, c = model.A, model.B, model.C
    fc = gains.F @ c
    zeta_dot = zeta @ (a + fc).T
    if not kind.needs_leader:
        lap = bundle.laplacian
        if kind is ProtocolKind.LEADERLESS_OUTPUT_INJECTION:
            inject = fc
            rho = _quad_rows(varrho, gains.S)
        else:
            inject = b @ gains.K
            rho = _quad_rows(varrho, np.linalg.inv(gains.P))
        varrho_dot = varrho @ a.T + lap @ ((d + rho)[:, None] * (varrho @ inject.T))
        return zeta_dot, varrho_dot
    block = bundle.followers_block
    leader_links = bundle.leader_links
    rho = _quad_rows(varrho, gains.S)
    rows = varrho @ (gains.S @ b)
    if kind is ProtocolKind.TRACKING_OUTPUT_CONTINUOUS:
        widths = np.broadcast_to(np.asarray(kappa, dtype=float), (varrho.shape[0],))
        dirs = _boundary_rows(rows, widths)
    else:
        dirs = _unit_rows(rows)
    varrho_dot = (
        varrho @ a.T
        + block @ ((d + rho)[:, None] * (varrho @ fc.T))
        - (block @ (gains.beta * dirs - np.ones((varrho.shape[0], 1)) * u0)) @ b.T
        + leader_links[:, None] * (fc @ e0)
    )
    return zeta_dot, varrho_dot
