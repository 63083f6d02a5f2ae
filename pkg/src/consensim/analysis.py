"""Proof-side constants, residual-set bounds for the continuous tracking
protocols, and consensus metrics over recorded traces.

Constants are computed at equality of their admissibility thresholds, so the
resulting bounds are as tight as the underlying analysis permits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, ConfigurationError, NotApplicableError
from .graphs import LeaderCertificate, LeaderlessCertificate
from .linalg import lambda_max, lambda_min, spectral_norm, symmetrize
from .protocols import ProtocolKind


@dataclass
class AnalysisConstants:
    """Certified constants for one protocol variant.

    For the state-feedback variants, X carries -(P^{-1}A + A'P^{-1} - 2 Omega)
    and Gamma carries Omega; the output-feedback-only fields stay None.
    """

    kind: ProtocolKind
    alpha: float
    lambda2: float = None
    lambda0: float = None
    gamma: float = None
    gamma1: float = None
    gamma2: float = None
    delta: float = None
    W: np.ndarray = None
    X: np.ndarray = None
    Gamma: np.ndarray = None
    Pi: np.ndarray = None


def _definite_or_raise(matrix, name):
    value = lambda_min(symmetrize(matrix))
    if value <= 0.0:
        raise CertificationError(
            f"{name} is not positive definite (lambda_min = {value:.3e}); "
            "the gain synthesis did not certify this variant"
        )
    return value


def _per_follower(values, count, name, strict=True):
    if values is None:
        return None
    out = np.broadcast_to(np.asarray(values, dtype=float), (count,)).copy()
    if strict and np.any(out <= 0.0):
        raise ConfigurationError(f"{name} must be positive")
    if np.any(out < 0.0):
        raise ConfigurationError(f"{name} must be nonnegative")
    return out


def compute_constants(kind, model, gains, certificate, bundle=None, omega_bound=None):
    """All admissibility constants for the variant, at their thresholds.

    The per-follower residual contributions Pi are filled only for the
    continuous variants and only when omega_bound (and the graph bundle,
    for leader links) is supplied.
    """
    kind = ProtocolKind(kind)
    if not kind.needs_leader:
        if not isinstance(certificate, LeaderlessCertificate):
            raise ConfigurationError("leaderless constants need a leaderless certificate")
        count = len(certificate.r)
        alpha = 5.0 * count * float(np.max(certificate.r)) / certificate.lambda2
        return AnalysisConstants(kind=kind, alpha=alpha, lambda2=certificate.lambda2)

    if not isinstance(certificate, LeaderCertificate):
        raise ConfigurationError("tracking constants need a leader certificate")
    g = certificate.g
    lambda0 = certificate.lambda0
    a, b, c = model.A, model.B, model.C
    followers = len(g)

    if kind in (ProtocolKind.TRACKING_STATE_DISCONTINUOUS, ProtocolKind.TRACKING_STATE_CONTINUOUS):
        pinv = np.linalg.inv(gains.P)
        x_mat = -(pinv @ a + a.T @ pinv - 2.0 * gains.Omega)
        x_min = _definite_or_raise(x_mat, "X = -(P^{-1}A + A'P^{-1} - 2 Omega)")
        alpha = 5.0 * float(np.max(g)) / (2.0 * lambda0)
        constants = AnalysisConstants(
            kind=kind, alpha=alpha, lambda0=lambda0, X=symmetrize(x_mat), Gamma=gains.Omega
        )
        if kind.sigma_modified:
            phi = _per_follower(gains.phi, followers, "phi")
            constants.delta = min(
                x_min / (2.0 * lambda_max(pinv)), float(np.min(phi)) / 4.0
            )
            if omega_bound is not None and bundle is not None:
                constants.Pi = _pi_terms(
                    g, bundle.leader_links, omega_bound, gains.beta,
                    _per_follower(gains.kappa, followers, "kappa", strict=False), phi,
                    lambda_max(pinv) / (2.0 * x_min),
                )
        return constants

    w_mat = -(gains.S @ a + a.T @ gains.S) + 2.0 * c.T @ c
    w_min = _definite_or_raise(w_mat, "W = -SA - A'S + 2C'C")
    gamma_mat = gains.Q @ b @ b.T @ gains.Q
    x_mat = -(gains.Q @ a + a.T @ gains.Q - 2.0 * gamma_mat)
    x_min = _definite_or_raise(x_mat, "X = -(QA + A'Q - 2 Gamma)")
    alpha = 15.0 * float(np.max(g)) / (4.0 * lambda0)
    if bundle is None:
        raise ConfigurationError("tracking constants need the partitioned Laplacian bundle")
    leader_col = bundle.leader_column
    gamma = 1.0 + (
        3.0 * lambda_max(c.T @ c) * float((leader_col.T @ np.diag(g ** 2) @ leader_col)[0, 0])
        / (lambda0 * w_min)
    )
    gamma1 = 4.0 * spectral_norm(gains.Q @ gains.F @ c) ** 2 / (x_min * w_min)
    gamma2 = 4.0 * lambda_max(gamma_mat) ** 2 / (x_min * float(np.min(g)) * w_min)
    constants = AnalysisConstants(
        kind=kind, alpha=alpha, lambda0=lambda0, gamma=gamma, gamma1=gamma1,
        gamma2=gamma2, W=symmetrize(w_mat), X=symmetrize(x_mat), Gamma=gamma_mat,
    )
    if kind.sigma_modified:
        phi = _per_follower(gains.phi, followers, "phi")
        constants.delta = min(
            x_min / (2.0 * lambda_max(gains.Q)),
            w_min / (gamma1 * lambda_max(gains.S)),
            w_min / (2.0 * gamma2 * lambda_max(gains.S)),
            float(np.min(phi)) / 4.0,
        )
        if omega_bound is not None:
            constants.Pi = _pi_terms(
                g, bundle.leader_links, omega_bound, gains.beta,
                _per_follower(gains.kappa, followers, "kappa", strict=False), phi,
                lambda_max(gains.S) / (2.0 * w_min),
            )
    return constants


def _dominance_coefficients(leader_links, omega_bound, beta, count):
    """c_i = omega a_i0 + (2N - 1) beta."""
    return omega_bound * leader_links + (2.0 * count - 1.0) * beta


def _pi_terms(g, leader_links, omega_bound, beta, kappa, phi, curvature):
    coeff = _dominance_coefficients(leader_links, omega_bound, beta, len(g))
    linear = g * coeff * kappa
    quadratic = (1.0 / phi + curvature) * coeff ** 2 * kappa ** 2 * g
    return linear + quadratic


@dataclass
class ResidualBound:
    """Right side of the residual-set inequality on ||xi||^2, itemized.

    bound_sq = sigma_term + pi_term + boundary_term, with pi_term further
    split into its kappa-linear and kappa-quadratic parts.  The boundary
    term is zero for the state-feedback variant, whose per-follower
    contributions absorb it.
    """

    bound_sq: float
    sigma_term: float
    pi_term: float
    boundary_term: float
    pi_kappa_linear: float
    pi_kappa_quadratic: float


def residual_bound(kind, constants, gains, omega_bound, bundle, certificate):
    """Ultimate-bound radius for the continuous tracking variants."""
    kind = ProtocolKind(kind)
    if not kind.sigma_modified:
        raise NotApplicableError(
            "the residual set exists only for the continuous (boundary-layer) variants; "
            "the discontinuous ones converge asymptotically"
        )
    if not isinstance(certificate, LeaderCertificate):
        raise ConfigurationError("residual_bound needs the leader certificate scaling")
    followers = len(bundle.leader_links)
    g_vec = certificate.g
    kappa = np.broadcast_to(np.asarray(gains.kappa, dtype=float), (followers,))
    phi = np.broadcast_to(np.asarray(gains.phi, dtype=float), (followers,))
    coeff = _dominance_coefficients(bundle.leader_links, omega_bound, gains.beta, followers)

    if kind is ProtocolKind.TRACKING_OUTPUT_CONTINUOUS:
        curvature = lambda_max(gains.S) / (2.0 * lambda_min(constants.W))
        denom = lambda_min(gains.Q) * constants.delta
        sigma = constants.gamma2 * (constants.alpha - 1.0) ** 2 / (2.0 * denom) * float(
            np.sum(phi * g_vec)
        )
        pi_linear = constants.gamma2 / denom * float(np.sum(g_vec * coeff * kappa))
        pi_quadratic = constants.gamma2 / denom * float(
            np.sum((1.0 / phi + curvature) * coeff ** 2 * kappa ** 2 * g_vec)
        )
        boundary = float(np.sum(coeff * kappa)) / denom
    elif kind is ProtocolKind.TRACKING_STATE_CONTINUOUS:
        pinv = np.linalg.inv(gains.P)
        curvature = lambda_max(pinv) / (2.0 * lambda_min(constants.X))
        denom = lambda_min(pinv) * constants.delta
        sigma = (constants.alpha - 1.0) ** 2 / (2.0 * denom) * float(np.sum(phi * g_vec))
        pi_linear = float(np.sum(g_vec * coeff * kappa)) / denom
        pi_quadratic = float(
            np.sum((1.0 / phi + curvature) * coeff ** 2 * kappa ** 2 * g_vec)
        ) / denom
        boundary = 0.0
    else:
        raise NotApplicableError(f"no residual set for {kind.value}")

    pi_total = pi_linear + pi_quadratic
    return ResidualBound(
        bound_sq=sigma + pi_total + boundary,
        sigma_term=sigma,
        pi_term=pi_total,
        boundary_term=boundary,
        pi_kappa_linear=pi_linear,
        pi_kappa_quadratic=pi_quadratic,
    )


@dataclass
class ConsensusMetrics:
    trailing_sup: float
    trailing_rms: float
    trailing_sup_sq: float
    d_final: np.ndarray
    d_trailing_variation: np.ndarray
    time_to_threshold: float
    threshold: float


def consensus_metrics(trace, threshold=1e-3, trailing_fraction=0.1):
    """Sup/RMS of the consensus-error norm over the trailing window, final
    adaptive weights and their trailing total variation, and the first time
    the error norm crosses the threshold."""
    if trace.record_count == 0:
        raise ConfigurationError("empty trace")
    times = trace.times
    cutoff = times[-1] - trailing_fraction * (times[-1] - times[0])
    window = times >= cutoff
    tail = trace.norm_xi[window]
    d_tail = trace.d[window]
    variation = (
        np.sum(np.abs(np.diff(d_tail, axis=0)), axis=0)
        if len(d_tail) > 1
        else np.zeros(trace.d.shape[1])
    )
    below = np.nonzero(trace.norm_xi < threshold)[0]
    return ConsensusMetrics(
        trailing_sup=float(np.max(tail)),
        trailing_rms=float(np.sqrt(np.mean(tail ** 2))),
        trailing_sup_sq=float(np.max(tail) ** 2),
        d_final=trace.d[-1].copy(),
        d_trailing_variation=variation,
        time_to_threshold=float(times[below[0]]) if len(below) else float("inf"),
        threshold=threshold,
    )


def render_metrics(metrics):
    lines = [
        f"trailing sup ||xi||      {metrics.trailing_sup:.9e}",
        f"trailing rms ||xi||      {metrics.trailing_rms:.9e}",
        f"trailing sup ||xi||^2    {metrics.trailing_sup_sq:.9e}",
        f"time to ||xi|| < {metrics.threshold:g}  "
        + (f"{metrics.time_to_threshold:.6f}" if np.isfinite(metrics.time_to_threshold) else "never"),
        "d final                  " + " ".join(f"{v:.6f}" for v in metrics.d_final),
        "d trailing variation     " + " ".join(f"{v:.3e}" for v in metrics.d_trailing_variation),
    ]
    return "\n".join(lines)
