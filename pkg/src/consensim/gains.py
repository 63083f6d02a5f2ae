"""Controller parameter synthesis from (A, B, C) alone, plus certification
of every matrix inequality the synthesized set must satisfy.

The constructive route is the Riccati one: the observer equation
Pbar A^T + A Pbar + I - Pbar C^T C Pbar = 0 yields S = Pbar^{-1} and
F = -Pbar C^T, and the controller equation A^T Sc + Sc A + I - Sc B B^T Sc = 0
yields K = -B^T Sc, P = Sc^{-1}, Omega = K^T K.  The matrix inequalities
A^T S + S A - 2 C^T C < 0 and P A^T + A P - 2 B B^T < 0 are then verified
as certificates rather than solved directly.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from . import matio
from .errors import ConfigurationError, SynthesisError
from .linalg import (
    DEFAULT_POLICY,
    check_symmetric,
    is_hurwitz,
    lambda_max,
    solve_care,
    spectral_abscissa,
    symmetrize,
    unstabilizable_modes,
)

DEFAULT_BOUNDARY_WIDTH = 0.05
DEFAULT_LEAK_RATE = 0.02


@dataclass
class GainSet:
    """Synthesized controller parameters; fields are None until a design or
    an override provides them."""

    K: np.ndarray = None        # state-feedback gain, p x n
    F: np.ndarray = None        # observer gain, n x m
    S: np.ndarray = None        # output-injection certificate, n x n > 0
    Pbar: np.ndarray = None     # observer Riccati solution, S^{-1}
    P: np.ndarray = None        # input-injection certificate, n x n > 0
    Omega: np.ndarray = None    # adaptive-law weight P^{-1} B B^T P^{-1}
    Q: np.ndarray = None        # auxiliary certificate for the tracking control line
    beta: float = None          # leader-input dominance gain
    kappa: np.ndarray = None    # per-follower boundary-layer widths
    phi: np.ndarray = None      # per-follower leak rates

    def replace(self, **updates):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(updates)
        return GainSet(**values)


def design_output_gains(model, policy=DEFAULT_POLICY, s_override=None, k_override=None):
    """(K, F, S, Pbar) for the output-feedback protocols.

    Overrides short-circuit the Riccati route: a supplied S is taken as the
    certificate matrix (Pbar = S^{-1}, F = -Pbar C^T), and a supplied K is
    used verbatim.  Every returned gain is still certified by the caller.
    """
    a, b, c = model.A, model.B, model.C
    _require_stabilizable_detectable(a, b, c)
    if s_override is not None:
        s = check_symmetric(s_override, "S override", policy)
        pbar = symmetrize(np.linalg.inv(s))
    else:
        pbar = solve_care(a.T, c.T, policy)
        s = symmetrize(np.linalg.inv(pbar))
    f = -pbar @ c.T
    if k_override is not None:
        k = np.atleast_2d(np.asarray(k_override, dtype=float))
    else:
        k = -b.T @ solve_care(a, b, policy)
    return k, f, s, pbar


def design_state_gains(model, policy=DEFAULT_POLICY):
    """(K, P, Omega) for the input-injection and state-feedback protocols:
    P = Sc^{-1} from the controller Riccati equation, K = -B^T P^{-1},
    Omega = K^T K."""
    a, b = model.A, model.B
    modes = unstabilizable_modes(a, b)
    if modes:
        raise SynthesisError(f"(A, B) not stabilizable: unstable mode(s) {modes}")
    sc = solve_care(a, b, policy)
    p = symmetrize(np.linalg.inv(sc))
    k = -b.T @ sc
    omega = k.T @ k
    return k, p, omega


def design_q(model, k, policy=DEFAULT_POLICY):
    """Auxiliary certificate Q for the tracking control line.

    Q = Sc from the controller Riccati equation satisfies
    Q A + A^T Q - 2 Q B B^T Q = -I - Q B B^T Q < 0, which certifies
    X = -(Q A + A^T Q - 2 Gamma) > 0 with Gamma = Q B B^T Q.
    """
    a, b = model.A, model.B
    if not is_hurwitz(a + b @ np.atleast_2d(k), policy=policy):
        raise SynthesisError("design_q requires A + B K Hurwitz")
    return solve_care(a, b, policy)


def choose_beta(omega_bound, override=None):
    """Dominance gain beta = max(omega_bound, override); never below the
    certified leader-input bound."""
    if omega_bound < 0 or not np.isfinite(omega_bound):
        raise ConfigurationError(f"leader input bound must be finite and >= 0, got {omega_bound}")
    if override is None:
        return float(omega_bound)
    return float(max(omega_bound, override))


def _require_stabilizable_detectable(a, b, c):
    modes = unstabilizable_modes(a, b)
    if modes:
        raise SynthesisError(f"(A, B) not stabilizable: unstable mode(s) {modes}")
    modes = unstabilizable_modes(a.T, c.T)
    if modes:
        raise SynthesisError(f"(A, C) not detectable: unobservable mode(s) {modes}")


@dataclass
class CertificateCheck:
    name: str
    margin: float
    passed: bool
    hard: bool = True


@dataclass
class CertificateReport:
    checks: list = field(default_factory=list)

    def add(self, name, margin, passed, hard=True):
        self.checks.append(CertificateCheck(name, float(margin), bool(passed), hard))

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks if c.hard)

    @property
    def warnings(self):
        return [c for c in self.checks if not c.hard and not c.passed]

    def render(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else ("WARN" if not c.hard else "FAIL")
            lines.append(f"{status:4s}  {c.name:44s} margin={c.margin: .6e}")
        lines.append(f"overall: {'PASS' if self.all_passed else 'FAIL'}")
        return "\n".join(lines)


def certify(gains, model, omega_bound=None, policy=DEFAULT_POLICY):
    """Check every invariant the gain set claims, recording numeric margins.

    Positive margin means the check passed with that much room.  The
    beta >= omega check is reported as a warning rather than a failure so a
    scenario may deliberately configure a smaller beta.
    """
    a, b, c = model.A, model.B, model.C
    report = CertificateReport()
    if gains.K is not None:
        margin = -spectral_abscissa(a + b @ gains.K, policy)
        report.add("A + B K Hurwitz", margin, margin > 0.0)
    if gains.F is not None:
        margin = -spectral_abscissa(a + gains.F @ c, policy)
        report.add("A + F C Hurwitz", margin, margin > 0.0)
    if gains.S is not None:
        s = check_symmetric(gains.S, "S", policy)
        report.add("S positive definite", np.linalg.eigvalsh(s)[0], np.linalg.eigvalsh(s)[0] > 0)
        margin = -lambda_max(a.T @ s + s @ a - 2.0 * c.T @ c)
        report.add("A'S + SA - 2C'C negative definite", margin, margin > 0.0)
    if gains.P is not None:
        p = check_symmetric(gains.P, "P", policy)
        report.add("P positive definite", np.linalg.eigvalsh(p)[0], np.linalg.eigvalsh(p)[0] > 0)
        margin = -lambda_max(p @ a.T + a @ p - 2.0 * b @ b.T)
        report.add("PA' + AP - 2BB' negative definite", margin, margin > 0.0)
    if gains.Omega is not None and gains.P is not None:
        pinv = np.linalg.inv(gains.P)
        drift = float(np.max(np.abs(gains.Omega - pinv @ b @ b.T @ pinv)))
        report.add("Omega = P^{-1}BB'P^{-1}", 1e-6 - drift, drift <= 1e-6)
    if gains.Q is not None:
        q = check_symmetric(gains.Q, "Q", policy)
        gamma = q @ b @ b.T @ q
        margin = -lambda_max(q @ a + a.T @ q - 2.0 * gamma)
        report.add("X = -(QA + A'Q - 2QBB'Q) positive definite", margin, margin > 0.0)
    if gains.beta is not None:
        report.add("beta nonnegative", gains.beta, gains.beta >= 0.0)
        if omega_bound is not None:
            report.add(
                "beta >= leader input bound", gains.beta - omega_bound,
                gains.beta >= omega_bound, hard=False,
            )
    if gains.kappa is not None:
        report.add("boundary widths positive", float(np.min(gains.kappa)), bool(np.all(gains.kappa > 0)))
    if gains.phi is not None:
        report.add("leak rates positive", float(np.min(gains.phi)), bool(np.all(gains.phi > 0)))
    return report


def save_gains(path, gains):
    entries = {}
    for f in fields(gains):
        value = getattr(gains, f.name)
        if value is None:
            continue
        entries[f.name] = np.atleast_2d(np.asarray(value, dtype=float))
    matio.write_entries(path, entries)


def load_gains(path):
    entries = matio.read_entries(path)
    values = {}
    names = {f.name for f in fields(GainSet)}
    for key, value in entries.items():
        if key not in names:
            raise ConfigurationError(f"{path}: unknown gain entry {key!r}")
        if key == "beta":
            values[key] = float(np.asarray(value).ravel()[0])
        elif key in ("kappa", "phi"):
            values[key] = np.asarray(value, dtype=float).ravel()
        else:
            values[key] = np.asarray(value, dtype=float)
    return GainSet(**values)
