"""Dense linear algebra kernels: spectra, definiteness tests, Lyapunov and
continuous algebraic Riccati solvers.

Everything here is a pure function of its arguments.  Matrices are plain
float ndarrays; eigenvalue vectors are complex ndarrays sorted by
(real part, imaginary part).  Tolerances are centralized in NumericPolicy
so tests can tighten or loosen them uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    NotStabilizableError,
    SpectrumConflictError,
    SynthesisError,
)


@dataclass(frozen=True)
class NumericPolicy:
    """Central numeric tolerances and size caps."""

    eig_backward_error: float = 1e-9
    riccati_residual: float = 1e-8
    symmetry_tol: float = 1e-10
    hurwitz_margin: float = 0.0
    lyapunov_rel_residual: float = 1e-9
    zero_cluster_tol: float = 1e-7
    null_residual: float = 1e-10
    eig_max_dim: int = 64
    lyapunov_max_dim: int = 32
    care_max_iterations: int = 100


DEFAULT_POLICY = NumericPolicy()


def as_matrix(value, name="matrix"):
    """Coerce to a finite float 2-d array."""
    m = np.atleast_2d(np.asarray(value, dtype=float))
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


def as_square(value, name="matrix"):
    m = as_matrix(value, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def symmetrize(m):
    return 0.5 * (m + m.T)


def check_symmetric(m, name="matrix", policy=DEFAULT_POLICY):
    """Validate symmetry to within policy.symmetry_tol (relative, floored at
    1.0) and return the symmetrized matrix."""
    m = as_square(m, name)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    skew = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if skew > policy.symmetry_tol * scale:
        raise DimensionError(
            f"{name} is not symmetric: max asymmetry {skew:.3e} "
            f"exceeds {policy.symmetry_tol:.1e} * {scale:.3e}"
        )
    return symmetrize(m)


def eigenvalues(matrix, policy=DEFAULT_POLICY):
    """All eigenvalues of a real square matrix, sorted by (real, imag).

    Dimension is capped at policy.eig_max_dim.  A failed QR iteration inside
    the backend surfaces as ConvergenceError.
    """
    m = as_square(matrix)
    if m.shape[0] > policy.eig_max_dim:
        raise DimensionError(
            f"eigenvalues limited to dimension {policy.eig_max_dim}, got {m.shape[0]}"
        )
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def spectral_abscissa(matrix, policy=DEFAULT_POLICY):
    """Largest real part over the spectrum."""
    return float(np.max(eigenvalues(matrix, policy).real))


def is_hurwitz(matrix, margin=None, policy=DEFAULT_POLICY):
    """True iff every eigenvalue has real part < -margin."""
    if margin is None:
        margin = policy.hurwitz_margin
    return spectral_abscissa(matrix, policy) < -margin


def sym_eigenvalues(matrix, policy=DEFAULT_POLICY):
    """Eigenvalues of a (nearly) symmetric matrix, ascending."""
    return np.linalg.eigvalsh(symmetrize(as_square(matrix)))


def lambda_min(matrix):
    return float(sym_eigenvalues(matrix)[0])


def lambda_max(matrix):
    return float(sym_eigenvalues(matrix)[-1])


def spectral_norm(matrix):
    """Largest singular value; equals max |eigenvalue| for symmetric input."""
    return float(np.linalg.norm(as_matrix(matrix), 2))


def is_positive_definite(matrix, tol=0.0, policy=DEFAULT_POLICY):
    """True iff lambda_min(matrix) > tol.

    The input must be symmetric within policy.symmetry_tol; it is
    symmetrized before the eigenvalue test.
    """
    m = check_symmetric(matrix, "matrix", policy)
    return bool(np.linalg.eigvalsh(m)[0] > tol)


def solve_lyapunov(a, q_rhs, policy=DEFAULT_POLICY):
    """Solve A^T X + X A + Q = 0 for X by Kronecker vectorization.

    Requires that A and -A share no eigenvalue (A Hurwitz suffices).  The
    (n^2 x n^2) linear system is solved by dense LU with partial pivoting;
    the substitution residual is verified against
    policy.lyapunov_rel_residual * (|A| |X| + |Q|) in Frobenius norm.
    """
    a = as_square(a, "A")
    q = as_square(q_rhs, "Qrhs")
    n = a.shape[0]
    if q.shape[0] != n:
        raise DimensionError(f"A is {n}x{n} but Qrhs is {q.shape[0]}x{q.shape[1]}")
    if n > policy.lyapunov_max_dim:
        raise DimensionError(
            f"solve_lyapunov limited to dimension {policy.lyapunov_max_dim}, got {n}"
        )
    eye = np.eye(n)
    system = np.kron(a.T, eye) + np.kron(eye, a.T)
    try:
        vec = np.linalg.solve(system, -q.ravel())
    except np.linalg.LinAlgError as exc:
        raise SpectrumConflictError(
            "Lyapunov system singular: A and -A share an eigenvalue"
        ) from exc
    x = vec.reshape(n, n)
    if np.allclose(q, q.T, atol=0.0, rtol=0.0):
        x = symmetrize(x)
    residual = np.linalg.norm(a.T @ x + x @ a + q, "fro")
    scale = (
        np.linalg.norm(a, "fro") * np.linalg.norm(x, "fro")
        + np.linalg.norm(q, "fro")
    )
    if residual > policy.lyapunov_rel_residual * max(scale, 1e-300):
        raise SpectrumConflictError(
            f"Lyapunov solve ill-conditioned: relative residual "
            f"{residual / max(scale, 1e-300):.3e}"
        )
    return x


def unstabilizable_modes(a, b, stability_margin=1e-9):
    """Eigenvalues of A with Re >= -stability_margin that fail the
    rank [A - lambda I, B] = n test (PBH)."""
    a = as_square(a, "A")
    b = as_matrix(b, "B")
    n = a.shape[0]
    offending = []
    for lam in eigenvalues(a):
        if lam.real < -stability_margin:
            continue
        pencil = np.hstack([a - lam * np.eye(n, dtype=complex), b.astype(complex)])
        if np.linalg.matrix_rank(pencil) < n:
            offending.append(complex(lam))
    return offending


def stabilizing_gain_bass(a, b, policy=DEFAULT_POLICY):
    """Return K0 with A - B K0 Hurwitz, via the shifted-Lyapunov (Bass)
    construction.

    Picks beta0 > |A|_F, solves (A + beta0 I) X + X (A + beta0 I)^T = 2 B B^T,
    and returns K0 = B^T X^+.  The eigenvalue-truncated pseudoinverse makes
    the recipe cover stabilizable-but-uncontrollable pairs, where X is
    singular on the uncontrollable subspace.
    """
    a = as_square(a, "A")
    b = as_matrix(b, "B")
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionError(f"A is {n}x{n} but B has {b.shape[0]} rows")
    beta0 = np.linalg.norm(a, "fro") + 1.0
    shifted = a + beta0 * np.eye(n)
    # solve_lyapunov(M, Q) solves M^T X + X M + Q = 0; with M = -(A+beta0 I)^T
    # this is (A + beta0 I) X + X (A + beta0 I)^T = 2 B B^T.
    gram = solve_lyapunov(-shifted.T, 2.0 * b @ b.T, policy)
    vals, vecs = np.linalg.eigh(symmetrize(gram))
    cutoff = max(vals[-1], 0.0) * n * 1e-13
    inv_vals = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    k0 = b.T @ (vecs * inv_vals) @ vecs.T
    if not is_hurwitz(a - b @ k0, margin=0.0, policy=policy):
        modes = unstabilizable_modes(a, b)
        detail = (
            f" uncontrollable unstable mode(s) {modes}" if modes else " (rank test inconclusive)"
        )
        raise NotStabilizableError(f"(A, B) is not stabilizable:{detail}")
    return k0


def care_residual(a, b, x):
    """Frobenius norm of A^T X + X A + I - X B B^T X."""
    n = a.shape[0]
    return float(
        np.linalg.norm(a.T @ x + x @ a + np.eye(n) - x @ b @ b.T @ x, "fro")
    )


def kleinman_iterates(a, b, policy=DEFAULT_POLICY):
    """Yield (X_k, residual_k) Newton iterates for the Riccati equation
    A^T X + X A + I - X B B^T X = 0, seeded by stabilizing_gain_bass.

    Each step solves one Lyapunov equation for the closed loop A - B K_k.
    Iterates are monotone and keep A - B B^T X_k Hurwitz.
    """
    a = as_square(a, "A")
    b = as_matrix(b, "B")
    n = a.shape[0]
    gain = stabilizing_gain_bass(a, b, policy)
    for _ in range(policy.care_max_iterations):
        closed = a - b @ gain
        x = solve_lyapunov(closed, np.eye(n) + gain.T @ gain, policy)
        x = symmetrize(x)
        gain = b.T @ x
        yield x, care_residual(a, b, x)


def solve_care(a, b, policy=DEFAULT_POLICY):
    """Solve A^T S + S A + I - S B B^T S = 0 for the stabilizing S > 0.

    Kleinman-Newton iteration; once the quadratic phase saturates, the
    iterate is polished by defect correction (a Lyapunov solve for the small
    residual increment), which reaches a lower floor than re-solving for the
    full matrix.  Raises ConvergenceError when the residual stays above
    policy.riccati_residual after policy.care_max_iterations sweeps.  The
    observer-form equation Pbar A^T + A Pbar + I - Pbar C^T C Pbar = 0 is
    obtained by calling with (A^T, C^T).
    """
    a = as_square(a, "A")
    b = as_matrix(b, "B")
    best = None
    best_residual = np.inf
    stalled = 0
    for x, residual in kleinman_iterates(a, b, policy):
        if residual < best_residual:
            best, best_residual = x, residual
            stalled = 0
        else:
            stalled += 1
        if best_residual <= policy.riccati_residual or stalled >= 3:
            break
    x = best
    for _ in range(10):
        if best_residual <= policy.riccati_residual:
            break
        closed = a - b @ (b.T @ x)
        defect = a.T @ x + x @ a + np.eye(a.shape[0]) - x @ b @ b.T @ x
        x = symmetrize(x + solve_lyapunov(closed, defect, policy))
        residual = care_residual(a, b, x)
        if residual < best_residual:
            best, best_residual = x, residual
    if best_residual > policy.riccati_residual:
        raise ConvergenceError(
            f"Riccati iteration stalled at residual {best_residual:.3e} "
            f"(tolerance {policy.riccati_residual:.1e}); the pair is likely "
            "ill-conditioned near loss of stabilizability or detectability"
        )
    if np.linalg.eigvalsh(best)[0] <= 0.0:
        raise SynthesisError("Riccati solution converged but is not positive definite")
    return best
