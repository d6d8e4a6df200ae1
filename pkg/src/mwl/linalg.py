"""Hermitian spectral calculus for small dense matrices.

Everything here operates on complex n x n arrays with n <= 8.  The one
eigensolver is a cyclic Jacobi iteration (complex rotations), used both for
single matrices and, in batched form, for whole grid fields at once.  Matrix
functions (powers, log, exp), polar absolute values |A| = (A*A)^(1/2) and the
unitary diagonalization |W1 W0^-1| = U D U^-1 are all built on top of it.
"""

import numpy as np

__all__ = [
    "LinalgError",
    "ConvergenceError",
    "DomainError",
    "SingularMatrixError",
    "MAX_DIM",
    "hermitian_part",
    "as_hermitian",
    "as_general",
    "Eigendecomposition",
    "jacobi_eigh",
    "eig_hermitian",
    "matrix_function",
    "matrix_power_complex",
    "absolute_value",
    "polar_diagonalize",
    "bracket",
]

MAX_DIM = 8

# Jacobi stopping rule: off-diagonal Frobenius mass relative to ||A||_F.
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class LinalgError(Exception):
    pass


class ConvergenceError(LinalgError):
    """Jacobi sweeps exhausted; carries the worst relative residual."""

    def __init__(self, residual, sweeps):
        self.residual = float(residual)
        self.sweeps = int(sweeps)
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )


class DomainError(LinalgError):
    """Matrix function applied outside its spectral domain."""

    def __init__(self, message, eigenvalue):
        self.eigenvalue = float(eigenvalue)
        super().__init__(f"{message} (offending eigenvalue {eigenvalue:.6e})")


class SingularMatrixError(LinalgError):
    """Matrix is singular or too ill-conditioned to invert safely."""

    def __init__(self, smallest_singular_value):
        self.smallest_singular_value = float(smallest_singular_value)
        super().__init__(
            "matrix is singular or ill-conditioned "
            f"(smallest singular value {smallest_singular_value:.6e})"
        )


def _check_square(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise LinalgError(f"{name} must be square, got shape {A.shape}")
    n = A.shape[-1]
    if not 1 <= n <= MAX_DIM:
        raise LinalgError(f"{name} dimension {n} outside supported range 1..{MAX_DIM}")
    return A


def hermitian_part(A):
    """(A + A*)/2 for the trailing two axes."""
    A = np.asarray(A, dtype=complex)
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def as_hermitian(entries):
    """Validate shape and return the symmetrized copy of a Hermitian matrix."""
    return hermitian_part(_check_square(entries, "Hermitian matrix"))


def as_general(entries):
    """Validate shape of a general (possibly non-Hermitian) matrix."""
    return _check_square(entries, "matrix").copy()


def _off_mass(A):
    # Frobenius mass of the off-diagonal part, per batch element.
    n = A.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(A[..., mask]) ** 2, axis=-1))


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Batched cyclic Jacobi diagonalization of Hermitian matrices.

    A has shape (..., n, n) and is assumed Hermitian (symmetrize first).
    Returns (lam, U) with lam of shape (..., n) sorted descending per matrix
    and U unitary with columns the matching eigenvectors.  Ties keep the
    Jacobi output order (stable sort).

    Each rotation zeroes one off-diagonal pair: the complex phase of A[p,q]
    is absorbed first, then a real Givens angle from atan2(2|apq|, aqq-app).
    Sweeps stop when the off-diagonal Frobenius mass drops below
    tol * ||A||_F; exhausting max_sweeps raises ConvergenceError.
    """
    A = _check_square(A, "Hermitian matrix")
    batch_shape = A.shape[:-2]
    n = A.shape[-1]
    A = hermitian_part(A).reshape((-1, n, n))
    B = A.shape[0]
    normF = np.sqrt(np.sum(np.abs(A) ** 2, axis=(-1, -2)))
    target = tol * normF

    U = np.tile(np.eye(n, dtype=complex), (B, 1, 1))
    if n == 1:
        lam = A[:, 0, 0].real.reshape(batch_shape + (1,))
        return lam, U.reshape(batch_shape + (1, 1))

    converged = False
    for _ in range(max_sweeps):
        if np.all(_off_mass(A) <= target):
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                r = np.abs(apq)
                # Skip rotations on entries that are already negligible;
                # atan2 on a zero pivot would otherwise swap equal diagonals.
                active = r > (target / (n * n) + 1e-300)
                if not np.any(active):
                    continue
                phase = np.where(active, np.angle(apq), 0.0)
                diff = (A[:, q, q] - A[:, p, p]).real
                ang = np.where(active, 0.5 * np.arctan2(2.0 * r, diff), 0.0)
                c = np.cos(ang)
                s = np.sin(ang)
                e = np.exp(1j * phase)

                # Column update: M <- M R with R = [[c e, s e], [-s, c]].
                ce = (c * e)[:, None]
                se = (s * e)[:, None]
                for M in (A, U):
                    col_p = M[:, :, p].copy()
                    col_q = M[:, :, q].copy()
                    M[:, :, p] = ce * col_p - s[:, None] * col_q
                    M[:, :, q] = se * col_p + c[:, None] * col_q
                # Row update: A <- R* A.
                row_p = A[:, p, :].copy()
                row_q = A[:, q, :].copy()
                A[:, p, :] = np.conj(ce) * row_p - s[:, None] * row_q
                A[:, q, :] = np.conj(se) * row_p + c[:, None] * row_q
                # The target entries are zero by construction.
                A[:, p, q] = np.where(active, 0.0, A[:, p, q])
                A[:, q, p] = np.where(active, 0.0, A[:, q, p])
                A[:, p, p] = A[:, p, p].real
                A[:, q, q] = A[:, q, q].real
    else:
        converged = np.all(_off_mass(A) <= target)

    if not converged:
        rel = _off_mass(A) / np.maximum(normF, 1e-300)
        raise ConvergenceError(np.max(rel), max_sweeps)

    lam = np.diagonal(A, axis1=-2, axis2=-1).real.copy()
    order = np.argsort(-lam, axis=-1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=-1)
    U = np.take_along_axis(U, order[:, None, :], axis=-1)
    return lam.reshape(batch_shape + (n,)), U.reshape(batch_shape + (n, n))


class Eigendecomposition:
    """Unitary U and descending real eigenvalues of a Hermitian matrix."""

    def __init__(self, U, lam):
        self.U = np.asarray(U, dtype=complex)
        self.lam = np.asarray(lam, dtype=float)

    def reconstruct(self):
        return (self.U * self.lam) @ np.conj(self.U.T)

    def apply(self, scalar_values):
        """U diag(scalar_values) U* for per-eigenvalue scalars."""
        vals = np.asarray(scalar_values)
        return (self.U * vals) @ np.conj(self.U.T)


def eig_hermitian(A):
    """Eigendecomposition of a Hermitian matrix via cyclic Jacobi."""
    lam, U = jacobi_eigh(as_hermitian(A))
    return Eigendecomposition(U, lam)


def _scalar_function(tag):
    """Resolve a function tag to (callable, needs_positive, name)."""
    if tag == "log":
        return np.log, True, "log"
    if tag == "exp":
        return np.exp, False, "exp"
    if isinstance(tag, tuple) and len(tag) == 2 and tag[0] == "power":
        t = tag[1]
        needs_positive = (np.iscomplexobj(np.asarray(t)) or t < 0
                          or float(t) != int(t))
        return (lambda lam: np.power(lam.astype(complex), t)), needs_positive, f"power({t})"
    raise LinalgError(f"unknown matrix function tag {tag!r}")


def matrix_function(A, tag):
    """Spectral calculus f(A) = U f(L) U* for a Hermitian A.

    tag is "log", "exp" or ("power", t) with real t.  log and non-integer or
    negative powers require A positive definite and raise DomainError
    otherwise.  Diagonal inputs come back exactly diagonal.
    """
    fn, needs_positive, name = _scalar_function(tag)
    dec = eig_hermitian(A)
    if needs_positive and dec.lam.min() <= 0.0:
        raise DomainError(f"matrix {name} requires a positive definite input",
                          dec.lam.min())
    out = dec.apply(fn(dec.lam))
    return hermitian_part(out)


def matrix_power_complex(A, z):
    """A^z for Hermitian positive definite A and complex exponent z.

    Principal branch on the positive real spectrum; the result is generally
    not Hermitian for non-real z.
    """
    dec = eig_hermitian(A)
    if dec.lam.min() <= 0.0:
        raise DomainError("complex matrix power requires a positive definite input",
                          dec.lam.min())
    return dec.apply(np.exp(z * np.log(dec.lam.astype(complex))))


def absolute_value(A, cond_limit=1e12):
    """Polar absolute value |A| = (A* A)^(1/2) of an invertible matrix.

    Computed through the Jacobi eigendecomposition of A*A.  Raises
    SingularMatrixError when the condition number exceeds cond_limit.
    """
    A = as_general(A)
    gram = hermitian_part(np.conj(A.T) @ A)
    dec = eig_hermitian(gram)
    smin = np.sqrt(max(dec.lam.min(), 0.0))
    smax = np.sqrt(max(dec.lam.max(), 0.0))
    if smin <= 0.0 or smax / smin > cond_limit:
        raise SingularMatrixError(smin)
    return hermitian_part(dec.apply(np.sqrt(dec.lam)))


def polar_diagonalize(W0, W1):
    """Factor |W1 W0^-1| = U D U^-1 with U unitary, D positive descending.

    W0 and W1 must be Hermitian positive definite.  Returns (U, D) where D
    is the diagonal matrix of eigenvalues of |W1 W0^-1| sorted descending.
    """
    W0 = as_hermitian(W0)
    W1 = as_hermitian(W1)
    if W0.shape != W1.shape:
        raise LinalgError("polar_diagonalize requires matching dimensions")
    W0_inv = matrix_function(W0, ("power", -1))
    M = W1 @ W0_inv
    absM = absolute_value(M)
    dec = eig_hermitian(absM)
    if dec.lam.min() <= 0.0:
        raise DomainError("absolute value must be positive definite", dec.lam.min())
    return dec.U, np.diag(dec.lam).astype(complex)


def bracket(A, B):
    """Commutator [A, B] = AB - BA."""
    A = as_general(A)
    B = as_general(B)
    if A.shape != B.shape:
        raise LinalgError(f"bracket dimension mismatch: {A.shape} vs {B.shape}")
    return A @ B - B @ A
