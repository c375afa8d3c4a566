"""Dense linear-algebra kernels used by every solver.

Vectors are 1-D float ``ndarray`` objects and matrices are 2-D ``ndarray``
objects. The three kernels are

* :func:`lu_solve` -- partial-pivoting LU for Newton and LM steps,
* :func:`least_squares` -- QR least squares for the Anderson coefficients,
* :func:`gmres_solve` -- full (non-restarted) GMRES for inexact steps.

Tolerances live in :data:`TOLERANCES` and may be changed at runtime.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyWindow, NoConvergence, SingularMatrix


@dataclass
class Tolerances:
    # pivot threshold relative to max |A_ij|
    pivot: float = 1e-14
    # |R_jj| relative to the norm of column j of F
    rank: float = 1e-12
    # Krylov dimension cap for GMRES
    gmres_max_iter: int = 200
    # "newest": drop dependent columns in window order
    # "pivoted": column-pivoted QR, keeps the largest independent columns
    rank_policy: str = "newest"


TOLERANCES = Tolerances()


def lu_solve(A, b, pivot_tol=None):
    """Solve ``A d = b`` by LU factorization with partial pivoting.

    ``pivot_tol`` overrides ``TOLERANCES.pivot``; pass ``0.0`` for matrices
    known to be nonsingular (for example symmetric positive definite ones)
    so that only an exactly zero pivot is rejected.

    Raises
    ------
    SingularMatrix
        If any pivot is smaller than ``pivot_tol * max|A|``.
    """
    if pivot_tol is None:
        pivot_tol = TOLERANCES.pivot
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"lu_solve needs a square matrix, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"right-hand side of shape {b.shape} does not match {A.shape}")
    if not np.all(np.isfinite(A)):
        raise SingularMatrix("matrix has non-finite entries")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    smallest = np.min(pivots)
    if smallest == 0.0 or smallest < pivot_tol * scale:
        raise SingularMatrix(f"pivot {smallest:.3e} below {pivot_tol:.0e} * {scale:.3e}")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def least_squares(F, w, rank_tol=None, policy=None):
    """Return ``gamma`` minimizing ``||w - F gamma||_2``.

    With the default ``"newest"`` policy columns of ``F`` are processed in
    order.  A column whose triangular diagonal entry is below ``rank_tol``
    times its own norm is numerically dependent on the columns before it;
    it is removed, the remaining columns are refactored, and its
    coefficient is set to zero.  With the Anderson window stored
    newest-first this keeps the newest independent differences.

    The ``"pivoted"`` policy instead uses column-pivoted QR and keeps the
    leading columns whose diagonal exceeds ``rank_tol * |R_00|``.
    """
    if rank_tol is None:
        rank_tol = TOLERANCES.rank
    if policy is None:
        policy = TOLERANCES.rank_policy
    F = np.asarray(F, dtype=float)
    w = np.asarray(w, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n, m = F.shape
    if m == 0:
        raise EmptyWindow("least-squares problem with no columns")
    if policy == "pivoted":
        return _pivoted_least_squares(F, w, rank_tol)
    if policy != "newest":
        raise ValueError(f"unknown rank policy {policy!r}")

    gamma = np.zeros(m)
    col_norms = np.linalg.norm(F, axis=0)
    keep = list(range(m))
    while keep:
        Q, R = np.linalg.qr(F[:, keep])
        diag = np.abs(np.diag(R))
        bad = np.flatnonzero(diag <= rank_tol * col_norms[keep[: diag.size]])
        if bad.size:
            del keep[bad[0]]
        elif len(keep) > n:
            # more columns than rows: everything past the first n is dependent
            del keep[n:]
        else:
            gamma[keep] = scipy.linalg.solve_triangular(R, Q.T @ w, check_finite=False)
            break
    return gamma


def _pivoted_least_squares(F, w, rank_tol):
    gamma = np.zeros(F.shape[1])
    Q, R, perm = scipy.linalg.qr(F, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return gamma
    r = int(np.count_nonzero(diag > rank_tol * diag[0]))
    gamma[perm[:r]] = scipy.linalg.solve_triangular(R[:r, :r], Q[:, :r].T @ w, check_finite=False)
    return gamma


def gmres_solve(A, b, rel_tol, max_iter=None):
    """Full GMRES with a zero initial guess.

    Parameters
    ----------
    A : (n, n) array_like
        Anything supporting ``A @ v``.
    b : (n,) array_like
    rel_tol : float
        Stop once ``||b - A d|| <= rel_tol * ||b||``.
    max_iter : int, optional
        Krylov dimension cap, default ``min(n, TOLERANCES.gmres_max_iter)``.

    Returns
    -------
    d : ndarray
    achieved : float
        True relative residual of ``d``.

    Raises
    ------
    NoConvergence
        When ``max_iter`` steps do not meet ``rel_tol``.  The exception
        carries the best iterate and its relative residual.
    """
    if not 0.0 <= rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in [0, 1), got {rel_tol}")
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if max_iter is None:
        max_iter = min(n, TOLERANCES.gmres_max_iter)
    max_iter = max(1, min(max_iter, n))

    beta = np.linalg.norm(b)
    if beta == 0.0:
        return np.zeros(n), 0.0

    V = np.zeros((n, max_iter + 1))
    H = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    g[0] = beta
    V[:, 0] = b / beta

    def assemble(j):
        y = scipy.linalg.solve_triangular(H[: j + 1, : j + 1], g[: j + 1], check_finite=False)
        d = V[:, : j + 1] @ y
        return d, np.linalg.norm(b - A @ d) / beta

    d, achieved = np.zeros(n), 1.0
    for j in range(max_iter):
        v = A @ V[:, j]
        # modified Gram-Schmidt
        for i in range(j + 1):
            H[i, j] = V[:, i] @ v
            v = v - H[i, j] * V[:, i]
        H[j + 1, j] = np.linalg.norm(v)
        breakdown = H[j + 1, j] <= 1e-14 * np.linalg.norm(H[: j + 2, j])
        if not breakdown:
            V[:, j + 1] = v / H[j + 1, j]

        for i in range(j):
            hi, hi1 = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * hi + sn[i] * hi1
            H[i + 1, j] = -sn[i] * hi + cs[i] * hi1
        denom = np.hypot(H[j, j], H[j + 1, j])
        if denom == 0.0:
            # A is singular on the Krylov space; keep the last usable iterate
            break
        cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
        H[j, j] = denom
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        if abs(g[j + 1]) <= rel_tol * beta or breakdown or j == max_iter - 1:
            d, achieved = assemble(j)
            if achieved <= rel_tol:
                return d, achieved
            if breakdown:
                break
    raise NoConvergence(achieved, solution=d, iterations=max_iter)
