"""Problem contract plus finite-difference and orthogonal-transform adapters."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError, NotOrthogonal

ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class NonlinearProblem:
    """A square nonlinear system ``f(x) = 0``.

    Parameters
    ----------
    dimension : int
    residual : callable
        ``x -> f(x)``.
    jacobian : callable, optional
        ``x -> f'(x)``.  Forward differences are used when omitted.
    gradient_norm_termination : bool
        Stop on ``||f'(x)^T f(x)||`` instead of ``||f(x)||``.
    name : str
    x0 : ndarray, optional
        Default starting point.
    mu_schedule : optional
        Default LM damping schedule for this problem.
    sample_x0 : callable, optional
        ``rng -> x0`` for randomized trials.
    """

    dimension: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gradient_norm_termination: bool = False
    name: str = "problem"
    x0: Optional[np.ndarray] = field(default=None, compare=False)
    mu_schedule: Optional[object] = None
    sample_x0: Optional[Callable[[np.random.Generator], np.ndarray]] = field(
        default=None, compare=False
    )

    def f(self, x):
        fx = np.asarray(self.residual(x), dtype=float)
        if fx.shape != (self.dimension,):
            raise EvaluationError(f"residual has shape {fx.shape}, expected ({self.dimension},)")
        if not np.all(np.isfinite(fx)):
            raise EvaluationError("residual is not finite")
        return fx

    def jac(self, x, fx=None):
        if self.jacobian is None:
            return fd_jacobian(self, x, fx=fx)
        J = np.asarray(self.jacobian(x), dtype=float)
        if J.shape != (self.dimension, self.dimension):
            raise EvaluationError(f"jacobian has shape {J.shape}")
        if not np.all(np.isfinite(J)):
            raise EvaluationError("jacobian is not finite")
        return J

    def metric(self, fx, J=None):
        """Termination quantity for an already-evaluated residual."""
        if self.gradient_norm_termination:
            return float(np.linalg.norm(J.T @ fx))
        return float(np.linalg.norm(fx))


def default_fd_step(x):
    return np.sqrt(np.finfo(float).eps) * max(1.0, float(np.max(np.abs(x), initial=0.0)))


def fd_jacobian(p, x, h=None, fx=None):
    """Forward-difference Jacobian; column ``j`` is ``(f(x + h e_j) - f(x)) / h``."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_fd_step(x)
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    if fx is None:
        fx = p.f(x)
    J = np.empty((fx.shape[0], x.shape[0]))
    xh = x.copy()
    for j in range(x.shape[0]):
        xh[j] = x[j] + h
        J[:, j] = (p.f(xh) - fx) / h
        xh[j] = x[j]
    return J


@dataclass(frozen=True)
class TransformedProblem(NonlinearProblem):
    """``x -> U^T F(V x)`` for orthogonal ``U`` and ``V``."""

    base: Optional[NonlinearProblem] = None
    U: Optional[np.ndarray] = field(default=None, compare=False)
    V: Optional[np.ndarray] = field(default=None, compare=False)


def _check_orthogonal(Q, n, label):
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (n, n):
        raise NotOrthogonal(f"{label} has shape {Q.shape}, expected ({n}, {n})")
    err = np.max(np.abs(Q.T @ Q - np.eye(n)))
    if err > ORTHO_TOL:
        raise NotOrthogonal(f"{label}^T {label} deviates from identity by {err:.2e}")
    return Q


def transform(base, U, V):
    n = base.dimension
    U = _check_orthogonal(U, n, "U")
    V = _check_orthogonal(V, n, "V")

    def residual(x):
        return U.T @ base.f(V @ x)

    def jacobian(x):
        return U.T @ base.jac(V @ x) @ V

    return TransformedProblem(
        dimension=n,
        residual=residual,
        jacobian=jacobian,
        gradient_norm_termination=base.gradient_norm_termination,
        name=f"transformed-{base.name}",
        x0=None if base.x0 is None else V.T @ base.x0,
        mu_schedule=base.mu_schedule,
        base=base,
        U=U,
        V=V,
    )


def random_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))
