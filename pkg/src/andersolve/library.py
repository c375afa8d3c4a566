"""Benchmark problems with analytic Jacobians."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError
from .problem import NonlinearProblem
from .steppers import MuSchedule

CHANDRASEKHAR_MU0 = 5e-4
PROBLEM_NAMES = ("chandrasekhar", "beh1", "beh2", "beh3", "beh4", "toy-singular")


@dataclass(frozen=True)
class ChandrasekharConfig:
    omega_bar: float = 1.0
    nodes_n: int = 1000

    def __post_init__(self):
        if not 0.0 <= self.omega_bar <= 1.0:
            raise ValueError("omega_bar must lie in [0, 1]")
        if self.nodes_n < 2:
            raise ValueError("need at least two nodes")


def chandrasekhar(cfg=ChandrasekharConfig()):
    """Midpoint-rule discretization of the Chandrasekhar H-equation.

    With nodes ``mu_i = (i - 1/2) / N`` the residual is

        f_i(H) = H_i - 1 / (1 - c * sum_j mu_i H_j / (mu_i + mu_j)),  c = omega / (2N).

    Random starting vectors are uniform on [0, 1].  The default LM schedule
    is ``5e-4 * ||f||**2``.
    """
    n = cfg.nodes_n
    mu = (np.arange(1, n + 1) - 0.5) / n
    K = (cfg.omega_bar / (2 * n)) * mu[:, None] / (mu[:, None] + mu[None, :])

    def denom(H):
        d = 1.0 - K @ H
        if np.any(d == 0.0) or not np.all(np.isfinite(d)):
            raise EvaluationError("1 - S_i vanished")
        return d

    def residual(H):
        return H - 1.0 / denom(H)

    def jacobian(H):
        d = denom(H)
        J = -K / (d * d)[:, None]
        J[np.diag_indices(n)] += 1.0
        return J

    return NonlinearProblem(
        dimension=n,
        residual=residual,
        jacobian=jacobian,
        name=f"chandrasekhar(omega={cfg.omega_bar:g},N={n})",
        x0=np.ones(n),
        mu_schedule=MuSchedule("scaled_residual_sq", CHANDRASEKHAR_MU0),
        sample_x0=lambda rng: rng.uniform(0.0, 1.0, n),
    )


def _beh1():
    def f(x):
        s = x[0] ** 2 + x[1] ** 2
        return np.array([s - 1.0, s - 9.0])

    def jac(x):
        row = [2 * x[0], 2 * x[1]]
        return np.array([row, row])

    return f, jac, (0.0, np.sqrt(5.0) + 0.03), MuSchedule("gradient_norm", 0.0)


def _beh2():
    def f(x):
        a, b = x[0] ** 3, x[0] * x[1]
        return np.array([a - b + 1.0, a + b + 1.0])

    def jac(x):
        d = 3 * x[0] ** 2
        return np.array([[d - x[1], -x[0]], [d + x[1], x[0]]])

    return f, jac, (0.008, 2.0), MuSchedule("gradient_norm", 0.0)


def _beh3():
    def f(x):
        c, s = np.cos(x[0]), np.sin(x[0])
        return np.array([c / 9 - x[1] * s, s / 9 + x[1] * c])

    def jac(x):
        c, s = np.cos(x[0]), np.sin(x[0])
        return np.array([[-s / 9 - x[1] * c, -s], [c / 9 - x[1] * s, c]])

    return f, jac, (np.pi, 0.001), MuSchedule("constant", 0.2)


def _beh4():
    def f(x):
        q = x[0] ** 2 + 1.0
        return np.array([x[1] - q, x[1] + q])

    def jac(x):
        return np.array([[-2 * x[0], 1.0], [2 * x[0], 1.0]])

    return f, jac, (0.01, 0.0), MuSchedule("constant", 5.0)


_BEH = {1: _beh1, 2: _beh2, 3: _beh3, 4: _beh4}


def beh_problem(ident):
    """Least-squares test problems Beh1-Beh4 with their LM parameter choices.

    All four terminate on the gradient norm ``||f'(x)^T f(x)||``.
    """
    if ident not in _BEH:
        raise ValueError(f"Beh problems are numbered 1-4, got {ident!r}")
    f, jac, x0, mu = _BEH[ident]()
    return NonlinearProblem(
        dimension=2,
        residual=f,
        jacobian=jac,
        gradient_norm_termination=True,
        name=f"beh{ident}",
        x0=np.array(x0, dtype=float),
        mu_schedule=mu,
    )


@dataclass(frozen=True)
class SingularToyDiagnostics:
    null_projection: Callable[[np.ndarray], np.ndarray]
    range_projection: Callable[[np.ndarray], np.ndarray]
    known_root: np.ndarray


def singular_toy():
    """``f(x) = (x1**2, x2)``: root at the origin, null space along ``e1``."""

    def f(x):
        return np.array([x[0] ** 2, x[1]])

    def jac(x):
        return np.array([[2 * x[0], 0.0], [0.0, 1.0]])

    p = NonlinearProblem(
        dimension=2, residual=f, jacobian=jac, name="toy-singular", x0=np.array([1.0, 0.0])
    )
    diag = SingularToyDiagnostics(
        null_projection=lambda e: np.array([e[0], 0.0]),
        range_projection=lambda e: np.array([0.0, e[1]]),
        known_root=np.zeros(2),
    )
    return p, diag


def scalar_quadratic(target=4.0, x0=10.0):
    """``f(x) = x**2 - target``, a nonsingular scalar root."""
    return NonlinearProblem(
        dimension=1,
        residual=lambda x: x**2 - target,
        jacobian=lambda x: np.array([[2 * x[0]]]),
        name=f"x^2-{target:g}",
        x0=np.array([x0], dtype=float),
    )


def broyden_tridiagonal(n=5):
    """``f_i = (3 - 2 x_i) x_i - x_{i-1} - 2 x_{i+1} + 1`` with zero padding."""

    def f(x):
        xp = np.concatenate(([0.0], x, [0.0]))
        return (3 - 2 * x) * x - xp[:-2] - 2 * xp[2:] + 1.0

    def jac(x):
        return np.diag(3 - 4 * x) - np.eye(n, k=-1) - 2 * np.eye(n, k=1)

    return NonlinearProblem(
        dimension=n, residual=f, jacobian=jac, name=f"broyden-tridiagonal({n})", x0=-np.ones(n)
    )


def linear_problem(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return NonlinearProblem(
        dimension=b.shape[0],
        residual=lambda x: A @ x - b,
        jacobian=lambda x: A,
        name="linear",
        x0=np.zeros(b.shape[0]),
    )


def get_problem(name, omega=1.0, nodes=1000):
    """Look up a problem by its command-line name."""
    if name == "chandrasekhar":
        return chandrasekhar(ChandrasekharConfig(omega, nodes))
    if name.startswith("beh") and name[3:].isdigit():
        return beh_problem(int(name[3:]))
    if name == "toy-singular":
        return singular_toy()[0]
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
