"""Un-accelerated update steps of the perturbed-Newton family.

Every stepper returns the update ``w`` for the current iterate; the caller
decides how to combine it (plain step, Anderson, safeguarded Anderson).

=============== ==========================================================
kind            linear system
=============== ==========================================================
newton          ``f'(x) w = -f(x)``, dense LU
inexact_newton  same system, GMRES to an Eisenstat-Walker forcing term
lm              ``(f'^T f' + mu I) w = -f'^T f``, dense LU
inexact_lm      damped normal equations by GMRES with the same forcing
=============== ==========================================================
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateDamping, SingularMatrix

KINDS = ("newton", "inexact_newton", "lm", "inexact_lm")
MU_FLOOR = 1e-30


@dataclass(frozen=True)
class MuSchedule:
    """LM damping rule.

    ``scaled_residual_sq`` gives ``mu0 * ||f||**2``, ``gradient_norm`` gives
    ``||f'^T f||`` and ``constant`` gives ``value``.
    """

    kind: str = "scaled_residual_sq"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("scaled_residual_sq", "gradient_norm", "constant"):
            raise ValueError(f"unknown mu schedule {self.kind!r}")
        if self.kind != "gradient_norm" and not self.value > 0:
            raise ValueError("mu schedule parameter must be positive")

    @classmethod
    def parse(cls, text):
        """Parse ``scaled:<mu0>``, ``gradnorm`` or ``constant:<c>``."""
        name, _, arg = text.partition(":")
        if name == "gradnorm" and not arg:
            return cls("gradient_norm", 0.0)
        if name == "scaled":
            return cls("scaled_residual_sq", float(arg) if arg else 1.0)
        if name == "constant" and arg:
            return cls("constant", float(arg))
        raise ValueError(f"cannot parse mu schedule {text!r}")

    def __str__(self):
        if self.kind == "gradient_norm":
            return "gradnorm"
        prefix = "scaled" if self.kind == "scaled_residual_sq" else "constant"
        return f"{prefix}:{self.value:g}"

    def evaluate(self, fx, J):
        if self.kind == "scaled_residual_sq":
            return self.value * float(fx @ fx)
        if self.kind == "gradient_norm":
            return float(np.linalg.norm(J.T @ fx))
        return self.value


@dataclass(frozen=True)
class ForcingConfig:
    """Eisenstat-Walker choice-2 forcing parameters."""

    gamma_ew: float = 0.9
    alpha: float = 2.0
    eta0: float = 0.5
    eta_max: float = 0.9
    safeguard: bool = True

    def __post_init__(self):
        if not 0 < self.gamma_ew <= 1:
            raise ValueError("gamma_ew must lie in (0, 1]")
        if not 1 < self.alpha <= 2:
            raise ValueError("alpha must lie in (1, 2]")
        if not 0 < self.eta0 < 1 or not 0 < self.eta_max < 1:
            raise ValueError("eta0 and eta_max must lie in (0, 1)")


@dataclass(frozen=True)
class StepperConfig:
    kind: str = "newton"
    mu_schedule: MuSchedule = field(default_factory=MuSchedule)
    forcing: ForcingConfig = field(default_factory=ForcingConfig)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown stepper kind {self.kind!r}")


@dataclass
class ForcingHistory:
    """Residual norm and forcing term from the previous inexact step."""

    prev_fnorm: float = None
    prev_eta: float = None


@dataclass
class StepResult:
    w: np.ndarray
    mu_used: float = 0.0
    eta_used: float = 0.0
    linear_residual: float = 0.0


def forcing_term(fnorm, history, cfg):
    if history is None or history.prev_fnorm is None:
        return cfg.eta0
    eta = cfg.gamma_ew * (fnorm / history.prev_fnorm) ** cfg.alpha
    eta = min(max(eta, 0.0), cfg.eta_max)
    if cfg.safeguard and history.prev_eta is not None:
        floor = cfg.gamma_ew * history.prev_eta**cfg.alpha
        if floor > 0.1:
            eta = min(max(eta, floor), cfg.eta_max)
    return eta


def _eval(p, x, fx, J):
    if fx is None:
        fx = p.f(x)
    if J is None:
        J = p.jac(x, fx)
    return fx, J


def newton_step(p, x, fx=None, J=None):
    fx, J = _eval(p, x, fx, J)
    w = linalg.lu_solve(J, -fx)
    return StepResult(w=w, linear_residual=float(np.linalg.norm(J @ w + fx)))


def inexact_newton_step(p, x, history, cfg, fx=None, J=None, max_iter=None):
    fx, J = _eval(p, x, fx, J)
    fnorm = float(np.linalg.norm(fx))
    eta = forcing_term(fnorm, history, cfg)
    w, rel = linalg.gmres_solve(J, -fx, eta, max_iter)
    return StepResult(w=w, eta_used=eta, linear_residual=rel * fnorm)


def _damped_system(p, x, mu_schedule, fx, J):
    fx, J = _eval(p, x, fx, J)
    mu = mu_schedule.evaluate(fx, J)
    A = J.T @ J
    A[np.diag_indices_from(A)] += mu
    return A, -(J.T @ fx), mu, fx


def lm_step(p, x, mu_schedule, fx=None, J=None):
    A, rhs, mu, _ = _damped_system(p, x, mu_schedule, fx, J)
    try:
        # mu > 0 makes the damped normal matrix positive definite
        w = linalg.lu_solve(A, rhs, pivot_tol=0.0 if mu >= MU_FLOOR else None)
    except SingularMatrix as exc:
        if mu < MU_FLOOR:
            raise DegenerateDamping(f"mu = {mu:.3e} on a singular normal matrix") from exc
        raise
    return StepResult(w=w, mu_used=mu, linear_residual=float(np.linalg.norm(A @ w - rhs)))


def inexact_lm_step(p, x, mu_schedule, forcing, history, fx=None, J=None, max_iter=None):
    A, rhs, mu, fx = _damped_system(p, x, mu_schedule, fx, J)
    eta = forcing_term(float(np.linalg.norm(fx)), history, forcing)
    w, rel = linalg.gmres_solve(A, rhs, eta, max_iter)
    return StepResult(w=w, mu_used=mu, eta_used=eta, linear_residual=rel * float(np.linalg.norm(rhs)))


class Stepper:
    """Per-solve wrapper that owns the forcing history of inexact kinds."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.history = ForcingHistory()

    def __call__(self, p, x, fx, J):
        cfg = self.cfg
        if cfg.kind == "newton":
            res = newton_step(p, x, fx, J)
        elif cfg.kind == "lm":
            res = lm_step(p, x, cfg.mu_schedule, fx, J)
        elif cfg.kind == "inexact_newton":
            res = inexact_newton_step(p, x, self.history, cfg.forcing, fx, J)
        else:
            res = inexact_lm_step(p, x, cfg.mu_schedule, cfg.forcing, self.history, fx, J)
        if cfg.kind.startswith("inexact"):
            self.history = ForcingHistory(float(np.linalg.norm(fx)), res.eta_used)
        return res
