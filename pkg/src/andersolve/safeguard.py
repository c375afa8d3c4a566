"""Adaptive gamma-safeguarding and the regime controller.

The safeguard scales a depth-1 Anderson correction by ``lambda`` in [0, 1]
so that the accelerated iterate falls back toward the plain pNM iterate
whenever the pNM steps are shrinking fast.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidInput

MODES = ("off", "preasymptotic", "asymptotic")
REGIMES = ("aa_m", "safeguarded_aa1", "pnm_only")


@dataclass(frozen=True)
class SafeguardDecision:
    lam: float
    branch: str
    eta: float
    r_eff: float
    beta: float
    gamma_in: float
    p_exponent: float = 2.0


@dataclass(frozen=True)
class SafeguardMode:
    """How and when safeguarding is applied.

    ``tau_metric`` selects whether the asymptotic switch watches the step
    norm (``"step"``) or the residual norm (``"residual"``).
    """

    mode: str = "off"
    r: float = 0.9
    p_exponent: float = 2.0
    tau: float = 0.1
    tau_metric: str = "step"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown safeguard mode {self.mode!r}")
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError("r must lie in [0, 1]")
        if self.p_exponent < 2.0:
            raise ConfigError("p exponent must be at least 2")
        if self.mode == "asymptotic" and not self.tau > 0:
            raise ConfigError("tau must be positive in asymptotic mode")
        if self.tau_metric not in ("step", "residual"):
            raise ConfigError(f"unknown tau metric {self.tau_metric!r}")


def gamma_safeguard(gamma, w_next_norm, w_prev_norm, r=0.9, p=2.0):
    if not w_prev_norm > 0:
        raise InvalidInput("previous step norm must be positive")
    eta = w_next_norm / w_prev_norm
    r_eff = min(eta, r)
    beta = r_eff * eta ** (p - 1.0)
    if gamma == 0.0 or gamma >= 1.0:
        lam, branch = 0.0, "zero_out"
    elif abs(gamma) / abs(1.0 - gamma) > beta:
        lam, branch = beta / (gamma * (beta + math.copysign(1.0, gamma))), "scaled"
    else:
        lam, branch = 1.0, "pass_through"
    return SafeguardDecision(lam, branch, eta, r_eff, beta, gamma, p)


def safeguarded_combine(x_k, x_prev, w_next, w_prev, gamma, lam):
    return x_k + w_next - lam * gamma * (x_k - x_prev + w_next - w_prev)


def lambda_gamma_bounds(beta, gamma):
    """Reference values for ``|lambda gamma|`` on each branch.

    Returns ``(pass_through_bound, scaled_value)``: the upper bound that
    holds when the correction passes through unscaled and the exact value
    it takes when scaled.
    """
    return beta / (1.0 - beta), beta / (1.0 + np.sign(gamma) * beta)


class Controller:
    """Per-solve regime selector; the asymptotic switch latches."""

    def __init__(self, mode, depth):
        if mode.mode != "off" and depth < 1:
            raise ConfigError("safeguarding needs an Anderson depth of at least 1")
        if mode.mode == "preasymptotic" and depth != 1:
            raise ConfigError("preasymptotic safeguarding is defined for depth 1 only")
        self.mode = mode
        self.depth = depth
        self.switched = False

    def update(self, w_next_norm, f_norm=None):
        if self.mode.mode == "off":
            return "aa_m" if self.depth > 0 else "pnm_only"
        if self.mode.mode == "preasymptotic":
            return "safeguarded_aa1"
        if not self.switched:
            probe = w_next_norm if self.mode.tau_metric == "step" else f_norm
            self.switched = probe < self.mode.tau
        return "safeguarded_aa1" if self.switched else "aa_m"


def controller_update(mode, w_next_norm, state, depth=1, f_norm=None):
    """Functional form of :meth:`Controller.update`.

    ``state`` is a :class:`Controller` or ``None`` for a fresh one; the
    regime and the (possibly new) controller are returned.
    """
    if state is None:
        state = Controller(mode, depth)
    return state.update(w_next_norm, f_norm), state
