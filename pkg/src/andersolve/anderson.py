"""Depth-m Anderson extrapolation of a pNM step."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDifference, ZeroResidual
from .linalg import least_squares


@dataclass
class AndersonWindow:
    """Sliding history of step and iterate differences, newest column first.

    ``step_diffs[:, 0]`` is ``w_{k+1} - w_k`` and ``iterate_diffs[:, 0]`` is
    ``x_k - x_{k-1}``.
    """

    depth_m: int
    step_diffs: list = field(default_factory=list)
    iterate_diffs: list = field(default_factory=list)

    def __post_init__(self):
        if self.depth_m < 0:
            raise ValueError("depth must be non-negative")

    def __len__(self):
        return len(self.step_diffs)

    def push(self, new_w_diff, new_x_diff):
        if self.depth_m == 0:
            return self
        self.step_diffs.insert(0, np.asarray(new_w_diff, dtype=float))
        self.iterate_diffs.insert(0, np.asarray(new_x_diff, dtype=float))
        del self.step_diffs[self.depth_m :]
        del self.iterate_diffs[self.depth_m :]
        return self

    @property
    def F(self):
        return np.column_stack(self.step_diffs)

    @property
    def E(self):
        return np.column_stack(self.iterate_diffs)


@dataclass
class AAStepInfo:
    gamma: np.ndarray
    theta: float
    combined_x: np.ndarray


def gain(w_next, F, gamma):
    """Optimization gain ``||w - F gamma|| / ||w||``."""
    return float(np.linalg.norm(w_next - F @ gamma) / np.linalg.norm(w_next))


def depth_one_gamma(w_next, w_prev):
    """Closed-form coefficient for a single difference column."""
    d = w_next - w_prev
    dd = float(d @ d)
    if dd == 0.0:
        raise DegenerateDifference("w_{k+1} == w_k")
    return float(d @ w_next) / dd


def solve_gamma(window, w_next):
    """Least-squares coefficients and optimization gain for ``w_next``.

    Raises
    ------
    ZeroResidual
        If ``w_next`` is zero.
    """
    if len(window) == 0:
        raise ValueError("window is empty")
    if not np.any(w_next):
        raise ZeroResidual("pNM step vanished")
    F = window.F
    gamma = least_squares(F, w_next)
    return gamma, min(gain(w_next, F, gamma), 1.0)


def combine(x_k, w_next, window, gamma):
    if len(window) == 0:
        return x_k + w_next
    return x_k + w_next - (window.E + window.F) @ gamma


def anderson_step(x_k, w_next, window):
    gamma, theta = solve_gamma(window, w_next)
    return AAStepInfo(gamma=gamma, theta=theta, combined_x=combine(x_k, w_next, window, gamma))
