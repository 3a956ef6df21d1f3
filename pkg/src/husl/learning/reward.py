"""Imitation reward on reduced-state features, plus survival and fall terms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TERMS = ("joint_pos", "joint_vel", "site_pos", "site_quat", "site_vel")


@dataclass(frozen=True)
class RewardWeights:
    w_joint_pos: float = 0.05
    w_joint_vel: float = 0.01
    w_site_pos: float = 0.1
    w_site_quat: float = 0.05
    w_site_vel: float = 0.01
    w_survival: float = 5.0
    w_stability_penalty: float = 4.0
    # sharpness per imitation term, same order as TERMS
    alpha: tuple = (5.0, 0.5, 5.0, 5.0, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if len(self.alpha) != len(TERMS):
            raise ValueError(f"alpha needs {len(TERMS)} entries")
        if min(self.imitation_weights()) < 0 or self.w_survival < 0 or self.w_stability_penalty < 0:
            raise ValueError("reward weights must be non-negative")
        if min(self.alpha) < 0:
            raise ValueError("alpha must be non-negative")

    def imitation_weights(self) -> tuple:
        return (self.w_joint_pos, self.w_joint_vel, self.w_site_pos, self.w_site_quat, self.w_site_vel)


class ImitationFeatures(NamedTuple):
    """Feature vectors ``f_k`` for the five imitation terms."""

    joint_pos: np.ndarray
    joint_vel: np.ndarray
    site_pos: np.ndarray
    site_quat: np.ndarray
    site_vel: np.ndarray


def mimic_reward(s: ImitationFeatures, s_star: ImitationFeatures, w: RewardWeights = RewardWeights()) -> float:
    """``sum_k w_k * exp(-alpha_k * |f_k(s) - f_k(s*)|^2)``."""
    total = 0.0
    for name, wk, ak in zip(TERMS, w.imitation_weights(), w.alpha):
        a = np.asarray(getattr(s, name), dtype=float)
        b = np.asarray(getattr(s_star, name), dtype=float)
        if a.shape != b.shape:
            raise ValueError(f"feature {name!r}: shape {a.shape} does not match reference {b.shape}")
        diff = a - b
        total += wk * math.exp(-ak * float(diff @ diff))
    return total


def step_reward(alive: bool, fell: bool, mimic: float, w: RewardWeights = RewardWeights()) -> float:
    """Survival bonus plus imitation, minus a one-off penalty on the fall step."""
    return w.w_survival * float(alive) + mimic - w.w_stability_penalty * float(fell)
