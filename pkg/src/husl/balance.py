"""Model-based arm balancing: CoS estimation, stability indicator, arm targets, PD."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from husl.contact import CONTACT_EPS, GrfSample, NoContactError, NoSupportError, cop_local, estimate_cos
from husl.model import ArmState

__all__ = [
    "CONTACT_EPS", "NoContactError", "NoSupportError", "cop_local", "estimate_cos", "Scenario",
    "BalanceGains", "StabilityIndicator", "stability_indicator", "arm_target", "pd_torque",
    "CombinedControl", "fuse_controls", "GrfSample",
]


class Scenario(enum.Enum):
    BASELINE = "baseline"
    STATIC_PAYLOAD = "static_payload"
    DYNAMIC_BALANCING = "dynamic_balancing"


def _default_kp_arm() -> np.ndarray:
    # rows: pitch_l, roll_l, pitch_r, roll_r; columns: d_x, d_y
    return np.array([[2.0, 0.0], [0.0, 1.5], [2.0, 0.0], [0.0, 1.5]])


@dataclass(frozen=True)
class BalanceGains:
    kp_arm: np.ndarray = field(default_factory=_default_kp_arm)
    kp: np.ndarray = field(default_factory=lambda: np.full(4, 60.0))
    kd: np.ndarray = field(default_factory=lambda: np.full(4, 4.0))
    q_base: np.ndarray = field(default_factory=lambda: np.array([0.4, 0.0, 0.4, 0.0]))
    static_pose: np.ndarray = field(default_factory=lambda: np.array([1.2, 0.0, 1.2, 0.0]))
    joint_limit: float = 1.6

    def __post_init__(self):
        for name, shape in (("kp_arm", (4, 2)), ("kp", (4,)), ("kd", (4,)), ("q_base", (4,)), ("static_pose", (4,))):
            value = np.asarray(getattr(self, name), dtype=float)
            if name in ("kp", "kd") and value.ndim == 0:
                value = np.full(4, float(value))
            if value.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {value.shape}")
            object.__setattr__(self, name, value)
        if np.any(self.kp < 0) or np.any(self.kd < 0):
            raise ValueError("kp and kd must be entrywise non-negative")


@dataclass(frozen=True)
class StabilityIndicator:
    d_xy: np.ndarray


def stability_indicator(com_xy, cos_xy) -> StabilityIndicator:
    """``d = CoM_xy - CoS_xy``; a dynamic indicator, not an error to null."""
    com_xy, cos_xy = np.asarray(com_xy, dtype=float), np.asarray(cos_xy, dtype=float)
    if not (np.all(np.isfinite(com_xy)) and np.all(np.isfinite(cos_xy))):
        raise ValueError("CoM and CoS must be finite")
    return StabilityIndicator(com_xy[:2] - cos_xy[:2])


def arm_target(gains: BalanceGains, d: StabilityIndicator, clamp: bool = True) -> np.ndarray:
    """Neutral pose shifted against the stability indicator, then joint-limited."""
    q = gains.q_base - gains.kp_arm @ d.d_xy
    if clamp:
        q = np.clip(q, -gains.joint_limit, gains.joint_limit)
    return q


def pd_torque(q_target, q, qdot, kp, kd) -> np.ndarray:
    return np.asarray(kp) * (np.asarray(q_target) - np.asarray(q)) - np.asarray(kd) * np.asarray(qdot)


class CombinedControl(NamedTuple):
    leg: object
    arm_torques: np.ndarray
    arms_present: bool


def fuse_controls(leg_command, arm_torques, mode: Scenario, arms: ArmState | None = None,
                  gains: BalanceGains | None = None) -> CombinedControl:
    """Combine the locomotion command with arm actuation for one tick.

    The leg command always passes through untouched. Dynamic balancing
    overrides the arm channels with ``arm_torques``; static payload ignores
    them and holds ``gains.static_pose`` with the PD law; baseline has no
    arms and gets zero arm channels.
    """
    if mode is Scenario.DYNAMIC_BALANCING:
        return CombinedControl(leg_command, np.asarray(arm_torques, dtype=float), True)
    if mode is Scenario.STATIC_PAYLOAD:
        if arms is None or gains is None:
            raise ValueError("static payload mode needs the arm state and gains")
        tau = pd_torque(gains.static_pose, arms.q, arms.qdot, gains.kp, gains.kd)
        return CombinedControl(leg_command, tau, True)
    return CombinedControl(leg_command, np.zeros(4), False)
