"""Analytic reference gait, footstep planning and the locomotion layer.

The reference is a constant-speed walk with sinusoidal lateral sway. The
locomotion layer tracks it with capture-point feedback. It sees the trunk
and the arm joint angles but assumes a payload mass, so a wrong guess acts
on it as an unmodelled load.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from husl.contact import PhaseKind, SupportPhase
from husl.model import ArmState, ModelParams, ReducedState, arm_com_offset, nominal_zmp, weight_transfer


class Foot(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def is_left(self) -> bool:
        return self is Foot.LEFT


@dataclass(frozen=True)
class ReferenceMotion:
    stride_period: float = 1.0
    forward_speed: float = 0.5
    lateral_sway_amplitude: float = 0.03
    step_width: float = 0.2
    forward_offset: float = 0.0
    heading: float = 0.0
    arm_pose: tuple = (0.0, 0.0, 0.0, 0.0)

    @property
    def stride_length(self) -> float:
        return self.forward_speed * self.stride_period

    @property
    def step_length(self) -> float:
        return 0.5 * self.stride_length

    @classmethod
    def from_model(cls, params: ModelParams, lateral_sway_amplitude: float = 0.03,
                   arm_pose=(0.0, 0.0, 0.0, 0.0)) -> "ReferenceMotion":
        """Reference whose timing and footprint match the plant schedule.

        The forward offset puts the reference CoM over the left foot halfway
        through the first left single-support phase.
        """
        period = params.gait_period
        speed = 2.0 * params.step_length / period
        mid_left_stance = params.t_double + 0.5 * params.t_single
        return cls(
            stride_period=period,
            forward_speed=speed,
            lateral_sway_amplitude=lateral_sway_amplitude,
            step_width=params.step_width,
            forward_offset=-speed * mid_left_stance,
            arm_pose=tuple(float(a) for a in arm_pose),
        )


class ReferenceSample(NamedTuple):
    com_xy: np.ndarray
    com_vel_xy: np.ndarray
    heading: float
    arm_q: np.ndarray
    left_foot: np.ndarray
    right_foot: np.ndarray


def reference_state(phase: float, ref: ReferenceMotion) -> ReferenceSample:
    """Reference sample at gait phase ``phase`` (in strides, wrapped for the sway)."""
    strides = math.floor(phase)
    within = phase - strides
    x = ref.stride_length * (strides + within) + ref.forward_offset
    two_pi = 2.0 * math.pi
    y = ref.lateral_sway_amplitude * math.sin(two_pi * within)
    vy = ref.lateral_sway_amplitude * two_pi * math.cos(two_pi * within) / ref.stride_period
    left = footstep_plan(2 * strides, ref)
    right = footstep_plan(2 * strides + (1 if within >= 0.5 else -1), ref)
    return ReferenceSample(
        np.array([x, y]), np.array([ref.forward_speed, vy]), ref.heading, np.array(ref.arm_pose, dtype=float),
        left, right,
    )


def footstep_plan(stride_index: int, ref: ReferenceMotion) -> np.ndarray:
    """Planar pose ``(x, y, yaw)`` of footstep ``stride_index``; even indices are left."""
    lateral = 0.5 * ref.step_width if stride_index % 2 == 0 else -0.5 * ref.step_width
    c, s = math.cos(ref.heading), math.sin(ref.heading)
    fwd = stride_index * ref.step_length
    return np.array([c * fwd - s * lateral, s * fwd + c * lateral, ref.heading])


@dataclass(frozen=True)
class FootstepCommand:
    next_foot: Foot
    target_pose: np.ndarray
    timing_offset: float = 0.0


@dataclass(frozen=True)
class ResidualBounds:
    dx: float = 0.1
    dy: float = 0.1
    dt: float = 0.05

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dt])


def apply_residual(nominal: FootstepCommand, action, bounds: ResidualBounds = ResidualBounds()) -> FootstepCommand:
    """Shift a nominal footstep by a clamped ``(dx, dy, dt)`` residual.

    ``dx``/``dy`` are taken in the target foot's heading frame.
    """
    action = np.asarray(action, dtype=float)
    if action.shape != (3,):
        raise ValueError(f"residual action must have 3 entries, got shape {action.shape}")
    lim = bounds.as_array()
    dx, dy, dt = np.clip(action, -lim, lim)
    yaw = nominal.target_pose[2]
    c, s = math.cos(yaw), math.sin(yaw)
    target = np.array(nominal.target_pose, dtype=float)
    target[0] += c * dx - s * dy
    target[1] += s * dx + c * dy
    timing = min(bounds.dt, max(-bounds.dt, nominal.timing_offset + dt))
    return FootstepCommand(nominal.next_foot, target, timing)


def dcm_plan(t: float, ref: ReferenceMotion, params: ModelParams) -> np.ndarray:
    """Periodic capture-point trajectory of a LIPM walking on the footstep plan.

    Footstep ``k`` supports the body from the middle of one double-support
    phase to the middle of the next; over that window the capture point
    diverges from the foot as ``exp(omega * tau)``. The start offsets are the
    periodic solution, so the trajectory is continuous across steps.
    """
    w = params.omega
    step_time = 0.5 * ref.stride_period
    rel = t - 0.5 * params.t_double
    k = math.floor(rel / step_time)
    tau = rel - k * step_time
    growth = math.exp(w * step_time)
    foot = footstep_plan(k, ref)
    c, s = math.cos(ref.heading), math.sin(ref.heading)
    bx = ref.step_length / (growth - 1.0)
    side = 1.0 if k % 2 == 0 else -1.0
    by = -side * 0.5 * ref.step_width * (1.0 - math.tanh(0.5 * w * step_time))
    grow = math.exp(w * tau)
    return foot[:2] + grow * np.array([c * bx - s * by, s * bx + c * by])


@dataclass(frozen=True)
class LocomotionGains:
    """Capture-point feedback of the locomotion layer.

    At touchdown the swing foot lands ``step_dcm`` times the capture-point
    error away from the plan (limited to ``reach``); in double support the
    commanded ZMP moves by ``zmp_dcm`` times the error.
    """

    step_dcm: float = 1.0
    zmp_dcm: float = 2.0
    reach: tuple = (0.2, 0.1)


@dataclass
class LocomotionController:
    """Capture-point walking controller with an imperfect body model.

    The controller observes the trunk and the arm joint angles but not the
    payload mass: it locates the total CoM using ``assumed_payload`` (kg per
    arm) instead of the true value. ``None`` means exact knowledge.
    """

    params: ModelParams
    ref: ReferenceMotion
    gains: LocomotionGains = field(default_factory=LocomotionGains)
    assumed_payload: float | None = None

    def __post_init__(self):
        self._body = self.params if self.assumed_payload is None else replace(
            self.params, payload_mass=self.assumed_payload)

    def estimated_com(self, state: ReducedState) -> tuple[np.ndarray, np.ndarray]:
        """Believed horizontal CoM position and velocity."""
        offset, rate = arm_com_offset(state, self._body)
        return state.trunk_com_xy + offset, state.trunk_vel_xy + rate

    def dcm_error(self, state: ReducedState) -> np.ndarray:
        """Believed capture point minus the planned capture point."""
        # states are immutable, so the last result can be reused within a tick
        cached = getattr(self, "_last", None)
        if cached is not None and cached[0] is state:
            return cached[1]
        com, vel = self.estimated_com(state)
        err = com + vel / self.params.omega - dcm_plan(state.t, self.ref, self.params)
        self._last = (state, err)
        return err

    def nominal_command(self, state: ReducedState) -> FootstepCommand:
        """Planned footstep for the swing foot, corrected by capture-point feedback."""
        reach = np.asarray(self.gains.reach)
        shift = np.clip(self.gains.step_dcm * self.dcm_error(state), -reach, reach)
        target = footstep_plan(state.step_index, self.ref)
        target[:2] += shift
        foot = Foot.LEFT if state.step_index % 2 == 0 else Foot.RIGHT
        return FootstepCommand(foot, target, 0.0)

    def zmp_command(self, state: ReducedState) -> np.ndarray:
        base = nominal_zmp(state, self.params)
        if state.phase.kind != PhaseKind.DOUBLE:
            return base
        return base + self.gains.zmp_dcm * self.dcm_error(state)


def initial_state(params: ModelParams, ref: ReferenceMotion, arm_q=None) -> ReducedState:
    """Standing start on footsteps 0 (left) and -1 (right), total CoM on the reference."""
    sample = reference_state(0.0, ref)
    q = np.zeros(4) if arm_q is None else np.array(arm_q, dtype=float)
    state = ReducedState(
        t=0.0,
        trunk_com_xy=sample.com_xy.copy(),
        trunk_vel_xy=sample.com_vel_xy.copy(),
        heading=ref.heading,
        left_foot_pose=footstep_plan(0, ref),
        right_foot_pose=footstep_plan(-1, ref),
        arms=ArmState(q, np.zeros(4)),
        phase=SupportPhase(PhaseKind.DOUBLE, 0.0),
        tick=0,
        phase_tick=0,
        step_index=1,
    )
    offset, _ = arm_com_offset(state, params)
    return replace(state, trunk_com_xy=sample.com_xy - offset)


__all__ = [
    "Foot", "ReferenceMotion", "ReferenceSample", "reference_state", "footstep_plan", "FootstepCommand",
    "ResidualBounds", "apply_residual", "dcm_plan", "LocomotionGains", "LocomotionController", "initial_state",
    "weight_transfer",
]
