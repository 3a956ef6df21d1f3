"""Reduced-order walking plant.

A linear-inverted-pendulum trunk on finite rectangular feet carries two
2-DoF point-mass arms (shoulder pitch + roll) with a payload at each tip.
Ground reactions are synthesized analytically from a commanded ZMP.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from husl import _geometry as geom
from husl.contact import (
    GrfSample,
    PhaseKind,
    SupportPhase,
    estimate_cos,
    to_local,
    to_world,
)


class InvalidParametersError(ValueError):
    pass


class SimulationDivergedError(RuntimeError):
    """The state became non-finite; the episode is over."""


@dataclass(frozen=True)
class ModelParams:
    trunk_mass: float = 47.0
    arm_link_mass: float = 4.0
    payload_mass: float = 0.0
    shoulder_offset_left: tuple = (0.0, 0.2, 0.5)
    shoulder_offset_right: tuple = (0.0, -0.2, 0.5)
    upper_arm_length: float = 0.6
    z0: float = 0.9
    g: float = 9.81
    foot_length: float = 0.2
    foot_width: float = 0.1
    step_length: float = 0.25
    step_width: float = 0.2
    t_single: float = 0.35
    t_double: float = 0.15
    dt: float = 1e-3
    arm_joint_damping: float = 1.0
    arm_rotor_inertia: float = 0.05
    torque_limit: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "shoulder_offset_left", tuple(float(v) for v in self.shoulder_offset_left))
        object.__setattr__(self, "shoulder_offset_right", tuple(float(v) for v in self.shoulder_offset_right))
        if min(self.trunk_mass, self.arm_link_mass, self.payload_mass) < 0:
            raise InvalidParametersError("masses must be non-negative")
        if self.z0 <= 0 or self.dt <= 0 or self.g <= 0:
            raise InvalidParametersError("z0, dt and g must be positive")
        if self.t_single <= 0 or self.t_double <= 0:
            raise InvalidParametersError("support durations must be positive")
        if self.foot_length <= 0 or self.foot_width <= 0:
            raise InvalidParametersError("foot dimensions must be positive")
        if self.arm_rotor_inertia <= 0:
            raise InvalidParametersError("arm_rotor_inertia must be positive")
        if self.torque_limit is not None and self.torque_limit <= 0:
            raise InvalidParametersError("torque_limit must be positive when set")

    @property
    def total_mass(self) -> float:
        return self.trunk_mass + 2.0 * (self.arm_link_mass + self.payload_mass)

    @property
    def weight(self) -> float:
        return self.total_mass * self.g

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.z0)

    @property
    def ticks_double(self) -> int:
        return max(1, round(self.t_double / self.dt))

    @property
    def ticks_single(self) -> int:
        return max(1, round(self.t_single / self.dt))

    @property
    def gait_period(self) -> float:
        return 2.0 * (self.t_double + self.t_single)


@dataclass(frozen=True)
class ArmState:
    """Joint state of both arms, ordered ``(pitch_l, roll_l, pitch_r, roll_r)``."""

    q: np.ndarray = field(default_factory=lambda: np.zeros(4))
    qdot: np.ndarray = field(default_factory=lambda: np.zeros(4))

    @property
    def q_pitch(self) -> np.ndarray:
        return self.q[0::2]

    @property
    def q_roll(self) -> np.ndarray:
        return self.q[1::2]

    @property
    def qdot_pitch(self) -> np.ndarray:
        return self.qdot[0::2]

    @property
    def qdot_roll(self) -> np.ndarray:
        return self.qdot[1::2]

    def mirrored(self) -> "ArmState":
        """Sagittal-plane mirror image: arms swap sides, rolls flip sign."""
        sign = np.array([1.0, -1.0, 1.0, -1.0])
        perm = [2, 3, 0, 1]
        return ArmState(self.q[perm] * sign, self.qdot[perm] * sign)


@dataclass(frozen=True)
class ReducedState:
    """Plant state at one instant.

    ``tick`` counts integration steps, ``phase_tick`` counts ticks spent in
    the current support phase and ``step_index`` is the footstep index the
    swing foot will be placed at next (even indices are left feet).
    """

    t: float
    trunk_com_xy: np.ndarray
    trunk_vel_xy: np.ndarray
    heading: float
    left_foot_pose: np.ndarray
    right_foot_pose: np.ndarray
    arms: ArmState
    phase: SupportPhase
    tick: int = 0
    phase_tick: int = 0
    step_index: int = 1

    @property
    def upcoming_stance(self) -> PhaseKind:
        """Single-support kind that follows (or is) the current phase."""
        if self.phase.kind != PhaseKind.DOUBLE:
            return self.phase.kind
        return PhaseKind.SINGLE_LEFT if self.step_index % 2 else PhaseKind.SINGLE_RIGHT

    def mirrored(self) -> "ReducedState":
        flip = np.array([1.0, -1.0, -1.0])
        swap = {PhaseKind.DOUBLE: PhaseKind.DOUBLE, PhaseKind.SINGLE_LEFT: PhaseKind.SINGLE_RIGHT,
                PhaseKind.SINGLE_RIGHT: PhaseKind.SINGLE_LEFT}
        return replace(
            self,
            trunk_com_xy=self.trunk_com_xy * flip[:2],
            trunk_vel_xy=self.trunk_vel_xy * flip[:2],
            heading=-self.heading,
            left_foot_pose=self.right_foot_pose * flip,
            right_foot_pose=self.left_foot_pose * flip,
            arms=self.arms.mirrored(),
            phase=SupportPhase(swap[self.phase.kind], self.phase.fraction),
            step_index=self.step_index + 1 if self.step_index % 2 == 0 else self.step_index - 1,
        )


class ArmPoints(NamedTuple):
    """World positions of link midpoints and tips; row 0 is the left arm."""

    mid: np.ndarray
    tip: np.ndarray


def _arm_direction(pitch: float, roll: float) -> tuple[float, float, float]:
    # R_x(roll) R_y(pitch) (0, 0, -1), pitch positive reaching forward
    sp, cp = math.sin(pitch), math.cos(pitch)
    sr, cr = math.sin(roll), math.cos(roll)
    return sp, sr * cp, -cr * cp


def _arm_points(state: ReducedState, params: ModelParams):
    c, s = math.cos(state.heading), math.sin(state.heading)
    tx, ty, tz = float(state.trunk_com_xy[0]), float(state.trunk_com_xy[1]), params.z0
    q = state.arms.q
    length = params.upper_arm_length
    out = []
    for side, offset in enumerate((params.shoulder_offset_left, params.shoulder_offset_right)):
        ux, uy, uz = _arm_direction(q[2 * side], q[2 * side + 1])
        ux, uy, uz = length * ux, length * uy, length * uz
        sx = tx + c * offset[0] - s * offset[1]
        sy = ty + s * offset[0] + c * offset[1]
        sz = tz + offset[2]
        wx, wy = c * ux - s * uy, s * ux + c * uy
        out.append(((sx + 0.5 * wx, sy + 0.5 * wy, sz + 0.5 * uz), (sx + wx, sy + wy, sz + uz)))
    return out


def arm_forward_kinematics(state: ReducedState, params: ModelParams) -> ArmPoints:
    """Link-midpoint and tip positions of both arms in the world frame."""
    pts = _arm_points(state, params)
    return ArmPoints(np.array([m for m, _ in pts]), np.array([t for _, t in pts]))


def total_com(state: ReducedState, params: ModelParams) -> np.ndarray:
    """Mass-weighted mean of trunk, arm-link and payload point masses."""
    m = params.total_mass
    if m <= 0:
        raise InvalidParametersError("total mass must be positive")
    ml, mp, mt = params.arm_link_mass, params.payload_mass, params.trunk_mass
    acc = [mt * float(state.trunk_com_xy[0]), mt * float(state.trunk_com_xy[1]), mt * params.z0]
    for mid, tip in _arm_points(state, params):
        for k in range(3):
            acc[k] += ml * mid[k] + mp * tip[k]
    return np.array(acc) / m


def _arm_offset(q: np.ndarray, qdot: np.ndarray, heading: float, params: ModelParams):
    """Horizontal offset of the total CoM from the trunk and its rate."""
    m = params.total_mass
    per_arm = params.arm_link_mass + params.payload_mass
    reach = (0.5 * params.arm_link_mass + params.payload_mass) * params.upper_arm_length / m
    ox = oy = vx = vy = 0.0
    for side, offset in enumerate((params.shoulder_offset_left, params.shoulder_offset_right)):
        p, r = q[2 * side], q[2 * side + 1]
        pd, rd = qdot[2 * side], qdot[2 * side + 1]
        sp, cp, sr, cr = math.sin(p), math.cos(p), math.sin(r), math.cos(r)
        ox += per_arm * offset[0] / m + reach * sp
        oy += per_arm * offset[1] / m + reach * sr * cp
        vx += reach * cp * pd
        vy += reach * (cr * cp * rd - sr * sp * pd)
    c, s = math.cos(heading), math.sin(heading)
    return (c * ox - s * oy, s * ox + c * oy), (c * vx - s * vy, s * vx + c * vy)


def arm_com_offset(state: ReducedState, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal total-CoM minus trunk position, and its time derivative."""
    off, rate = _arm_offset(state.arms.q, state.arms.qdot, state.heading, params)
    return np.array(off), np.array(rate)


def support_phase(t: float, params: ModelParams) -> SupportPhase:
    """Nominal periodic schedule Double, SingleLeft, Double, SingleRight."""
    if t < 0:
        raise ValueError("t must be non-negative")
    elapsed = math.fmod(t, params.gait_period)
    half = params.t_double + params.t_single
    kind_single = PhaseKind.SINGLE_LEFT
    if elapsed >= half:
        elapsed -= half
        kind_single = PhaseKind.SINGLE_RIGHT
    if elapsed < params.t_double:
        return SupportPhase(PhaseKind.DOUBLE, elapsed / params.t_double)
    return SupportPhase(kind_single, min(1.0, (elapsed - params.t_double) / params.t_single))


def weight_transfer(fraction: float) -> float:
    """Smoothstep load transfer ``3f^2 - 2f^3``."""
    f = min(1.0, max(0.0, fraction))
    return f * f * (3.0 - 2.0 * f)


def _clamp_local(local: np.ndarray, params: ModelParams) -> np.ndarray:
    hl, hw = 0.5 * params.foot_length, 0.5 * params.foot_width
    return np.array([min(hl, max(-hl, local[0])), min(hw, max(-hw, local[1]))])


def _loaded(fz: float, cop: np.ndarray, pose) -> GrfSample:
    return GrfSample(fz, fz * cop[1], -fz * cop[0], True, np.asarray(pose, dtype=float))


def _rect_normals(pose, params: ModelParams):
    c, s = math.cos(pose[2]), math.sin(pose[2])
    hl, hw = 0.5 * params.foot_length, 0.5 * params.foot_width
    ex, ey = np.array([c, s]), np.array([-s, c])
    return [(ex, hl), (-ex, hl), (ey, hw), (-ey, hw)], ex, ey


def _support(u: np.ndarray, pose, params: ModelParams) -> float:
    """Support function of the sole rectangle in direction ``u``."""
    c, s = math.cos(pose[2]), math.sin(pose[2])
    ux, uy = float(u[0]), float(u[1])
    return (ux * pose[0] + uy * pose[1] + 0.5 * params.foot_length * abs(ux * c + uy * s)
            + 0.5 * params.foot_width * abs(uy * c - ux * s))


def _split_double(z: np.ndarray, left_pose, right_pose, params: ModelParams, w_left: float):
    """Write ``z = lam*a + (1-lam)*b`` with ``a`` in the left sole, ``b`` in the right.

    ``lam`` is the left-foot load fraction, chosen as close to ``w_left`` as
    the geometry allows. Returns ``(lam, a, b)``; ``z`` must lie in the hull.
    """
    lo, hi = 0.0, 1.0
    normals = _rect_normals(left_pose, params)[0] + _rect_normals(right_pose, params)[0]
    for u, _ in normals:
        h_a, h_b = _support(u, left_pose, params), _support(u, right_pose, params)
        slope, rhs = h_a - h_b, float(u @ z) - h_b
        if slope > 1e-12:
            lo = max(lo, rhs / slope)
        elif slope < -1e-12:
            hi = min(hi, rhs / slope)
    if lo > hi:
        lo = hi = min(1.0, max(0.0, 0.5 * (lo + hi)))
    lam = min(hi, max(lo, w_left))

    if lam >= 1.0:
        return 1.0, to_world(_clamp_local(to_local(z, left_pose), params), left_pose), None
    if lam <= 0.0:
        return 0.0, None, to_world(_clamp_local(to_local(z, right_pose), params), right_pose)

    # a must lie in A and in C = (z - (1-lam) B) / lam
    k = (1.0 - lam) / lam
    center_c = (z - (1.0 - lam) * np.asarray(right_pose[:2])) / lam
    a_poly = geom.rect_corners(left_pose, params.foot_length, params.foot_width)
    normals_b = _rect_normals(right_pose, params)[0]
    tol = 0.0
    for _ in range(8):
        poly = a_poly
        for n, h in normals_b:
            poly = geom.clip(poly, n, float(n @ center_c) + k * h + tol)
            if len(poly) == 0:
                break
        if len(poly):
            break
        tol = 1e-12 if tol == 0.0 else tol * 10.0
    a = geom.closest_point(poly, z) if len(poly) else geom.closest_point(a_poly, z)
    a = to_world(_clamp_local(to_local(a, left_pose), params), left_pose)
    b = (z - lam * a) / (1.0 - lam)
    b = to_world(_clamp_local(to_local(b, right_pose), params), right_pose)
    return lam, a, b


def support_polygon(state: ReducedState, params: ModelParams) -> np.ndarray:
    """Counter-clockwise support polygon of the current phase."""
    kind = state.phase.kind
    if kind == PhaseKind.SINGLE_LEFT:
        return geom.rect_corners(state.left_foot_pose, params.foot_length, params.foot_width)
    if kind == PhaseKind.SINGLE_RIGHT:
        return geom.rect_corners(state.right_foot_pose, params.foot_length, params.foot_width)
    corners = np.vstack([
        geom.rect_corners(state.left_foot_pose, params.foot_length, params.foot_width),
        geom.rect_corners(state.right_foot_pose, params.foot_length, params.foot_width),
    ])
    return geom.convex_hull(corners)


def synth_grf(state: ReducedState, commanded_zmp_xy, params: ModelParams) -> tuple[GrfSample, GrfSample]:
    """Per-foot vertical force and moments realizing a commanded ZMP.

    The full weight ``total_mass * g`` is always carried. In single support
    the stance foot takes it all, with its CoP at the nearest sole point to
    the command. In double support the command is first projected onto the
    support hull and then split between the feet with the left-foot load
    fraction as close to the smoothstep transfer weight as the geometry
    permits, so the force-weighted CoP reproduces the (projected) command.
    """
    w = params.weight
    z = np.asarray(commanded_zmp_xy, dtype=float)
    left_pose, right_pose = state.left_foot_pose, state.right_foot_pose
    kind = state.phase.kind
    if kind == PhaseKind.SINGLE_LEFT:
        cop = _clamp_local(to_local(z, left_pose), params)
        return _loaded(w, cop, left_pose), GrfSample.unloaded(right_pose)
    if kind == PhaseKind.SINGLE_RIGHT:
        cop = _clamp_local(to_local(z, right_pose), params)
        return GrfSample.unloaded(left_pose), _loaded(w, cop, right_pose)

    z = geom.closest_point(support_polygon(state, params), z)
    transfer = weight_transfer(state.phase.fraction)
    w_left = transfer if state.upcoming_stance == PhaseKind.SINGLE_LEFT else 1.0 - transfer
    lam, a, b = _split_double(z, left_pose, right_pose, params, w_left)
    fz_left = lam * w
    fz_right = w - fz_left
    left = _loaded(fz_left, to_local(a, left_pose), left_pose) if a is not None else _loaded(
        0.0, np.zeros(2), left_pose)
    right = _loaded(fz_right, to_local(b, right_pose), right_pose) if b is not None else _loaded(
        0.0, np.zeros(2), right_pose)
    return left, right


def arm_inertia(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """Effective per-joint inertia of the arm point masses about each axis."""
    base = (0.25 * params.arm_link_mass + params.payload_mass) * params.upper_arm_length ** 2
    cp = np.cos(q[0::2])
    inertia = np.empty(4)
    inertia[0::2] = base
    inertia[1::2] = base * cp * cp
    return inertia + params.arm_rotor_inertia


def step_dynamics(
    state: ReducedState,
    leg_command,
    arm_torques,
    params: ModelParams,
    zmp_command=None,
    grf: tuple[GrfSample, GrfSample] | None = None,
) -> ReducedState:
    """Advance the plant by one tick of ``params.dt``.

    Arms use semi-implicit Euler. The total horizontal CoM follows the LIPM
    about the support point (the center of support of the synthesized GRF),
    propagated with its exact solution for a support point held over the
    tick. The trunk is recovered by subtracting the arm-induced CoM offset,
    so arm motion pushes the trunk the opposite way. Footstep targets from
    ``leg_command`` are applied when the swing foot touches down.

    ``zmp_command`` defaults to the stance-foot center blend of the current
    phase. ``grf`` may carry a precomputed ``synth_grf`` result for the same
    state and command.
    """
    dt = params.dt
    tau = np.asarray(arm_torques, dtype=float)
    if tau.shape != (4,):
        raise ValueError("arm_torques must have 4 entries")
    if params.torque_limit is not None:
        tau = np.clip(tau, -params.torque_limit, params.torque_limit)

    if grf is None:
        if zmp_command is None:
            zmp_command = nominal_zmp(state, params)
        grf = synth_grf(state, zmp_command, params)
    p = estimate_cos(grf[0], grf[1], state.phase)

    q, qdot = state.arms.q, state.arms.qdot
    qddot = (tau - params.arm_joint_damping * qdot) / arm_inertia(q, params)
    qdot_new = qdot + dt * qddot
    q_new = q + dt * qdot_new

    (ox, oy), (ovx, ovy) = _arm_offset(q, qdot, state.heading, params)
    cx, cy = state.trunk_com_xy[0] + ox, state.trunk_com_xy[1] + oy
    vx, vy = state.trunk_vel_xy[0] + ovx, state.trunk_vel_xy[1] + ovy
    w = params.omega
    ch, sh = math.cosh(w * dt), math.sinh(w * dt)
    ex, ey = cx - p[0], cy - p[1]
    cx, vx = p[0] + ex * ch + vx * sh / w, ex * w * sh + vx * ch
    cy, vy = p[1] + ey * ch + vy * sh / w, ey * w * sh + vy * ch

    (ox, oy), (ovx, ovy) = _arm_offset(q_new, qdot_new, state.heading, params)
    trunk = np.array([cx - ox, cy - oy])
    trunk_vel = np.array([vx - ovx, vy - ovy])

    new = _advance_phase(state, leg_command, params)
    new = replace(new, trunk_com_xy=trunk, trunk_vel_xy=trunk_vel, arms=ArmState(q_new, qdot_new))
    if not (np.all(np.isfinite(trunk)) and np.all(np.isfinite(trunk_vel)) and np.all(np.isfinite(q_new))
            and np.all(np.isfinite(qdot_new))):
        raise SimulationDivergedError(f"non-finite state at t={new.t:.6f} s")
    return new


def phase_duration_ticks(kind: PhaseKind, timing_offset: float, params: ModelParams) -> int:
    if kind == PhaseKind.DOUBLE:
        return params.ticks_double
    return max(1, round((params.t_single + timing_offset) / params.dt))


def _advance_phase(state: ReducedState, leg_command, params: ModelParams) -> ReducedState:
    kind = state.phase.kind
    offset = 0.0 if leg_command is None else leg_command.timing_offset
    phase_tick = state.phase_tick + 1
    duration = phase_duration_ticks(kind, offset, params)
    left, right, step_index = state.left_foot_pose, state.right_foot_pose, state.step_index
    if phase_tick >= duration:
        phase_tick = 0
        if kind == PhaseKind.DOUBLE:
            kind = state.upcoming_stance
        else:
            if leg_command is not None:
                swing_left = kind == PhaseKind.SINGLE_RIGHT
                if leg_command.next_foot.is_left != swing_left:
                    raise ValueError("footstep command targets the stance foot")
                target = np.array(leg_command.target_pose, dtype=float)
                if swing_left:
                    left = target
                else:
                    right = target
            step_index += 1
            kind = PhaseKind.DOUBLE
        duration = phase_duration_ticks(kind, offset, params)
    tick = state.tick + 1
    return replace(
        state,
        t=tick * params.dt,
        tick=tick,
        phase=SupportPhase(kind, phase_tick / duration),
        phase_tick=phase_tick,
        left_foot_pose=left,
        right_foot_pose=right,
        step_index=step_index,
    )


def nominal_zmp(state: ReducedState, params: ModelParams) -> np.ndarray:
    """Stance-foot center, blended by the transfer weight in double support."""
    kind = state.phase.kind
    if kind == PhaseKind.SINGLE_LEFT:
        return np.array(state.left_foot_pose[:2], dtype=float)
    if kind == PhaseKind.SINGLE_RIGHT:
        return np.array(state.right_foot_pose[:2], dtype=float)
    w = weight_transfer(state.phase.fraction)
    if state.upcoming_stance == PhaseKind.SINGLE_RIGHT:
        w = 1.0 - w
    return w * np.asarray(state.left_foot_pose[:2]) + (1.0 - w) * np.asarray(state.right_foot_pose[:2])
