"""Walking environment for the footstep-residual policy.

The policy acts every ``control_interval``: it outputs a normalized
``(dx, dy, dt)`` residual, scaled by the residual bounds and added to the
nominal footstep of the locomotion layer. The nominal layer in training
only modulates the double-support ZMP, so without a useful residual the
walker falls within a couple of seconds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from husl import _geometry as geom
from husl.balance import BalanceGains, Scenario
from husl.gait import LocomotionGains, ReferenceMotion, ResidualBounds, reference_state
from husl.learning.reward import ImitationFeatures, RewardWeights, mimic_reward, step_reward
from husl.model import ModelParams, SimulationDivergedError, support_polygon, total_com
from husl.walker import Disturbance, Walker, scenario_params

OBS_DIM = 19
ACT_DIM = 3


@dataclass(frozen=True)
class EnvConfig:
    model: ModelParams = field(default_factory=lambda: ModelParams(dt=0.005))
    locomotion: LocomotionGains = field(default_factory=lambda: LocomotionGains(step_dcm=0.3, zmp_dcm=2.0))
    bounds: ResidualBounds = field(default_factory=ResidualBounds)
    disturbance: Disturbance = field(default_factory=Disturbance)
    rewards: RewardWeights = field(default_factory=RewardWeights)
    final_pose: tuple = (1.2, 0.0, 1.2, 0.0)
    control_interval: float = 0.02
    episode_time: float = 10.0
    fall_radius: float = 0.3

    @property
    def ticks_per_action(self) -> int:
        return max(1, round(self.control_interval / self.model.dt))

    @property
    def max_steps(self) -> int:
        return max(1, round(self.episode_time / (self.ticks_per_action * self.model.dt)))


def observe(walker: Walker) -> np.ndarray:
    """Policy observation: what a legged controller could sense, payload mass excluded."""
    s, ctl = walker.state, walker.controller
    ref = ctl.ref
    com, vel = ctl.estimated_com(s)
    sample = reference_state(s.t / ref.stride_period, ref)
    kind = np.zeros(3)
    kind[int(s.phase.kind)] = 1.0
    return np.concatenate([
        5.0 * ctl.dcm_error(s),
        5.0 * (com - sample.com_xy),
        vel - sample.com_vel_xy,
        10.0 * (s.left_foot_pose[:2] - sample.left_foot[:2]),
        10.0 * (s.right_foot_pose[:2] - sample.right_foot[:2]),
        kind,
        [s.phase.fraction, 1.0 if s.step_index % 2 == 0 else -1.0],
        s.arms.q,
    ])


def imitation_features(walker: Walker) -> tuple[ImitationFeatures, ImitationFeatures]:
    """Reduced-state features of the walker and of the reference at the same time."""
    s, ref = walker.state, walker.controller.ref
    sample = reference_state(s.t / ref.stride_period, ref)
    trunk = s.trunk_com_xy
    pose = walker.hold_pose
    own = ImitationFeatures(
        np.append(s.arms.q, trunk[1]),
        np.append(s.arms.qdot, s.trunk_vel_xy[1]),
        np.concatenate([s.left_foot_pose[:2] - trunk, s.right_foot_pose[:2] - trunk, trunk]),
        np.array([s.heading]),
        s.trunk_vel_xy.copy(),
    )
    target = ImitationFeatures(
        np.append(pose, sample.com_xy[1]),
        np.append(np.zeros(4), sample.com_vel_xy[1]),
        np.concatenate([sample.left_foot[:2] - sample.com_xy, sample.right_foot[:2] - sample.com_xy,
                        sample.com_xy]),
        np.array([sample.heading]),
        sample.com_vel_xy.copy(),
    )
    return own, target


def fall_distance(walker: Walker) -> float:
    """Horizontal distance of the total CoM from the support polygon (0 inside)."""
    c = total_com(walker.state, walker.params)[:2]
    poly = support_polygon(walker.state, walker.params)
    return float(np.hypot(*(geom.closest_point(poly, c) - c)))


class WalkEnv:
    """Static-payload walker with a curriculum-set payload and arm pose."""

    def __init__(self, config: EnvConfig = EnvConfig(), rng: np.random.Generator | None = None):
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.walker: Walker | None = None
        self.steps = 0

    def reset(self, payload: float = 0.0, pose=None, assumed_payload: float | None = None) -> np.ndarray:
        """Start an episode carrying ``payload`` per arm, arms held at ``pose``.

        ``assumed_payload`` is the mass the locomotion layer believes in
        (defaults to the true one).
        """
        cfg = self.config
        params = scenario_params(cfg.model, Scenario.STATIC_PAYLOAD, payload)
        ref = ReferenceMotion.from_model(params, arm_pose=np.zeros(4) if pose is None else pose)
        pose = np.zeros(4) if pose is None else np.asarray(pose, dtype=float)
        self.walker = Walker(params, ref, Scenario.STATIC_PAYLOAD, BalanceGains(static_pose=pose),
                             cfg.locomotion, payload if assumed_payload is None else assumed_payload,
                             cfg.bounds, cfg.disturbance, self.rng, arm_pose=pose)
        self.steps = 0
        return observe(self.walker)

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        cfg, walker = self.config, self.walker
        if walker is None:
            raise RuntimeError("call reset() before step()")
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        walker.residual = a * cfg.bounds.as_array()
        fell = False
        try:
            for _ in range(cfg.ticks_per_action):
                walker.tick()
                if fall_distance(walker) > cfg.fall_radius:
                    fell = True
                    break
        except SimulationDivergedError:
            fell = True
        self.steps += 1
        if fell:
            reward = step_reward(False, True, 0.0, cfg.rewards)
            return np.zeros(OBS_DIM), reward, True, {"fell": True, "truncated": False}
        own, target = imitation_features(walker)
        reward = step_reward(True, False, mimic_reward(own, target, cfg.rewards), cfg.rewards)
        truncated = self.steps >= cfg.max_steps
        return observe(walker), reward, truncated, {"fell": False, "truncated": truncated}


__all__ = ["EnvConfig", "WalkEnv", "observe", "imitation_features", "fall_distance", "OBS_DIM", "ACT_DIM"]
