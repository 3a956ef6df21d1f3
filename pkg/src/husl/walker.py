"""One-tick wiring of plant, locomotion layer and arm control.

:class:`Walker` is shared by the scenario runner and the training
environment so both see exactly the same closed loop.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from husl.balance import BalanceGains, Scenario, arm_target, fuse_controls, pd_torque, stability_indicator
from husl.contact import GrfSample, estimate_cos
from husl.gait import (
    FootstepCommand,
    LocomotionController,
    LocomotionGains,
    ReferenceMotion,
    ResidualBounds,
    apply_residual,
    initial_state,
)
from husl.model import ModelParams, ReducedState, step_dynamics, synth_grf, total_com


class TickSample(NamedTuple):
    """Everything logged about the state at the start of one tick."""

    t: float
    com: np.ndarray
    cos: np.ndarray
    left: GrfSample
    right: GrfSample
    phase: int
    q: np.ndarray


def scenario_params(params: ModelParams, scenario: Scenario, payload_mass: float) -> ModelParams:
    """Baseline removes the arm bodies; the other scenarios carry ``payload_mass`` per arm."""
    if scenario is Scenario.BASELINE:
        return replace(params, arm_link_mass=0.0, payload_mass=0.0)
    return replace(params, payload_mass=payload_mass)


@dataclass
class Disturbance:
    """Seeded perturbations: an initial CoM velocity kick and foot-placement scatter (std, SI units)."""

    push: float = 0.05
    placement: float = 0.003


class Walker:
    """Closed-loop walker for one scenario.

    ``arm_pose`` is the held pose in static mode and the neutral start pose
    otherwise (``gains.static_pose`` / ``gains.q_base`` when omitted).
    ``residual`` is a footstep residual ``(dx, dy, dt)`` added to every
    locomotion command until it is changed.
    """

    def __init__(
        self,
        params: ModelParams,
        ref: ReferenceMotion,
        scenario: Scenario,
        balance: BalanceGains | None = None,
        locomotion: LocomotionGains | None = None,
        assumed_payload: float | None = None,
        bounds: ResidualBounds | None = None,
        disturbance: Disturbance | None = None,
        rng: np.random.Generator | None = None,
        arm_pose=None,
    ):
        self.params = params
        self.scenario = scenario
        self.balance = balance if balance is not None else BalanceGains()
        self.bounds = bounds if bounds is not None else ResidualBounds()
        self.disturbance = disturbance if disturbance is not None else Disturbance(0.0, 0.0)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        if scenario is Scenario.BASELINE:
            assumed_payload = None
        self.controller = LocomotionController(params, ref, locomotion or LocomotionGains(), assumed_payload)
        if arm_pose is None:
            arm_pose = self.balance.static_pose if scenario is Scenario.STATIC_PAYLOAD else self.balance.q_base
        self.hold_pose = np.zeros(4) if scenario is Scenario.BASELINE else np.array(arm_pose, dtype=float)
        state = initial_state(params, ref, self.hold_pose)
        kick = self.rng.normal(0.0, self.disturbance.push, 2) if self.disturbance.push > 0 else np.zeros(2)
        self.state: ReducedState = replace(state, trunk_vel_xy=state.trunk_vel_xy + kick)
        self._hold_gains = replace(self.balance, static_pose=self.hold_pose)
        self.residual = np.zeros(3)
        self._scatter = np.zeros(2)
        self._scatter_step = -1

    def _placement_scatter(self) -> np.ndarray:
        # one draw per footstep, so the error is fixed for the whole swing
        if self._scatter_step != self.state.step_index:
            self._scatter_step = self.state.step_index
            sd = self.disturbance.placement
            self._scatter = self.rng.normal(0.0, sd, 2) if sd > 0 else np.zeros(2)
        return self._scatter

    def command(self) -> FootstepCommand:
        cmd = apply_residual(self.controller.nominal_command(self.state), self.residual, self.bounds)
        target = cmd.target_pose.copy()
        target[:2] += self._placement_scatter()
        return FootstepCommand(cmd.next_foot, target, cmd.timing_offset)

    def tick(self) -> TickSample:
        """Advance one ``params.dt``; returns the sample for the state *before* the step."""
        s, p = self.state, self.params
        cmd = self.command()
        grf = synth_grf(s, self.controller.zmp_command(s), p)
        cos = estimate_cos(grf[0], grf[1], s.phase)
        com = total_com(s, p)
        if self.scenario is Scenario.DYNAMIC_BALANCING:
            q_target = arm_target(self.balance, stability_indicator(com[:2], cos))
            tau = pd_torque(q_target, s.arms.q, s.arms.qdot, self.balance.kp, self.balance.kd)
        else:
            tau = np.zeros(4)
        control = fuse_controls(cmd, tau, self.scenario, s.arms, self._hold_gains)
        sample = TickSample(s.t, com, cos, grf[0], grf[1], int(s.phase.kind), s.arms.q.copy())
        self.state = step_dynamics(s, control.leg, control.arm_torques, p, grf=grf)
        return sample
