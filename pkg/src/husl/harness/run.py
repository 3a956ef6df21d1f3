"""Scenario execution: wire the walker for one of the three experiments and log every tick."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from husl.balance import Scenario
from husl.harness.config import ScenarioConfig
from husl.harness.runlog import RunLog, write_log
from husl.learning.env import fall_distance, observe
from husl.learning.policy import PolicyParams, load_checkpoint, policy_forward
from husl.metrics import Trajectory
from husl.model import SimulationDivergedError
from husl.walker import Walker, scenario_params


@dataclass
class RunResult:
    status: str
    rows: list
    log: RunLog


def tick_count(duration: float, dt: float) -> int:
    # the small guard keeps e.g. 10 / 0.001 from flooring to 9999
    return int(math.floor(duration / dt + 1e-9))


def build_walker(config: ScenarioConfig, policy: PolicyParams | None = None) -> Walker:
    kind = config.kind
    params = scenario_params(config.model, kind, config.scenario.payload_mass)
    ref = config.gait.reference(params)
    step_dcm = config.learning.nominal_step_dcm if policy is not None else None
    return Walker(
        params, ref, kind, config.balance, config.gait.locomotion(step_dcm),
        assumed_payload=None if kind is Scenario.BASELINE else config.scenario.assumed_payload,
        bounds=config.gait.bounds(),
        disturbance=config.disturbance(),
        rng=np.random.default_rng(config.seed),
    )


def run_scenario(config: ScenarioConfig, out_path=None, policy: PolicyParams | None = None) -> RunResult:
    """Simulate ``config.duration`` seconds and log one row per tick.

    A fall (total CoM farther than ``scenario.fall_radius`` outside the
    support polygon) or a non-finite state ends the run early with status
    ``fell`` or ``diverged``; the rows up to that point are kept.
    """
    if policy is None and config.scenario.checkpoint:
        policy = load_checkpoint(config.scenario.checkpoint)
    walker = build_walker(config, policy)
    dt = walker.params.dt
    n = tick_count(config.duration, dt)
    every = max(1, round(config.learning.control_interval / dt))
    bounds = config.gait.bounds().as_array()
    rows, status = [], "ok"
    for i in range(n):
        if policy is not None and i % every == 0:
            mean, _, _ = policy_forward(policy, observe(walker))
            walker.residual = np.clip(mean, -1.0, 1.0) * bounds
        try:
            s = walker.tick()
        except SimulationDivergedError:
            status = "diverged"
            break
        rows.append((s.t, *s.com, *s.cos, s.left.fz, s.left.tx, s.left.ty, s.right.fz, s.right.tx, s.right.ty,
                     s.phase, *s.q))
        if fall_distance(walker) > config.scenario.fall_radius:
            status = "fell"
            break
    if out_path is not None:
        write_log(out_path, config.hash(), config.seed, dt, status, rows)
    traj = None
    if len(rows) >= 2:
        data = np.array(rows, dtype=float)
        traj = Trajectory(dt, data[:, 0], data[:, 1:4], data[:, 4:6], data[:, 6:9], data[:, 9:12], data[:, 12],
                          data[:, 13:17])
    return RunResult(status, rows, RunLog(config.hash(), config.seed, dt, status, traj))
