"""PPO training loop for the footstep-residual policy."""
from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from husl.learning.curriculum import CurriculumPhase, curriculum_at, sample_payload, stage_pose
from husl.learning.env import ACT_DIM, OBS_DIM, EnvConfig, WalkEnv
from husl.learning.policy import Adam, PolicyParams, gaussian_log_prob, init_policy, policy_forward, save_checkpoint
from husl.learning.ppo import LearningConfig, RolloutBatch, RunningStd, update_policy

log = logging.getLogger(__name__)

LOG_HEADER = ("step", "mean_return", "mean_episode_length")


@dataclass(frozen=True)
class TrainConfig:
    learning: LearningConfig = field(default_factory=LearningConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    curriculum: CurriculumPhase = field(default_factory=CurriculumPhase)
    stats_window: int = 20


@dataclass
class TrainResult:
    params: PolicyParams
    rows: list  # (step, mean_return, mean_episode_length)


def _reset(env: WalkEnv, cfg: TrainConfig, progress: float, rng: np.random.Generator) -> np.ndarray:
    point = curriculum_at(min(1.0, progress), cfg.curriculum)
    payload = sample_payload(point, rng)
    pose = stage_pose(point.stage, cfg.env.final_pose, cfg.curriculum.num_stages)
    # the locomotion layer only knows the middle of the current payload range
    assumed = 0.5 * (point.payload_range[0] + point.payload_range[1])
    return env.reset(payload, pose, assumed)


def train(cfg: TrainConfig = TrainConfig(), log_path=None, checkpoint_path=None) -> TrainResult:
    """Run PPO for ``cfg.learning.total_steps`` environment steps.

    One log row is emitted after each rollout with the mean return and
    length of the most recent ``stats_window`` finished episodes.
    """
    lc = cfg.learning
    root = np.random.default_rng(lc.seed)
    init_rng, env_rng, act_rng, shuffle_rng, task_rng = root.spawn(5)
    params = init_policy(OBS_DIM, ACT_DIM, lc.hidden, init_rng, lc.init_log_std)
    optimizer = Adam(lc.learning_rate)
    env = WalkEnv(cfg.env, env_rng)
    scaler = RunningStd(lc.gamma) if lc.normalize_rewards else None

    returns, lengths = deque(maxlen=cfg.stats_window), deque(maxlen=cfg.stats_window)
    rows = []
    writer = fh = None
    if log_path is not None:
        fh = open(log_path, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)

    try:
        step = 0
        obs = _reset(env, cfg, 0.0, task_rng)
        ep_ret, ep_len = 0.0, 0
        while step < lc.total_steps:
            n = min(lc.rollout_steps, lc.total_steps - step)
            buf_obs, buf_act = np.zeros((n, OBS_DIM)), np.zeros((n, ACT_DIM))
            buf_logp, buf_rew, buf_val, buf_done = np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n)
            done = False
            for i in range(n):
                mean, log_std, value = policy_forward(params, obs)
                action = mean + np.exp(log_std) * act_rng.standard_normal(ACT_DIM)
                next_obs, reward, done, info = env.step(action)
                ep_ret += reward
                ep_len += 1
                if scaler is not None:
                    reward = scaler.scale(reward, done)
                if info["truncated"]:
                    # time limit, not a failure: bootstrap through the cut
                    reward += lc.gamma * policy_forward(params, next_obs)[2]
                buf_obs[i], buf_act[i] = obs, action
                buf_logp[i] = gaussian_log_prob(action, mean, log_std)
                buf_rew[i], buf_val[i], buf_done[i] = reward, value, float(done)
                step += 1
                if done:
                    returns.append(ep_ret)
                    lengths.append(ep_len)
                    ep_ret, ep_len = 0.0, 0
                    next_obs = _reset(env, cfg, step / lc.total_steps, task_rng)
                obs = next_obs
            last_value = 0.0 if done else float(policy_forward(params, obs)[2])
            batch = RolloutBatch(buf_obs, buf_act, buf_logp, buf_rew, buf_val, buf_done, last_value)
            if len(batch) >= lc.minibatch_size:
                params = update_policy(params, batch, lc, optimizer, shuffle_rng)
            row = (step, float(np.mean(returns)) if returns else float("nan"),
                   float(np.mean(lengths)) if lengths else float("nan"))
            rows.append(row)
            if writer is not None:
                writer.writerow([row[0], repr(row[1]), repr(row[2])])
                fh.flush()
            log.info("step %d  return %.2f  length %.1f", *row)
    finally:
        if fh is not None:
            fh.close()
    if checkpoint_path is not None:
        save_checkpoint(params, checkpoint_path, {"total_steps": lc.total_steps, "seed": lc.seed})
    return TrainResult(params, rows)


def read_training_log(path) -> list[tuple[int, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LOG_HEADER:
            raise ValueError(f"unexpected training-log header {header}")
        return [(int(a), float(b), float(c)) for a, b, c in reader]


def improvement(rows, fraction: float = 0.2) -> tuple[float, float]:
    """Relative gain of mean return and mean length from the first to the last ``fraction`` of steps."""
    data = np.array([r for r in rows if np.isfinite(r[1])], dtype=float)
    total = data[-1, 0]
    first = data[data[:, 0] <= fraction * total]
    last = data[data[:, 0] > (1.0 - fraction) * total]
    if len(first) == 0 or len(last) == 0:
        raise ValueError("not enough log rows to compare the first and last fractions")
    gains = []
    for col in (1, 2):
        a, b = first[:, col].mean(), last[:, col].mean()
        gains.append((b - a) / abs(a))
    return gains[0], gains[1]
