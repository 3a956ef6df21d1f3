"""Rollout storage, GAE and the PPO update loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from husl.learning.policy import Adam, PolicyParams, TrainingDivergedError, ppo_loss_and_grad


@dataclass(frozen=True)
class LearningConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    learning_rate: float = 1e-3
    epochs: int = 10
    num_minibatches: int = 2
    rollout_steps: int = 2048
    total_steps: int = 200_000
    hidden: tuple = (64, 64)
    entropy_coef: float = 0.005
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    init_log_std: float = -1.0
    normalize_rewards: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must lie in [0, 1]")
        if self.clip_epsilon <= 0:
            raise ValueError("clip_epsilon must be positive")
        if self.learning_rate <= 0 or self.epochs < 1 or self.num_minibatches < 1:
            raise ValueError("learning_rate, epochs and num_minibatches must be positive")
        if self.rollout_steps < self.num_minibatches or self.total_steps < 1:
            raise ValueError("rollout_steps must be at least num_minibatches and total_steps positive")
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden layer sizes must be positive")

    @property
    def minibatch_size(self) -> int:
        return self.rollout_steps // self.num_minibatches


class RunningStd:
    """Running variance of a scalar stream (Welford), used to scale rewards.

    Rewards are divided by the standard deviation of the discounted return so
    the critic targets stay of order one whatever the reward magnitude.
    """

    def __init__(self, gamma: float, eps: float = 1e-8):
        self.gamma, self.eps = gamma, eps
        self.count, self.mean, self.m2 = 0, 0.0, 0.0
        self.ret = 0.0

    @property
    def std(self) -> float:
        var = self.m2 / self.count if self.count > 1 else 1.0
        return float(np.sqrt(var + self.eps))

    def scale(self, reward: float, done: bool) -> float:
        """Update with one reward and return it divided by the current return std."""
        self.ret = self.gamma * self.ret + reward
        self.count += 1
        delta = self.ret - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (self.ret - self.mean)
        if done:
            self.ret = 0.0
        return reward / self.std


@dataclass
class RolloutBatch:
    """One rollout, time-major. ``last_value`` bootstraps the step after the end."""

    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    last_value: float = 0.0

    def __post_init__(self):
        n = len(self.rewards)
        for name in ("obs", "actions", "log_probs", "values", "dones"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, rewards has {n}")

    def __len__(self) -> int:
        return len(self.rewards)


def gae_advantages(batch: RolloutBatch, gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates and value targets ``A + V``."""
    rewards = np.asarray(batch.rewards, dtype=np.float64)
    values = np.asarray(batch.values, dtype=np.float64)
    notdone = 1.0 - np.asarray(batch.dones, dtype=np.float64)
    n = len(rewards)
    adv = np.zeros(n)
    next_value, running = float(batch.last_value), 0.0
    for t in range(n - 1, -1, -1):
        delta = rewards[t] + gamma * next_value * notdone[t] - values[t]
        running = delta + gamma * lam * notdone[t] * running
        adv[t] = running
        next_value = values[t]
    return adv, adv + values


def update_policy(params: PolicyParams, batch: RolloutBatch, cfg: LearningConfig,
                  optimizer: Adam | None = None, rng: np.random.Generator | None = None) -> PolicyParams:
    """PPO epochs over shuffled minibatches; returns new parameters.

    Advantages are standardized over the whole batch. ``optimizer`` carries
    Adam moments across calls; ``rng`` drives the minibatch shuffle.
    """
    if len(batch) < cfg.minibatch_size:
        raise ValueError(f"batch of {len(batch)} is smaller than the minibatch size {cfg.minibatch_size}")
    optimizer = optimizer if optimizer is not None else Adam(cfg.learning_rate)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    adv, returns = gae_advantages(batch, cfg.gamma, cfg.gae_lambda)
    std = adv.std()
    adv = (adv - adv.mean()) / (std + 1e-8) if std > 0 else adv - adv.mean()

    theta = params.flat()
    obs, actions, old_logp = np.asarray(batch.obs), np.asarray(batch.actions), np.asarray(batch.log_probs)
    n, mb = len(batch), cfg.minibatch_size
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n - mb + 1, mb):
            idx = order[start:start + mb]
            current = params.with_flat(theta)
            terms, grad = ppo_loss_and_grad(current, obs[idx], actions[idx], old_logp[idx], adv[idx], returns[idx],
                                            cfg.clip_epsilon, cfg.value_coef, cfg.entropy_coef)
            if not (np.isfinite(terms.total) and np.all(np.isfinite(grad))):
                raise TrainingDivergedError(f"non-finite PPO loss {terms.total!r}")
            if cfg.max_grad_norm:
                # actor and critic are clipped separately so large early value
                # errors cannot starve the policy update
                split = params.actor_size
                for part in (grad[:split], grad[split:]):
                    norm = float(np.linalg.norm(part))
                    if norm > cfg.max_grad_norm:
                        part *= cfg.max_grad_norm / norm
            theta = optimizer.step(theta, grad)
    if not np.all(np.isfinite(theta)):
        raise TrainingDivergedError("parameters became non-finite")
    return params.with_flat(theta)
