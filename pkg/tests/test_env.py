from dataclasses import replace

import numpy as np

from husl.learning.env import ACT_DIM, OBS_DIM, EnvConfig, WalkEnv, fall_distance, observe
from husl.walker import Disturbance


def test_reset_and_step_shapes():
    env = WalkEnv(EnvConfig(), np.random.default_rng(0))
    obs = env.reset(10.0, [0.6, 0.0, 0.6, 0.0], 10.0)
    assert obs.shape == (OBS_DIM,) and np.all(np.isfinite(obs))
    obs, reward, done, info = env.step(np.zeros(ACT_DIM))
    assert obs.shape == (OBS_DIM,)
    assert 5.0 < reward <= 5.22 + 1e-12
    assert not done and not info["fell"]


def test_observation_hides_true_payload():
    env = WalkEnv(EnvConfig())
    obs = env.reset(19.0, [1.2, 0.0, 1.2, 0.0], 24.5)
    walker = env.walker
    walker.params = replace(walker.params, payload_mass=30.0)
    assert np.array_equal(observe(walker), obs)


def test_episode_truncates_at_time_limit():
    cfg = EnvConfig(episode_time=0.2, disturbance=Disturbance(0.0, 0.0))
    env = WalkEnv(cfg)
    env.reset()
    infos = [env.step(np.zeros(ACT_DIM))[3] for _ in range(cfg.max_steps)]
    assert cfg.max_steps == 10
    assert infos[-1]["truncated"] and not any(i["truncated"] for i in infos[:-1])


def test_fall_is_terminal_with_penalty():
    cfg = EnvConfig(disturbance=Disturbance(push=3.0, placement=0.0), fall_radius=0.05)
    env = WalkEnv(cfg, np.random.default_rng(0))
    env.reset()
    for _ in range(200):
        obs, reward, done, info = env.step(np.zeros(ACT_DIM))
        if done:
            break
    assert info["fell"] and reward == -4.0
    assert fall_distance(env.walker) > cfg.fall_radius


def test_env_deterministic_per_seed():
    def rollout(seed):
        env = WalkEnv(EnvConfig(), np.random.default_rng(seed))
        env.reset(20.0, [1.2, 0.0, 1.2, 0.0], 24.5)
        return [env.step(np.full(ACT_DIM, 0.3))[0] for _ in range(20)]

    a, b, c = rollout(3), rollout(3), rollout(4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
