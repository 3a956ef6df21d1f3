"""Gaussian MLP actor-critic in plain numpy, with hand-written backprop.

Actor and critic are separate tanh MLPs. The action distribution is a
diagonal Gaussian whose log-std is a free parameter vector (independent of
the observation). Everything is float64 so finite-difference checks are
meaningful.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
CHECKPOINT_FORMAT = "husl-policy v1"


class TrainingDivergedError(RuntimeError):
    """Loss or parameters became non-finite."""


class CheckpointError(ValueError):
    """A checkpoint file is malformed or does not match the expected shapes."""


@dataclass
class PolicyParams:
    """Weights of the actor MLP, critic MLP and the action log-std.

    ``actor`` and ``critic`` are lists of ``(W, b)`` with ``W`` shaped
    ``(fan_in, fan_out)``.
    """

    actor: list
    critic: list
    log_std: np.ndarray

    @property
    def obs_dim(self) -> int:
        return self.actor[0][0].shape[0]

    @property
    def act_dim(self) -> int:
        return self.actor[-1][0].shape[1]

    @property
    def hidden(self) -> tuple:
        return tuple(w.shape[1] for w, _ in self.actor[:-1])

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        """Named tensors in canonical order (also the flattening order)."""
        out = []
        for i, (w, b) in enumerate(self.actor):
            out += [(f"actor.{i}.W", w), (f"actor.{i}.b", b)]
        out.append(("log_std", self.log_std))
        for i, (w, b) in enumerate(self.critic):
            out += [(f"critic.{i}.W", w), (f"critic.{i}.b", b)]
        return out

    @property
    def actor_size(self) -> int:
        """Number of leading flat entries that belong to the actor (incl. log-std)."""
        return sum(w.size + b.size for w, b in self.actor) + self.log_std.size

    def flat(self) -> np.ndarray:
        return np.concatenate([t.ravel() for _, t in self.tensors()])

    def with_flat(self, vec: np.ndarray) -> "PolicyParams":
        """Copy of these params with values taken from a flat vector."""
        vec = np.asarray(vec, dtype=np.float64)
        pos = 0

        def take(like):
            nonlocal pos
            n = like.size
            out = vec[pos:pos + n].reshape(like.shape).copy()
            pos += n
            return out

        actor = [(take(w), take(b)) for w, b in self.actor]
        log_std = take(self.log_std)
        critic = [(take(w), take(b)) for w, b in self.critic]
        if pos != vec.size:
            raise ValueError(f"flat vector has {vec.size} entries, expected {pos}")
        return PolicyParams(actor, critic, log_std)

    def copy(self) -> "PolicyParams":
        return self.with_flat(self.flat())


def init_policy(obs_dim: int, act_dim: int, hidden=(64, 64), rng: np.random.Generator | None = None,
                init_log_std: float = -0.5) -> PolicyParams:
    """Scaled-normal init; small final actor layer so the initial mean is near zero."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def mlp(sizes, out_gain):
        layers = []
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            gain = out_gain if k == len(sizes) - 2 else math.sqrt(2.0)
            w = rng.normal(0.0, gain / math.sqrt(fan_in), (fan_in, fan_out))
            layers.append((w, np.zeros(fan_out)))
        return layers

    sizes_a = [obs_dim, *hidden, act_dim]
    sizes_c = [obs_dim, *hidden, 1]
    return PolicyParams(mlp(sizes_a, 0.01), mlp(sizes_c, 1.0), np.full(act_dim, float(init_log_std)))


def _mlp_forward(layers, x):
    acts = [x]
    h = x
    for w, b in layers[:-1]:
        h = np.tanh(h @ w + b)
        acts.append(h)
    w, b = layers[-1]
    return h @ w + b, acts


def _mlp_backward(layers, acts, grad_out):
    grads = [None] * len(layers)
    g = grad_out
    for k in range(len(layers) - 1, -1, -1):
        w, _ = layers[k]
        grads[k] = (acts[k].T @ g, g.sum(axis=0))
        if k > 0:
            g = (g @ w.T) * (1.0 - acts[k] ** 2)
    return grads


def policy_forward(params: PolicyParams, obs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Action mean, log-std and value for one observation or a batch."""
    obs = np.asarray(obs, dtype=np.float64)
    single = obs.ndim == 1
    x = obs[None, :] if single else obs
    if x.shape[1] != params.obs_dim:
        raise ValueError(f"observation has dimension {x.shape[1]}, policy expects {params.obs_dim}")
    mean, _ = _mlp_forward(params.actor, x)
    value, _ = _mlp_forward(params.critic, x)
    value = value[:, 0]
    if single:
        return mean[0], params.log_std.copy(), value[0]
    return mean, params.log_std.copy(), value


def gaussian_log_prob(actions, mean, log_std) -> np.ndarray:
    z = (actions - mean) * np.exp(-log_std)
    return -0.5 * np.sum(z * z, axis=-1) - np.sum(log_std) - 0.5 * mean.shape[-1] * LOG_2PI


def ppo_clip_loss(ratios, advantages, clip_epsilon: float) -> float:
    """Negated mean clipped surrogate."""
    r = np.asarray(ratios, dtype=np.float64)
    a = np.asarray(advantages, dtype=np.float64)
    if r.shape != a.shape:
        raise ValueError("ratios and advantages must have equal length")
    surr = np.minimum(r * a, np.clip(r, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * a)
    return float(-surr.mean())


@dataclass(frozen=True)
class LossTerms:
    total: float
    policy: float
    value: float
    entropy: float
    clip_fraction: float


def ppo_loss_and_grad(params: PolicyParams, obs, actions, old_log_probs, advantages, returns,
                      clip_epsilon: float = 0.2, value_coef: float = 0.5,
                      entropy_coef: float = 0.0) -> tuple[LossTerms, np.ndarray]:
    """Total PPO loss ``clip + value_coef * value - entropy_coef * entropy`` and its flat gradient.

    The value term is ``0.5 * mean((V - R)^2)``. Gradients are exact except
    at the clip kinks, where the unclipped branch is used when it ties.
    """
    obs = np.asarray(obs, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.float64)
    adv = np.asarray(advantages, dtype=np.float64)
    ret = np.asarray(returns, dtype=np.float64)
    n = obs.shape[0]
    log_std = params.log_std

    mean, acts_a = _mlp_forward(params.actor, obs)
    value, acts_c = _mlp_forward(params.critic, obs)
    value = value[:, 0]

    inv_std = np.exp(-log_std)
    z = (actions - mean) * inv_std
    logp = -0.5 * np.sum(z * z, axis=1) - np.sum(log_std) - 0.5 * mean.shape[1] * LOG_2PI
    ratio = np.exp(logp - np.asarray(old_log_probs, dtype=np.float64))
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    unclipped_obj, clipped_obj = ratio * adv, clipped * adv
    use_unclipped = unclipped_obj <= clipped_obj
    policy_loss = -np.mean(np.where(use_unclipped, unclipped_obj, clipped_obj))
    value_loss = 0.5 * np.mean((value - ret) ** 2)
    entropy = float(np.sum(log_std) + 0.5 * mean.shape[1] * (LOG_2PI + 1.0))
    total = policy_loss + value_coef * value_loss - entropy_coef * entropy

    # d total / d logp through the ratio (zero where the clipped branch is active)
    g_logp = np.where(use_unclipped, -adv * ratio / n, 0.0)
    g_mean = (g_logp[:, None] * z * inv_std)
    g_log_std = np.sum(g_logp[:, None] * (z * z - 1.0), axis=0) - entropy_coef
    g_value = value_coef * (value - ret) / n

    grads_a = _mlp_backward(params.actor, acts_a, g_mean)
    grads_c = _mlp_backward(params.critic, acts_c, g_value[:, None])
    flat = []
    for gw, gb in grads_a:
        flat += [gw.ravel(), gb]
    flat.append(g_log_std)
    for gw, gb in grads_c:
        flat += [gw.ravel(), gb]
    terms = LossTerms(float(total), float(policy_loss), float(value_loss), entropy,
                      float(np.mean(np.abs(ratio - 1.0) > clip_epsilon)))
    return terms, np.concatenate(flat)


class Adam:
    """Adam on a flat parameter vector."""

    def __init__(self, lr: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m, self.v = np.zeros_like(theta), np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def save_checkpoint(params: PolicyParams, path, meta: dict | None = None) -> None:
    """JSON checkpoint: a shape header followed by the row-major tensor data."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "obs_dim": params.obs_dim,
        "act_dim": params.act_dim,
        "hidden": list(params.hidden),
        "meta": meta or {},
        "tensors": [{"name": name, "shape": list(t.shape), "data": t.ravel().tolist()}
                    for name, t in params.tensors()],
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> PolicyParams:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT!r} checkpoint")
    try:
        template = init_policy(int(doc["obs_dim"]), int(doc["act_dim"]), tuple(doc["hidden"]))
        tensors = {t["name"]: t for t in doc["tensors"]}
        parts = []
        for name, like in template.tensors():
            entry = tensors[name]
            if tuple(entry["shape"]) != like.shape:
                raise CheckpointError(f"tensor {name} has shape {entry['shape']}, expected {list(like.shape)}")
            data = np.asarray(entry["data"], dtype=np.float64)
            if data.size != like.size:
                raise CheckpointError(f"tensor {name} has {data.size} values, header says {like.size}")
            parts.append(data)
        if len(tensors) != len(template.tensors()):
            raise CheckpointError("checkpoint has unexpected extra tensors")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    params = template.with_flat(np.concatenate(parts))
    if not np.all(np.isfinite(params.flat())):
        raise CheckpointError(f"checkpoint {path} contains non-finite values")
    return params
