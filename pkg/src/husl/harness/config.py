"""Experiment configuration: one JSON document, five sections, no unknown keys."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from husl.balance import BalanceGains, Scenario
from husl.gait import LocomotionGains, ReferenceMotion, ResidualBounds
from husl.learning.curriculum import CurriculumPhase
from husl.learning.env import EnvConfig
from husl.learning.ppo import LearningConfig
from husl.learning.reward import RewardWeights
from husl.learning.train import TrainConfig
from husl.model import ModelParams
from husl.walker import Disturbance

SECTIONS = ("model", "gait", "balance", "learning", "scenario")


class ConfigError(ValueError):
    """Malformed configuration: unknown key, wrong type or invalid value."""


@dataclass(frozen=True)
class GaitConfig:
    lateral_sway_amplitude: float = 0.03
    step_dcm: float = 1.0
    zmp_dcm: float = 2.0
    reach: tuple = (0.2, 0.1)
    residual_bounds: tuple = (0.1, 0.1, 0.05)

    def locomotion(self, step_dcm: float | None = None) -> LocomotionGains:
        return LocomotionGains(self.step_dcm if step_dcm is None else step_dcm, self.zmp_dcm, tuple(self.reach))

    def bounds(self) -> ResidualBounds:
        return ResidualBounds(*self.residual_bounds)

    def reference(self, params: ModelParams, arm_pose=(0.0, 0.0, 0.0, 0.0)) -> ReferenceMotion:
        return ReferenceMotion.from_model(params, self.lateral_sway_amplitude, arm_pose)


@dataclass(frozen=True)
class TrainingSection:
    """PPO settings plus the training-environment options."""

    ppo: LearningConfig = field(default_factory=LearningConfig)
    dt: float = 0.005
    control_interval: float = 0.02
    episode_time: float = 10.0
    fall_radius: float = 0.3
    nominal_step_dcm: float = 0.3
    curriculum_breakpoints: tuple = (0.2, 0.4, 0.6, 0.8)
    final_payload: tuple = (19.0, 30.0)
    reward_alpha: tuple = (5.0, 0.5, 5.0, 5.0, 0.5)


@dataclass(frozen=True)
class ScenarioSection:
    scenario: Scenario = Scenario.DYNAMIC_BALANCING
    seed: int = 0
    duration: float = 10.0
    payload_mass: float = 30.0
    assumed_payload: float = 24.5
    push: float = 0.05
    placement: float = 0.003
    fall_radius: float = 0.3
    checkpoint: str | None = None
    output: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved experiment configuration."""

    model: ModelParams = field(default_factory=ModelParams)
    gait: GaitConfig = field(default_factory=GaitConfig)
    balance: BalanceGains = field(default_factory=BalanceGains)
    learning: TrainingSection = field(default_factory=TrainingSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)

    # convenience views -------------------------------------------------
    @property
    def kind(self) -> Scenario:
        return self.scenario.scenario

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def duration(self) -> float:
        return self.scenario.duration

    def disturbance(self) -> Disturbance:
        return Disturbance(self.scenario.push, self.scenario.placement)

    def train_config(self) -> TrainConfig:
        lr = self.learning
        env = EnvConfig(
            model=dataclasses.replace(self.model, dt=lr.dt),
            locomotion=self.gait.locomotion(lr.nominal_step_dcm),
            bounds=self.gait.bounds(),
            disturbance=self.disturbance(),
            rewards=RewardWeights(alpha=lr.reward_alpha),
            final_pose=tuple(float(v) for v in self.balance.static_pose),
            control_interval=lr.control_interval,
            episode_time=lr.episode_time,
            fall_radius=lr.fall_radius,
        )
        return TrainConfig(lr.ppo, env, CurriculumPhase(lr.curriculum_breakpoints, lr.final_payload))

    def to_dict(self) -> dict:
        return {
            "model": _plain(dataclasses.asdict(self.model)),
            "gait": _plain(dataclasses.asdict(self.gait)),
            "balance": {
                "kp_arm": self.balance.kp_arm.tolist(),
                "kp": self.balance.kp.tolist(),
                "kd": self.balance.kd.tolist(),
                "q_base": self.balance.q_base.tolist(),
                "static_pose": self.balance.static_pose.tolist(),
                "joint_limit": self.balance.joint_limit,
            },
            "learning": _learning_dict(self.learning),
            "scenario": _plain({**dataclasses.asdict(self.scenario), "scenario": self.scenario.scenario.value}),
        }

    def hash(self) -> str:
        """SHA-256 of the canonical JSON of the resolved configuration."""
        return config_hash(self.to_dict())


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _learning_dict(section: TrainingSection) -> dict:
    out = _plain(dataclasses.asdict(section.ppo))
    for f in dataclasses.fields(TrainingSection):
        if f.name != "ppo":
            out[f.name] = _plain(getattr(section, f.name))
    return out


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


def _check_keys(section: str, given: dict, allowed) -> None:
    if not isinstance(given, dict):
        raise ConfigError(f"section {section!r} must be a JSON object")
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in section {section!r}: {', '.join(unknown)}")


def _fields(cls) -> list[str]:
    return [f.name for f in dataclasses.fields(cls)]


def _build(section: str, cls, values: dict, convert=None):
    _check_keys(section, values, _fields(cls))
    kwargs = dict(values)
    if convert:
        for key, fn in convert.items():
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = fn(kwargs[key])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build a configuration; missing keys take defaults, unknown keys are rejected."""
    _check_keys("<root>", doc, SECTIONS)
    model = _build("model", ModelParams, doc.get("model", {}), {"shoulder_offset_left": tuple,
                                                                "shoulder_offset_right": tuple})
    gait = _build("gait", GaitConfig, doc.get("gait", {}), {"reach": tuple, "residual_bounds": tuple})
    if len(gait.reach) != 2 or len(gait.residual_bounds) != 3:
        raise ConfigError("gait.reach needs 2 entries and gait.residual_bounds 3")
    balance_vals = doc.get("balance", {})
    balance = _build("balance", BalanceGains, balance_vals,
                     {k: np.asarray for k in ("kp_arm", "kp", "kd", "q_base", "static_pose")})

    learning_vals = dict(doc.get("learning", {}))
    ppo_keys = _fields(LearningConfig)
    env_keys = [k for k in _fields(TrainingSection) if k != "ppo"]
    _check_keys("learning", learning_vals, ppo_keys + env_keys)
    ppo = _build("learning", LearningConfig, {k: v for k, v in learning_vals.items() if k in ppo_keys},
                 {"hidden": tuple})
    rest = {k: v for k, v in learning_vals.items() if k in env_keys}
    for key in ("curriculum_breakpoints", "final_payload", "reward_alpha"):
        if key in rest:
            rest[key] = tuple(rest[key])
    learning = TrainingSection(ppo=ppo, **rest)
    try:
        CurriculumPhase(learning.curriculum_breakpoints, learning.final_payload)
        RewardWeights(alpha=learning.reward_alpha)
    except ValueError as exc:
        raise ConfigError(f"invalid 'learning' section: {exc}") from exc
    if learning.dt <= 0 or learning.control_interval <= 0 or learning.episode_time <= 0 or learning.fall_radius <= 0:
        raise ConfigError("learning.dt, control_interval, episode_time and fall_radius must be positive")

    def to_scenario(value):
        try:
            return Scenario(value)
        except ValueError:
            choices = ", ".join(s.value for s in Scenario)
            raise ConfigError(f"unknown scenario {value!r}; expected one of {choices}") from None

    scenario = _build("scenario", ScenarioSection, doc.get("scenario", {}), {"scenario": to_scenario})
    if scenario.duration <= 0:
        raise ConfigError("scenario.duration must be positive")
    if scenario.payload_mass < 0 or scenario.assumed_payload < 0 or scenario.push < 0 or scenario.placement < 0:
        raise ConfigError("scenario masses and disturbance levels must be non-negative")
    if scenario.fall_radius <= 0:
        raise ConfigError("scenario.fall_radius must be positive")
    return ScenarioConfig(model, gait, balance, learning, scenario)


def load_config(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(doc)


def save_config(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
