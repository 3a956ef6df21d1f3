"""Desk-scale PPO with an imitation reward and a payload/pose curriculum."""
from husl.learning.curriculum import CurriculumPhase, CurriculumPoint, curriculum_at, sample_payload, stage_pose
from husl.learning.env import ACT_DIM, OBS_DIM, EnvConfig, WalkEnv, fall_distance, imitation_features, observe
from husl.learning.policy import (
    Adam,
    CheckpointError,
    LossTerms,
    PolicyParams,
    TrainingDivergedError,
    gaussian_log_prob,
    init_policy,
    load_checkpoint,
    policy_forward,
    ppo_clip_loss,
    ppo_loss_and_grad,
    save_checkpoint,
)
from husl.learning.ppo import LearningConfig, RolloutBatch, RunningStd, gae_advantages, update_policy
from husl.learning.reward import TERMS, ImitationFeatures, RewardWeights, mimic_reward, step_reward
from husl.learning.train import TrainConfig, TrainResult, improvement, read_training_log, train

__all__ = [
    "CurriculumPhase", "CurriculumPoint", "curriculum_at", "sample_payload", "stage_pose",
    "ACT_DIM", "OBS_DIM", "EnvConfig", "WalkEnv", "fall_distance", "imitation_features", "observe",
    "Adam", "CheckpointError", "LossTerms", "PolicyParams", "TrainingDivergedError", "gaussian_log_prob",
    "init_policy", "load_checkpoint", "policy_forward", "ppo_clip_loss", "ppo_loss_and_grad", "save_checkpoint",
    "LearningConfig", "RolloutBatch", "RunningStd", "gae_advantages", "update_policy",
    "TERMS", "ImitationFeatures", "RewardWeights", "mimic_reward", "step_reward",
    "TrainConfig", "TrainResult", "improvement", "read_training_log", "train",
]
