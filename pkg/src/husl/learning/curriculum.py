"""Two-ramp curriculum over payload mass and arm pose."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class CurriculumPhase:
    """Curriculum schedule.

    The payload range grows linearly from ``[0, 0]`` to ``final_payload``,
    reaching it at the last breakpoint. The arm-pose stage starts at 1 and
    steps up at each breakpoint, capped at ``num_stages``.
    """

    breakpoints: tuple = (0.2, 0.4, 0.6, 0.8)
    final_payload: tuple = (19.0, 30.0)
    num_stages: int = 4

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "final_payload", tuple(float(m) for m in self.final_payload))
        if not bp or any(not 0.0 <= b <= 1.0 for b in bp) or any(a >= b for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing in [0, 1]")
        lo, hi = self.final_payload
        if not 0.0 <= lo <= hi:
            raise ValueError("payload range must satisfy 0 <= lower <= upper")
        if self.num_stages < 1:
            raise ValueError("num_stages must be at least 1")


class CurriculumPoint(NamedTuple):
    payload_range: tuple
    stage: int


def curriculum_at(progress: float, schedule: CurriculumPhase = CurriculumPhase()) -> CurriculumPoint:
    if not 0.0 <= progress <= 1.0:
        raise ValueError(f"progress must lie in [0, 1], got {progress!r}")
    ramp = min(1.0, progress / schedule.breakpoints[-1]) if schedule.breakpoints[-1] > 0 else 1.0
    lo, hi = schedule.final_payload
    stage = min(schedule.num_stages, 1 + sum(progress >= b for b in schedule.breakpoints))
    return CurriculumPoint((ramp * lo, ramp * hi), stage)


def stage_pose(stage: int, final_pose, num_stages: int = 4) -> np.ndarray:
    """Arm pose for a stage: stage 1 hangs straight down, the last stage is ``final_pose``."""
    frac = 0.0 if num_stages <= 1 else (stage - 1) / (num_stages - 1)
    return frac * np.asarray(final_pose, dtype=float)


def sample_payload(point: CurriculumPoint, rng: np.random.Generator) -> float:
    lo, hi = point.payload_range
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)
