"""Contact primitives shared by the plant and the balance controller.

Support phases, per-foot ground-reaction samples and the center-of-pressure /
center-of-support estimators live here so that :mod:`husl.model` can use the
same support point that :mod:`husl.balance` reports.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

#: Vertical force below which a foot is treated as unloaded (N).
CONTACT_EPS = 1.0


class NoContactError(ValueError):
    """Raised when a CoP is requested for a foot carrying no load."""


class NoSupportError(ValueError):
    """Raised when neither foot carries load."""


class PhaseKind(enum.IntEnum):
    DOUBLE = 0
    SINGLE_LEFT = 1
    SINGLE_RIGHT = 2


@dataclass(frozen=True)
class SupportPhase:
    kind: PhaseKind
    fraction: float

    @property
    def is_double(self) -> bool:
        return self.kind == PhaseKind.DOUBLE


@dataclass(frozen=True)
class GrfSample:
    """Vertical force and ground moments of one foot, in that foot's frame.

    ``foot_pose`` is the planar pose ``(x, y, yaw)`` of the foot frame, whose
    origin is the geometric center of the sole.
    """

    fz: float
    tx: float
    ty: float
    in_contact: bool
    foot_pose: np.ndarray

    @classmethod
    def unloaded(cls, foot_pose) -> "GrfSample":
        return cls(0.0, 0.0, 0.0, False, np.asarray(foot_pose, dtype=float))


def rotation(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s], [s, c]])


def to_world(local_xy, pose) -> np.ndarray:
    return np.asarray(pose[:2], dtype=float) + rotation(pose[2]) @ np.asarray(local_xy, dtype=float)


def to_local(world_xy, pose) -> np.ndarray:
    return rotation(pose[2]).T @ (np.asarray(world_xy, dtype=float) - np.asarray(pose[:2], dtype=float))


def cop_local(grf: GrfSample, fz_epsilon: float = CONTACT_EPS) -> np.ndarray:
    """Center of pressure ``[-ty/fz, tx/fz]`` in the foot's local frame."""
    if grf.fz <= fz_epsilon:
        raise NoContactError(f"fz={grf.fz!r} N is at or below the contact threshold {fz_epsilon} N")
    return np.array([-grf.ty / grf.fz, grf.tx / grf.fz])


def _weighted_cop(grf: GrfSample) -> np.ndarray:
    # CoP_world * fz, written without dividing by fz so lightly loaded feet stay exact
    return grf.fz * np.asarray(grf.foot_pose[:2], dtype=float) + rotation(grf.foot_pose[2]) @ np.array(
        [-grf.ty, grf.tx]
    )


def estimate_cos(
    left: GrfSample, right: GrfSample, phase: SupportPhase, fz_epsilon: float = CONTACT_EPS
) -> np.ndarray:
    """Center of support in world coordinates.

    Single support returns the stance foot's geometric center. Double support
    returns the force-weighted mean of the two world-frame CoPs.
    """
    if phase.kind == PhaseKind.SINGLE_LEFT:
        return np.array(left.foot_pose[:2], dtype=float)
    if phase.kind == PhaseKind.SINGLE_RIGHT:
        return np.array(right.foot_pose[:2], dtype=float)

    total = left.fz + right.fz
    if left.fz <= fz_epsilon and right.fz <= fz_epsilon:
        raise NoSupportError("no foot carries load above the contact threshold")
    return (_weighted_cop(left) + _weighted_cop(right)) / total
