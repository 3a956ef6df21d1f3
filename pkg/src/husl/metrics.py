"""Gait evaluation: DTW, CoM-CoS distance, cycle segmentation, GCSM and GRF PCA."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import find_peaks

#: Ideal axis of the (fz_left, fz_right) phase plane when one foot unloads as the other loads.
ANTI_PHASE_DEG = 135.0
CYCLE_POINTS = 101


class InsufficientCyclesError(ValueError):
    """Fewer than two distance peaks were found."""


class OrientationUndefinedError(ValueError):
    """The point cloud is isotropic, so it has no principal direction."""


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled simulation log.

    ``grf_left``/``grf_right`` hold ``(fz, tx, ty)`` per sample and ``q`` the
    arm angles ``(pitch_l, roll_l, pitch_r, roll_r)``.
    """

    dt: float
    t: np.ndarray
    com: np.ndarray
    cos: np.ndarray
    grf_left: np.ndarray
    grf_right: np.ndarray
    phase: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if n < 2:
            raise ValueError("a trajectory needs at least two samples")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        shapes = {"com": (n, 3), "cos": (n, 2), "grf_left": (n, 3), "grf_right": (n, 3), "phase": (n,), "q": (n, 4)}
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        t = np.asarray(self.t, dtype=float)
        steps = np.diff(t)
        if not np.allclose(steps, self.dt, rtol=0.0, atol=1e-9 * max(1.0, float(np.abs(t).max()))):
            raise ValueError("samples are not uniformly spaced at dt")
        object.__setattr__(self, "t", t)

    def __len__(self) -> int:
        return len(self.t)


def dtw_distance(a, b) -> float:
    """Classic DTW with Euclidean local cost and match/insert/delete steps.

    The recursion is evaluated one anti-diagonal at a time so memory stays
    linear in the sequence lengths.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if len(a) == 0 or len(b) == 0:
        raise ValueError("DTW needs non-empty sequences")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if len(a) < len(b):
        a, b = b, a  # the distance is symmetric; keep the long axis first
    n, m = len(a), len(b)
    rb = b[::-1]  # b[k - i] for increasing i is a forward slice of the reversed array
    inf = math.inf
    # diagonal k holds cells (i, k - i); each buffer is indexed by i, with a
    # leading inf pad so "i - 1" at i = 0 reads inf
    prev2 = np.full(n + 1, inf)
    prev = np.full(n + 1, inf)
    prev[1] = float(np.linalg.norm(a[0] - b[0]))
    for k in range(1, n + m - 1):
        lo, hi = max(0, k - m + 1), min(n - 1, k)
        j0 = m - 1 - (k - lo)  # index into rb of b[k - lo]
        diff = a[lo:hi + 1] - rb[j0:j0 + hi - lo + 1]
        cost = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        cur = np.full(n + 1, inf)
        # predecessors (i-1, j) and (i, j-1) lie on diagonal k-1, (i-1, j-1) on k-2;
        # cells outside the grid are inf in the buffers
        best = np.minimum(prev[lo:hi + 1], prev[lo + 1:hi + 2])
        best = np.minimum(best, prev2[lo:hi + 1])
        cur[lo + 1:hi + 2] = cost + best
        prev2, prev = prev, cur
    return float(prev[n])


def comcos_series(traj: Trajectory) -> np.ndarray:
    """Horizontal CoM-to-CoS distance per sample."""
    diff = traj.com[:, :2] - traj.cos
    return np.hypot(diff[:, 0], diff[:, 1])


@dataclass(frozen=True)
class GaitCycleSet:
    """Peaks of ``D(t)`` and the cycles between consecutive peaks.

    ``cycles[i]`` is the closed slice ``d[peaks[i] : peaks[i+1] + 1]``.
    """

    peaks: np.ndarray
    cycles: list
    gcsm: np.ndarray

    def __len__(self) -> int:
        return len(self.cycles)


def gcsm(cycle) -> float:
    """Minimum of a cycle strictly between its two bounding peaks."""
    cycle = np.asarray(cycle, dtype=float)
    interior = cycle[1:-1]
    if interior.size == 0:
        raise ValueError("cycle has no samples strictly between its peaks")
    return float(interior.min())


def segment_cycles(d_series, min_prominence: float, min_separation: int) -> GaitCycleSet:
    """Split ``D(t)`` at prominent, well separated local maxima."""
    d = np.asarray(d_series, dtype=float)
    if d.ndim != 1 or len(d) < 3:
        raise ValueError("need a 1-D series of at least three samples")
    peaks, _ = find_peaks(d, prominence=min_prominence, distance=max(1, int(min_separation)))
    if len(peaks) < 2:
        raise InsufficientCyclesError(f"found {len(peaks)} peak(s); at least 2 are needed")
    cycles, values = [], []
    for a, b in zip(peaks[:-1], peaks[1:]):
        cycle = d[a:b + 1]
        cycles.append(cycle)
        values.append(gcsm(cycle))
    return GaitCycleSet(peaks, cycles, np.array(values))


def default_segmentation(d_series, stride_period: float, dt: float) -> GaitCycleSet:
    """Segment with prominence at 10% of the series range and 0.3 stride of separation."""
    d = np.asarray(d_series, dtype=float)
    return segment_cycles(d, 0.1 * float(np.ptp(d)), max(1, round(0.3 * stride_period / dt)))


def resample_cycle(cycle, n_points: int = CYCLE_POINTS) -> np.ndarray:
    """Linear interpolation onto ``n_points`` evenly spaced phases in ``[0, 1]``."""
    y = np.asarray(cycle, dtype=float)
    if len(y) < 2 or n_points < 2:
        raise ValueError("need at least two samples and two output points")
    src = np.arange(len(y), dtype=float)
    dst = np.linspace(0.0, len(y) - 1.0, n_points)
    out = np.interp(dst, src, y)
    out[0], out[-1] = y[0], y[-1]
    return out


def average_cycles(curves) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and (population) standard deviation of equal-length curves."""
    curves = [np.asarray(c, dtype=float) for c in curves]
    if not curves:
        raise ValueError("no curves to average")
    if len({c.shape for c in curves}) != 1:
        raise ValueError("curves must all have the same length")
    stack = np.stack(curves)
    return stack.mean(axis=0), stack.std(axis=0)


class EllipseFit(NamedTuple):
    center: np.ndarray
    major: float
    minor: float
    angle_deg: float


def pca_ellipse(points) -> EllipseFit:
    """Principal axes of a 2-D point cloud from its sample covariance (closed form)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least three 2-D points")
    center = pts.mean(axis=0)
    x, y = (pts - center).T
    dof = len(pts) - 1
    sxx, syy, sxy = float(x @ x) / dof, float(y @ y) / dof, float(x @ y) / dof
    half_diff = 0.5 * (sxx - syy)
    radius = math.hypot(half_diff, sxy)
    mid = 0.5 * (sxx + syy)
    big, small = mid + radius, max(0.0, mid - radius)
    if big <= 0.0 or 2.0 * radius < 1e-12 * big:
        raise OrientationUndefinedError("covariance is isotropic; the major axis is undefined")
    angle = math.degrees(0.5 * math.atan2(2.0 * sxy, sxx - syy)) % 180.0
    return EllipseFit(center, math.sqrt(big), math.sqrt(small), angle)


def orientation_error(fit: EllipseFit, ideal_deg: float = ANTI_PHASE_DEG) -> float:
    """Angle between the major axis and the ideal axis, as lines (in ``[0, 90]``)."""
    diff = abs(fit.angle_deg - ideal_deg) % 180.0
    return min(diff, 180.0 - diff)
