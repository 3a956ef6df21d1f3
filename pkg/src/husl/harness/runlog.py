"""CSV run logs: one metadata comment line, a fixed header, one row per tick."""
from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from husl.metrics import Trajectory

MAGIC = "husl-sim v1"
COLUMNS = ("t", "com_x", "com_y", "com_z", "cos_x", "cos_y", "fzL", "txL", "tyL", "fzR", "txR", "tyR", "phase",
           "qp_l", "qr_l", "qp_r", "qr_r")
STATUSES = ("ok", "fell", "diverged")
_META = re.compile(r"^# husl-sim v1((?: [A-Za-z_]+=\S+)+)\s*$")


class LogFormatError(ValueError):
    """A run log does not follow the expected layout."""


class ConfigMismatchError(ValueError):
    """A log was produced by a different configuration than the one given."""


@dataclass(frozen=True)
class RunLog:
    config_hash: str
    seed: int
    dt: float
    status: str
    trajectory: Trajectory | None

    @property
    def rows(self) -> int:
        return 0 if self.trajectory is None else len(self.trajectory)

    def check_config(self, expected_hash: str) -> None:
        if self.config_hash != expected_hash:
            raise ConfigMismatchError(f"log was written by config {self.config_hash}, not {expected_hash}")


def header_line(config_hash: str, seed: int, dt: float, status: str) -> str:
    return f"# {MAGIC} config_hash={config_hash} seed={seed} dt={dt!r} status={status}"


def format_row(values) -> str:
    out = []
    for k, v in enumerate(values):
        out.append(str(int(v)) if COLUMNS[k] == "phase" else repr(float(v)))
    return ",".join(out)


def write_log(path, config_hash: str, seed: int, dt: float, status: str, rows) -> None:
    """Write ``rows`` (sequences ordered as :data:`COLUMNS`) with the metadata line."""
    if status not in STATUSES:
        raise ValueError(f"status must be one of {STATUSES}")
    with open(path, "w", newline="") as fh:
        fh.write(header_line(config_hash, seed, dt, status) + "\n")
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")


def read_log(path) -> RunLog:
    text = Path(path).read_text()
    lines = text.splitlines()
    if len(lines) < 2:
        raise LogFormatError(f"{path}: missing metadata or header line")
    m = _META.match(lines[0])
    if not m:
        raise LogFormatError(f"{path}: first line is not a '# {MAGIC} ...' metadata comment")
    meta = dict(item.split("=", 1) for item in m.group(1).split())
    try:
        config_hash, seed, dt = meta["config_hash"], int(meta["seed"]), float(meta["dt"])
    except (KeyError, ValueError) as exc:
        raise LogFormatError(f"{path}: incomplete metadata ({exc})") from exc
    status = meta.get("status", "ok")
    if tuple(lines[1].split(",")) != COLUMNS:
        raise LogFormatError(f"{path}: unexpected column header")
    body = "\n".join(lines[2:])
    if not body.strip():
        return RunLog(config_hash, seed, dt, status, None)
    try:
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise LogFormatError(f"{path}: unreadable data rows ({exc})") from exc
    if data.shape[1] != len(COLUMNS):
        raise LogFormatError(f"{path}: rows have {data.shape[1]} fields, expected {len(COLUMNS)}")
    traj = None
    if len(data) >= 2:
        traj = Trajectory(dt, data[:, 0], data[:, 1:4], data[:, 4:6], data[:, 6:9], data[:, 9:12], data[:, 12],
                          data[:, 13:17])
    return RunLog(config_hash, seed, dt, status, traj)


__all__ = ["MAGIC", "COLUMNS", "STATUSES", "LogFormatError", "ConfigMismatchError", "RunLog", "header_line",
           "format_row", "write_log", "read_log"]
