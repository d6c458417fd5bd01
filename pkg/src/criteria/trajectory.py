"""Trajectory containers and longitudinal kinematics.

Speeds and accelerations are derived from per-step displacement vectors.
When the last observed position (the anchor) is known it is prepended, so
the first predicted step has a defined velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import geom
from .errors import InsufficientModesError, ShapeError, TooShortError


@dataclass(frozen=True)
class Trajectory:
    """Uniformly-timestamped 2D polyline, ``points`` shaped (N, 2), N >= 2."""

    points: np.ndarray
    dt: float

    def __post_init__(self):
        pts = geom.as_points(self.points)
        if len(pts) < 2:
            raise ValueError("trajectory needs >= 2 points")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class PredictionSet:
    """K candidate futures for one agent; all modes share length and dt."""

    scenario_id: str
    modes: list[Trajectory]
    probabilities: list[float] | None = None
    anchor: np.ndarray | None = None  # last observed position

    def __post_init__(self):
        if not self.modes:
            raise ValueError("prediction set needs at least one mode")
        n = len(self.modes[0])
        dt = self.modes[0].dt
        for k, m in enumerate(self.modes):
            if len(m) != n or m.dt != dt:
                raise ShapeError(
                    f"mode {k} of {self.scenario_id!r} has mismatched length/dt"
                )
        if self.probabilities is not None:
            if len(self.probabilities) != len(self.modes):
                raise ShapeError("probabilities length != number of modes")
            if any(p < 0 for p in self.probabilities):
                raise ValueError("probabilities must be non-negative")
            if abs(sum(self.probabilities) - 1.0) > 1e-6:
                raise ValueError("probabilities must sum to 1")
        if self.anchor is not None:
            object.__setattr__(
                self, "anchor", np.asarray(self.anchor, float).reshape(2)
            )

    @property
    def k(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class KinematicConfig:
    """Normal-driving longitudinal acceleration envelope and check window."""

    a_min: float = -2.0
    a_max: float = 1.47
    window: int = 3
    anchor: np.ndarray | None = None

    def __post_init__(self):
        if self.a_min >= self.a_max:
            raise ValueError("a_min must be < a_max")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.anchor is not None:
            object.__setattr__(
                self, "anchor", np.asarray(self.anchor, float).reshape(2)
            )

    def with_anchor(self, anchor) -> "KinematicConfig":
        return replace(self, anchor=anchor)


def step_vectors(traj: Trajectory, anchor=None) -> np.ndarray:
    """Per-step displacement vectors, (T, 2) with anchor else (T-1, 2)."""
    pts = traj.points
    if anchor is not None:
        pts = np.vstack([np.asarray(anchor, float).reshape(1, 2), pts])
    return np.diff(pts, axis=0)


def speed_profile(traj: Trajectory, anchor=None) -> np.ndarray:
    return np.linalg.norm(step_vectors(traj, anchor), axis=1) / traj.dt


def accel_profile(traj: Trajectory, anchor=None) -> np.ndarray:
    speeds = speed_profile(traj, anchor)
    if len(speeds) < 2:
        raise TooShortError("too short for acceleration (need >= 2 speed samples)")
    return np.diff(speeds) / traj.dt


def kinematic_window_check(
    traj: Trajectory, cfg: KinematicConfig
) -> tuple[bool, float, float]:
    """Mean acceleration over the first and last ``cfg.window`` samples.

    Passes iff both means lie in [a_min, a_max] inclusive.
    """
    accels = accel_profile(traj, cfg.anchor)
    w = min(cfg.window, len(accels))
    a_init = float(accels[:w].mean())
    a_final = float(accels[-w:].mean())
    ok = cfg.a_min <= a_init <= cfg.a_max and cfg.a_min <= a_final <= cfg.a_max
    return ok, a_init, a_final


def kinematic_clip(traj: Trajectory, cfg: KinematicConfig) -> Trajectory:
    """Longest prefix whose every acceleration sample is in range.

    The prefix ends at the point producing the last compliant speed; a
    trajectory violating from the first sample keeps the minimal 2-point
    prefix (or its first point plus anchor step when anchored).
    """
    try:
        accels = accel_profile(traj, cfg.anchor)
    except TooShortError:
        return traj
    bad = np.flatnonzero((accels < cfg.a_min) | (accels > cfg.a_max))
    if len(bad) == 0:
        return traj
    j = int(bad[0])  # first violating sample uses speeds j and j+1
    # speed j ends at point index j+1 without anchor, j with anchor
    end = j if cfg.anchor is not None else j + 1
    end = max(end, 1)
    return Trajectory(points=traj.points[: end + 1], dt=traj.dt)


def displacement_vector(traj: Trajectory) -> np.ndarray:
    return traj.points[-1] - traj.points[0]


def require_modes(pred: PredictionSet, minimum: int = 2) -> None:
    if pred.k < minimum:
        raise InsufficientModesError(
            f"{pred.scenario_id!r}: need >= {minimum} modes, got {pred.k}"
        )
