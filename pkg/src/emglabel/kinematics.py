"""Joint angles from 3-D skeleton frames.

Frames carry the four tracked right-arm joints (hand tip, wrist, elbow,
shoulder) in camera coordinates. Each joint angle is the angle between the
two bone vectors meeting at it. The shoulder has no second tracked bone, so
its elevation is measured against a fixed torso-down reference direction
(0, -1, 0); see SHOULDER_REFERENCE_DOWN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError

# Camera-frame unit vector pointing "down the torso" from the shoulder.
# Convention, not measured: gives 0 deg with the arm hanging at rest.
SHOULDER_REFERENCE_DOWN = np.array([0.0, -1.0, 0.0])

_EPS_M = 1e-9  # bones shorter than this are treated as degenerate


@dataclass(frozen=True)
class SkeletonFrame:
    """Timestamped 3-D positions (meters) of the four right-arm joints."""

    t: float
    tip: np.ndarray
    wrist: np.ndarray
    elbow: np.ndarray
    shoulder: np.ndarray

    def __post_init__(self) -> None:
        for name in ("tip", "wrist", "elbow", "shoulder"):
            p = np.asarray(getattr(self, name), dtype=np.float64)
            if p.shape != (3,):
                raise InvalidInputError(f"{name} must be a 3-D point, got shape {p.shape}")
            if not np.all(np.isfinite(p)):
                raise InvalidInputError(f"{name} contains non-finite coordinates")
            object.__setattr__(self, name, p)


@dataclass(frozen=True)
class AngleFrame:
    """The three derived joint angles, degrees in [0, 180]."""

    t: float
    shoulder_deg: float
    elbow_deg: float
    wrist_deg: float
    clamped: bool = False  # an out-of-range input was clamped on decode


def joint_angle(center: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Angle at `center` between rays to `a` and `b`, in degrees [0, 180]."""
    center = np.asarray(center, dtype=np.float64)
    p = np.asarray(a, dtype=np.float64) - center
    q = np.asarray(b, dtype=np.float64) - center
    np_ = np.linalg.norm(p)
    nq = np.linalg.norm(q)
    if np_ <= _EPS_M or nq <= _EPS_M:
        raise DegenerateGeometryError("coincident points: bone has zero length")
    cosang = np.dot(p, q) / (np_ * nq)
    return float(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))


def angles_from_skeleton(f: SkeletonFrame) -> AngleFrame:
    """Shoulder / elbow / wrist angles for one frame, timestamps preserved."""
    try:
        elbow = joint_angle(f.elbow, f.shoulder, f.wrist)
    except DegenerateGeometryError as exc:
        raise DegenerateGeometryError(f"elbow: {exc}") from None
    try:
        wrist = joint_angle(f.wrist, f.elbow, f.tip)
    except DegenerateGeometryError as exc:
        raise DegenerateGeometryError(f"wrist: {exc}") from None
    try:
        shoulder = joint_angle(f.shoulder, f.elbow, f.shoulder + SHOULDER_REFERENCE_DOWN)
    except DegenerateGeometryError as exc:
        raise DegenerateGeometryError(f"shoulder: {exc}") from None
    return AngleFrame(t=f.t, shoulder_deg=shoulder, elbow_deg=elbow, wrist_deg=wrist)
