import numpy as np
import pytest

from emglabel.errors import DegenerateGeometryError, InvalidInputError
from emglabel.kinematics import (
    AngleFrame,
    SkeletonFrame,
    angles_from_skeleton,
    joint_angle,
)

O = np.zeros(3)


def frame(tip, wrist, elbow, shoulder, t=0.0):
    return SkeletonFrame(t=t, tip=np.array(tip, float), wrist=np.array(wrist, float),
                         elbow=np.array(elbow, float), shoulder=np.array(shoulder, float))


class TestJointAngle:
    def test_perpendicular(self):
        assert joint_angle(O, [1, 0, 0], [0, 1, 0]) == pytest.approx(90.0)

    def test_collinear_opposite(self):
        assert joint_angle(O, [1, 0, 0], [-1, 0, 0]) == pytest.approx(180.0)

    def test_45_degrees(self):
        assert joint_angle(O, [1, 0, 0], [1, 1, 0]) == pytest.approx(45.0, abs=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateGeometryError):
            joint_angle(O, O, [1, 0, 0])
        with pytest.raises(DegenerateGeometryError):
            joint_angle(O, [1e-12, 0, 0], [1, 0, 0])

    def test_clamps_fp_drift(self):
        # nearly collinear vectors whose cosine could exceed 1 numerically
        a = np.array([1.0, 1e-200, 0.0])
        assert joint_angle(O, a, a * 3.0) == pytest.approx(0.0, abs=1e-6)


class TestSkeletonAngles:
    def test_right_angle_pose(self):
        f = frame(tip=[0.4, -0.3, 0], wrist=[0.3, -0.3, 0], elbow=[0, -0.3, 0],
                  shoulder=[0, 0, 0], t=2.5)
        a = angles_from_skeleton(f)
        assert a.t == 2.5
        assert a.elbow_deg == pytest.approx(90.0, abs=1e-9)
        assert a.wrist_deg == pytest.approx(180.0, abs=1e-9)
        assert a.shoulder_deg == pytest.approx(0.0, abs=1e-9)

    def test_arm_straight_down(self):
        f = frame(tip=[0, -0.9, 0], wrist=[0, -0.7, 0], elbow=[0, -0.4, 0],
                  shoulder=[0, 0, 0])
        a = angles_from_skeleton(f)
        assert a.elbow_deg == pytest.approx(180.0)
        assert a.shoulder_deg == pytest.approx(0.0)

    def test_arm_horizontal_sideways(self):
        f = frame(tip=[0.9, 0, 0], wrist=[0.7, 0, 0], elbow=[0.4, 0, 0],
                  shoulder=[0, 0, 0])
        assert angles_from_skeleton(f).shoulder_deg == pytest.approx(90.0)

    def test_degenerate_names_joint(self):
        f = frame(tip=[0.3, -0.3, 0], wrist=[0.3, -0.3, 0], elbow=[0, -0.3, 0],
                  shoulder=[0, 0, 0])
        with pytest.raises(DegenerateGeometryError, match="wrist"):
            angles_from_skeleton(f)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            frame(tip=[np.inf, 0, 0], wrist=[0.3, -0.3, 0], elbow=[0, -0.3, 0],
                  shoulder=[0, 0, 0])


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def y_rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


BASE = dict(tip=[0.42, -0.28, 0.10], wrist=[0.33, -0.31, 0.07],
            elbow=[0.05, -0.30, 0.02], shoulder=[0.0, 0.0, 0.0])


def transformed(transform):
    pts = {k: transform(np.array(v, float)) for k, v in BASE.items()}
    return angles_from_skeleton(frame(**pts))


class TestInvariances:
    def test_translation_invariance(self):
        ref = transformed(lambda p: p)
        for seed in range(5):
            offset = np.random.default_rng(seed).uniform(-3, 3, 3)
            got = transformed(lambda p: p + offset)
            for field in ("elbow_deg", "wrist_deg", "shoulder_deg"):
                assert getattr(got, field) == pytest.approx(getattr(ref, field), abs=1e-9)

    def test_scale_invariance(self):
        ref = transformed(lambda p: p)
        center = np.array([0.5, -1.0, 2.0])
        for scale in (0.1, 3.0, 117.0):
            got = transformed(lambda p: center + scale * (p - center))
            for field in ("elbow_deg", "wrist_deg", "shoulder_deg"):
                assert getattr(got, field) == pytest.approx(getattr(ref, field), abs=1e-9)

    def test_rotation_invariance_of_bone_angles(self):
        # elbow and wrist depend only on relative bone geometry
        ref = transformed(lambda p: p)
        for seed in range(5):
            rot = random_rotation(np.random.default_rng(seed))
            got = transformed(lambda p: rot @ p)
            assert got.elbow_deg == pytest.approx(ref.elbow_deg, abs=1e-9)
            assert got.wrist_deg == pytest.approx(ref.wrist_deg, abs=1e-9)

    def test_shoulder_invariant_about_torso_axis(self):
        # the shoulder angle is measured against the fixed torso-down
        # direction, so only rotations about that axis preserve it
        ref = transformed(lambda p: p)
        for theta in (0.3, 1.2, 2.9):
            got = transformed(lambda p: y_rotation(theta) @ p)
            assert got.shoulder_deg == pytest.approx(ref.shoulder_deg, abs=1e-9)

    def test_output_range(self):
        rng = np.random.default_rng(123)
        for _ in range(50):
            pts = rng.uniform(-1, 1, (4, 3))
            try:
                a = angles_from_skeleton(frame(*pts))
            except DegenerateGeometryError:
                continue
            for v in (a.elbow_deg, a.wrist_deg, a.shoulder_deg):
                assert 0.0 <= v <= 180.0


def test_angle_frame_fields():
    a = AngleFrame(1.0, 10.0, 20.0, 30.0)
    assert (a.t, a.shoulder_deg, a.elbow_deg, a.wrist_deg) == (1.0, 10.0, 20.0, 30.0)
    assert a.clamped is False
