import numpy as np
import pytest

from stereowire.cameras import ProjectiveCamera


def random_rotation(rng):
    """Uniform-ish proper rotation from a QR factorization."""
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_camera(rng, image_size=(1024, 1024)):
    """Random finite camera looking roughly at the origin from ~1 m."""
    f = rng.uniform(800.0, 2000.0)
    K = np.array([[f, 0.0, image_size[0] / 2.0],
                  [0.0, f, image_size[1] / 2.0],
                  [0.0, 0.0, 1.0]])
    R = random_rotation(rng)
    center = rng.uniform(-300.0, 300.0, 3) - 900.0 * R[2]  # back along its optical axis
    t = -R @ center
    return ProjectiveCamera(K @ np.column_stack([R, t]), image_size)


def random_stereo_rig(rng, min_baseline=100.0):
    cam_a = random_camera(rng)
    while True:
        cam_b = random_camera(rng)
        ca = np.linalg.solve(cam_a.P[:, :3], -cam_a.P[:, 3])
        cb = np.linalg.solve(cam_b.P[:, :3], -cam_b.P[:, 3])
        if np.linalg.norm(ca - cb) > min_baseline:
            return cam_a, cam_b


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
