import math
import numpy as np
import pytest
from core.scene import CameraPose, Intrinsics, Trajectory, generate_orbit_trajectory, generate_scene, load_scene, load_trajectory, look_at, make_rng, save_scene, save_trajectory
from utils.errors import SceneFormatError, SceneInvariantError, TrajectoryFormatError, TruncatedPayloadError


def test_same_seed_same_scene():
    a = generate_scene('structured', seed=7)
    b = generate_scene('structured', seed=7)
    assert np.array_equal(a.features, b.features)
    c = generate_scene('structured', seed=8)
    assert not np.array_equal(a.features, c.features)


def test_rng_rejects_negative_seed():
    with pytest.raises(SceneInvariantError):
        make_rng(-1)


def test_tiny_grid_dimensions(structured_scene):
    assert structured_scene.dims == (32, 32, 32)
    assert structured_scene.channels == 8
    bounds = structured_scene.bounds()
    assert np.allclose(bounds.lo, -1.0)
    assert np.allclose(bounds.hi, 1.0)


def test_multi_level_grid_is_coarse_to_fine():
    grid = generate_scene('structured', seed=3, levels=3)
    sizes = [level.dims[0] for level in grid.levels]
    assert sizes == [8, 16, 32]


def test_tiny_cloud(unstructured_scene):
    assert len(unstructured_scene) == 4096
    assert np.all(unstructured_scene.scales > 0)
    assert np.all((unstructured_scene.opacities > 0) & (unstructured_scene.opacities <= 1))


def test_scene_round_trip(tmp_path, structured_scene, unstructured_scene):
    for scene in (structured_scene, unstructured_scene):
        path = str(tmp_path / f'{scene.kind}.scene')
        save_scene(scene, path)
        loaded = load_scene(path)
        assert loaded.kind == scene.kind
        if scene.kind == 'structured':
            assert np.array_equal(loaded.features, scene.features)
            assert np.array_equal(loaded.mlp.w1, scene.mlp.w1)
        else:
            assert np.array_equal(loaded.positions, scene.positions)


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / 'bad.scene'
    path.write_bytes(b'NOPE' + b'\x00' * 16)
    with pytest.raises(SceneFormatError):
        load_scene(str(path))


def test_load_rejects_truncated_payload(tmp_path, unstructured_scene):
    path = str(tmp_path / 'cut.scene')
    save_scene(unstructured_scene, path)
    with open(path, 'rb') as f:
        data = f.read()
    with open(path, 'wb') as f:
        f.write(data[:-10])
    with pytest.raises(TruncatedPayloadError):
        load_scene(path)


def test_pose_must_be_a_rotation():
    with pytest.raises(SceneInvariantError):
        CameraPose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))


def test_look_at_points_forward():
    pose = look_at([0.0, 0.0, -3.0], [0.0, 0.0, 0.0])
    assert np.allclose(pose.forward, [0.0, 0.0, 1.0])
    assert np.allclose(pose.up, [0.0, 1.0, 0.0])


def test_principal_point_inside_image():
    with pytest.raises(SceneInvariantError):
        Intrinsics(f=10.0, cx=20.0, cy=2.0, width=16, height=16)


def test_orbit_step_angle():
    trajectory = generate_orbit_trajectory((0, 0, 0), 2.0, 30.0, 0.6, 4)
    a, b = trajectory.poses[0].forward, trajectory.poses[1].forward
    angle = math.acos(np.clip(np.dot(a, b), -1.0, 1.0))
    assert angle == pytest.approx(0.6 / 30.0, abs=1e-9)
    assert trajectory.frame_interval == pytest.approx(1.0 / 30.0)


def test_timestamps_must_increase(pose):
    with pytest.raises(SceneInvariantError):
        Trajectory([pose, pose], [0.1, 0.1])


def test_trajectory_round_trip(tmp_path, orbit):
    path = str(tmp_path / 'orbit.txt')
    save_trajectory(orbit, path)
    loaded = load_trajectory(path)
    assert len(loaded) == len(orbit)
    for a, b in zip(orbit.poses, loaded.poses):
        assert np.array_equal(a.rotation, b.rotation)
        assert a.timestamp == b.timestamp


def test_trajectory_rejects_short_lines(tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text('0 1 0 0\n')
    with pytest.raises(TrajectoryFormatError):
        load_trajectory(str(path))
