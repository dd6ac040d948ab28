import numpy as np
import pytest
from core.metrics import psnr
from core.nerf import RenderSettings, render_frame
from core.scene import INFINITE, Frame, Intrinsics, generate_orbit_trajectory, generate_scene, look_at, make_rng
from core.sparw import PointCloudFrame, RigidTransform, VoidTest, enlarge_disocclusion, fill_disoccluded, pixel_paths, project, transform_points, unproject, warp


@pytest.fixture
def void_test(structured_scene, settings):
    return VoidTest(structured_scene, settings)


@pytest.fixture
def reference(structured_scene, pose, intr, settings):
    return render_frame(pose, intr, structured_scene, settings)


def test_identity_warp_is_exact(reference, pose, intr, void_test):
    result = warp(reference, pose, pose, intr, void_test)
    hit = np.isfinite(reference.depth)
    assert hit.any()
    assert np.array_equal(result.covered, hit)
    assert np.array_equal(result.frame.color[hit], reference.color[hit])
    assert np.array_equal(result.frame.depth[hit], reference.depth[hit])
    assert result.max_angle == 0.0
    assert result.coverage == 1.0


def test_identity_transform_between_equal_poses(pose):
    transform = RigidTransform.between(pose, pose)
    assert np.array_equal(transform.rotation, np.eye(3))
    assert np.array_equal(transform.translation, np.zeros(3))


def test_transform_round_trip(orbit):
    a, b = orbit.poses[0], orbit.poses[3]
    there = RigidTransform.between(a, b)
    back = RigidTransform.between(b, a)
    points = np.array([[0.1, -0.2, 2.0], [0.3, 0.4, 1.5]])
    assert np.allclose(back.apply(there.apply(points)), points)


def test_unproject_pinhole(intr):
    frame = Frame.empty(intr.height, intr.width)
    frame.depth[2, 5] = 3.0
    frame.valid[2, 5] = True
    cloud = unproject(frame, intr)
    expected = [3.0 * (5 - intr.cx) / intr.f, 3.0 * (2 - intr.cy) / intr.f, 3.0]
    assert np.allclose(cloud.points[2, 5], expected)
    assert cloud.valid.sum() == 1


def test_project_keeps_nearest_point(intr):
    points = np.array([[[0.0, 0.0, 2.0], [0.0, 0.0, 1.0]]])
    colors = np.array([[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]])
    frame = project(PointCloudFrame(points, colors, np.ones((1, 2), dtype=
        bool)), intr)
    v, u = int(intr.cy), int(intr.cx)
    assert frame.valid.sum() == 1
    assert frame.depth[v, u] == 1.0
    assert np.array_equal(frame.color[v, u], [0.0, 1.0, 0.0])


def test_small_motion_warps_most_pixels(reference, orbit, intr, void_test):
    result = warp(reference, orbit.poses[0], orbit.poses[1], intr, void_test)
    assert result.coverage >= 0.95
    assert 0.0 < result.max_angle < np.radians(2.0)


def test_paths_partition_the_image(reference, orbit, intr, void_test):
    result = warp(reference, orbit.poses[0], orbit.poses[2], intr, void_test)
    warped, sparse, void = pixel_paths(result)
    total = warped.astype(int) + sparse.astype(int) + void.astype(int)
    assert np.all(total == 1)


def test_background_holes_are_void(reference, pose, intr, void_test):
    result = warp(reference, pose, pose, intr, void_test)
    assert np.array_equal(result.void_mask, ~np.isfinite(reference.depth))
    assert not result.disocclusion_mask.any()


def test_without_void_test_every_hole_is_disoccluded(reference, pose, intr):
    result = warp(reference, pose, pose, intr)
    assert not result.void_mask.any()
    assert np.array_equal(result.disocclusion_mask, ~result.covered)


def test_void_test_misses_empty_space(void_test):
    origins = np.array([[0.0, 0.0, -3.0], [0.0, 0.0, -3.0]])
    directions = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]])
    assert list(void_test.hits(origins, directions)) == [False, True]


def test_enlarge_disocclusion_skips_void(reference, pose, intr, void_test):
    result = warp(reference, pose, pose, intr, void_test)
    everything = np.ones_like(result.void_mask)
    enlarged = enlarge_disocclusion(result, everything)
    assert np.array_equal(enlarged.disocclusion_mask, ~result.void_mask)


def test_fill_completes_the_frame(structured_scene, reference, orbit, intr,
    void_test, settings):
    result = warp(reference, orbit.poses[0], orbit.poses[1], intr, void_test)
    frame = fill_disoccluded(result, orbit.poses[1], intr, structured_scene,
        settings)
    assert frame.valid.all()
    assert np.all(frame.depth[result.void_mask] == INFINITE)
    assert np.all(frame.color[result.void_mask] == 0.0)
    covered = result.covered
    assert np.array_equal(frame.color[covered], result.frame.color[covered])


def test_fill_renders_disoccluded_pixels(structured_scene, orbit, intr,
    void_test, settings):
    target = orbit.poses[1]
    truth = render_frame(target, intr, structured_scene, settings)
    blank = render_frame(look_at([0.0, 0.0, -3.0], [0.0, 0.0, -6.0]), intr,
        structured_scene, settings)
    result = warp(blank, orbit.poses[0], target, intr, void_test)
    frame = fill_disoccluded(result, target, intr, structured_scene, settings)
    sparse = result.disocclusion_mask
    assert sparse.any()
    assert np.allclose(frame.color[sparse], truth.color[sparse])


def test_void_holes_match_full_render_depth(structured_scene, reference,
    orbit, intr, void_test, settings):
    target = orbit.poses[3]
    truth = render_frame(target, intr, structured_scene, settings)
    result = warp(reference, orbit.poses[0], target, intr, void_test)
    holes = ~result.covered
    assert np.array_equal(result.void_mask, holes & ~np.isfinite(truth.depth))


def test_unstructured_void_test(unstructured_scene, pose, intr, settings):
    reference = render_frame(pose, intr, unstructured_scene, settings)
    result = warp(reference, pose, pose, intr, VoidTest(unstructured_scene,
        settings))
    assert np.array_equal(result.void_mask, ~np.isfinite(reference.depth))
    assert result.coverage == 1.0


def test_opacity_is_zero_off_the_scene(structured_scene, unstructured_scene):
    origins = np.array([[0.0, 0.0, -3.0]])
    directions = np.array([[0.0, 0.0, -1.0]])
    for scene in (structured_scene, unstructured_scene):
        assert VoidTest(scene).opacity(origins, directions)[0] == 0.0


@pytest.mark.parametrize('kind', ['structured', 'unstructured'])
def test_window_of_sixteen_keeps_coverage(kind):
    scene = generate_scene(kind, seed=1)
    intr = Intrinsics.from_fov(32, 32, 50.0)
    settings = RenderSettings(n_samples=32)
    trajectory = generate_orbit_trajectory((0.0, 0.0, 0.0), 2.6, 30.0, 0.3, 17)
    poses = trajectory.poses
    reference = render_frame(poses[0], intr, scene, settings)
    void_test = VoidTest(scene, settings)
    coverage = [warp(reference, poses[0], poses[k], intr, void_test).coverage
        for k in range(1, 17)]
    assert min(coverage) >= 0.95


def test_rigid_transform_preserves_distances():
    rng = make_rng(7)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    rotation = q * np.sign(np.diag(r))
    if np.linalg.det(rotation) < 0:
        rotation[:, 0] = -rotation[:, 0]
    transform = RigidTransform(rotation, rng.uniform(-2.0, 2.0, 3))
    points = rng.uniform(-1.0, 1.0, (1, 50, 3))
    cloud = PointCloudFrame(points, np.zeros_like(points), np.ones((1, 50),
        dtype=bool))
    moved = transform_points(cloud, transform).points[0]

    def pairwise(p):
        return np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    assert np.allclose(pairwise(moved), pairwise(points[0]), rtol=0.0, atol=
        1e-06)


def test_fill_never_lowers_psnr(structured_scene, intr, settings):
    trajectory = generate_orbit_trajectory((0.0, 0.0, 0.0), 2.6, 30.0, 0.3, 6)
    ref_pose, target = trajectory.poses[0], trajectory.poses[5]
    reference = render_frame(ref_pose, intr, structured_scene, settings)
    truth = render_frame(target, intr, structured_scene, settings)
    result = warp(reference, ref_pose, target, intr, VoidTest(
        structured_scene, settings))
    filled = fill_disoccluded(result, target, intr, structured_scene, settings)
    assert psnr(filled, truth) >= psnr(result.frame, truth)
