import csv
import math
import numpy as np
import pytest
from core.runtime import NERF_RENDERER, REMOTE_RENDERER, SPARSE_RENDERER, WIRELESS_LINK, KindCostModel, PixelCostModel, PredictorState, RenderTask, RuntimeConfig, SceneRenderer, TaskKind, TaskWork, predict_direction, predict_reference_pose, schedule, simulate_remote, simulate_timeline, transfer_cost
from core.scene import Frame, Intrinsics, generate_orbit_trajectory
from core.sparw import WarpResult
from utils.errors import InsufficientHistoryError, RuntimeConfigError

TARGET_LATENCY = 0.002


class StubRenderer:
    """Full renders are flat grey; warps cover every pixel at a fixed angle."""

    def __init__(self, intr: Intrinsics, angle: float = 0.0):
        self.intr = intr
        self.angle = angle
        self.full_renders = 0

    def render_full(self, pose):
        self.full_renders += 1
        frame = Frame.empty(self.intr.height, self.intr.width)
        frame.color[:] = 0.5
        frame.depth[:] = 2.0
        frame.valid[:] = True
        return frame

    def warp(self, reference, ref_pose, tgt_pose):
        shape = reference.depth.shape
        return WarpResult(frame=reference.copy(), disocclusion_mask=np.
            zeros(shape, dtype=bool), void_mask=np.zeros(shape, dtype=bool),
            warp_angle=np.full(shape, self.angle), source_index=np.arange(
            reference.depth.size).reshape(shape))

    def fill(self, result, tgt_pose):
        return result.frame.copy()


@pytest.fixture
def small_intr():
    return Intrinsics.from_fov(16, 16, 50.0)


def kind_costs(reference_factor: float = 4.0) -> KindCostModel:
    return KindCostModel({TaskKind.REFERENCE: reference_factor *
        TARGET_LATENCY, TaskKind.TARGET: TARGET_LATENCY, TaskKind.
        FALLBACK_FULL: reference_factor * TARGET_LATENCY}, {TaskKind.
        REFERENCE: 40.0, TaskKind.TARGET: 1.0, TaskKind.FALLBACK_FULL: 40.0})


def trajectory(n: int):
    return generate_orbit_trajectory((0.0, 0.0, 0.0), 2.6, 30.0, 0.3, n)


def test_window_layout(small_intr):
    config = RuntimeConfig(window=4, cost_model=kind_costs())
    result = schedule(trajectory(10), config, StubRenderer(small_intr),
        small_intr)
    assert result.reference_count == 3
    assert result.fallback_count == 1
    assert result.records[0].kind == TaskKind.FALLBACK_FULL
    assert all(record.kind == TaskKind.TARGET for record in result.records[1:])
    windows = [result.tasks[record.task_id].window for record in result.
        records[1:]]
    assert windows == [0, 0, 0, 0, 1, 1, 1, 1, 2]
    assert len(result.frames) == 10


def test_targets_wait_for_their_reference(small_intr):
    config = RuntimeConfig(window=4, cost_model=kind_costs())
    result = schedule(trajectory(10), config, StubRenderer(small_intr),
        small_intr)
    for task in result.tasks:
        if task.kind == TaskKind.TARGET:
            _, ref_end = result.timeline.interval(task.depends_on)
            start, _ = result.timeline.interval(task.task_id)
            assert start >= ref_end


def test_reference_rendering_overlaps_warping(small_intr):
    config = RuntimeConfig(window=16, cost_model=kind_costs(4.0))
    result = schedule(trajectory(49), config, StubRenderer(small_intr),
        small_intr)
    references = result.timeline.on(NERF_RENDERER)
    targets = result.timeline.on(SPARSE_RENDERER)
    overlapping = [(r, t) for r in references for t in targets if r.start <
        t.end and t.start < r.end and r.kind == 'reference']
    assert overlapping


def test_wide_angle_falls_back(small_intr):
    config = RuntimeConfig(window=4, angle_threshold=math.radians(1.0),
        cost_model=kind_costs())
    renderer = StubRenderer(small_intr, angle=math.radians(2.0))
    result = schedule(trajectory(6), config, renderer, small_intr)
    assert result.fallback_count == 6
    assert all(record.kind == TaskKind.FALLBACK_FULL for record in result.
        records)
    assert result.records[1].max_angle == pytest.approx(math.radians(2.0))


def test_angle_equal_to_threshold_falls_back(small_intr):
    config = RuntimeConfig(window=4, angle_threshold=0.0, cost_model=
        kind_costs())
    result = schedule(trajectory(4), config, StubRenderer(small_intr),
        small_intr)
    assert result.fallback_count == 4


def test_reference_energy_is_shared(small_intr):
    config = RuntimeConfig(window=4, cost_model=kind_costs())
    result = schedule(trajectory(5), config, StubRenderer(small_intr),
        small_intr)
    energy = result.timeline.frame_energy
    assert energy[0] == pytest.approx(40.0)
    for index in range(1, 5):
        assert energy[index] == pytest.approx(1.0 + 40.0 / 4)


def test_temporal_policy_refreshes_every_window(small_intr):
    config = RuntimeConfig(window=3, reference_policy='temporal',
        cost_model=kind_costs())
    result = schedule(trajectory(7), config, StubRenderer(small_intr),
        small_intr)
    kinds = [record.kind for record in result.records]
    assert kinds[3] == TaskKind.FALLBACK_FULL
    assert kinds[6] == TaskKind.FALLBACK_FULL
    assert kinds[4] == TaskKind.TARGET
    assert result.reference_count == 0


def test_transfer_cost_of_small_frame(small_intr):
    config = RuntimeConfig()
    seconds, nj = transfer_cost(3 * small_intr.n_pixels, config)
    assert seconds == pytest.approx(76.8e-06)
    assert nj == pytest.approx(76800.0)


def test_remote_mode_ships_full_frames(small_intr):
    config = RuntimeConfig(window=4, mode='remote', cost_model=kind_costs())
    result = schedule(trajectory(5), config, StubRenderer(small_intr),
        small_intr)
    timeline = result.timeline
    assert not timeline.on(NERF_RENDERER)
    links = timeline.on(WIRELESS_LINK)
    assert len(links) == len(timeline.on(REMOTE_RENDERER)) == 2
    for event in links:
        assert event.end - event.start == pytest.approx(76.8e-06)
        assert event.energy == pytest.approx(76800.0)
    assert all(event.energy == 0.0 for event in timeline.on(REMOTE_RENDERER))


def test_faster_remote_renderer_shortens_makespan(small_intr):
    # full renders slower than a frame interval make the renderer the bottleneck
    costs = kind_costs(500.0)
    local = schedule(trajectory(33), RuntimeConfig(window=16, cost_model=
        costs), StubRenderer(small_intr), small_intr)
    remote = schedule(trajectory(33), RuntimeConfig(window=16, mode=
        'remote', remote_speedup=10.0, cost_model=costs), StubRenderer(
        small_intr), small_intr)
    assert remote.timeline.makespan < local.timeline.makespan


def test_simulate_remote_needs_remote_config(small_intr, pose):
    work = TaskWork(pose, small_intr.n_pixels, small_intr.n_pixels)
    task = RenderTask(0, TaskKind.FALLBACK_FULL, pose, 0.0, frame_index=0)
    with pytest.raises(RuntimeConfigError):
        simulate_remote([task], {0: work}, RuntimeConfig())


def test_timeline_is_deterministic(small_intr, pose):
    works = {i: TaskWork(pose, 10, 100) for i in range(3)}
    tasks = [RenderTask(0, TaskKind.REFERENCE, pose, 0.0, window=0),
        RenderTask(1, TaskKind.TARGET, pose, 0.0, depends_on=0,
        frame_index=1, window=0), RenderTask(2, TaskKind.TARGET, pose, 0.0,
        depends_on=0, frame_index=2, window=0)]
    config = RuntimeConfig(cost_model=PixelCostModel())
    a = simulate_timeline(tasks, works, config)
    b = simulate_timeline(tasks, works, config)
    assert a.events == b.events
    assert a.frame_completion[1] <= a.frame_completion[2]


def test_timeline_csv(tmp_path, small_intr):
    config = RuntimeConfig(window=4, cost_model=kind_costs())
    result = schedule(trajectory(5), config, StubRenderer(small_intr),
        small_intr)
    path = str(tmp_path / 'timeline.csv')
    result.timeline.write_csv(path)
    with open(path, newline='') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == len(result.timeline.events)
    assert rows[0]['schema_version'] == '1'


def test_target_needs_a_reference(pose):
    with pytest.raises(RuntimeConfigError):
        RenderTask(0, TaskKind.TARGET, pose, 0.0)


def test_config_rejects_bad_values():
    with pytest.raises(RuntimeConfigError):
        RuntimeConfig(window=0)
    with pytest.raises(RuntimeConfigError):
        RuntimeConfig(mode='cloud')


def test_prediction_needs_two_poses(pose):
    state = PredictorState()
    state.push(pose)
    with pytest.raises(InsufficientHistoryError):
        predict_direction(state)


def test_history_must_be_ordered(orbit):
    state = PredictorState()
    state.push(orbit.poses[1])
    with pytest.raises(RuntimeConfigError):
        state.push(orbit.poses[0])


def test_prediction_follows_the_orbit(orbit):
    state = PredictorState()
    for pose in orbit.poses[:5]:
        state.push(pose)
    predicted = predict_direction(state, horizon=1.0)
    actual = orbit.poses[5].forward
    last = orbit.poses[4].forward
    assert np.linalg.norm(predicted) == pytest.approx(1.0)
    assert np.linalg.norm(predicted - actual) < np.linalg.norm(last - actual)


def test_reference_pose_extrapolates_half_a_window(orbit):
    t1, t2 = orbit.poses[0], orbit.poses[1]
    dt = orbit.frame_interval
    ref = predict_reference_pose(t1, t2, dt, window=4)
    expected = t2.translation + (t2.translation - t1.translation) * 2.0
    assert np.allclose(ref.translation, expected)
    assert np.allclose(ref.forward, t2.forward)
    assert ref.timestamp == pytest.approx(t2.timestamp + 2.0 * dt)


def test_scene_renderer_full_render(structured_scene, pose, intr, settings):
    renderer = SceneRenderer(structured_scene, intr, settings)
    frame = renderer.render_full(pose)
    assert frame.color.shape == (intr.height, intr.width, 3)
