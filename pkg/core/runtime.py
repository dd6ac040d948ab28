"""
Proactive rendering runtime.

The runtime decides which frames are fully NeRF-rendered and which are
warped, predicts off-trajectory reference poses one window ahead, and
replays the resulting task graph on a simpy discrete-event clock to obtain
a timeline with per-resource intervals, per-frame completion times and
per-frame energy.

Rendering itself is delegated to a renderer object (``SceneRenderer`` by
default) and timing/energy to a ``CostModel``, so the same scheduler runs
against real scenes, memsim-backed costs or test doubles.
"""
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Sequence, Tuple
import csv
import logging
import math
import numpy as np
import simpy
from core.nerf import RenderSettings, render_frame
from core.scene import CameraPose, Frame, Intrinsics, SceneRep, Trajectory, pose_from_direction
from core.sparw import VoidTest, WarpResult, fill_disoccluded, pixel_paths, warp
from utils.errors import InsufficientHistoryError, RuntimeConfigError
from utils.io_helpers import SCHEMA_VERSION, ensure_parent_dir
from utils.logger import log_schedule_summary
logger = logging.getLogger(__name__)

NERF_RENDERER = 'nerf_renderer'
SPARSE_RENDERER = 'sparse_renderer'
REMOTE_RENDERER = 'remote_renderer'
WIRELESS_LINK = 'wireless_link'
RESOURCES = (NERF_RENDERER, SPARSE_RENDERER, REMOTE_RENDERER, WIRELESS_LINK)
TIMELINE_HEADER = ['task_id', 'kind', 'resource', 'start', 'end', 'energy']


class TaskKind(str, Enum):
    REFERENCE = 'reference'
    TARGET = 'target'
    FALLBACK_FULL = 'fallback_full'


@dataclass
class RenderTask:
    task_id: int
    kind: TaskKind
    pose: CameraPose
    enqueue_time: float
    depends_on: Optional[int] = None
    frame_index: Optional[int] = None
    window: Optional[int] = None

    def __post_init__(self):
        if self.kind == TaskKind.TARGET and self.depends_on is None:
            raise RuntimeConfigError(f'Target task {self.task_id} has no reference')
        if self.kind == TaskKind.FALLBACK_FULL and self.depends_on is not None:
            raise RuntimeConfigError(
                f'Fallback task {self.task_id} must not depend on a reference')

    @property
    def displays_frame(self) -> bool:
        return self.frame_index is not None


@dataclass
class TaskWork:
    """What a task asks of its renderer."""
    pose: CameraPose
    nerf_pixels: int
    total_pixels: int
    pixels: Optional[np.ndarray] = None

    @property
    def frame_bytes(self) -> int:
        return 3 * self.total_pixels


class CostModel(ABC):
    """Latency (seconds) and local-device energy (nJ) of one task."""

    @abstractmethod
    def latency(self, task: RenderTask, work: TaskWork) -> float:
        pass

    @abstractmethod
    def energy(self, task: RenderTask, work: TaskWork) -> float:
        pass


class PixelCostModel(CostModel):
    """Cost proportional to NeRF-rendered pixels plus a per-pixel warp cost."""

    def __init__(self, seconds_per_pixel: float = 2e-05, nj_per_pixel:
        float = 2000.0, warp_seconds_per_pixel: float = 1e-07,
        warp_nj_per_pixel: float = 10.0):
        self.seconds_per_pixel = seconds_per_pixel
        self.nj_per_pixel = nj_per_pixel
        self.warp_seconds_per_pixel = warp_seconds_per_pixel
        self.warp_nj_per_pixel = warp_nj_per_pixel

    def latency(self, task: RenderTask, work: TaskWork) -> float:
        seconds = work.nerf_pixels * self.seconds_per_pixel
        if task.kind == TaskKind.TARGET:
            seconds += work.total_pixels * self.warp_seconds_per_pixel
        return seconds

    def energy(self, task: RenderTask, work: TaskWork) -> float:
        nj = work.nerf_pixels * self.nj_per_pixel
        if task.kind == TaskKind.TARGET:
            nj += work.total_pixels * self.warp_nj_per_pixel
        return nj


class KindCostModel(CostModel):
    """Fixed latency and energy per task kind."""

    def __init__(self, latencies: Dict[TaskKind, float], energies:
        Optional[Dict[TaskKind, float]] = None):
        self.latencies = dict(latencies)
        self.energies = dict(energies or {})

    def latency(self, task: RenderTask, work: TaskWork) -> float:
        return self.latencies[task.kind]

    def energy(self, task: RenderTask, work: TaskWork) -> float:
        return self.energies.get(task.kind, 0.0)


class RemoteCostModel(CostModel):
    """Full renders on a server ``speedup`` times faster; no local energy."""

    def __init__(self, local: CostModel, speedup: float = 10.0):
        self.local = local
        self.speedup = speedup

    def latency(self, task: RenderTask, work: TaskWork) -> float:
        return self.local.latency(task, work) / self.speedup

    def energy(self, task: RenderTask, work: TaskWork) -> float:
        return 0.0


@dataclass
class RuntimeConfig:
    window: int = 16
    angle_threshold: float = math.radians(4.0)
    mode: str = 'local'
    reference_policy: str = 'predicted'
    remote_bandwidth: float = 10000000.0
    remote_energy_per_byte: float = 100.0
    cost_model: CostModel = field(default_factory=PixelCostModel)
    remote_cost_model: Optional[CostModel] = None
    remote_speedup: float = 10.0

    def __post_init__(self):
        if self.window < 1:
            raise RuntimeConfigError(f'Warping window must be >= 1, got {self.window}')
        if self.angle_threshold < 0:
            raise RuntimeConfigError(
                f'Angle threshold must be >= 0, got {self.angle_threshold}')
        if self.mode not in ('local', 'remote'):
            raise RuntimeConfigError(f'Unknown runtime mode: {self.mode}')
        if self.reference_policy not in ('predicted', 'temporal'):
            raise RuntimeConfigError(
                f'Unknown reference policy: {self.reference_policy}')
        if not self.remote_bandwidth > 0:
            raise RuntimeConfigError('Remote bandwidth must be positive')

    def full_render_model(self) -> CostModel:
        if self.mode == 'remote':
            return self.remote_cost_model or RemoteCostModel(self.
                cost_model, self.remote_speedup)
        return self.cost_model


@dataclass
class PredictorState:
    history: Deque[CameraPose] = field(default_factory=lambda : deque(
        maxlen=5))
    ridge: float = 0.001

    def push(self, pose: CameraPose) -> None:
        if self.history and pose.timestamp <= self.history[-1].timestamp:
            raise RuntimeConfigError('Predictor history must be ordered by timestamp')
        self.history.append(pose)


def predict_direction(state: PredictorState, horizon: float = 1.0
    ) -> np.ndarray:
    """
    Ridge regression of the forward-vector components against time.

    Time is centred and measured in frame intervals, so ``ridge`` does not
    depend on the frame rate. The fit is evaluated ``horizon`` intervals
    after the newest pose and renormalised.
    """
    if len(state.history) < 2:
        raise InsufficientHistoryError(
            f'Direction prediction needs 2 poses, have {len(state.history)}')
    times = np.array([pose.timestamp for pose in state.history])
    directions = np.stack([pose.forward for pose in state.history])
    interval = float(np.mean(np.diff(times)))
    tau = (times - times.mean()) / interval
    mean = directions.mean(axis=0)
    slope = tau @ (directions - mean) / (tau @ tau + state.ridge)
    predicted = mean + slope * (tau[-1] + horizon)
    return predicted / np.linalg.norm(predicted)


def predict_reference_pose(t1: CameraPose, t2: CameraPose, dt: float,
    window: int, direction: Optional[np.ndarray] = None, lead_frames: float = 0.0
    ) -> CameraPose:
    """
    Extrapolates the reference pose ``(lead_frames + window/2) * dt`` past t2
    at the velocity between t1 and t2. Orientation is ``direction`` (or t2's
    forward) with t2's up vector.
    """
    if not dt > 0:
        raise RuntimeConfigError(f'Frame interval must be positive, got {dt}')
    velocity = (t2.translation - t1.translation) / dt
    lead = (lead_frames + window / 2.0) * dt
    position = t2.translation + velocity * lead
    forward = t2.forward if direction is None else direction
    return pose_from_direction(position, forward, up=t2.up, timestamp=t2.
        timestamp + lead)


@dataclass(frozen=True)
class TimelineEvent:
    task_id: int
    kind: str
    resource: str
    start: float
    end: float
    energy: float
    frame_index: Optional[int] = None


@dataclass
class Timeline:
    events: List[TimelineEvent]
    frame_completion: Dict[int, float]
    frame_energy: Dict[int, float]

    @property
    def makespan(self) -> float:
        return max((event.end for event in self.events), default=0.0)

    def on(self, resource: str) -> List[TimelineEvent]:
        return [event for event in self.events if event.resource == resource]

    def interval(self, task_id: int) -> Tuple[float, float]:
        """(first start, last end) over all events of a task."""
        spans = [(e.start, e.end) for e in self.events if e.task_id == task_id]
        return min(s for s, _ in spans), max(e for _, e in spans)

    @property
    def local_energy(self) -> float:
        return sum(event.energy for event in self.events)

    def write_csv(self, path: str) -> None:
        ensure_parent_dir(path)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['schema_version'] + TIMELINE_HEADER)
            for e in self.events:
                writer.writerow([SCHEMA_VERSION, e.task_id, e.kind, e.
                    resource, repr(e.start), repr(e.end), repr(e.energy)])


def transfer_cost(frame_bytes: int, config: RuntimeConfig) -> Tuple[float,
    float]:
    """(seconds, nJ) to ship one rendered frame over the wireless link."""
    return (frame_bytes / config.remote_bandwidth, frame_bytes * config.
        remote_energy_per_byte)


def _occupy(env: simpy.Environment, resource: simpy.Resource, duration: float):
    with resource.request() as request:
        yield request
        start = env.now
        yield env.timeout(duration)
        return start, env.now


def simulate_timeline(tasks: Sequence[RenderTask], works: Dict[int,
    TaskWork], config: RuntimeConfig) -> Timeline:
    """
    Replays tasks on a virtual clock. Each task waits for its enqueue time
    and its dependency, then holds its resource for its modelled latency.
    Full renders go to the remote renderer plus the wireless link in
    remote mode.
    """
    env = simpy.Environment()
    resources = {name: simpy.Resource(env, capacity=1) for name in RESOURCES}
    done = {task.task_id: env.event() for task in tasks}
    events: List[TimelineEvent] = []
    finish: Dict[int, float] = {}
    full_model = config.full_render_model()
    remote = config.mode == 'remote'

    def run(task: RenderTask):
        yield env.timeout(task.enqueue_time)
        if task.depends_on is not None:
            yield done[task.depends_on]
        work = works[task.task_id]
        if task.kind == TaskKind.TARGET:
            name, model = SPARSE_RENDERER, config.cost_model
        else:
            name, model = (REMOTE_RENDERER if remote else NERF_RENDERER,
                full_model)
        start, end = yield from _occupy(env, resources[name], model.latency
            (task, work))
        events.append(TimelineEvent(task.task_id, task.kind.value, name,
            start, end, model.energy(task, work), task.frame_index))
        if remote and task.kind != TaskKind.TARGET:
            seconds, nj = transfer_cost(work.frame_bytes, config)
            start, end = yield from _occupy(env, resources[WIRELESS_LINK],
                seconds)
            events.append(TimelineEvent(task.task_id, task.kind.value,
                WIRELESS_LINK, start, end, nj, task.frame_index))
        finish[task.task_id] = end
        done[task.task_id].succeed()
    ordered = sorted(tasks, key=lambda t: (t.enqueue_time, 0 if t.
        displays_frame else 1, t.task_id))
    for task in ordered:
        env.process(run(task))
    env.run()
    return _collect_timeline(tasks, events, finish)


def _collect_timeline(tasks: Sequence[RenderTask], events: List[
    TimelineEvent], finish: Dict[int, float]) -> Timeline:
    events = sorted(events, key=lambda e: (e.start, e.end, e.task_id))
    energy_by_task: Dict[int, float] = {}
    for event in events:
        energy_by_task[event.task_id] = energy_by_task.get(event.task_id, 0.0
            ) + event.energy
    completion: Dict[int, float] = {}
    frame_energy: Dict[int, float] = {}
    window_frames: Dict[int, List[int]] = {}
    for task in tasks:
        if task.displays_frame:
            completion[task.frame_index] = finish[task.task_id]
            frame_energy[task.frame_index] = energy_by_task.get(task.
                task_id, 0.0)
            if task.window is not None:
                window_frames.setdefault(task.window, []).append(task.
                    frame_index)
    for task in tasks:
        if task.kind == TaskKind.REFERENCE:
            served = window_frames.get(task.window, [])
            for index in served:
                frame_energy[index] += energy_by_task.get(task.task_id, 0.0
                    ) / len(served)
    return Timeline(events, completion, frame_energy)


def simulate_remote(tasks: Sequence[RenderTask], works: Dict[int,
    TaskWork], config: RuntimeConfig) -> Timeline:
    """Timeline with full renders offloaded to the remote renderer."""
    if config.mode != 'remote':
        raise RuntimeConfigError('simulate_remote needs a remote-mode config')
    return simulate_timeline(tasks, works, config)


class SceneRenderer:
    """Renderer backed by the pixel-centric NeRF path and sparse warping."""

    def __init__(self, scene: SceneRep, intr: Intrinsics, settings:
        Optional[RenderSettings] = None, void_test: Optional[VoidTest] = None):
        self.scene = scene
        self.intr = intr
        self.settings = settings or RenderSettings()
        self.void_test = void_test or VoidTest(scene, self.settings)

    def render_full(self, pose: CameraPose) -> Frame:
        return render_frame(pose, self.intr, self.scene, self.settings)

    def warp(self, reference: Frame, ref_pose: CameraPose, tgt_pose:
        CameraPose) -> WarpResult:
        return warp(reference, ref_pose, tgt_pose, self.intr, self.void_test)

    def fill(self, result: WarpResult, tgt_pose: CameraPose) -> Frame:
        return fill_disoccluded(result, tgt_pose, self.intr, self.scene,
            self.settings)


@dataclass
class FrameRecord:
    index: int
    kind: TaskKind
    task_id: int
    reference_task: Optional[int]
    warped_fraction: float
    disoccluded_fraction: float
    void_fraction: float
    max_angle: float

    @property
    def coverage(self) -> float:
        return 1.0 - self.disoccluded_fraction


@dataclass
class ScheduleResult:
    frames: List[Frame]
    timeline: Timeline
    tasks: List[RenderTask]
    works: Dict[int, TaskWork]
    records: List[FrameRecord]

    @property
    def reference_count(self) -> int:
        return sum(1 for task in self.tasks if task.kind == TaskKind.REFERENCE)

    @property
    def fallback_count(self) -> int:
        return sum(1 for task in self.tasks if task.kind == TaskKind.
            FALLBACK_FULL)


class _Planner:
    """Builds the task list and renders every frame in display order."""

    def __init__(self, trajectory: Trajectory, config: RuntimeConfig,
        renderer, intr: Intrinsics):
        self.trajectory = trajectory
        self.config = config
        self.renderer = renderer
        self.intr = intr
        self.t0 = trajectory.poses[0].timestamp
        self.tasks: List[RenderTask] = []
        self.works: Dict[int, TaskWork] = {}
        self.frames: List[Optional[Frame]] = [None] * len(trajectory)
        self.records: List[Optional[FrameRecord]] = [None] * len(trajectory)

    def arrival(self, index: int) -> float:
        return self.trajectory.poses[index].timestamp - self.t0

    def add_task(self, kind: TaskKind, pose: CameraPose, enqueue: float,
        work: TaskWork, depends_on: Optional[int] = None, frame_index:
        Optional[int] = None, window: Optional[int] = None) -> RenderTask:
        task = RenderTask(len(self.tasks), kind, pose, enqueue, depends_on,
            frame_index, window)
        self.tasks.append(task)
        self.works[task.task_id] = work
        return task

    def full_work(self, pose: CameraPose) -> TaskWork:
        return TaskWork(pose, self.intr.n_pixels, self.intr.n_pixels)

    def fallback(self, index: int, window: Optional[int]) -> None:
        pose = self.trajectory.poses[index]
        self.frames[index] = self.renderer.render_full(pose)
        task = self.add_task(TaskKind.FALLBACK_FULL, pose, self.arrival(
            index), self.full_work(pose), frame_index=index, window=window)
        self.records[index] = FrameRecord(index, TaskKind.FALLBACK_FULL,
            task.task_id, None, 0.0, 1.0, 0.0, 0.0)

    def target(self, index: int, reference: Frame, ref_pose: CameraPose,
        ref_task: int, window: Optional[int]) -> None:
        """Warps from the reference, or falls back when the angle is too wide."""
        pose = self.trajectory.poses[index]
        result = self.renderer.warp(reference, ref_pose, pose)
        angle = result.max_angle
        if not (angle < self.config.angle_threshold and result.covered.any()):
            self.fallback(index, window)
            self.records[index].max_angle = angle
            return
        self.frames[index] = self.renderer.fill(result, pose)
        warped, sparse, void = pixel_paths(result)
        pixels = np.argwhere(sparse)[:, ::-1]
        work = TaskWork(pose, int(sparse.sum()), self.intr.n_pixels, pixels)
        task = self.add_task(TaskKind.TARGET, pose, self.arrival(index),
            work, depends_on=ref_task, frame_index=index, window=window)
        self.records[index] = FrameRecord(index, TaskKind.TARGET, task.
            task_id, ref_task, float(warped.mean()), float(sparse.mean()),
            float(void.mean()), angle)

    def plan_predicted(self) -> None:
        n = len(self.trajectory)
        window = self.config.window
        dt = self.trajectory.frame_interval
        poses = self.trajectory.poses
        for w in range(math.ceil((n - 1) / window)):
            start = 1 + w * window
            dispatch = max(0, start - window)
            state = PredictorState()
            for pose in poses[max(0, dispatch - 4):dispatch + 1]:
                state.push(pose)
            lead_frames = start - dispatch - 1
            direction = None
            if len(state.history) >= 2:
                direction = predict_direction(state, horizon=lead_frames +
                    window / 2.0)
            ref_pose = predict_reference_pose(poses[max(0, dispatch - 1)],
                poses[dispatch], dt, window, direction, lead_frames)
            reference = self.renderer.render_full(ref_pose)
            ref_task = self.add_task(TaskKind.REFERENCE, ref_pose, self.
                arrival(dispatch), self.full_work(ref_pose), window=w)
            for index in range(start, min(start + window, n)):
                self.target(index, reference, ref_pose, ref_task.task_id, w)

    def plan_temporal(self) -> None:
        window = self.config.window
        for index in range(1, len(self.trajectory)):
            w = (index - 1) // window
            if index % window == 0:
                self.fallback(index, w)
                continue
            previous = self.records[index - 1]
            self.target(index, self.frames[index - 1], self.trajectory.
                poses[index - 1], previous.task_id, w)

    def run(self) -> ScheduleResult:
        self.fallback(0, None)
        if self.config.reference_policy == 'predicted':
            self.plan_predicted()
        else:
            self.plan_temporal()
        timeline = simulate_timeline(self.tasks, self.works, self.config)
        return ScheduleResult(list(self.frames), timeline, self.tasks, self
            .works, list(self.records))


def schedule(trajectory: Trajectory, config: RuntimeConfig, renderer,
    intr: Intrinsics) -> ScheduleResult:
    """
    Plans and renders every frame of ``trajectory`` and simulates the timeline.

    Frame 0 is always a full render. With the ``predicted`` policy, window w
    (frames 1+wN .. (w+1)N) is served by one reference rendered at a pose
    predicted one window ahead; a target whose maximum warp angle is not
    below the threshold is re-dispatched as a full render. The window keeps
    counting after a fallback.

    Args:
        trajectory: Camera poses with timestamps.
        config: Window, threshold, mode and cost models.
        renderer: Object with ``render_full``, ``warp`` and ``fill``.
        intr: Camera intrinsics.

    Returns:
        ScheduleResult with the displayed frames and the timeline.
    """
    if len(trajectory) < 2:
        raise RuntimeConfigError('schedule needs at least two poses')
    result = _Planner(trajectory, config, renderer, intr).run()
    log_schedule_summary(len(result.frames), result.reference_count,
        result.fallback_count, result.timeline.makespan)
    return result
