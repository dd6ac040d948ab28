"""
Experiment harness.

``run_experiment`` schedules a trajectory through the warping runtime with
memsim-backed task costs, scores every displayed frame against a fresh
full render at the same pose and writes the CSV/PPM artifacts.
``sweep`` repeats it over angle thresholds; ``compare_modes`` puts two runs
over the same scene and trajectory side by side.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence
import copy
import logging
import math
import os
import time
import numpy as np
from config_manager import ConfigManager, ExperimentConfig
from core.memsim import MemsimCostModel, SimReport, split_dram_saving
from core.metrics import mean_finite_psnr, mean_psnr, psnr
from core.nerf import RenderSettings, render_downsampled, render_frame
from core.runtime import CostModel, ScheduleResult, SceneRenderer, TaskKind, schedule
from utils.errors import TrajectoryMismatchError
from utils.io_helpers import write_csv, write_ppm
from utils.logger import log_experiment_complete
logger = logging.getLogger(__name__)

METRICS_HEADER = ['frame_index', 'kind', 'psnr', 'psnr_downsampled',
    'psnr_drop', 'warped_fraction', 'disoccluded_fraction', 'void_fraction',
    'coverage', 'max_angle', 'cycles', 'energy', 'dram_streaming_fraction',
    'dram_bytes', 'conflict_rate', 'completion_time']


@dataclass
class MetricsRow:
    frame_index: int
    kind: str
    psnr: float
    warped_fraction: float
    disoccluded_fraction: float
    void_fraction: float
    max_angle: float
    cycles: int = 0
    energy: float = 0.0
    dram_streaming_fraction: float = 0.0
    dram_bytes: int = 0
    conflict_rate: float = 0.0
    completion_time: float = 0.0
    psnr_downsampled: float = math.nan
    psnr_drop: float = math.nan

    @property
    def coverage(self) -> float:
        return 1.0 - self.disoccluded_fraction

    def as_row(self) -> Dict[str, Any]:
        row = asdict(self)
        row['coverage'] = self.coverage
        return row


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: List[MetricsRow]
    summary: Dict[str, Any]
    schedule: ScheduleResult
    reports: Dict[int, Optional[SimReport]] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)

    @property
    def mean_psnr(self) -> float:
        return self.summary['mean_psnr']


def _reference_shares(result: ScheduleResult) -> Dict[int, List[int]]:
    """Frames served by each reference task."""
    served: Dict[int, List[int]] = {}
    for task in result.tasks:
        if task.kind == TaskKind.REFERENCE:
            served[task.task_id] = [t.frame_index for t in result.tasks if t
                .displays_frame and t.window == task.window]
    return served


def _frame_costs(result: ScheduleResult, reports: Dict[int, Optional[
    SimReport]]) -> Dict[int, Dict[str, float]]:
    """Per-frame cycles and DRAM figures; references are shared evenly."""
    costs = {index: {'cycles': 0, 'dram_bytes': 0, 'streaming_bytes': 0,
        'conflict_rate': 0.0} for index in range(len(result.frames))}

    def add(index: int, report: SimReport, share: float) -> None:
        costs[index]['cycles'] += report.total_cycles * share
        costs[index]['dram_bytes'] += report.dram.total_bytes * share
        costs[index]['streaming_bytes'] += report.dram.streaming_bytes * share
    for task in result.tasks:
        report = reports.get(task.task_id)
        if report is not None and task.displays_frame:
            add(task.frame_index, report, 1.0)
            costs[task.frame_index]['conflict_rate'] = report.conflict_rate
    for task_id, frames in _reference_shares(result).items():
        report = reports.get(task_id)
        if report is not None:
            for index in frames:
                add(index, report, 1.0 / len(frames))
    return costs


def _quality_reference(config: ExperimentConfig) -> Optional[RenderSettings]:
    if config.render.reference_samples < 1:
        return None
    return RenderSettings(n_samples=config.render.reference_samples,
        early_stop=config.render.early_stop)


def _summarize(rows: Sequence[MetricsRow], result: ScheduleResult) -> Dict[
    str, Any]:
    """Means over the emitted rows, plus schedule totals."""

    def mean(key: str) -> float:
        values = [getattr(row, key) for row in rows]
        values = [v for v in values if not math.isnan(v)]
        return float(np.mean(values)) if values else math.nan
    return {'frames': len(rows), 'references': result.reference_count,
        'fallbacks': result.fallback_count, 'mean_psnr': mean_psnr(row.psnr for
        row in rows), 'mean_psnr_warped': mean_finite_psnr(row.psnr for row in
        rows), 'mean_psnr_downsampled': mean_psnr(row.psnr_downsampled for
        row in rows if not math.isnan(row.psnr_downsampled)),
        'mean_psnr_drop': mean('psnr_drop'),
        'mean_warped_fraction': mean('warped_fraction'),
        'mean_disoccluded_fraction': mean('disoccluded_fraction'),
        'mean_coverage': float(np.mean([row.coverage for row in rows])),
        'mean_cycles': mean('cycles'), 'mean_energy': mean('energy'),
        'mean_dram_streaming_fraction': mean('dram_streaming_fraction'),
        'mean_conflict_rate': mean('conflict_rate'), 'total_cycles': int(
        round(sum(row.cycles for row in rows))), 'total_energy': sum(row.
        energy for row in rows), 'local_energy': result.timeline.
        local_energy, 'makespan': result.timeline.makespan}


def run_experiment(config: ExperimentConfig, write: bool = True,
    cost_model: Optional[CostModel] = None) -> ExperimentResult:
    """
    Runs one experiment end to end.

    Args:
        config: Experiment configuration; validated first.
        write: Whether to write artifacts under ``config.output.directory``.
        cost_model: Task cost model; defaults to a ``MemsimCostModel`` for
            the configured pipeline mode and hardware.

    Returns:
        ExperimentResult with one MetricsRow per displayed frame.
    """
    start = time.time()
    config.validate()
    scene = config.build_scene()
    trajectory = config.build_trajectory()
    intr = config.intrinsics()
    settings = config.render_settings()
    if cost_model is None:
        cost_model = MemsimCostModel(scene, intr, config.hw_config(), config
            .pipeline.mode, settings)
    runtime = config.runtime_config(cost_model)
    renderer = SceneRenderer(scene, intr, settings)
    result = schedule(trajectory, runtime, renderer, intr)
    reports = getattr(cost_model, 'reports', {})
    costs = _frame_costs(result, reports)
    quality = _quality_reference(config)
    rows = []
    for record, frame, pose in zip(result.records, result.frames,
        trajectory.poses):
        oracle = render_frame(pose, intr, scene, settings)
        costs_i = costs[record.index]
        row = MetricsRow(record.index, record.kind.value, psnr(frame,
            oracle), record.warped_fraction, record.disoccluded_fraction,
            record.void_fraction, record.max_angle, int(round(costs_i[
            'cycles'])), result.timeline.frame_energy[record.index],
            costs_i['streaming_bytes'] / costs_i['dram_bytes'] if costs_i[
            'dram_bytes'] else 0.0, int(round(costs_i['dram_bytes'])),
            costs_i['conflict_rate'], result.timeline.frame_completion[
            record.index])
        if intr.width >= 2 and intr.height >= 2:
            row.psnr_downsampled = psnr(render_downsampled(pose, intr,
                scene, 2, settings), oracle)
        if quality is not None:
            truth = render_frame(pose, intr, scene, quality)
            row.psnr_drop = psnr(oracle, truth) - psnr(frame, truth)
        rows.append(row)
    summary = _summarize(rows, result)
    experiment = ExperimentResult(config, rows, summary, result, dict(reports))
    if write:
        experiment.files = write_artifacts(experiment)
    log_experiment_complete(True, f'{config.scene.kind}/{config.pipeline.mode}'
        , time.time() - start)
    return experiment


def write_artifacts(experiment: ExperimentResult) -> List[str]:
    """metrics.csv, summary.csv, timeline.csv, config.ini and the frames."""
    config = experiment.config
    out = config.output.directory
    os.makedirs(out, exist_ok=True)
    files = [os.path.join(out, name) for name in ('metrics.csv',
        'summary.csv', 'timeline.csv', 'config.ini')]
    write_csv(files[0], [row.as_row() for row in experiment.rows],
        METRICS_HEADER)
    write_csv(files[1], [experiment.summary])
    experiment.schedule.timeline.write_csv(files[2])
    manager = ConfigManager()
    manager.config = config
    manager.save(files[3])
    if config.output.write_frames:
        for index, frame in enumerate(experiment.schedule.frames):
            path = os.path.join(out, f'frame_{index:04d}.ppm')
            write_ppm(frame, path)
            files.append(path)
    logger.debug(f'Wrote {len(files)} artifacts to {out}')
    return files


def sweep(config: ExperimentConfig, phis: Sequence[float], write: bool = True
    ) -> List[Dict[str, Any]]:
    """
    One experiment per angle threshold (degrees); writes ``sweep.csv``.

    Returns:
        One row per threshold with the mean warped fraction and PSNR.
    """
    rows = []
    for phi in phis:
        run_config = copy.deepcopy(config)
        run_config.runtime.angle_threshold_deg = float(phi)
        experiment = run_experiment(run_config, write=False)
        s = experiment.summary
        rows.append({'phi_deg': float(phi), 'mean_warped_fraction': s[
            'mean_warped_fraction'], 'mean_psnr': s['mean_psnr'],
            'mean_psnr_warped': s['mean_psnr_warped'],
            'mean_psnr_drop': s['mean_psnr_drop'], 'fallbacks': s[
            'fallbacks'], 'mean_energy': s['mean_energy']})
    if write:
        write_csv(os.path.join(config.output.directory, 'sweep.csv'), rows)
    return rows


def _check_comparable(a: ExperimentConfig, b: ExperimentConfig) -> None:
    if asdict(a.scene) != asdict(b.scene):
        raise TrajectoryMismatchError('Configs render different scenes')
    if asdict(a.camera) != asdict(b.camera):
        raise TrajectoryMismatchError('Configs use different cameras')
    ta, tb = a.build_trajectory(), b.build_trajectory()
    if len(ta) != len(tb):
        raise TrajectoryMismatchError(
            f'Trajectories differ in length: {len(ta)} vs {len(tb)}')
    for pa, pb in zip(ta.poses, tb.poses):
        if not (np.allclose(pa.rotation, pb.rotation) and np.allclose(pa.
            translation, pb.translation) and math.isclose(pa.timestamp, pb.
            timestamp)):
            raise TrajectoryMismatchError('Trajectories differ in their poses')


def _ratio(b: float, a: float) -> float:
    if a == 0:
        return 1.0 if b == 0 else math.inf
    return b / a


def _dram_totals(experiment: ExperimentResult) -> Dict[str, float]:
    reports = [r for r in experiment.reports.values() if r is not None]
    return {'energy': sum(r.energy_dram for r in reports), 'accesses': sum(
        r.dram.accesses for r in reports)}


def compare_modes(config_a: ExperimentConfig, config_b: ExperimentConfig,
    output: Optional[str] = None) -> List[Dict[str, Any]]:
    """
    Runs A and B and writes B/A ratios of cycles, energy and DRAM traffic per
    frame, then one aggregate row.

    Raises:
        TrajectoryMismatchError: The configs differ in scene, camera or poses.
    """
    _check_comparable(config_a, config_b)
    a = run_experiment(config_a, write=False)
    b = run_experiment(config_b, write=False)
    rows = []
    for ra, rb in zip(a.rows, b.rows):
        rows.append({'frame': str(ra.frame_index), 'cycles_ratio': _ratio(rb
            .cycles, ra.cycles), 'energy_ratio': _ratio(rb.energy, ra.
            energy), 'dram_ratio': _ratio(rb.dram_bytes, ra.dram_bytes)})
    dram_a, dram_b = _dram_totals(a), _dram_totals(b)
    split = split_dram_saving(dram_a['energy'], dram_a['accesses'], dram_b[
        'energy'], dram_b['accesses'])
    aggregate = {'frame': 'all', 'cycles_ratio': _ratio(b.summary[
        'total_cycles'], a.summary['total_cycles']), 'energy_ratio': _ratio
        (b.summary['total_energy'], a.summary['total_energy']),
        'dram_ratio': _ratio(sum(r.dram_bytes for r in b.rows), sum(r.
        dram_bytes for r in a.rows)), 'local_energy_ratio': _ratio(b.
        summary['local_energy'], a.summary['local_energy'])}
    aggregate.update(split)
    rows.append(aggregate)
    header = ['frame', 'cycles_ratio', 'energy_ratio', 'dram_ratio',
        'local_energy_ratio', 'dram_energy_saving', 'traffic_reduction',
        'streaming_conversion']
    write_csv(os.path.join(output or config_a.output.directory,
        'comparison.csv'), rows, header)
    return rows
