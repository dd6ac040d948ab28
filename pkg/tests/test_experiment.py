import copy
import math
import os
import pytest
from config_manager import ExperimentConfig
from core.runtime import PixelCostModel
from experiment_manager import METRICS_HEADER, compare_modes, run_experiment, sweep
from utils.errors import TrajectoryMismatchError
from utils.io_helpers import read_csv, read_ppm


def test_run_writes_artifacts(small_config):
    experiment = run_experiment(small_config)
    out = small_config.output.directory
    for name in ('metrics.csv', 'summary.csv', 'timeline.csv', 'config.ini'):
        assert os.path.isfile(os.path.join(out, name))
    rows = read_csv(os.path.join(out, 'metrics.csv'))
    assert len(rows) == small_config.trajectory.frames
    assert list(rows[0].keys()) == ['schema_version'] + METRICS_HEADER
    assert [row['frame_index'] for row in rows] == ['0', '1', '2', '3', '4']
    frame = read_ppm(os.path.join(out, 'frame_0004.ppm'))
    assert frame.shape == (8, 8, 3)
    assert experiment.summary['frames'] == 5
    assert len(experiment.files) == 4 + 5


def test_first_frame_is_a_full_render(small_config):
    experiment = run_experiment(small_config, write=False)
    first = experiment.rows[0]
    assert first.kind == 'fallback_full'
    assert first.psnr == math.inf
    assert all(row.energy > 0 for row in experiment.rows)
    assert experiment.summary['references'] >= 1


def test_zero_threshold_renders_every_frame(small_config):
    small_config.runtime.angle_threshold_deg = 0.0
    experiment = run_experiment(small_config)
    assert all(row.psnr == math.inf for row in experiment.rows)
    assert all(row.warped_fraction == 0.0 for row in experiment.rows)
    assert experiment.summary['fallbacks'] == 5
    rows = read_csv(os.path.join(small_config.output.directory,
        'metrics.csv'))
    assert {row['psnr'] for row in rows} == {'INF'}


def test_run_is_deterministic(small_config):
    a = run_experiment(small_config, write=False)
    b = run_experiment(copy.deepcopy(small_config), write=False)
    assert [row.as_row() for row in a.rows] == [row.as_row() for row in b.rows]


def test_quality_reference_fills_psnr_drop(small_config):
    small_config.render.reference_samples = 24
    experiment = run_experiment(small_config, write=False)
    assert not any(math.isnan(row.psnr_drop) for row in experiment.rows)


def test_sweep_rows(small_config):
    rows = sweep(small_config, [0.0, 30.0])
    assert [row['phi_deg'] for row in rows] == [0.0, 30.0]
    assert rows[0]['fallbacks'] == 5
    assert rows[0]['mean_warped_fraction'] == 0.0
    assert rows[1]['mean_warped_fraction'] >= rows[0]['mean_warped_fraction']
    written = read_csv(os.path.join(small_config.output.directory,
        'sweep.csv'))
    assert len(written) == 2


def test_compare_identical_configs(small_config, tmp_path):
    rows = compare_modes(small_config, copy.deepcopy(small_config), str(
        tmp_path / 'cmp'))
    assert len(rows) == small_config.trajectory.frames + 1
    for row in rows:
        assert row['cycles_ratio'] == pytest.approx(1.0)
        assert row['energy_ratio'] == pytest.approx(1.0)
        assert row['dram_ratio'] == pytest.approx(1.0)
    assert rows[-1]['frame'] == 'all'
    assert rows[-1]['dram_energy_saving'] == pytest.approx(0.0)
    assert os.path.isfile(tmp_path / 'cmp' / 'comparison.csv')


def test_compare_pipeline_modes(small_config, tmp_path):
    potamoi = copy.deepcopy(small_config)
    potamoi.pipeline.mode = 'potamoi'
    baseline = copy.deepcopy(small_config)
    baseline.pipeline.mode = 'baseline_pixel_centric'
    rows = compare_modes(baseline, potamoi, str(tmp_path))
    assert len(rows) == 6
    aggregate = rows[-1]
    assert aggregate['dram_energy_saving'] == pytest.approx(aggregate[
        'traffic_reduction'] + aggregate['streaming_conversion'])


def test_compare_rejects_different_trajectories(small_config):
    other = copy.deepcopy(small_config)
    other.trajectory.frames = 6
    with pytest.raises(TrajectoryMismatchError):
        compare_modes(small_config, other)
    other = copy.deepcopy(small_config)
    other.scene.seed = 9
    with pytest.raises(TrajectoryMismatchError):
        compare_modes(small_config, other)


def test_summary_means_match_metrics_rows(small_config):
    small_config.runtime.angle_threshold_deg = 30.0
    run_experiment(small_config)
    out = small_config.output.directory
    rows = read_csv(os.path.join(out, 'metrics.csv'))
    summary = read_csv(os.path.join(out, 'summary.csv'))[0]

    def column(key):
        return [float(row[key]) for row in rows]
    psnrs = column('psnr')
    assert float(summary['mean_psnr']) == sum(psnrs) / len(psnrs)
    finite = [v for v in psnrs if not math.isinf(v)]
    expected = sum(finite) / len(finite) if finite else math.inf
    assert float(summary['mean_psnr_warped']) == pytest.approx(expected)
    for key in ('warped_fraction', 'disoccluded_fraction', 'energy'):
        values = column(key)
        assert float(summary[f'mean_{key}']) == pytest.approx(sum(values) /
            len(values))


def _window_psnr(seed, window):
    config = ExperimentConfig()
    config.scene.seed = seed
    config.render.samples = 24
    config.trajectory.frames = 33
    config.runtime.window = window
    config.runtime.angle_threshold_deg = 30.0
    experiment = run_experiment(config, write=False, cost_model=
        PixelCostModel())
    return experiment.summary['mean_psnr_warped']


@pytest.mark.parametrize('seed', [1, 2, 3])
def test_shorter_window_warps_more_accurately(seed):
    assert _window_psnr(seed, 6) > _window_psnr(seed, 16)
