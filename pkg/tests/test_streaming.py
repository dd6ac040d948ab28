from collections import Counter
import numpy as np
import pytest
from core.memsim import classify_dram
from core.nerf import corner_lookup, pixel_grid, ray_bundle, render_frame, structured_sample_points
from core.octree import merge_octree
from core.scene import Intrinsics, generate_scene
from core.streaming import DEFAULT_CAPACITY, MVoxelGrid, build_mvoxels, partition_levels, run_stream, stream_render
from utils.errors import CapacityError

ORACLE_TOLERANCE = 0.0001


def loads_per_block(trace):
    return Counter(event.tag for event in trace.events(['dram_stream']))


@pytest.mark.parametrize('kind', ['structured', 'unstructured'])
@pytest.mark.parametrize('seed', [1, 2, 3])
def test_streaming_matches_pixel_centric(kind, seed, pose, settings):
    scene = generate_scene(kind, seed=seed)
    intr = Intrinsics.from_fov(32, 32, 50.0)
    frame, _ = stream_render(pose, intr, scene, settings=settings)
    oracle = render_frame(pose, intr, scene, settings)
    assert np.max(np.abs(frame.color - oracle.color)) <= ORACLE_TOLERANCE
    finite = np.isfinite(oracle.depth)
    assert np.array_equal(np.isfinite(frame.depth), finite)
    assert np.allclose(frame.depth[finite], oracle.depth[finite], atol=
        ORACLE_TOLERANCE)


@pytest.mark.parametrize('kind', ['structured', 'unstructured'])
def test_every_block_is_loaded_once(kind, structured_scene,
    unstructured_scene, pose, intr, settings):
    scene = structured_scene if kind == 'structured' else unstructured_scene
    result = run_stream(pose, intr, scene, settings=settings)
    loads = loads_per_block(result.trace)
    assert loads
    assert max(loads.values()) == 1
    assert len(loads) == result.stats.blocks_loaded


def test_feature_reads_are_streaming(structured_scene, pose, intr, settings):
    plan = partition_levels(structured_scene, DEFAULT_CAPACITY)
    result = run_stream(pose, intr, structured_scene, plan, settings=settings)
    dram = classify_dram(result.trace)
    assert result.trace.count('dram_random') == 0
    assert dram.streaming_fraction >= 0.99


def test_mvoxel_size_fits_capacity(structured_scene):
    mv = build_mvoxels(structured_scene, DEFAULT_CAPACITY)
    assert mv.size == 8
    assert mv.n_mvoxels == 64
    assert int(mv.nbytes.max()) <= DEFAULT_CAPACITY
    assert mv.total_bytes == structured_scene.features.size * 2


def test_capacity_too_small(structured_scene):
    with pytest.raises(CapacityError):
        build_mvoxels(structured_scene, 100)


def test_edge_blocks_are_truncated():
    mv = MVoxelGrid((5, 4, 4), channels=4, size=4)
    assert mv.n_mvoxels == 2
    assert list(mv.block_vertices) == [64, 16]
    assert mv.bases[1] == 64 * 4 * 2


def test_mvoxel_layout_is_channel_major():
    mv = MVoxelGrid((4, 4, 4), channels=3, size=2, base_address=1000)
    blocks, local = mv.locate(np.array([0, 1, 21]))
    assert list(blocks) == [0, 0, 0]
    assert list(local) == [0, 1, 7]
    assert mv.address(0, 1, 2) == 1000 + (2 * 8 + 1) * 2


def test_block_features_follow_local_order(structured_scene):
    mv = build_mvoxels(structured_scene, DEFAULT_CAPACITY)
    vertex = structured_scene.finest.vertex_index(9, 2, 13)
    block, local = mv.locate(np.array([vertex]))
    data = mv.block_features(structured_scene.features, int(block[0]))
    assert np.array_equal(data[:, int(local[0])], structured_scene.features
        [9, 2, 13])


def test_rit_covers_exactly_the_pixel_centric_reads(structured_scene, pose,
    intr, settings):
    result = run_stream(pose, intr, structured_scene, settings=settings)
    level = structured_scene.finest
    origins, directions, _ = ray_bundle(pose, intr, pixel_grid(intr))
    rows = []
    for ray_id in range(intr.n_pixels):
        ts, positions = structured_sample_points(origins[ray_id],
            directions[ray_id], structured_scene, settings.n_samples)
        if not len(ts):
            continue
        ids, _ = corner_lookup(level, positions)
        for s in range(len(ts)):
            for vertex in ids[s]:
                rows.append((ray_id, s, 0, int(vertex)))
    expected = np.array(sorted(rows), dtype=np.int64)
    assert np.array_equal(result.rit.requirements(), expected)


def test_sample_spanning_blocks_is_split(structured_scene, pose, intr,
    settings):
    result = run_stream(pose, intr, structured_scene, settings=settings)
    rows = result.rit.streamed_rows_per_sample()
    assert np.all(rows[rows > 0] == 8)
    multi = [entry for entry in result.rit.entries.values() if entry.n_rows %
        8 != 0]
    assert multi


def test_rows_are_executed_or_skipped(structured_scene, pose, intr, settings):
    result = run_stream(pose, intr, structured_scene, settings=settings)
    total = sum(entry.n_rows for entry in result.rit.entries.values())
    assert result.stats.rows_executed + result.stats.rows_skipped == total
    assert result.stats.rows_skipped > 0


def test_low_utilization_level_reverts(structured_scene, pose, intr, settings):
    plan = partition_levels(structured_scene, DEFAULT_CAPACITY, touched=[np
        .empty(0, dtype=np.int64)])
    assert plan.reverted_levels == [0]
    assert plan.levels[0].utilization == 0.0
    result = run_stream(pose, intr, structured_scene, plan, settings=settings)
    oracle = render_frame(pose, intr, structured_scene, settings)
    assert result.stats.blocks_loaded == 0
    assert result.trace.count('dram_random') > 0
    assert np.max(np.abs(result.frame.color - oracle.color)
        ) <= ORACLE_TOLERANCE


def test_multi_level_grid_streams_every_level(pose, intr, settings):
    grid = generate_scene('structured', seed=2, levels=2)
    plan = partition_levels(grid, DEFAULT_CAPACITY)
    assert plan.streamed_levels == [0, 1]
    assert plan.levels[1].base_address == plan.levels[0].nbytes
    result = run_stream(pose, intr, grid, plan, settings=settings)
    oracle = render_frame(pose, intr, grid, settings)
    assert np.max(np.abs(result.frame.color - oracle.color)
        ) <= ORACLE_TOLERANCE


def test_octree_leaves_are_streamed(unstructured_scene, pose, intr, settings):
    tree = merge_octree(unstructured_scene, DEFAULT_CAPACITY)
    result = run_stream(pose, intr, unstructured_scene, tree, settings=settings)
    assert result.trace.count('dram_random') == 0
    assert result.trace.count('sram_read') == result.stats.rows_executed
    assert result.stats.blocks_loaded <= tree.n_leaves


def test_subset_of_pixels(structured_scene, pose, intr, settings):
    pixels = np.array([[8, 8], [0, 0], [15, 3]])
    result = run_stream(pose, intr, structured_scene, settings=settings,
        pixels=pixels)
    oracle = render_frame(pose, intr, structured_scene, settings)
    assert result.frame is None
    for i, (u, v) in enumerate(pixels):
        assert np.allclose(result.colors[i], oracle.color[v, u], atol=
            ORACLE_TOLERANCE)
