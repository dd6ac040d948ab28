import numpy as np
import pytest
from core.memsim import classify_dram
from core.nerf import render_frame
from core.octree import POINT_BYTES, merge_octree
from core.scene import GaussianCloud
from core.streaming import run_stream
from utils.errors import CapacityError

CAPACITY = 4 * 1024


@pytest.fixture(scope='module')
def tree(unstructured_scene):
    return merge_octree(unstructured_scene, CAPACITY)


def test_merging_fills_leaves(tree):
    assert tree.mean_points_per_leaf_after > tree.mean_points_per_leaf_before


def test_no_leaf_exceeds_capacity(tree):
    assert all(leaf.nbytes <= CAPACITY for leaf in tree.leaves)
    assert all(leaf.n_points > 0 for leaf in tree.leaves)


def test_every_point_in_exactly_one_leaf(tree, unstructured_scene):
    ids = np.concatenate([leaf.points for leaf in tree.leaves])
    assert np.array_equal(np.sort(ids), np.arange(len(unstructured_scene)))
    leaf_ids, local = tree.locate(np.arange(len(unstructured_scene)))
    assert np.all(leaf_ids >= 0)
    for point in (0, 100, 4095):
        assert tree.leaves[leaf_ids[point]].points[local[point]] == point


def test_leaves_are_packed_back_to_back(tree):
    expected = 0
    for leaf in tree.leaves:
        assert leaf.base == expected
        expected += leaf.nbytes
    assert tree.total_bytes == len(tree.point_leaf) * POINT_BYTES


def test_leaf_boxes_contain_their_points(tree, unstructured_scene):
    positions = unstructured_scene.positions.astype(np.float64)
    for leaf in tree.leaves[:20]:
        inside = positions[leaf.points]
        assert np.all(inside >= leaf.lo - 1e-09)
        assert np.all(inside <= leaf.hi + 1e-09)


def test_one_point_must_fit():
    cloud = GaussianCloud(np.zeros((1, 3)), [0.1], [0.5], np.ones((1, 3)))
    with pytest.raises(CapacityError):
        merge_octree(cloud, POINT_BYTES - 1)


def test_explicit_depth_too_dense(unstructured_scene):
    with pytest.raises(CapacityError):
        merge_octree(unstructured_scene, CAPACITY, base_depth=0)


def test_streaming_reads_one_random_access_per_leaf(tree,
    unstructured_scene, pose, intr, settings):
    result = run_stream(pose, intr, unstructured_scene, tree, settings=settings)
    dram = classify_dram(result.trace)
    assert dram.random_accesses == result.stats.blocks_loaded
    oracle = render_frame(pose, intr, unstructured_scene, settings)
    assert np.allclose(result.frame.color, oracle.color, atol=0.0001)
