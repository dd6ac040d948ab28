"""
Octree bucketing of Gaussian points into buffer-sized leaves.

Points are first binned into a uniform grid of cells at ``base_depth``; the
tree is then merged bottom-up, replacing a parent's 2x2x2 children with one
leaf whenever all of them are leaves and their points fit the buffer
together. Leaves are laid out back to back in DRAM in linear cell order.
"""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging
import numpy as np
from core.memtrace import BYTES_PER_VALUE, VALUES_PER_POINT
from core.scene import Aabb, GaussianCloud
from utils.errors import CapacityError
logger = logging.getLogger(__name__)

MAX_DEPTH = 8
POINT_BYTES = VALUES_PER_POINT * BYTES_PER_VALUE

Cell = Tuple[int, int, int]


@dataclass
class OctreeLeaf:
    leaf_id: int
    depth: int
    cell: Cell
    points: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    base: int = 0
    nbytes: int = 0

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass
class MergedOctree:
    bounds: Aabb
    base_depth: int
    capacity: int
    point_bytes: int
    leaves: List[OctreeLeaf]
    n_points: int
    mean_points_per_leaf_before: float
    mean_points_per_leaf_after: float
    point_leaf: np.ndarray = field(repr=False, default=None)
    point_local: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.point_leaf = np.full(self.n_points, -1, dtype=np.int64)
        self.point_local = np.full(self.n_points, -1, dtype=np.int64)
        for leaf in self.leaves:
            self.point_leaf[leaf.points] = leaf.leaf_id
            self.point_local[leaf.points] = np.arange(leaf.n_points)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def total_bytes(self) -> int:
        return sum(leaf.nbytes for leaf in self.leaves)

    def locate(self, point_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(leaf id, index within the leaf) of each point."""
        point_ids = np.asarray(point_ids, dtype=np.int64)
        return self.point_leaf[point_ids], self.point_local[point_ids]


def _base_cells(positions: np.ndarray, bounds: Aabb, depth: int) -> np.ndarray:
    n = 1 << depth
    extent = np.maximum(bounds.hi - bounds.lo, 1e-12)
    cells = np.floor((positions - bounds.lo) / extent * n).astype(np.int64)
    return np.clip(cells, 0, n - 1)


def _bin_points(cells: np.ndarray) -> Dict[Cell, np.ndarray]:
    order = np.lexsort((np.arange(len(cells)), cells[:, 2], cells[:, 1],
        cells[:, 0]))
    binned: Dict[Cell, List[int]] = defaultdict(list)
    for index in order:
        binned[tuple(int(c) for c in cells[index])].append(int(index))
    return {cell: np.array(ids, dtype=np.int64) for cell, ids in binned.items()}


def _minimal_depth(positions: np.ndarray, bounds: Aabb, capacity: int,
    point_bytes: int) -> int:
    for depth in range(MAX_DEPTH + 1):
        cells = _base_cells(positions, bounds, depth)
        _, counts = np.unique(cells, axis=0, return_counts=True)
        if counts.max() * point_bytes <= capacity:
            return depth
    raise CapacityError(
        f'Points too dense: a depth-{MAX_DEPTH} cell still exceeds {capacity} bytes')


def merge_octree(cloud: GaussianCloud, capacity: int, base_depth:
    Optional[int] = None, point_bytes: int = POINT_BYTES) -> MergedOctree:
    """
    Builds uniform leaves at ``base_depth`` and merges sparse siblings.

    Args:
        cloud: Gaussian points to bucket.
        capacity: On-chip feature buffer size in bytes.
        base_depth: Depth of the uniform leaves; defaults to the smallest
            depth at which every leaf fits ``capacity``.
        point_bytes: DRAM footprint of one point.

    Returns:
        MergedOctree whose non-empty leaves each fit ``capacity``.
    """
    if point_bytes > capacity:
        raise CapacityError(
            f'One point needs {point_bytes} bytes, buffer holds {capacity}')
    if len(cloud) == 0:
        raise CapacityError('Cannot bucket an empty cloud')
    bounds = cloud.bounds()
    positions = cloud.positions.astype(np.float64)
    if base_depth is None:
        base_depth = _minimal_depth(positions, bounds, capacity, point_bytes)
    elif not 0 <= base_depth <= MAX_DEPTH:
        raise CapacityError(f'Octree depth must be in [0, {MAX_DEPTH}], got {base_depth}')
    current = {cell: (ids, True) for cell, ids in _bin_points(_base_cells(
        positions, bounds, base_depth)).items()}
    too_dense = [c for c, (ids, _) in current.items() if len(ids) *
        point_bytes > capacity]
    if too_dense:
        raise CapacityError(
            f'{len(too_dense)} depth-{base_depth} cells exceed {capacity} bytes')
    before = len(cloud) / len(current)
    final: List[Tuple[int, Cell, np.ndarray]] = []
    for depth in range(base_depth, 0, -1):
        groups: Dict[Cell, List[Cell]] = defaultdict(list)
        for cell in sorted(current):
            groups[tuple(c >> 1 for c in cell)].append(cell)
        parents = {}
        for parent, cells in groups.items():
            nodes = [current[c] for c in cells]
            mergeable = all(is_leaf for _, is_leaf in nodes)
            if mergeable and sum(len(ids) for ids, _ in nodes
                ) * point_bytes <= capacity:
                parents[parent] = (np.sort(np.concatenate([ids for ids, _ in
                    nodes])), True)
                continue
            for cell, (ids, is_leaf) in zip(cells, nodes):
                if is_leaf:
                    final.append((depth, cell, ids))
            parents[parent] = (None, False)
        current = parents
    for cell, (ids, is_leaf) in current.items():
        if is_leaf:
            final.append((0, cell, ids))
    leaves = _layout_leaves(final, bounds, base_depth, point_bytes)
    tree = MergedOctree(bounds, base_depth, capacity, point_bytes, leaves,
        len(cloud), before, len(cloud) / len(leaves))
    logger.debug(
        f'Octree depth {base_depth}: {len(leaves)} leaves, {before:.1f} -> {tree.mean_points_per_leaf_after:.1f} points per leaf'
        )
    return tree


def _layout_leaves(final: List[Tuple[int, Cell, np.ndarray]], bounds: Aabb,
    base_depth: int, point_bytes: int) -> List[OctreeLeaf]:
    """Orders leaves by their lowest base cell and assigns DRAM bases."""
    extent = bounds.hi - bounds.lo

    def key(item):
        depth, cell, _ = item
        shift = base_depth - depth
        return tuple(c << shift for c in cell)
    leaves, base = [], 0
    for leaf_id, (depth, cell, ids) in enumerate(sorted(final, key=key)):
        size = extent / (1 << depth)
        lo = bounds.lo + np.array(cell) * size
        nbytes = len(ids) * point_bytes
        leaves.append(OctreeLeaf(leaf_id, depth, cell, ids, lo, lo + size,
            base, nbytes))
        base += nbytes
    return leaves
