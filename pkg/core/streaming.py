"""
Memory-centric fully-streaming rendering.

Instead of walking rays and fetching features at random, the renderer walks
DRAM: features are grouped into MVoxels (or octree leaves for point clouds)
that fit the on-chip buffer, a Ray Index Table lists for every block the ray
samples that need it, and each block is loaded exactly once, in address
order, while per-ray partial composites wait for their samples to complete.

The result matches ``core.nerf.render_frame``: samples are decoded once all
their corners have been accumulated and composited strictly near to far
through the same ``CompositeState``.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging
import math
import time
import numpy as np
from core.memtrace import BYTES_PER_VALUE, MemTrace
from core.nerf import CompositeState, Ray, RenderSettings, alpha_from_density, corner_lookup, decode_structured, gaussian_alpha, pixel_grid, ray_bundle, segment_lengths, structured_sample_points, unstructured_hits
from core.octree import MergedOctree, merge_octree
from core.scene import CameraPose, Frame, GaussianCloud, Intrinsics, SceneRep, VoxelGrid
from utils.errors import CapacityError
from utils.logger import log_render_event, log_stream_summary
logger = logging.getLogger(__name__)

TILE = 8
DEFAULT_CAPACITY = 32 * 1024
DEFAULT_UTILIZATION_THRESHOLD = 0.05


class MVoxelGrid:
    """
    Partition of one grid level into m x m x m vertex blocks.

    Blocks are numbered in linear (gx, gy, gz) order and stored back to back
    from ``base_address``; inside a block values are channel-major, i.e.
    channel c of local vertex l sits at ``(c * n_block + l) * bytes_per_value``.
    Edge blocks are truncated, so nothing is duplicated.
    """

    def __init__(self, dims: Tuple[int, int, int], channels: int, size:
        int, bytes_per_value: int = BYTES_PER_VALUE, base_address: int = 0):
        self.dims = tuple(int(n) for n in dims)
        self.channels = int(channels)
        self.size = int(size)
        self.bytes_per_value = int(bytes_per_value)
        self.base_address = int(base_address)
        self.counts = tuple(math.ceil(n / self.size) for n in self.dims)
        gx, gy, gz = np.meshgrid(*[np.arange(n) for n in self.counts],
            indexing='ij')
        self.starts = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3
            ) * self.size
        self.block_dims = np.minimum(self.starts + self.size, np.array(self
            .dims)) - self.starts
        self.block_vertices = np.prod(self.block_dims, axis=1)
        self.nbytes = self.block_vertices * self.channels * self.bytes_per_value
        self.bases = self.base_address + np.concatenate([[0], np.cumsum(
            self.nbytes)[:-1]]).astype(np.int64)

    @property
    def n_mvoxels(self) -> int:
        return len(self.bases)

    @property
    def total_bytes(self) -> int:
        return int(self.nbytes.sum())

    @property
    def vector_bytes(self) -> int:
        return self.channels * self.bytes_per_value

    def locate(self, vertex_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(MVoxel id, local vertex index) of level vertex ids."""
        vertex_ids = np.asarray(vertex_ids, dtype=np.int64)
        _, ny, nz = self.dims
        coords = np.stack([vertex_ids // (ny * nz), vertex_ids // nz % ny,
            vertex_ids % nz], axis=-1)
        g = coords // self.size
        _, cy, cz = self.counts
        mvoxels = (g[:, 0] * cy + g[:, 1]) * cz + g[:, 2]
        local = coords - g * self.size
        b = self.block_dims[mvoxels]
        return mvoxels, (local[:, 0] * b[:, 1] + local[:, 1]) * b[:, 2
            ] + local[:, 2]

    def block_features(self, features: np.ndarray, mvoxel: int) -> np.ndarray:
        """Channel-major (C, n_block) copy of one block of a (Nx, Ny, Nz, C) array."""
        x0, y0, z0 = self.starts[mvoxel]
        x1, y1, z1 = self.starts[mvoxel] + self.block_dims[mvoxel]
        block = features[x0:x1, y0:y1, z0:z1].reshape(-1, self.channels)
        return np.ascontiguousarray(block.T)

    def address(self, mvoxel: int, local: int, channel: int) -> int:
        return int(self.bases[mvoxel] + (channel * self.block_vertices[
            mvoxel] + local) * self.bytes_per_value)


def build_mvoxels(grid: VoxelGrid, capacity: int, bytes_per_value: int =
    BYTES_PER_VALUE, level: int = -1, base_address: int = 0) -> MVoxelGrid:
    """
    Picks the largest power-of-two MVoxel edge whose block fits ``capacity``.

    The edge never exceeds the smallest power of two covering the grid.

    Raises:
        CapacityError: Not even a 2x2x2 block fits.
    """
    grid_level = grid.levels[level]
    vector_bytes = grid_level.channels * bytes_per_value
    if 8 * vector_bytes > capacity:
        raise CapacityError(
            f'A 2x2x2 MVoxel needs {8 * vector_bytes} bytes, buffer holds {capacity}'
            )
    cap = 1 << max(1, math.ceil(math.log2(max(grid_level.dims))))
    size = 2
    while size * 2 <= cap and (size * 2) ** 3 * vector_bytes <= capacity:
        size *= 2
    return MVoxelGrid(grid_level.dims, grid_level.channels, size,
        bytes_per_value, base_address)


@dataclass
class LevelPlan:
    level: int
    streamed: bool
    mvoxels: MVoxelGrid
    base_address: int
    utilization: float = 1.0

    @property
    def nbytes(self) -> int:
        return self.mvoxels.total_bytes


@dataclass(frozen=True)
class Block:
    """One DRAM block loaded as a unit: an MVoxel or an octree leaf."""
    block_id: int
    level: int
    index: int
    base: int
    nbytes: int


class StreamPlan:
    """Per-level streaming decisions; levels follow each other in DRAM."""

    def __init__(self, levels: List[LevelPlan]):
        self.levels = levels
        self.blocks: List[Block] = []
        self.block_offset: List[int] = []
        for plan in levels:
            self.block_offset.append(len(self.blocks))
            if not plan.streamed:
                continue
            mv = plan.mvoxels
            for index in range(mv.n_mvoxels):
                self.blocks.append(Block(len(self.blocks), plan.level, index,
                    int(mv.bases[index]), int(mv.nbytes[index])))

    @property
    def streamed_levels(self) -> List[int]:
        return [plan.level for plan in self.levels if plan.streamed]

    @property
    def reverted_levels(self) -> List[int]:
        return [plan.level for plan in self.levels if not plan.streamed]

    @property
    def total_bytes(self) -> int:
        return sum(plan.nbytes for plan in self.levels)

    def locate(self, level: int, vertex_ids: np.ndarray) -> Tuple[np.
        ndarray, np.ndarray]:
        mvoxels, local = self.levels[level].mvoxels.locate(vertex_ids)
        return mvoxels + self.block_offset[level], local


def octree_blocks(tree: MergedOctree) -> List[Block]:
    return [Block(leaf.leaf_id, 0, leaf.leaf_id, leaf.base, leaf.nbytes) for
        leaf in tree.leaves]


def partition_levels(grid: VoxelGrid, capacity: int, touched: Optional[
    Sequence[np.ndarray]] = None, threshold: float =
    DEFAULT_UTILIZATION_THRESHOLD, bytes_per_value: int = BYTES_PER_VALUE
    ) -> StreamPlan:
    """
    Decides per level whether to stream it or revert to random access.

    Utilization is the number of distinct touched vertices divided by the
    vertices of the MVoxels that contain them. Levels below ``threshold``
    are reverted; without ``touched`` every level is streamed.
    """
    levels, offset = [], 0
    for index in range(len(grid.levels)):
        mv = build_mvoxels(grid, capacity, bytes_per_value, level=index,
            base_address=offset)
        utilization = 1.0
        if touched is not None:
            ids = np.unique(np.asarray(touched[index], dtype=np.int64))
            if len(ids):
                blocks, _ = mv.locate(ids)
                utilization = len(ids) / float(mv.block_vertices[np.unique(
                    blocks)].sum())
            else:
                utilization = 0.0
        levels.append(LevelPlan(index, utilization >= threshold, mv, offset,
            utilization))
        offset += mv.total_bytes
    plan = StreamPlan(levels)
    if plan.reverted_levels:
        logger.debug(f'Reverted levels {plan.reverted_levels} to random access')
    return plan


def touched_vertices(rays: Sequence[Ray], grid: VoxelGrid, settings:
    Optional[RenderSettings] = None) -> List[np.ndarray]:
    """Distinct vertex ids per level that the rays' samples interpolate from."""
    settings = settings or RenderSettings()
    _, positions, _ = _structured_samples(rays, grid, settings.n_samples)
    return [np.unique(corner_lookup(level, positions)[0]) for level in grid
        .levels]


@dataclass
class RitEntry:
    """Work rows of one block; rows of a sample are contiguous."""
    block: int
    level: int
    sample_ids: np.ndarray
    vertex_ids: np.ndarray
    local_ids: np.ndarray
    weights: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.sample_ids)

    @property
    def n_items(self) -> int:
        return len(np.unique(self.sample_ids))


@dataclass
class RayIndexTable:
    """
    Samples of all rays plus the per-block work rows.

    Rays are kept in ray-group order (8x8 tiles, then row-major inside a
    tile); ``offsets[r]:offsets[r + 1]`` are ray r's samples, near to far.
    Structured rows carry one grid corner each; unstructured rows one point.
    """
    kind: str
    ray_ids: np.ndarray
    offsets: np.ndarray
    ts: np.ndarray
    distances: np.ndarray
    entries: Dict[int, RitEntry]
    reverted: List[RitEntry] = field(default_factory=list)
    executed: Dict[int, int] = field(default_factory=dict)

    @property
    def n_rays(self) -> int:
        return len(self.ray_ids)

    @property
    def n_samples(self) -> int:
        return len(self.ts)

    @property
    def sample_ray(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_rays), np.diff(self.offsets))

    @property
    def n_items(self) -> int:
        return sum(entry.n_items for entry in self.entries.values())

    def streamed_rows_per_sample(self) -> np.ndarray:
        counts = np.zeros(self.n_samples, dtype=np.int64)
        for entry in self.entries.values():
            counts += np.bincount(entry.sample_ids, minlength=self.n_samples)
        return counts

    def requirements(self) -> np.ndarray:
        """
        Sorted rows (ray id, sample order, level, vertex or point id) over
        streamed and reverted work.
        """
        sample_ray = self.sample_ray
        rows = []
        for entry in list(self.entries.values()) + self.reverted:
            rank = sample_ray[entry.sample_ids]
            rows.append(np.stack([self.ray_ids[rank], entry.sample_ids -
                self.offsets[rank], np.full(entry.n_rows, entry.level),
                entry.vertex_ids], axis=1))
        if not rows:
            return np.empty((0, 4), dtype=np.int64)
        table = np.concatenate(rows).astype(np.int64)
        return table[np.lexsort(table.T[::-1])]


def _group_order(rays: Sequence[Ray]) -> List[int]:
    return sorted(range(len(rays)), key=lambda i: (rays[i].pixel[1] // TILE,
        rays[i].pixel[0] // TILE, rays[i].pixel[1], rays[i].pixel[0]))


def _structured_samples(rays: Sequence[Ray], grid: VoxelGrid, n_samples: int
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t values, positions, ray offsets) of all rays' samples."""
    ts, positions, counts = [np.empty(0)], [np.empty((0, 3))], []
    for ray in rays:
        t, p = structured_sample_points(ray.origin, ray.direction, grid,
            n_samples)
        ts.append(t)
        positions.append(p)
        counts.append(len(t))
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return np.concatenate(ts), np.concatenate(positions), offsets


def _entries(blocks: np.ndarray, level: int, sample_ids: np.ndarray,
    vertex_ids: np.ndarray, local_ids: np.ndarray, weights: np.ndarray
    ) -> Dict[int, RitEntry]:
    order = np.argsort(blocks, kind='stable')
    blocks = blocks[order]
    keys, starts = np.unique(blocks, return_index=True)
    ends = np.append(starts[1:], len(blocks))
    entries = {}
    for key, start, end in zip(keys, starts, ends):
        rows = order[start:end]
        entries[int(key)] = RitEntry(int(key), level, sample_ids[rows],
            vertex_ids[rows], local_ids[rows], weights[rows])
    return entries


def build_rit(rays: Sequence[Ray], scene: SceneRep, layout: Union[
    StreamPlan, MergedOctree], settings: Optional[RenderSettings] = None
    ) -> RayIndexTable:
    """
    Records, for every ray sample, which block holds each value it needs.

    Args:
        rays: Rays from ``index_rays``; a ray's id is its position in the list.
        scene: VoxelGrid (with a StreamPlan) or GaussianCloud (with a MergedOctree).
        layout: Block layout of the scene's DRAM image.
        settings: Sample count for structured scenes.

    Returns:
        RayIndexTable; a sample whose corners span two MVoxels appears under
        both with the corners each one holds.
    """
    settings = settings or RenderSettings()
    order = _group_order(rays)
    ordered = [rays[i] for i in order]
    ray_ids = np.array(order, dtype=np.int64)
    if scene.kind == 'structured':
        return _build_structured_rit(ordered, ray_ids, scene, layout, settings)
    return _build_unstructured_rit(ordered, ray_ids, scene, layout)


def _build_structured_rit(rays: List[Ray], ray_ids: np.ndarray, grid:
    VoxelGrid, plan: StreamPlan, settings: RenderSettings) -> RayIndexTable:
    ts, positions, offsets = _structured_samples(rays, grid, settings.
        n_samples)
    entries: Dict[int, RitEntry] = {}
    reverted = []
    sample_ids = np.repeat(np.arange(len(ts)), 8)
    for index, level in enumerate(grid.levels):
        ids, weights = corner_lookup(level, positions)
        vertex_ids, weights = ids.reshape(-1), weights.reshape(-1)
        if not plan.levels[index].streamed:
            reverted.append(RitEntry(-1, index, sample_ids, vertex_ids,
                vertex_ids, weights))
            continue
        blocks, local = plan.locate(index, vertex_ids)
        entries.update(_entries(blocks, index, sample_ids, vertex_ids,
            local, weights))
    return RayIndexTable('structured', ray_ids, offsets, ts, np.zeros(len(
        ts)), dict(sorted(entries.items())), reverted)


def _build_unstructured_rit(rays: List[Ray], ray_ids: np.ndarray, cloud:
    GaussianCloud, tree: MergedOctree) -> RayIndexTable:
    points, ts, distances, counts = [], [], [], []
    for ray in rays:
        ids, t, d = unstructured_hits(ray.origin, ray.direction, cloud)
        points.append(ids)
        ts.append(t)
        distances.append(d)
        counts.append(len(ids))
    point_ids = np.concatenate([np.empty(0, dtype=np.int64)] + points)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    leaves, local = tree.locate(point_ids)
    entries = _entries(leaves, 0, np.arange(len(point_ids)), point_ids,
        local, np.ones(len(point_ids)))
    return RayIndexTable('unstructured', ray_ids, offsets, np.concatenate([
        np.empty(0)] + ts), np.concatenate([np.empty(0)] + distances), entries)


@dataclass
class StreamStats:
    blocks_loaded: int = 0
    blocks_skipped: int = 0
    rows_executed: int = 0
    rows_skipped: int = 0
    items_executed: int = 0
    random_gathers: int = 0


class _RayCompositor:
    """Per-ray partial composites fed by samples completing in any order."""

    def __init__(self, rit: RayIndexTable, settings: RenderSettings):
        self.rit = rit
        self.offsets = rit.offsets
        self.states = [CompositeState(settings.early_stop) for _ in range(
            rit.n_rays)]
        self.cursor = rit.offsets[:-1].copy()
        self.done = rit.offsets[:-1] == rit.offsets[1:]
        self.ready = np.zeros(rit.n_samples, dtype=bool)
        self.alphas = np.zeros(rit.n_samples)
        self.colors = np.zeros((rit.n_samples, 3))
        self.sample_ray = rit.sample_ray

    def live(self, sample_ids: np.ndarray) -> np.ndarray:
        return ~self.done[self.sample_ray[sample_ids]]

    def complete(self, sample_ids: np.ndarray, alphas: np.ndarray, colors:
        np.ndarray) -> None:
        self.alphas[sample_ids] = alphas
        self.colors[sample_ids] = colors
        self.ready[sample_ids] = True
        for r in np.unique(self.sample_ray[sample_ids]):
            self._advance(int(r))

    def _advance(self, r: int) -> None:
        state = self.states[r]
        end = self.offsets[r + 1]
        while self.cursor[r] < end and self.ready[self.cursor[r]]:
            if state.done:
                break
            s = self.cursor[r]
            state.add(self.alphas[s], self.colors[s], self.rit.ts[s])
            self.cursor[r] += 1
        if state.done or self.cursor[r] == end:
            self.done[r] = True

    def results(self, opacity_threshold: float) -> Tuple[np.ndarray, np.
        ndarray]:
        colors = np.zeros((self.rit.n_rays, 3))
        depths = np.zeros(self.rit.n_rays)
        for r, state in enumerate(self.states):
            colors[r], depths[r] = state.result(opacity_threshold)
        return colors, depths


def execute_rit(rit: RayIndexTable, scene: SceneRep, layout: Union[
    StreamPlan, MergedOctree], settings: Optional[RenderSettings] = None,
    trace: Optional[MemTrace] = None) -> Tuple[np.ndarray, np.ndarray,
    StreamStats]:
    """
    Streams blocks in DRAM order and composites every ray.

    Returns:
        (colours, depths along the ray, stats), indexed like ``rit.ray_ids``.
    """
    settings = settings or RenderSettings()
    compositor = _RayCompositor(rit, settings)
    stats = StreamStats()
    if rit.kind == 'structured':
        _execute_structured(rit, scene, layout, settings, trace, compositor,
            stats)
        blocks = layout.blocks
    else:
        _execute_unstructured(rit, scene, layout, trace, compositor, stats)
        blocks = octree_blocks(layout)
    colors, depths = compositor.results(settings.opacity_threshold)
    log_stream_summary(stats.blocks_loaded, stats.items_executed, stats.
        rows_skipped)
    logger.debug(f'Streamed {stats.blocks_loaded}/{len(blocks)} blocks')
    return colors, depths, stats


def _load_block(trace: Optional[MemTrace], block: Block) -> None:
    if trace is not None:
        trace.record('dram_stream', block.base, block.nbytes, block.block_id)
        trace.record('sram_write', 0, block.nbytes, block.block_id)


def _execute_structured(rit: RayIndexTable, grid: VoxelGrid, plan:
    StreamPlan, settings: RenderSettings, trace: Optional[MemTrace],
    compositor: _RayCompositor, stats: StreamStats) -> None:
    acc = np.zeros((rit.n_samples, grid.channels))
    pending = rit.streamed_rows_per_sample()
    deltas = np.concatenate([np.empty(0)] + [segment_lengths(rit.ts[a:b]) for
        a, b in zip(rit.offsets[:-1], rit.offsets[1:])])
    bpv = settings.bytes_per_value

    def finish(samples: np.ndarray) -> None:
        samples = samples[compositor.live(samples)]
        if not len(samples):
            return
        for entry in rit.reverted:
            rows = (samples[:, None] * 8 + np.arange(8)).reshape(-1)
            level = grid.levels[entry.level]
            feats = level.flat_features[entry.vertex_ids[rows]].astype(np.
                float64)
            np.add.at(acc, entry.sample_ids[rows], entry.weights[rows, None] *
                feats)
            stats.random_gathers += len(rows)
            if trace is not None:
                vector_bytes = level.channels * bpv
                base = plan.levels[entry.level].base_address
                for row in rows:
                    trace.record('dram_random', base + int(entry.vertex_ids[
                        row]) * vector_bytes, vector_bytes, int(entry.
                        sample_ids[row]))
        sigma, colors = decode_structured(acc[samples], grid.mlp)
        compositor.complete(samples, alpha_from_density(sigma, deltas[
            samples]), colors)
    finish(np.nonzero(pending == 0)[0])
    for block in plan.blocks:
        entry = rit.entries.get(block.block_id)
        if entry is None:
            continue
        live = compositor.live(entry.sample_ids)
        if not live.any():
            stats.blocks_skipped += 1
            stats.rows_skipped += entry.n_rows
            continue
        _load_block(trace, block)
        level_plan = plan.levels[block.level]
        data = level_plan.mvoxels.block_features(grid.levels[block.level].
            features, block.index)
        sample_ids = entry.sample_ids[live]
        local_ids = entry.local_ids[live]
        feats = data[:, local_ids].T.astype(np.float64)
        np.add.at(acc, sample_ids, entry.weights[live, None] * feats)
        if trace is not None:
            trace.record_many('sram_read', local_ids, level_plan.mvoxels.
                vector_bytes, block.block_id)
        np.subtract.at(pending, sample_ids, 1)
        touched = np.unique(sample_ids)
        stats.blocks_loaded += 1
        stats.rows_executed += len(sample_ids)
        stats.rows_skipped += entry.n_rows - len(sample_ids)
        stats.items_executed += len(touched)
        rit.executed[block.block_id] = len(touched)
        finish(touched[pending[touched] == 0])


def _execute_unstructured(rit: RayIndexTable, cloud: GaussianCloud, tree:
    MergedOctree, trace: Optional[MemTrace], compositor: _RayCompositor,
    stats: StreamStats) -> None:
    for block in octree_blocks(tree):
        entry = rit.entries.get(block.block_id)
        if entry is None:
            continue
        live = compositor.live(entry.sample_ids)
        if not live.any():
            stats.blocks_skipped += 1
            stats.rows_skipped += entry.n_rows
            continue
        _load_block(trace, block)
        samples = entry.sample_ids[live]
        points = entry.vertex_ids[live]
        if trace is not None:
            trace.record_many('sram_read', entry.local_ids[live], tree.
                point_bytes, block.block_id)
        alphas = gaussian_alpha(rit.distances[samples], cloud.scales[points
            ], cloud.opacities[points])
        stats.blocks_loaded += 1
        stats.rows_executed += len(samples)
        stats.rows_skipped += entry.n_rows - len(samples)
        stats.items_executed += len(samples)
        rit.executed[block.block_id] = len(samples)
        compositor.complete(samples, alphas, cloud.colors[points].astype(np
            .float64))


@dataclass
class StreamResult:
    colors: np.ndarray
    depths: np.ndarray
    pixels: np.ndarray
    trace: MemTrace
    rit: RayIndexTable
    layout: Union[StreamPlan, MergedOctree]
    stats: StreamStats
    frame: Optional[Frame] = None


def default_layout(scene: SceneRep, rays: Sequence[Ray], capacity: int,
    settings: Optional[RenderSettings] = None, threshold: float =
    DEFAULT_UTILIZATION_THRESHOLD) -> Union[StreamPlan, MergedOctree]:
    """Level plan for grids (with reversion), merged octree for clouds."""
    if scene.kind == 'structured':
        settings = settings or RenderSettings()
        return partition_levels(scene, capacity, touched_vertices(rays,
            scene, settings), threshold, settings.bytes_per_value)
    return merge_octree(scene, capacity)


def run_stream(pose: CameraPose, intr: Intrinsics, scene: SceneRep, layout:
    Optional[Union[StreamPlan, MergedOctree]] = None, capacity: int =
    DEFAULT_CAPACITY, settings: Optional[RenderSettings] = None, pixels:
    Optional[np.ndarray] = None, threshold: float =
    DEFAULT_UTILIZATION_THRESHOLD) -> StreamResult:
    """
    Memory-centric render of all pixels (or a subset).

    Args:
        layout: StreamPlan or MergedOctree; built from ``capacity`` when omitted.
        pixels: Optional (P, 2) subset of (u, v) pixels.

    Returns:
        StreamResult with per-pixel colours and camera z-depths in the order
        of ``pixels``, the trace and the RIT. ``frame`` is set for full renders.
    """
    start = time.time()
    settings = settings or RenderSettings()
    full = pixels is None
    pixels = pixel_grid(intr) if full else np.asarray(pixels, dtype=np.int64
        ).reshape(-1, 2)
    origins, directions, cam = ray_bundle(pose, intr, pixels)
    rays = [Ray(origins[i], directions[i], (int(pixels[i, 0]), int(pixels[i,
        1]))) for i in range(len(pixels))]
    if layout is None:
        layout = default_layout(scene, rays, capacity, settings, threshold)
    rit = build_rit(rays, scene, layout, settings)
    trace = MemTrace()
    ray_colors, ray_depths, stats = execute_rit(rit, scene, layout,
        settings, trace)
    colors = np.zeros((len(pixels), 3))
    depths = np.zeros(len(pixels))
    colors[rit.ray_ids] = ray_colors
    depths[rit.ray_ids] = ray_depths
    depths = depths * cam[:, 2]
    frame = None
    if full:
        frame = Frame(colors.reshape(intr.height, intr.width, 3), depths.
            reshape(intr.height, intr.width), np.ones((intr.height, intr.
            width), dtype=bool))
    log_render_event('stream', len(pixels), time.time() - start)
    return StreamResult(colors, depths, pixels, trace, rit, layout, stats,
        frame)


def stream_render(pose: CameraPose, intr: Intrinsics, scene: SceneRep,
    layout: Optional[Union[StreamPlan, MergedOctree]] = None, capacity: int =
    DEFAULT_CAPACITY, settings: Optional[RenderSettings] = None) -> Tuple[
    Frame, MemTrace]:
    """Full-frame streaming render; returns the frame and its memory trace."""
    result = run_stream(pose, intr, scene, layout, capacity, settings)
    return result.frame, result.trace
