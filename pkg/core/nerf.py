"""
Pixel-centric NeRF renderer.

Every pipeline is split into three stages:

* Indexing: one ray per pixel, then samples along the ray (structured) or
  the list of Gaussian points the ray passes through (unstructured).
* Feature Gathering: trilinear interpolation of the eight voxel-corner
  features, summed over all grid levels; points need no gathering.
* Feature Computation: the tiny MLP (structured) or the Gaussian falloff
  (unstructured), followed by front-to-back compositing.

This module is the quality and equivalence oracle for the warping and
streaming paths, so everything here favours clarity over speed.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import time
import numpy as np
from core.memtrace import BYTES_PER_VALUE, VALUES_PER_POINT, MemTrace
from core.scene import INFINITE, CameraPose, Frame, GaussianCloud, GridLevel, Intrinsics, Mlp, SceneRep, VoxelGrid
from utils.logger import log_render_event
logger = logging.getLogger(__name__)

# k = 4*dx + 2*dy + dz
CORNER_OFFSETS = np.array([[dx, dy, dz] for dx in (0, 1) for dy in (0, 1) for
    dz in (0, 1)], dtype=np.int64)
GAUSSIAN_CUTOFF = 3.0


@dataclass(frozen=True, eq=False)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    pixel: Tuple[int, int]


@dataclass(frozen=True, eq=False)
class RaySample:
    ray_id: int
    t: float
    position: np.ndarray
    source: int
    distance: float = 0.0


@dataclass(frozen=True, eq=False)
class SampleResult:
    color: np.ndarray
    sigma: Optional[float] = None
    alpha: Optional[float] = None


@dataclass
class RenderSettings:
    n_samples: int = 64
    early_stop: float = 0.001
    opacity_threshold: float = 0.5
    bytes_per_value: int = BYTES_PER_VALUE


def pixel_grid(intr: Intrinsics) -> np.ndarray:
    """All (u, v) pixel coordinates in ray-id order (row-major, v outer)."""
    v, u = np.divmod(np.arange(intr.n_pixels), intr.width)
    return np.stack([u, v], axis=1)


def camera_directions(intr: Intrinsics, pixels: np.ndarray) -> np.ndarray:
    """Unit camera-space directions through integer pixel coordinates."""
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    directions = np.stack([(pixels[:, 0] - intr.cx) / intr.f, (pixels[:, 1] -
        intr.cy) / intr.f, np.ones(len(pixels))], axis=1)
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def ray_bundle(pose: CameraPose, intr: Intrinsics, pixels: Optional[np.
    ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorised indexing.

    Returns:
        (origins, world directions, camera-space directions), one row per pixel.
    """
    if pixels is None:
        pixels = pixel_grid(intr)
    cam = camera_directions(intr, pixels)
    world = cam @ pose.rotation.T
    world /= np.linalg.norm(world, axis=1, keepdims=True)
    origins = np.broadcast_to(pose.translation, world.shape).copy()
    return origins, world, cam


def index_rays(pose: CameraPose, intr: Intrinsics) -> List[Ray]:
    """One ray per pixel; ray id = v * width + u."""
    pixels = pixel_grid(intr)
    origins, directions, _ = ray_bundle(pose, intr, pixels)
    return [Ray(origins[i], directions[i], (int(pixels[i, 0]), int(pixels[i,
        1]))) for i in range(len(pixels))]


def structured_sample_points(origin: np.ndarray, direction: np.ndarray,
    grid: VoxelGrid, n_samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform t values over the ray-AABB interval and their positions."""
    t_near, t_far, hit = grid.bounds().intersect(origin, direction)
    if not hit[0]:
        return np.empty(0), np.empty((0, 3))
    ts = t_near[0] + (t_far[0] - t_near[0]) * np.arange(n_samples) / (
        n_samples - 1)
    return ts, origin[None, :] + ts[:, None] * direction[None, :]


def voxel_ids(level: GridLevel, positions: np.ndarray) -> np.ndarray:
    base, _ = _cell_coords(level, positions)
    nx, ny, nz = level.dims
    return (base[:, 0] * (ny - 1) + base[:, 1]) * (nz - 1) + base[:, 2]


def _cell_coords(level: GridLevel, positions: np.ndarray) -> Tuple[np.
    ndarray, np.ndarray]:
    local = (np.atleast_2d(positions) - level.origin) / level.cell_size
    base = np.clip(np.floor(local).astype(np.int64), 0, np.array(level.dims
        ) - 2)
    return base, np.clip(local - base, 0.0, 1.0)


def sample_structured(ray: Ray, grid: VoxelGrid, n_samples: int, ray_id:
    int = 0) -> List[RaySample]:
    """
    Samples ``n_samples`` points uniformly over the ray's AABB interval.

    Each sample is annotated with the id of the finest-level voxel that
    contains it. A ray that misses the box yields an empty list.
    """
    if n_samples < 2:
        raise ValueError(f'n_samples must be >= 2, got {n_samples}')
    ts, positions = structured_sample_points(ray.origin, ray.direction,
        grid, n_samples)
    if len(ts) == 0:
        return []
    ids = voxel_ids(grid.finest, positions)
    return [RaySample(ray_id, float(ts[i]), positions[i], int(ids[i])) for
        i in range(len(ts))]


def trilinear_weights(local: Sequence[float]) -> np.ndarray:
    """Product-form weights of the eight corners for local coords in [0,1]^3."""
    wx, wy, wz = local
    return np.array([(wx if dx else 1 - wx) * (wy if dy else 1 - wy) * (wz if
        dz else 1 - wz) for dx, dy, dz in CORNER_OFFSETS])


def corner_lookup(level: GridLevel, positions: np.ndarray) -> Tuple[np.
    ndarray, np.ndarray]:
    """
    Vertex ids (S, 8) and trilinear weights (S, 8) for each position.
    """
    base, frac = _cell_coords(level, positions)
    corners = base[:, None, :] + CORNER_OFFSETS[None, :, :]
    ids = level.vertex_index(corners[..., 0], corners[..., 1], corners[..., 2])
    picks = np.where(CORNER_OFFSETS[None, :, :] == 1, frac[:, None, :], 1.0 -
        frac[:, None, :])
    return ids, np.prod(picks, axis=2)


def trilinear(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.asarray(weights, dtype=np.float64) @ np.asarray(features,
        dtype=np.float64)


def gather_features(grid: VoxelGrid, positions: np.ndarray) -> np.ndarray:
    """Per-sample features, trilinearly interpolated and summed over levels."""
    total = np.zeros((len(positions), grid.channels))
    for level in grid.levels:
        ids, weights = corner_lookup(level, positions)
        corner_features = level.flat_features[ids].astype(np.float64)
        total += np.einsum('sk,skc->sc', weights, corner_features)
    return total


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def decode_structured(features: np.ndarray, mlp: Mlp) -> Tuple[np.ndarray,
    np.ndarray]:
    """Batched Feature Computation: (sigma (S,), colour (S, 3))."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    w1, b1, w2, b2, w_sigma, b_sigma = (t.astype(np.float64) for t in mlp.
        tensors())
    sigma = relu(features @ w_sigma + b_sigma[0])
    hidden = relu(features @ w1.T + b1)
    return sigma, sigmoid(hidden @ w2.T + b2)


def feature_compute_structured(feature: np.ndarray, mlp: Mlp) -> SampleResult:
    sigma, color = decode_structured(feature, mlp)
    return SampleResult(color=color[0], sigma=float(sigma[0]))


def unstructured_hits(origin: np.ndarray, direction: np.ndarray, cloud:
    GaussianCloud) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Points within 3s of the ray in front of its origin.

    Returns:
        (point ids, t values, perpendicular distances), sorted by t then id.
    """
    if len(cloud) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0), np.empty(0)
    rel = cloud.positions.astype(np.float64) - origin
    ts = rel @ direction
    distances = np.linalg.norm(rel - ts[:, None] * direction[None, :], axis=1)
    hit = (distances < GAUSSIAN_CUTOFF * cloud.scales.astype(np.float64)) & (
        ts > 0)
    ids = np.nonzero(hit)[0]
    order = np.lexsort((ids, ts[ids]))
    ids = ids[order]
    return ids, ts[ids], distances[ids]


def intersect_unstructured(ray: Ray, cloud: GaussianCloud, ray_id: int = 0
    ) -> List[RaySample]:
    ids, ts, distances = unstructured_hits(ray.origin, ray.direction, cloud)
    return [RaySample(ray_id, float(t), ray.origin + t * ray.direction, int
        (i), float(d)) for i, t, d in zip(ids, ts, distances)]


def gaussian_alpha(distances, scales, opacities) -> np.ndarray:
    distances = np.asarray(distances, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    return np.asarray(opacities, dtype=np.float64) * np.exp(-distances ** 2 /
        (2.0 * scales ** 2))


def feature_compute_unstructured(sample: RaySample, cloud: GaussianCloud
    ) -> SampleResult:
    point = sample.source
    alpha = gaussian_alpha(sample.distance, cloud.scales[point], cloud.
        opacities[point])
    return SampleResult(color=cloud.colors[point].astype(np.float64), alpha
        =float(alpha))


def alpha_from_density(sigma, delta):
    return -np.expm1(-np.asarray(sigma, dtype=np.float64) * np.asarray(
        delta, dtype=np.float64))


def segment_lengths(ts: np.ndarray) -> np.ndarray:
    """delta_i = t_{i+1} - t_i; the last sample reuses the previous delta."""
    ts = np.asarray(ts, dtype=np.float64)
    if len(ts) < 2:
        return np.zeros(len(ts))
    deltas = np.diff(ts)
    return np.append(deltas, deltas[-1])


class CompositeState:
    """Front-to-back accumulation state of one ray."""

    def __init__(self, early_stop: float = 0.001):
        self.early_stop = early_stop
        self.color = np.zeros(3)
        self.transmittance = 1.0
        self.weight_sum = 0.0
        self.depth_sum = 0.0
        self.consumed = 0

    @property
    def done(self) -> bool:
        return self.transmittance < self.early_stop

    def add(self, alpha: float, color: np.ndarray, t: float) -> None:
        weight = self.transmittance * float(alpha)
        self.color += weight * np.asarray(color, dtype=np.float64)
        self.depth_sum += weight * float(t)
        self.weight_sum += weight
        self.transmittance *= 1.0 - float(alpha)
        self.consumed += 1

    def result(self, opacity_threshold: float = 0.5) -> Tuple[np.ndarray, float
        ]:
        if self.weight_sum < opacity_threshold or self.weight_sum <= 0:
            return self.color.copy(), INFINITE
        return self.color.copy(), self.depth_sum / self.weight_sum


def composite(samples: Sequence[SampleResult], t_values: Sequence[float],
    spacing=None, early_stop: float = 0.001, opacity_threshold: float = 0.5
    ) -> Tuple[np.ndarray, float]:
    """
    Front-to-back compositing of ordered sample results.

    Args:
        samples: Results ordered near to far. Results with ``alpha`` set are
            used as is; results with ``sigma`` use alpha = 1 - exp(-sigma*delta).
        t_values: Distance of each sample along the ray.
        spacing: Optional delta (scalar or per sample); derived from
            ``t_values`` when omitted.
        early_stop: Stop once transmittance drops below this value.
        opacity_threshold: Depth is INFINITE below this accumulated opacity.

    Returns:
        (colour, depth along the ray or INFINITE)
    """
    t_values = np.asarray(t_values, dtype=np.float64)
    if spacing is None:
        deltas = segment_lengths(t_values)
    else:
        deltas = np.broadcast_to(np.asarray(spacing, dtype=np.float64), (
            len(samples),))
    state = CompositeState(early_stop)
    for i, sample in enumerate(samples):
        if state.done:
            break
        alpha = sample.alpha if sample.alpha is not None else alpha_from_density(
            sample.sigma, deltas[i])
        state.add(alpha, sample.color, t_values[i])
    return state.result(opacity_threshold)


def level_base_addresses(grid: VoxelGrid, bytes_per_value: int) -> List[int]:
    """DRAM base of each level in the row-major (pixel-centric) layout."""
    bases, offset = [], 0
    for level in grid.levels:
        bases.append(offset)
        offset += level.n_vertices * level.channels * bytes_per_value
    return bases


def _render_structured_ray(origin, direction, grid: VoxelGrid, settings:
    RenderSettings, trace: Optional[MemTrace], sample_tag: int) -> Tuple[np.
    ndarray, float, int]:
    ts, positions = structured_sample_points(origin, direction, grid,
        settings.n_samples)
    if len(ts) == 0:
        return np.zeros(3), INFINITE, 0
    sigma, colors = decode_structured(gather_features(grid, positions), grid.mlp)
    alphas = alpha_from_density(sigma, segment_lengths(ts))
    state = CompositeState(settings.early_stop)
    for i in range(len(ts)):
        if state.done:
            break
        state.add(alphas[i], colors[i], ts[i])
    if trace is not None:
        _trace_grid_gathers(trace, grid, positions[:state.consumed],
            settings.bytes_per_value, sample_tag)
    color, depth = state.result(settings.opacity_threshold)
    return color, depth, state.consumed


def _trace_grid_gathers(trace: MemTrace, grid: VoxelGrid, positions: np.
    ndarray, bytes_per_value: int, first_tag: int) -> None:
    bases = level_base_addresses(grid, bytes_per_value)
    for s, position in enumerate(positions):
        for level, base in zip(grid.levels, bases):
            vector_bytes = level.channels * bytes_per_value
            ids, _ = corner_lookup(level, position[None, :])
            trace.record_many('dram_random', base + ids[0] * vector_bytes,
                vector_bytes, first_tag + s)


def _render_unstructured_ray(origin, direction, cloud: GaussianCloud,
    settings: RenderSettings, trace: Optional[MemTrace], sample_tag: int
    ) -> Tuple[np.ndarray, float, int]:
    ids, ts, distances = unstructured_hits(origin, direction, cloud)
    alphas = gaussian_alpha(distances, cloud.scales[ids], cloud.opacities[ids])
    colors = cloud.colors[ids].astype(np.float64)
    state = CompositeState(settings.early_stop)
    for i in range(len(ids)):
        if state.done:
            break
        state.add(alphas[i], colors[i], ts[i])
    if trace is not None:
        point_bytes = VALUES_PER_POINT * settings.bytes_per_value
        for s in range(state.consumed):
            trace.record('dram_random', int(ids[s]) * point_bytes,
                point_bytes, sample_tag + s)
    color, depth = state.result(settings.opacity_threshold)
    return color, depth, state.consumed


def render_pixels(pose: CameraPose, intr: Intrinsics, scene: SceneRep,
    pixels: np.ndarray, settings: Optional[RenderSettings] = None, trace:
    Optional[MemTrace] = None) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Renders a subset of pixels independently of each other.

    Args:
        pixels: (P, 2) integer (u, v) coordinates.
        trace: When given, the pixel-centric gather stream is appended as
            ``dram_random`` events, one per vertex (or point) read.

    Returns:
        (colours (P, 3), camera z-depths (P,), number of samples composited)
    """
    settings = settings or RenderSettings()
    pixels = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    origins, directions, cam = ray_bundle(pose, intr, pixels)
    colors = np.zeros((len(pixels), 3))
    depths = np.full(len(pixels), INFINITE)
    consumed_total = 0
    structured = scene.kind == 'structured'
    for i in range(len(pixels)):
        if structured:
            color, depth, consumed = _render_structured_ray(origins[i],
                directions[i], scene, settings, trace, consumed_total)
        else:
            color, depth, consumed = _render_unstructured_ray(origins[i],
                directions[i], scene, settings, trace, consumed_total)
        colors[i] = color
        depths[i] = depth * cam[i, 2]
        consumed_total += consumed
    return colors, depths, consumed_total


def render_frame(pose: CameraPose, intr: Intrinsics, scene: SceneRep,
    settings: Optional[RenderSettings] = None, trace: Optional[MemTrace] = None
    ) -> Frame:
    """
    Full pixel-centric render. Depth is camera z-depth, INFINITE where the
    accumulated opacity stays below the threshold; every pixel is valid.
    """
    start = time.time()
    colors, depths, _ = render_pixels(pose, intr, scene, pixel_grid(intr),
        settings, trace)
    frame = Frame(colors.reshape(intr.height, intr.width, 3), depths.
        reshape(intr.height, intr.width), np.ones((intr.height, intr.width),
        dtype=bool))
    log_render_event('full', intr.n_pixels, time.time() - start)
    return frame


def render_downsampled(pose: CameraPose, intr: Intrinsics, scene: SceneRep,
    factor: int = 2, settings: Optional[RenderSettings] = None) -> Frame:
    """Renders at 1/factor resolution and upsamples bilinearly."""
    small_intr = intr.scaled(factor)
    small = render_frame(pose, small_intr, scene, settings)
    pixels = pixel_grid(intr).astype(np.float64)
    xs = np.clip((pixels[:, 0] - intr.cx) / factor + small_intr.cx, 0,
        small_intr.width - 1)
    ys = np.clip((pixels[:, 1] - intr.cy) / factor + small_intr.cy, 0,
        small_intr.height - 1)
    x0 = np.minimum(np.floor(xs).astype(np.int64), small_intr.width - 1)
    y0 = np.minimum(np.floor(ys).astype(np.int64), small_intr.height - 1)
    x1 = np.minimum(x0 + 1, small_intr.width - 1)
    y1 = np.minimum(y0 + 1, small_intr.height - 1)
    fx = (xs - x0)[:, None]
    fy = (ys - y0)[:, None]
    c = small.color
    color = (c[y0, x0] * (1 - fx) * (1 - fy) + c[y0, x1] * fx * (1 - fy) +
        c[y1, x0] * (1 - fx) * fy + c[y1, x1] * fx * fy)
    depth = small.depth[np.rint(ys).astype(np.int64), np.rint(xs).astype(np
        .int64)]
    log_render_event('downsampled', small_intr.n_pixels)
    return Frame(color.reshape(intr.height, intr.width, 3), depth.reshape(
        intr.height, intr.width), np.ones((intr.height, intr.width), dtype=bool))
