"""
Scene - camera model, scene representations, procedural generation and I/O.

Two scene representations are supported:

* ``VoxelGrid``: a structured grid of per-vertex feature vectors decoded by a
  tiny MLP (optionally several additive levels).
* ``GaussianCloud``: an unstructured cloud of isotropic Gaussian points with
  view-independent colour.

All randomness goes through ``make_rng``, a Philox counter-based generator
keyed directly by the seed, so generation is bit-reproducible across runs
and platforms.

Camera convention: x right, y down, z forward. ``CameraPose.rotation`` maps
camera axes to world axes, so ``rotation[:, 2]`` is the forward vector.
"""
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple, Union
import logging
import math
import struct
import numpy as np
from utils.errors import SceneFormatError, SceneInvariantError, TrajectoryFormatError, TruncatedPayloadError
logger = logging.getLogger(__name__)

INFINITE = math.inf
MAGIC = b'SFSC'
FORMAT_VERSION = 1
KIND_CODES = {'structured': 0, 'unstructured': 1}
SIZE_CLASSES = {'tiny': (32, 4096), 'small': (64, 16384)}
WORLD_UP = np.array([0.0, 1.0, 0.0])

_HEADER = struct.Struct('<4sHB')
_GRID_HEADER = struct.Struct('<HHH')
_LEVEL_HEADER = struct.Struct('<3I4d')
_CLOUD_HEADER = struct.Struct('<I')


def make_rng(seed: int) -> np.random.Generator:
    """Philox-4x64 generator keyed by ``seed`` (0 <= seed < 2**128)."""
    if seed < 0:
        raise SceneInvariantError(f'Seed must be non-negative, got {seed}')
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True, eq=False)
class Intrinsics:
    f: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not self.f > 0:
            raise SceneInvariantError(f'Focal length must be positive, got {self.f}')
        if self.width < 1 or self.height < 1:
            raise SceneInvariantError(
                f'Image size must be positive, got {self.width}x{self.height}')
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise SceneInvariantError(
                f'Principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height} image'
                )

    @classmethod
    def from_fov(cls, width: int, height: int, fov_deg: float = 50.0
        ) -> 'Intrinsics':
        f = 0.5 * width / math.tan(math.radians(fov_deg) / 2.0)
        return cls(f=f, cx=width / 2.0, cy=height / 2.0, width=width,
            height=height)

    def scaled(self, factor: int) -> 'Intrinsics':
        """Intrinsics of the same camera at 1/factor resolution."""
        width = max(1, self.width // factor)
        height = max(1, self.height // factor)
        return Intrinsics(f=self.f / factor, cx=min(self.cx / factor, width -
            1), cy=min(self.cy / factor, height - 1), width=width, height=
            height)

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True, eq=False)
class CameraPose:
    rotation: np.ndarray
    translation: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)
        if not np.all(np.isfinite(rotation)) or not np.all(np.isfinite(
            translation)):
            raise SceneInvariantError('Pose contains non-finite values')
        if not np.allclose(rotation.T @ rotation, np.eye(3), atol=1e-06):
            raise SceneInvariantError('Pose rotation is not orthonormal')
        if np.linalg.det(rotation) <= 0:
            raise SceneInvariantError('Pose rotation has determinant -1')

    @property
    def forward(self) -> np.ndarray:
        return self.rotation[:, 2]

    @property
    def up(self) -> np.ndarray:
        return -self.rotation[:, 1]

    def as_row(self) -> List[float]:
        return [float(v) for v in self.rotation.reshape(-1)] + [float(v) for
            v in self.translation]

    @classmethod
    def from_row(cls, values: Sequence[float], timestamp: float = 0.0
        ) -> 'CameraPose':
        values = np.asarray(values, dtype=np.float64)
        return cls(values[:9].reshape(3, 3), values[9:12], timestamp)

    def with_timestamp(self, timestamp: float) -> 'CameraPose':
        return CameraPose(self.rotation, self.translation, timestamp)


def look_at(position: Sequence[float], target: Sequence[float], up:
    Sequence[float] = WORLD_UP, timestamp: float = 0.0) -> CameraPose:
    """
    Builds a pose at ``position`` whose forward axis points at ``target``.

    Args:
        position: Camera centre in world units.
        target: Point the camera looks at.
        up: World up hint; the camera's y axis points opposite to it.
        timestamp: Pose timestamp in seconds.

    Returns:
        A right-handed CameraPose.
    """
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    norm = np.linalg.norm(forward)
    if norm == 0:
        raise SceneInvariantError('look_at target coincides with position')
    return pose_from_direction(position, forward / norm, up, timestamp)


def pose_from_direction(position: Sequence[float], forward: Sequence[
    float], up: Sequence[float] = WORLD_UP, timestamp: float = 0.0
    ) -> CameraPose:
    z = np.asarray(forward, dtype=np.float64)
    z = z / np.linalg.norm(z)
    up = np.asarray(up, dtype=np.float64)
    x = np.cross(z, up)
    if np.linalg.norm(x) < 1e-09:
        x = np.cross(z, np.array([0.0, 0.0, 1.0]))
        if np.linalg.norm(x) < 1e-09:
            x = np.cross(z, np.array([1.0, 0.0, 0.0]))
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return CameraPose(np.column_stack([x, y, z]), position, timestamp)


@dataclass
class Frame:
    """RGB image with camera z-depth and a validity mask."""
    color: np.ndarray
    depth: np.ndarray
    valid: np.ndarray

    @classmethod
    def empty(cls, height: int, width: int) -> 'Frame':
        return cls(color=np.zeros((height, width, 3)), depth=np.full((
            height, width), INFINITE), valid=np.zeros((height, width),
            dtype=bool))

    @property
    def height(self) -> int:
        return self.color.shape[0]

    @property
    def width(self) -> int:
        return self.color.shape[1]

    def copy(self) -> 'Frame':
        return Frame(self.color.copy(), self.depth.copy(), self.valid.copy())


@dataclass(frozen=True, eq=False)
class Aabb:
    lo: np.ndarray
    hi: np.ndarray

    def intersect(self, origins: np.ndarray, directions: np.ndarray
        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Slab test for a batch of rays.

        Returns:
            (t_near, t_far, hit) with t_near clamped to 0.
        """
        o = np.atleast_2d(np.asarray(origins, dtype=np.float64))
        d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        with np.errstate(divide='ignore', invalid='ignore'):
            inv = 1.0 / d
            ta = (self.lo - o) * inv
            tb = (self.hi - o) * inv
        parallel = d == 0.0
        inside = (o >= self.lo) & (o <= self.hi)
        t_min = np.where(parallel, np.where(inside, -np.inf, np.inf), np.
            minimum(ta, tb))
        t_max = np.where(parallel, np.where(inside, np.inf, -np.inf), np.
            maximum(ta, tb))
        t_near = np.maximum(np.max(t_min, axis=1), 0.0)
        t_far = np.min(t_max, axis=1)
        return t_near, t_far, t_far > t_near

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)


@dataclass
class GridLevel:
    """One dense grid of per-vertex features, shape (Nx, Ny, Nz, C)."""
    features: np.ndarray
    cell_size: float
    origin: np.ndarray

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.cell_size = float(self.cell_size)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return tuple(int(n) for n in self.features.shape[:3])

    @property
    def channels(self) -> int:
        return int(self.features.shape[3])

    @property
    def n_vertices(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def flat_features(self) -> np.ndarray:
        return self.features.reshape(-1, self.channels)

    @property
    def extent(self) -> np.ndarray:
        return self.origin + (np.array(self.dims) - 1) * self.cell_size

    def vertex_positions(self) -> np.ndarray:
        axes = [self.origin[a] + np.arange(n) * self.cell_size for a, n in
            enumerate(self.dims)]
        gx, gy, gz = np.meshgrid(*axes, indexing='ij')
        return np.stack([gx, gy, gz], axis=-1)

    def vertex_index(self, ix, iy, iz):
        _, ny, nz = self.dims
        return (ix * ny + iy) * nz + iz


@dataclass
class Mlp:
    """Two-layer colour perceptron plus a linear density head."""
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_sigma: np.ndarray
    b_sigma: np.ndarray

    def __post_init__(self):
        for name in ('w1', 'b1', 'w2', 'b2', 'w_sigma', 'b_sigma'):
            setattr(self, name, np.ascontiguousarray(getattr(self, name),
                dtype=np.float32))
        self.b_sigma = self.b_sigma.reshape(1)

    @property
    def hidden(self) -> int:
        return int(self.w1.shape[0])

    @property
    def channels(self) -> int:
        return int(self.w1.shape[1])

    def tensors(self) -> List[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w_sigma, self.b_sigma]

    @classmethod
    def zeros(cls, channels: int, hidden: int) -> 'Mlp':
        return cls(np.zeros((hidden, channels)), np.zeros(hidden), np.zeros
            ((3, hidden)), np.zeros(3), np.zeros(channels), np.zeros(1))


@dataclass
class VoxelGrid:
    """
    Structured scene. ``levels`` is ordered coarse to fine and all levels
    span the same world box; the finest level is "the grid" whose voxel ids
    annotate ray samples.
    """
    levels: List[GridLevel]
    mlp: Mlp
    kind: str = field(default='structured', init=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.levels:
            raise SceneInvariantError('VoxelGrid needs at least one level')
        channels = self.levels[0].channels
        if channels < 4:
            raise SceneInvariantError(f'VoxelGrid needs C >= 4, got {channels}')
        for index, level in enumerate(self.levels):
            if level.channels != channels:
                raise SceneInvariantError(
                    f'Level {index} has {level.channels} channels, expected {channels}'
                    )
            if min(level.dims) < 2:
                raise SceneInvariantError(
                    f'Level {index} needs at least 2 vertices per axis')
            if not level.cell_size > 0:
                raise SceneInvariantError(
                    f'Level {index} has non-positive cell size')
            if not np.all(np.isfinite(level.features)):
                raise SceneInvariantError(
                    f'Level {index} has non-finite features')
            if index > 0 and any(a < b for a, b in zip(level.dims, self.
                levels[index - 1].dims)):
                raise SceneInvariantError(
                    f'Level {index} is coarser than level {index - 1}')
            if not np.allclose(level.origin, self.levels[0].origin, atol=
                1e-09) or not np.allclose(level.extent, self.levels[0].
                extent, atol=1e-06):
                raise SceneInvariantError(
                    f'Level {index} does not span the same box as level 0')
        if self.mlp.channels != channels:
            raise SceneInvariantError(
                f'MLP expects {self.mlp.channels} channels, grid has {channels}'
                )
        for tensor in self.mlp.tensors():
            if not np.all(np.isfinite(tensor)):
                raise SceneInvariantError('MLP has non-finite weights')

    @property
    def finest(self) -> GridLevel:
        return self.levels[-1]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.finest.dims

    @property
    def cell_size(self) -> float:
        return self.finest.cell_size

    @property
    def origin(self) -> np.ndarray:
        return self.finest.origin

    @property
    def features(self) -> np.ndarray:
        return self.finest.features

    @property
    def channels(self) -> int:
        return self.finest.channels

    def bounds(self) -> Aabb:
        return Aabb(self.levels[0].origin.copy(), self.levels[0].extent.copy())

    @property
    def feature_bytes(self) -> int:
        return sum(level.features.nbytes for level in self.levels)


@dataclass
class GaussianCloud:
    positions: np.ndarray
    scales: np.ndarray
    opacities: np.ndarray
    colors: np.ndarray
    kind: str = field(default='unstructured', init=False)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float32
            ).reshape(-1, 3)
        self.scales = np.ascontiguousarray(self.scales, dtype=np.float32
            ).reshape(-1)
        self.opacities = np.ascontiguousarray(self.opacities, dtype=np.
            float32).reshape(-1)
        self.colors = np.ascontiguousarray(self.colors, dtype=np.float32
            ).reshape(-1, 3)
        self.validate()

    def validate(self) -> None:
        n = len(self.positions)
        if not (len(self.scales) == len(self.opacities) == len(self.colors) ==
            n):
            raise SceneInvariantError('GaussianCloud arrays differ in length')
        if not np.all(np.isfinite(self.positions)):
            raise SceneInvariantError('GaussianCloud has non-finite positions')
        if not np.all(self.scales > 0):
            raise SceneInvariantError('GaussianCloud has a point with s <= 0')
        if not np.all((self.opacities > 0) & (self.opacities <= 1)):
            raise SceneInvariantError(
                'GaussianCloud has a point with opacity outside (0, 1]')
        if not np.all(np.isfinite(self.colors)):
            raise SceneInvariantError('GaussianCloud has non-finite colors')

    def __len__(self) -> int:
        return len(self.positions)

    def bounds(self) -> Aabb:
        if len(self) == 0:
            return Aabb(np.zeros(3), np.zeros(3))
        reach = 3.0 * self.scales.astype(np.float64)[:, None]
        positions = self.positions.astype(np.float64)
        return Aabb((positions - reach).min(axis=0), (positions + reach).
            max(axis=0))


SceneRep = Union[VoxelGrid, GaussianCloud]


@dataclass
class Trajectory:
    poses: List[CameraPose]
    intervals: List[float]

    def __post_init__(self):
        if len(self.poses) != len(self.intervals):
            raise SceneInvariantError('Trajectory poses and intervals differ in length')
        for a, b in zip(self.poses, self.poses[1:]):
            if not b.timestamp > a.timestamp:
                raise SceneInvariantError(
                    'Trajectory timestamps must be strictly increasing')
        if any(not dt > 0 for dt in self.intervals):
            raise SceneInvariantError('Trajectory intervals must be positive')

    @classmethod
    def from_poses(cls, poses: List[CameraPose]) -> 'Trajectory':
        if len(poses) < 2:
            raise SceneInvariantError('A trajectory needs at least two poses')
        intervals = [b.timestamp - a.timestamp for a, b in zip(poses, poses[1:])
            ]
        intervals.append(intervals[-1])
        return cls(list(poses), intervals)

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self) -> Iterator[Tuple[CameraPose, float]]:
        return iter(zip(self.poses, self.intervals))

    @property
    def frame_interval(self) -> float:
        return float(np.mean(self.intervals))


def generate_orbit_trajectory(center: Sequence[float], radius: float, fps:
    float, angular_speed: float, n: int, elevation: float = 0.0,
    start_angle: float = 0.0) -> Trajectory:
    """
    Camera orbit around ``center``; every pose looks at the centre.

    With ``elevation`` 0 the orbit lies in the horizontal plane through the
    centre and consecutive poses subtend exactly ``angular_speed / fps``.
    """
    if not fps > 0:
        raise SceneInvariantError(f'fps must be positive, got {fps}')
    if n < 2:
        raise SceneInvariantError(f'An orbit needs n >= 2 poses, got {n}')
    center = np.asarray(center, dtype=np.float64)
    step = angular_speed / fps
    poses = []
    for k in range(n):
        angle = start_angle + k * step
        offset = radius * np.array([math.cos(elevation) * math.sin(angle),
            math.sin(elevation), -math.cos(elevation) * math.cos(angle)])
        poses.append(look_at(center + offset, center, timestamp=k / fps))
    return Trajectory.from_poses(poses)


def _signed_distances(points: np.ndarray, objects: List[dict]) -> np.ndarray:
    distances = []
    for obj in objects:
        rel = points - obj['center']
        if obj['shape'] == 'sphere':
            distances.append(np.linalg.norm(rel, axis=-1) - obj['radius'])
        else:
            q = np.abs(rel) - obj['half']
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
            inside = np.minimum(np.max(q, axis=-1), 0.0)
            distances.append(outside + inside)
    return np.stack(distances, axis=-1)


def _surface_colors(points: np.ndarray, objects: List[dict]) -> np.ndarray:
    """Checker-textured object colours of the nearest object, in [0.05, 0.95]."""
    nearest = np.argmin(_signed_distances(points, objects), axis=-1)
    base = np.stack([obj['color'] for obj in objects])[nearest]
    frequency = np.stack([obj['frequency'] for obj in objects])[nearest]
    phase = np.stack([obj['phase'] for obj in objects])[nearest]
    checker = np.sin(frequency[..., None] * points + phase)
    pattern = np.sign(np.prod(checker, axis=-1))
    shade = 0.8 + 0.2 * pattern
    return np.clip(base * shade[..., None], 0.05, 0.95)


def _scene_objects(rng: np.random.Generator) -> List[dict]:
    objects = [{'shape': 'sphere', 'center': rng.uniform(-0.05, 0.05, 3),
        'radius': float(rng.uniform(0.5, 0.6))}]
    for anchor in ([0.55, -0.45, 0.3], [-0.55, 0.4, -0.3]):
        objects.append({'shape': 'box', 'center': np.array(anchor) + rng.
            uniform(-0.05, 0.05, 3), 'half': rng.uniform(0.15, 0.25, 3)})
    for obj in objects:
        obj['color'] = rng.uniform(0.25, 0.95, 3)
        obj['frequency'] = float(rng.uniform(6.0, 12.0))
        obj['phase'] = rng.uniform(0.0, math.pi, 3)
    return objects


def _logit(p: np.ndarray) -> np.ndarray:
    return np.log(p) - np.log1p(-p)


def _target_field(points: np.ndarray, objects: List[dict], channels: int,
    cell_size: float, detail: np.ndarray, density_scale: float
    ) -> np.ndarray:
    sd = np.min(_signed_distances(points, objects), axis=-1)
    values = np.empty(points.shape[:-1] + (channels,))
    values[..., 0] = density_scale * np.clip(-sd / cell_size, -1.0, 1.0)
    values[..., 1:4] = _logit(_surface_colors(points, objects))
    values[..., 4:] = detail
    return values


def _sample_level_f64(level_values: np.ndarray, origin: np.ndarray,
    cell_size: float, points: np.ndarray) -> np.ndarray:
    dims = np.array(level_values.shape[:3])
    local = (points - origin) / cell_size
    base = np.clip(np.floor(local).astype(np.int64), 0, dims - 2)
    frac = np.clip(local - base, 0.0, 1.0)
    result = np.zeros(points.shape[:-1] + (level_values.shape[3],))
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                w = (frac[..., 0] if dx else 1 - frac[..., 0]) * (frac[...,
                    1] if dy else 1 - frac[..., 1]) * (frac[..., 2] if dz else
                    1 - frac[..., 2])
                corner = level_values[base[..., 0] + dx, base[..., 1] + dy,
                    base[..., 2] + dz]
                result += w[..., None] * corner
    return result


def _color_mlp(channels: int, hidden: int, rng: np.random.Generator) -> Mlp:
    if hidden < 6:
        raise SceneInvariantError(f'MLP needs at least 6 hidden units, got {hidden}')
    w1 = np.zeros((hidden, channels))
    w2 = np.zeros((3, hidden))
    for k in range(3):
        w1[2 * k, 1 + k] = 1.0
        w1[2 * k + 1, 1 + k] = -1.0
        w2[k, 2 * k] = 1.0
        w2[k, 2 * k + 1] = -1.0
    # idle hidden units carry noise that the output layer never reads
    w1[6:, :] = rng.normal(0.0, 0.1, (hidden - 6, channels))
    w_sigma = np.zeros(channels)
    w_sigma[0] = 1.0
    return Mlp(w1, np.zeros(hidden), w2, np.zeros(3), w_sigma, np.zeros(1))


def generate_scene(kind: str, seed: int, size_class: str = 'tiny', levels:
    int = 1, channels: int = 8, hidden: int = 32) -> SceneRep:
    """
    Generates a textured sphere-plus-boxes world inside [-1, 1]^3.

    Args:
        kind: 'structured' or 'unstructured'.
        seed: RNG key.
        size_class: 'tiny' (32^3 vertices / 4096 points) or 'small'.
        levels: Number of additive grid levels (structured only).
        channels: Feature channels C (structured only).
        hidden: MLP hidden width (structured only).

    Returns:
        A VoxelGrid or GaussianCloud.
    """
    if kind not in KIND_CODES:
        raise SceneInvariantError(f'Unknown scene kind: {kind}')
    if size_class not in SIZE_CLASSES:
        raise SceneInvariantError(f'Unknown size class: {size_class}')
    rng = make_rng(seed)
    objects = _scene_objects(rng)
    vertices, points = SIZE_CLASSES[size_class]
    if kind == 'structured':
        scene = _generate_grid(objects, rng, vertices, levels, channels, hidden)
    else:
        scene = _generate_cloud(objects, rng, points)
    logger.debug(f'Generated {kind} scene (seed={seed}, size={size_class})')
    return scene


def _generate_grid(objects: List[dict], rng: np.random.Generator,
    vertices: int, n_levels: int, channels: int, hidden: int) -> VoxelGrid:
    if channels < 4:
        raise SceneInvariantError(f'VoxelGrid needs C >= 4, got {channels}')
    if n_levels < 1:
        raise SceneInvariantError(f'levels must be >= 1, got {n_levels}')
    origin = np.full(3, -1.0)
    finest_cell = 2.0 / (vertices - 1)
    sizes = [max(4, vertices >> n_levels - 1 - index) for index in range(
        n_levels)]
    mlp = _color_mlp(channels, hidden, rng)
    grid_levels: List[GridLevel] = []
    coarse_values: List[Tuple[np.ndarray, float]] = []
    for n in sizes:
        cell = 2.0 / (n - 1)
        level = GridLevel(np.zeros((n, n, n, channels)), cell, origin)
        positions = level.vertex_positions()
        detail = rng.normal(0.0, 0.1, (n, n, n, channels - 4))
        target = _target_field(positions, objects, channels, finest_cell,
            detail, density_scale=60.0)
        residual = target.copy()
        for values, coarse_cell in coarse_values:
            residual -= _sample_level_f64(values, origin, coarse_cell, positions)
        residual32 = residual.astype(np.float32)
        coarse_values.append((residual32.astype(np.float64), cell))
        grid_levels.append(GridLevel(residual32, cell, origin))
    return VoxelGrid(grid_levels, mlp)


def _generate_cloud(objects: List[dict], rng: np.random.Generator, n_points:
    int) -> GaussianCloud:
    areas = []
    for obj in objects:
        if obj['shape'] == 'sphere':
            areas.append(4.0 * math.pi * obj['radius'] ** 2)
        else:
            hx, hy, hz = 2.0 * obj['half']
            areas.append(2.0 * (hx * hy + hy * hz + hx * hz))
    areas = np.array(areas)
    owners = rng.choice(len(objects), size=n_points, p=areas / areas.sum())
    positions = np.empty((n_points, 3))
    for index, obj in enumerate(objects):
        mask = owners == index
        count = int(mask.sum())
        if obj['shape'] == 'sphere':
            normals = rng.normal(size=(count, 3))
            normals /= np.linalg.norm(normals, axis=1, keepdims=True)
            positions[mask] = obj['center'] + obj['radius'] * normals
        else:
            local = rng.uniform(-1.0, 1.0, (count, 3))
            axis = rng.integers(0, 3, count)
            sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
            local[np.arange(count), axis] = sign
            positions[mask] = obj['center'] + local * obj['half']
    scales = rng.uniform(0.02, 0.05, n_points)
    opacities = rng.uniform(0.35, 1.0, n_points)
    colors = _surface_colors(positions, objects)
    return GaussianCloud(positions, scales, opacities, colors)


def save_scene(scene: SceneRep, path: str) -> None:
    """Writes a scene in the little-endian ``.scene`` format."""
    chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, KIND_CODES[scene.kind])]
    if scene.kind == 'structured':
        chunks.append(_GRID_HEADER.pack(len(scene.levels), scene.channels,
            scene.mlp.hidden))
        for level in scene.levels:
            chunks.append(_LEVEL_HEADER.pack(*level.dims, level.cell_size,
                *level.origin))
        for level in scene.levels:
            chunks.append(level.features.astype('<f4').tobytes())
        for tensor in scene.mlp.tensors():
            chunks.append(tensor.astype('<f4').tobytes())
    else:
        chunks.append(_CLOUD_HEADER.pack(len(scene)))
        for array in (scene.positions, scene.scales, scene.opacities, scene
            .colors):
            chunks.append(array.astype('<f4').tobytes())
    with open(path, 'wb') as f:
        f.write(b''.join(chunks))
    logger.debug(f'Saved {scene.kind} scene to {path}')


class _Reader:

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def header(self, layout: struct.Struct, what: str) -> tuple:
        if self.offset + layout.size > len(self.data):
            raise SceneFormatError(f'Header truncated while reading {what}')
        values = layout.unpack_from(self.data, self.offset)
        self.offset += layout.size
        return values

    def floats(self, shape: Tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        end = self.offset + 4 * count
        if end > len(self.data):
            raise TruncatedPayloadError(
                f'Payload truncated: need {end} bytes, file has {len(self.data)}'
                )
        array = np.frombuffer(self.data, dtype='<f4', count=count, offset=
            self.offset).astype(np.float32).reshape(shape)
        self.offset = end
        return array


def load_scene(path: str) -> SceneRep:
    """
    Reads a ``.scene`` file.

    Raises:
        SceneFormatError: Bad magic, version, kind or header fields.
        TruncatedPayloadError: Payload shorter than the header promises.
        SceneInvariantError: Decoded scene violates its type invariants.
    """
    with open(path, 'rb') as f:
        reader = _Reader(f.read())
    magic, version, kind_code = reader.header(_HEADER, 'file header')
    if magic != MAGIC:
        raise SceneFormatError(f'Bad magic {magic!r} in {path}')
    if version != FORMAT_VERSION:
        raise SceneFormatError(f'Unsupported format version {version}')
    if kind_code == KIND_CODES['structured']:
        n_levels, channels, hidden = reader.header(_GRID_HEADER, 'grid header')
        if n_levels < 1 or channels < 1 or hidden < 1:
            raise SceneFormatError('Grid header has zero levels, channels or hidden units')
        level_headers = [reader.header(_LEVEL_HEADER, f'level {index}') for
            index in range(n_levels)]
        for values in level_headers:
            if min(values[:3]) < 1:
                raise SceneFormatError(f'Level dims {values[:3]} are empty')
        features = [reader.floats((*values[:3], channels)) for values in
            level_headers]
        tensors = [reader.floats(shape) for shape in [(hidden, channels), (
            hidden,), (3, hidden), (3,), (channels,), (1,)]]
        scene = VoxelGrid([GridLevel(feats, values[3], values[4:7]) for feats,
            values in zip(features, level_headers)], Mlp(*tensors))
    elif kind_code == KIND_CODES['unstructured']:
        n_points, = reader.header(_CLOUD_HEADER, 'cloud header')
        arrays = [reader.floats(shape) for shape in [(n_points, 3), (
            n_points,), (n_points,), (n_points, 3)]]
        scene = GaussianCloud(*arrays)
    else:
        raise SceneFormatError(f'Unknown scene kind code {kind_code}')
    if reader.offset != len(reader.data):
        raise SceneFormatError(
            f'{len(reader.data) - reader.offset} unexpected trailing bytes in {path}'
            )
    return scene


def save_trajectory(trajectory: Trajectory, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        for pose in trajectory.poses:
            numbers = [pose.timestamp] + pose.as_row()
            f.write(' '.join(f'{value:.17g}' for value in numbers) + '\n')


def load_trajectory(path: str) -> Trajectory:
    """Reads one pose per line: timestamp followed by R (row-major) and t."""
    poses = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            try:
                values = [float(token) for token in line.split()]
            except ValueError as e:
                raise TrajectoryFormatError(
                    f'{path}:{line_number}: non-numeric value') from e
            if len(values) != 13:
                raise TrajectoryFormatError(
                    f'{path}:{line_number}: expected 13 numbers, got {len(values)}'
                    )
            poses.append(CameraPose.from_row(values[1:], values[0]))
    if len(poses) < 2:
        raise TrajectoryFormatError(f'{path}: a trajectory needs at least two poses')
    return Trajectory.from_poses(poses)
