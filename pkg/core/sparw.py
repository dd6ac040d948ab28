"""
Sparse radiance warping.

A target frame is produced from an already rendered reference frame in four
steps: unproject the reference into a camera-space point cloud, move the
cloud into the target camera, project it with a z-buffer, and NeRF-render
only the pixels the reprojection could not fill. Holes whose ray gathers too
little opacity to produce a depth are void and get the background colour
without any NeRF colour work.
"""
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple
import logging
import numpy as np
from core.nerf import RenderSettings, alpha_from_density, gather_features, gaussian_alpha, pixel_grid, ray_bundle, relu, render_pixels, unstructured_hits
from core.scene import INFINITE, CameraPose, Frame, Intrinsics, SceneRep
from utils.logger import log_render_event
logger = logging.getLogger(__name__)


@dataclass
class PointCloudFrame:
    points: np.ndarray
    colors: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls) -> 'RigidTransform':
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def between(cls, ref_pose: CameraPose, tgt_pose: CameraPose
        ) -> 'RigidTransform':
        """Maps reference-camera coordinates to target-camera coordinates."""
        if np.array_equal(ref_pose.rotation, tgt_pose.rotation
            ) and np.array_equal(ref_pose.translation, tgt_pose.translation):
            return cls.identity()
        rotation = tgt_pose.rotation.T @ ref_pose.rotation
        translation = tgt_pose.rotation.T @ (ref_pose.translation - tgt_pose
            .translation)
        return cls(rotation, translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation


@dataclass
class WarpResult:
    frame: Frame
    disocclusion_mask: np.ndarray
    void_mask: np.ndarray
    warp_angle: np.ndarray
    source_index: np.ndarray

    @property
    def covered(self) -> np.ndarray:
        return self.frame.valid

    @property
    def coverage(self) -> float:
        """Fraction of pixels that need no NeRF evaluation."""
        return 1.0 - float(self.disocclusion_mask.mean())

    @property
    def max_angle(self) -> float:
        angles = self.warp_angle[self.covered]
        return float(angles.max()) if angles.size else 0.0


def unproject(frame: Frame, intr: Intrinsics) -> PointCloudFrame:
    """Pixel (u, v) with depth D becomes (D(u-cx)/f, D(v-cy)/f, D)."""
    v, u = np.mgrid[0:frame.height, 0:frame.width].astype(np.float64)
    depth = frame.depth
    valid = frame.valid & np.isfinite(depth) & (depth > 0)
    safe = np.where(valid, depth, 0.0)
    points = np.stack([safe * (u - intr.cx) / intr.f, safe * (v - intr.cy) /
        intr.f, safe], axis=-1)
    return PointCloudFrame(points, frame.color.copy(), valid)


def transform_points(pc: PointCloudFrame, transform: RigidTransform
    ) -> PointCloudFrame:
    points = pc.points.copy()
    points[pc.valid] = transform.apply(pc.points[pc.valid])
    return PointCloudFrame(points, pc.colors.copy(), pc.valid.copy())


def _project(pc: PointCloudFrame, intr: Intrinsics) -> Tuple[Frame, np.ndarray
    ]:
    height, width = intr.height, intr.width
    points = pc.points.reshape(-1, 3)
    colors = pc.colors.reshape(-1, 3)
    candidates = np.nonzero(pc.valid.reshape(-1) & (points[:, 2] > 0))[0]
    x, y, z = points[candidates].T
    # nearest integer, ties toward -inf
    u = np.ceil(intr.f * x / z + intr.cx - 0.5).astype(np.int64)
    v = np.ceil(intr.f * y / z + intr.cy - 0.5).astype(np.int64)
    inside = (u >= 0) & (u < width) & (v >= 0) & (v < height)
    sources, z = candidates[inside], z[inside]
    targets = v[inside] * width + u[inside]
    order = np.lexsort((sources, z, targets))
    first = np.ones(len(order), dtype=bool)
    first[1:] = targets[order][1:] != targets[order][:-1]
    winners = order[first]
    frame = Frame.empty(height, width)
    frame.color.reshape(-1, 3)[targets[winners]] = colors[sources[winners]]
    frame.depth.reshape(-1)[targets[winners]] = z[winners]
    frame.valid.reshape(-1)[targets[winners]] = True
    source_index = np.full(height * width, -1, dtype=np.int64)
    source_index[targets[winners]] = sources[winners]
    return frame, source_index.reshape(height, width)


def project(pc: PointCloudFrame, intr: Intrinsics) -> Frame:
    """Perspective projection with a nearest-z buffer."""
    frame, _ = _project(pc, intr)
    return frame


@dataclass
class VoidTest:
    """
    Marches the scene's opacity along hole rays. A hole is void when its ray
    accumulates less opacity than the renderer needs to report a depth, so
    void pixels are exactly the pixels a full render leaves at INFINITE.
    """
    scene: SceneRep
    settings: RenderSettings = field(default_factory=RenderSettings)

    def opacity(self, origins: np.ndarray, directions: np.ndarray
        ) -> np.ndarray:
        """1 - prod(1 - alpha) over every sample of every ray."""
        origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
        directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        if self.scene.kind == 'structured':
            return self._structured_opacity(origins, directions)
        return self._unstructured_opacity(origins, directions)

    def hits(self, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
        return self.opacity(origins, directions
            ) >= self.settings.opacity_threshold

    def _structured_opacity(self, origins: np.ndarray, directions: np.ndarray
        ) -> np.ndarray:
        grid = self.scene
        n = self.settings.n_samples
        t_near, t_far, hit = grid.bounds().intersect(origins, directions)
        result = np.zeros(len(origins))
        rays = np.nonzero(hit)[0]
        if rays.size == 0 or n < 1:
            return result
        steps = np.arange(n) / max(n - 1, 1)
        ts = t_near[rays, None] + (t_far[rays] - t_near[rays])[:, None] * steps
        positions = origins[rays, None, :] + ts[..., None] * directions[rays,
            None, :]
        features = gather_features(grid, positions.reshape(-1, 3))
        mlp = grid.mlp
        sigma = relu(features @ mlp.w_sigma.astype(np.float64) + float(mlp.
            b_sigma[0])).reshape(ts.shape)
        if n > 1:
            deltas = np.diff(ts, axis=1)
            deltas = np.concatenate([deltas, deltas[:, -1:]], axis=1)
        else:
            deltas = np.zeros_like(ts)
        alphas = alpha_from_density(sigma, deltas)
        result[rays] = 1.0 - np.prod(1.0 - alphas, axis=1)
        return result

    def _unstructured_opacity(self, origins: np.ndarray, directions: np.
        ndarray) -> np.ndarray:
        cloud = self.scene
        result = np.zeros(len(origins))
        for i in range(len(origins)):
            ids, _, distances = unstructured_hits(origins[i], directions[i],
                cloud)
            if ids.size:
                alphas = gaussian_alpha(distances, cloud.scales[ids], cloud.
                    opacities[ids])
                result[i] = 1.0 - float(np.prod(1.0 - alphas))
        return result


def _warp_angles(reference_points: np.ndarray, ref_pose: CameraPose,
    tgt_pose: CameraPose) -> np.ndarray:
    world = reference_points @ ref_pose.rotation.T + ref_pose.translation
    from_ref = world - ref_pose.translation
    from_tgt = world - tgt_pose.translation
    cross = np.linalg.norm(np.cross(from_ref, from_tgt), axis=-1)
    dot = np.sum(from_ref * from_tgt, axis=-1)
    return np.arctan2(cross, dot)


def warp(reference: Frame, ref_pose: CameraPose, tgt_pose: CameraPose,
    intr: Intrinsics, void_test: Optional[VoidTest] = None) -> WarpResult:
    """
    Reprojects ``reference`` (rendered at ``ref_pose``) into ``tgt_pose``.

    Args:
        reference: Reference frame with camera z-depth.
        ref_pose: Pose the reference was rendered at.
        tgt_pose: Pose to warp to.
        intr: Shared intrinsics.
        void_test: Opacity march over hole rays; without it every hole
            counts as disoccluded.

    Returns:
        WarpResult with the warped frame, the NeRF mask, the void mask and
        the per-pixel angle between reference and target rays.
    """
    cloud = unproject(reference, intr)
    moved = transform_points(cloud, RigidTransform.between(ref_pose, tgt_pose))
    frame, source_index = _project(moved, intr)
    angles = np.full(source_index.shape, np.nan)
    covered = source_index >= 0
    sources = source_index[covered]
    angles[covered] = _warp_angles(cloud.points.reshape(-1, 3)[sources],
        ref_pose, tgt_pose)
    holes = ~frame.valid
    void_mask = np.zeros_like(holes)
    if void_test is not None and holes.any():
        hole_pixels = pixel_grid(intr)[holes.reshape(-1)]
        origins, directions, _ = ray_bundle(tgt_pose, intr, hole_pixels)
        void_mask.reshape(-1)[np.nonzero(holes.reshape(-1))[0]
            ] = ~void_test.hits(origins, directions)
    return WarpResult(frame=frame, disocclusion_mask=holes & ~void_mask,
        void_mask=void_mask, warp_angle=angles, source_index=source_index)


def enlarge_disocclusion(result: WarpResult, extra: np.ndarray) -> WarpResult:
    """Forces the pixels in ``extra`` onto the NeRF path."""
    return replace(result, disocclusion_mask=(result.disocclusion_mask |
        extra) & ~result.void_mask)


def pixel_paths(result: WarpResult) -> Tuple[np.ndarray, np.ndarray, np.
    ndarray]:
    """(warp-copy, sparse NeRF, void background) masks; they partition the image."""
    sparse = result.disocclusion_mask & ~result.void_mask
    void = result.void_mask
    return ~(sparse | void), sparse, void


def fill_disoccluded(result: WarpResult, tgt_pose: CameraPose, intr:
    Intrinsics, scene: SceneRep, settings: Optional[RenderSettings] = None,
    background: Tuple[float, float, float] = (0.0, 0.0, 0.0)) -> Frame:
    """
    Completes a warped frame: NeRF for disoccluded pixels, background for
    void pixels, the warped value everywhere else.
    """
    warped, sparse, void = pixel_paths(result)
    out = result.frame.copy()
    out.color[void] = background
    out.depth[void] = INFINITE
    if sparse.any():
        pixels = pixel_grid(intr)[sparse.reshape(-1)]
        colors, depths, _ = render_pixels(tgt_pose, intr, scene, pixels,
            settings)
        out.color[sparse] = colors
        out.depth[sparse] = depths
    out.valid[:] = True
    log_render_event('sparse', int(sparse.sum()))
    return out
