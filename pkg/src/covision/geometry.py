"""Pinhole camera model, depth backprojection, and an analytic box-room depth renderer.

Conventions used throughout the toolkit:

* World frame: right-handed, +Y up. Floor plans live in the (x, z) plane.
* Camera frame: +X right, +Y down, +Z forward (optical axis).
* Pixel (u, v) indexes column u and row v; pixel centers sit at integer
  coordinates, so pixel (u, v) with depth d backprojects to the camera-frame
  point ((u - cx) * d / fx, (v - cy) * d / fy, d).
* Depth is the camera-frame z component of the surface hit, not ray length.
* A depth value of exactly 0.0 marks an invalid pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidPoseError

_QUAT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInputError(f"image size must be >= 1, got {self.width}x{self.height}")
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInputError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise InvalidInputError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )

    @staticmethod
    def from_fov(width: int, height: int, fov_x_deg: float, fov_y_deg: float | None = None) -> "Intrinsics":
        """Build intrinsics with the principal point at the image center."""
        fx = width / (2.0 * math.tan(math.radians(fov_x_deg) / 2.0))
        if fov_y_deg is None:
            fy = fx
        else:
            fy = height / (2.0 * math.tan(math.radians(fov_y_deg) / 2.0))
        return Intrinsics(width, height, fx, fy, width / 2.0, height / 2.0)


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n == 0:
        raise InvalidInputError("zero quaternion")
    return q / n


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a * b, both (w, x, y, z)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        dtype=np.float64,
    )


def quat_from_yaw(yaw: float) -> np.ndarray:
    """Quaternion for a level camera whose optical axis points along
    (sin(yaw), 0, cos(yaw)) in the world, with camera +Y mapped to world -Y.

    Composition of a 180-degree roll about the optical axis (flips camera Y
    down) with a rotation of yaw about the world up axis.
    """
    half = yaw / 2.0
    yaw_q = np.array([math.cos(half), 0.0, math.sin(half), 0.0])
    roll_q = np.array([0.0, 0.0, 0.0, 1.0])  # 180 deg about +Z
    return quat_multiply(yaw_q, roll_q)


@dataclass(frozen=True)
class Pose:
    """World-from-camera rigid transform: rotation as unit quaternion (w, x, y, z)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        object.__setattr__(self, "quaternion", np.asarray(self.quaternion, dtype=np.float64))
        if self.position.shape != (3,):
            raise InvalidInputError(f"position must be a 3-vector, got shape {self.position.shape}")
        if self.quaternion.shape != (4,):
            raise InvalidInputError(f"quaternion must be a 4-vector, got shape {self.quaternion.shape}")
        norm = float(np.linalg.norm(self.quaternion))
        if abs(norm - 1.0) > _QUAT_NORM_TOL:
            raise InvalidInputError(f"quaternion norm {norm} deviates from 1 by more than {_QUAT_NORM_TOL}")

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Map camera-frame points (N, 3) to the world frame."""
        return points @ self.rotation().T + self.position

    def inverse_transform(self, points: np.ndarray) -> np.ndarray:
        """Map world-frame points (N, 3) to the camera frame."""
        return (points - self.position) @ self.rotation()

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    @staticmethod
    def looking(position, yaw: float) -> "Pose":
        """Level camera at `position` with optical axis along (sin(yaw), 0, cos(yaw))."""
        return Pose(np.asarray(position, dtype=np.float64), quat_from_yaw(yaw))


@dataclass(frozen=True)
class CameraView:
    """One captured view: identifier, intrinsics, and world pose."""

    id: int
    intrinsics: Intrinsics
    pose: Pose


@dataclass
class DepthImage:
    """Row-major depth map in meters; 0 encodes an invalid pixel."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32).reshape(-1)
        if self.values.size != self.width * self.height:
            raise InvalidInputError(
                f"depth has {self.values.size} values, expected {self.width * self.height}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("depth contains non-finite values")
        if np.any(self.values < 0):
            raise InvalidInputError("depth contains negative values")

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by its min and max corners."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "minimum", np.asarray(self.minimum, dtype=np.float64))
        object.__setattr__(self, "maximum", np.asarray(self.maximum, dtype=np.float64))
        if self.minimum.shape != (3,) or self.maximum.shape != (3,):
            raise InvalidInputError("box corners must be 3-vectors")
        if not np.all(self.minimum < self.maximum):
            raise InvalidInputError(f"box min {self.minimum} must be < max {self.maximum} per axis")

    def contains(self, p, strict: bool = False) -> bool:
        p = np.asarray(p, dtype=np.float64)
        if strict:
            return bool(np.all(p > self.minimum) and np.all(p < self.maximum))
        return bool(np.all(p >= self.minimum) and np.all(p <= self.maximum))

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.maximum - self.minimum))


@dataclass(frozen=True)
class BoxScene:
    """A rectangular room with axis-aligned box obstacles.

    The camera lives inside `room` and sees its interior walls plus the
    exteriors of the obstacles. `floor_y` is the world height of the floor
    (defaults to the room's minimum y).
    """

    room: Box
    obstacles: tuple[Box, ...] = ()
    floor_y: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for i, ob in enumerate(self.obstacles):
            if not (np.all(ob.minimum > self.room.minimum) and np.all(ob.maximum < self.room.maximum)):
                raise InvalidInputError(f"obstacle {i} is not strictly inside the room")
        if self.floor_y is None:
            object.__setattr__(self, "floor_y", float(self.room.minimum[1]))

    def valid_camera_position(self, p) -> bool:
        p = np.asarray(p, dtype=np.float64)
        if not self.room.contains(p, strict=True):
            return False
        return not any(ob.contains(p) for ob in self.obstacles)


def _pixel_rays(intr: Intrinsics) -> np.ndarray:
    """Camera-frame ray directions per pixel, z component fixed to 1 (H*W, 3).

    With z == 1 the ray parameter t at a hit equals the camera-frame depth.
    """
    us, vs = np.meshgrid(np.arange(intr.width), np.arange(intr.height))
    dirs = np.stack(
        [
            (us.ravel() - intr.cx) / intr.fx,
            (vs.ravel() - intr.cy) / intr.fy,
            np.ones(intr.width * intr.height),
        ],
        axis=1,
    )
    return dirs


def backproject(depth: DepthImage, cam: CameraView) -> np.ndarray:
    """World-space points for every valid pixel of a depth image, (N, 3).

    Points are emitted in row-major pixel order; pixels with depth 0 are
    skipped.
    """
    intr = cam.intrinsics
    if depth.width != intr.width or depth.height != intr.height:
        raise InvalidInputError(
            f"depth {depth.width}x{depth.height} does not match intrinsics {intr.width}x{intr.height}"
        )
    d = depth.values.astype(np.float64)
    valid = d > 0
    dirs = _pixel_rays(intr)[valid]
    cam_points = dirs * d[valid][:, None]
    return cam.pose.transform(cam_points)


def project(point, cam: CameraView):
    """Pixel coordinates and depth of a world point, or None.

    Returns (u, v, depth) when the point is in front of the camera and its
    projection falls inside the pixel-area rectangle
    [-0.5, width-0.5) x [-0.5, height-0.5); otherwise None. Pixel centers sit
    at integer coordinates, so every valid pixel round-trips.
    """
    p = cam.pose.inverse_transform(np.asarray(point, dtype=np.float64).reshape(1, 3))[0]
    z = p[2]
    if z <= 0:
        return None
    intr = cam.intrinsics
    u = intr.fx * p[0] / z + intr.cx
    v = intr.fy * p[1] / z + intr.cy
    if not (-0.5 <= u < intr.width - 0.5 and -0.5 <= v < intr.height - 0.5):
        return None
    return (u, v, z)


@dataclass
class TraceResult:
    """Per-pixel output of the analytic ray trace against a BoxScene."""

    depth: np.ndarray    # (H, W) float64, camera-frame z of the nearest hit
    face: np.ndarray     # (H, W) int32 face id (room faces 0..5, obstacle k faces 6+6k..11+6k)
    points: np.ndarray   # (H, W, 3) world-space hit points
    normals: np.ndarray  # (H, W, 3) unit normals oriented toward free space


_AXIS_NORMALS = np.array(
    [
        [-1, 0, 0], [1, 0, 0],
        [0, -1, 0], [0, 1, 0],
        [0, 0, -1], [0, 0, 1],
    ],
    dtype=np.float64,
)


def trace_scene(scene: BoxScene, cam: CameraView) -> TraceResult:
    """Trace one ray per pixel against room interior and obstacle exteriors.

    Face ids: for the room, face 2*axis selects the min-corner wall and
    2*axis+1 the max-corner wall (interior side). Obstacle k contributes
    faces 6+6k .. 6+6k+5 with the same axis layout (exterior side).
    """
    pos = cam.pose.position
    if not scene.valid_camera_position(pos):
        raise InvalidPoseError(f"camera position {pos.tolist()} is outside the room or inside an obstacle")

    intr = cam.intrinsics
    dirs = _pixel_rays(intr) @ cam.pose.rotation().T  # world-frame, z_cam component == 1
    n_pix = dirs.shape[0]

    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs  # +-inf on parallel axes; the camera is strictly inside the room


    # Room: camera is inside, so the hit is the slab exit distance.
    t_exit = np.full(n_pix, np.inf)
    exit_face = np.zeros(n_pix, dtype=np.int32)
    for axis in range(3):
        lo = (scene.room.minimum[axis] - pos[axis]) * inv[:, axis]
        hi = (scene.room.maximum[axis] - pos[axis]) * inv[:, axis]
        t_far = np.maximum(lo, hi)
        far_is_max = hi >= lo
        closer = t_far < t_exit
        t_exit = np.where(closer, t_far, t_exit)
        exit_face = np.where(closer, 2 * axis + far_is_max.astype(np.int32), exit_face)
    t_best = t_exit
    face_best = exit_face

    # Obstacles: camera is outside, so the hit is the slab entry distance.
    for k, ob in enumerate(scene.obstacles):
        t_near = np.full(n_pix, -np.inf)
        t_far = np.full(n_pix, np.inf)
        near_face = np.zeros(n_pix, dtype=np.int32)
        for axis in range(3):
            with np.errstate(invalid="ignore"):
                lo = (ob.minimum[axis] - pos[axis]) * inv[:, axis]
                hi = (ob.maximum[axis] - pos[axis]) * inv[:, axis]
                t0 = np.minimum(lo, hi)
                t1 = np.maximum(lo, hi)
            # NaN = ray parallel and exactly on the face plane; count as a miss.
            bad = np.isnan(t0) | np.isnan(t1)
            t0 = np.where(bad, np.inf, t0)
            t1 = np.where(bad, -np.inf, t1)
            near_is_min = lo <= hi
            farther = t0 > t_near
            t_near = np.where(farther, t0, t_near)
            near_face = np.where(farther, 6 + 6 * k + 2 * axis + (~near_is_min).astype(np.int32), near_face)
            t_far = np.minimum(t_far, t1)
        hit = (t_near <= t_far) & (t_near > 1e-12) & (t_near < t_best)
        t_best = np.where(hit, t_near, t_best)
        face_best = np.where(hit, near_face, face_best)

    points = pos + dirs * t_best[:, None]
    # Room walls face inward (camera is inside), obstacle walls face outward.
    normals = np.empty((n_pix, 3))
    room_mask = face_best < 6
    normals[room_mask] = -_AXIS_NORMALS[face_best[room_mask]]
    normals[~room_mask] = _AXIS_NORMALS[(face_best[~room_mask] - 6) % 6]

    h, w = intr.height, intr.width
    return TraceResult(
        depth=t_best.reshape(h, w),
        face=face_best.reshape(h, w),
        points=points.reshape(h, w, 3),
        normals=normals.reshape(h, w, 3),
    )


def render_depth_box(scene: BoxScene, cam: CameraView) -> DepthImage:
    """Analytic depth render of a box-room scene through the pinhole model."""
    result = trace_scene(scene, cam)
    return DepthImage(cam.intrinsics.width, cam.intrinsics.height, result.depth.astype(np.float32))
