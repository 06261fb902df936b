"""Surface voxelization and pairwise co-visible-surface overlap.

The degree of co-visibility between two views is the IoU of their observed
surfaces, discretized on a fixed world-space voxel grid: a cell is
floor(coordinate / resolution) per axis. Per-pixel co-visibility masks mark
the pixels of one view whose surface cell is also observed by another view.

Cells are packed into single int64 keys internally (21 bits per axis) so set
operations stay in numpy; the tuple view is materialized on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import CameraView, DepthImage, backproject

DEFAULT_RESOLUTION = 0.05

_PACK_BIAS = 1 << 20  # supports cell indices in (-2^20, 2^20)
_PACK_MASK = (1 << 21) - 1


def _cell_indices(points: np.ndarray, resolution: float) -> np.ndarray:
    return np.floor(np.asarray(points, dtype=np.float64) / resolution).astype(np.int64)


def _pack(idx: np.ndarray) -> np.ndarray:
    """Pack (N, 3) integer cells into single int64 keys."""
    if idx.size and np.any(np.abs(idx) >= _PACK_BIAS):
        raise InvalidInputError("cell index out of packable range; scene too large for resolution")
    return (
        ((idx[:, 0] + _PACK_BIAS) << 42)
        | ((idx[:, 1] + _PACK_BIAS) << 21)
        | (idx[:, 2] + _PACK_BIAS)
    )


def _unpack(keys: np.ndarray) -> np.ndarray:
    out = np.empty((len(keys), 3), dtype=np.int64)
    out[:, 0] = (keys >> 42) - _PACK_BIAS
    out[:, 1] = ((keys >> 21) & _PACK_MASK) - _PACK_BIAS
    out[:, 2] = (keys & _PACK_MASK) - _PACK_BIAS
    return out


class SurfaceVoxelSet:
    """Deduplicated integer grid cells of observed surface points."""

    __slots__ = ("resolution", "_keys", "_cells")

    def __init__(self, resolution: float, cells):
        if resolution <= 0:
            raise InvalidInputError(f"resolution must be positive, got {resolution}")
        self.resolution = resolution
        idx = np.array(sorted(set(map(tuple, cells))), dtype=np.int64).reshape(-1, 3)
        self._keys = np.sort(_pack(idx)) if len(idx) else np.empty(0, dtype=np.int64)
        self._cells = None

    @classmethod
    def from_keys(cls, resolution: float, keys: np.ndarray) -> "SurfaceVoxelSet":
        """Internal fast path: keys must be sorted and unique."""
        obj = cls.__new__(cls)
        obj.resolution = resolution
        obj._keys = keys
        obj._cells = None
        return obj

    @property
    def cells(self) -> set:
        if self._cells is None:
            self._cells = set(map(tuple, _unpack(self._keys).tolist()))
        return self._cells

    @property
    def keys(self) -> np.ndarray:
        return self._keys

    def __len__(self):
        return len(self._keys)

    def __repr__(self):
        return f"SurfaceVoxelSet(resolution={self.resolution}, n_cells={len(self)})"


@dataclass
class CovisMask:
    """Row-major booleans over source_view's pixels: True where the pixel's
    surface cell is also observed by other_view."""

    width: int
    height: int
    bits: np.ndarray
    source_view: int
    other_view: int

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool).reshape(-1)
        if self.bits.size != self.width * self.height:
            raise InvalidInputError(
                f"mask has {self.bits.size} bits, expected {self.width * self.height}"
            )

    def grid(self) -> np.ndarray:
        return self.bits.reshape(self.height, self.width)

    def true_count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class PairDegree:
    """Symmetric co-visibility degree for one unordered view pair."""

    i: int
    j: int
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidInputError(f"degree must be in [0, 1], got {self.value}")


def voxelize(points, resolution: float) -> SurfaceVoxelSet:
    """Quantize world points onto the voxel grid, collapsing duplicates."""
    if resolution <= 0:
        raise InvalidInputError(f"resolution must be positive, got {resolution}")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        return SurfaceVoxelSet.from_keys(resolution, np.empty(0, dtype=np.int64))
    keys = np.unique(_pack(_cell_indices(points, resolution)))
    return SurfaceVoxelSet.from_keys(resolution, keys)


def surface_iou(a: SurfaceVoxelSet, b: SurfaceVoxelSet) -> float:
    """|a ∩ b| / |a ∪ b|; 0 when both sets are empty."""
    if a.resolution != b.resolution:
        raise InvalidInputError(f"resolution mismatch: {a.resolution} vs {b.resolution}")
    inter = len(np.intersect1d(a.keys, b.keys, assume_unique=True))
    union = len(a) + len(b) - inter
    if union == 0:
        return 0.0
    return inter / union


def view_cells(view: CameraView, depth: DepthImage, resolution: float) -> SurfaceVoxelSet:
    """Voxelized observed surface of one view."""
    return voxelize(backproject(depth, view), resolution)


def pair_degree(
    view_i: CameraView,
    depth_i: DepthImage,
    view_j: CameraView,
    depth_j: DepthImage,
    resolution: float = DEFAULT_RESOLUTION,
) -> PairDegree:
    """Co-visibility degree of two views: surface IoU of their voxel sets."""
    a = view_cells(view_i, depth_i, resolution)
    b = view_cells(view_j, depth_j, resolution)
    return PairDegree(view_i.id, view_j.id, surface_iou(a, b))


def covis_mask(
    source: CameraView,
    depth: DepthImage,
    other_cells: SurfaceVoxelSet,
    other_view: int = -1,
) -> CovisMask:
    """Per-pixel co-visibility of `source` against another view's cells.

    A pixel is True iff it has valid depth and its backprojected point lands
    in a cell of `other_cells`. Cells come from depth, which already encodes
    visibility, so no occlusion re-check is needed.
    """
    intr = source.intrinsics
    if depth.width != intr.width or depth.height != intr.height:
        raise InvalidInputError("depth dimensions do not match source intrinsics")
    bits = np.zeros(intr.width * intr.height, dtype=bool)
    valid = depth.values > 0
    if valid.any() and len(other_cells):
        points = backproject(depth, source)
        keys = _pack(_cell_indices(points, other_cells.resolution))
        bits[np.flatnonzero(valid)] = np.isin(keys, other_cells.keys)
    return CovisMask(intr.width, intr.height, bits, source.id, other_view)
