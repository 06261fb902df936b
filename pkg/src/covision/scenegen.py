"""Progressive camera placement for sparse multi-view scenario generation.

Each iteration samples candidate poses from a band hugging walls and obstacle
faces, scores them by newly-vs-already covered floor cells
(score = alpha * new + beta * seen), keeps only candidates whose best surface
IoU against the already-selected views falls inside the admissibility window,
picks the top scorer, then prunes candidate positions within a radius of the
pick. The loop stops once the observed-surface coverage of the floor plan
exceeds the configured threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covis import (
    PairDegree,
    SurfaceVoxelSet,
    covis_mask,
    surface_iou,
    voxelize,
)
from .errors import InvalidInputError, PartialScenarioError, RegionExhaustedError
from .geometry import (
    BoxScene,
    CameraView,
    DepthImage,
    Intrinsics,
    Pose,
    backproject,
    render_depth_box,
)
from .grapheval import CovisGraph, binarize


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters. alpha/beta weight new vs already-covered cells;
    the IoU window and the coverage stop mirror the selection rules."""

    seed: int = 0
    alpha: float = 0.9
    beta: float = 0.1
    n_c: int = 32
    prune_radius: float = 1.0
    iou_min: float = 0.05
    iou_max: float = 0.30
    coverage_stop: float = 0.80
    wall_band: float = 0.5
    eye_height: float = 1.5
    coverage_cell: float = 0.25
    band_cell: float = 0.10
    resolution: float = 0.05
    yaw_jitter: float = math.pi / 4
    max_iterations: int = 500
    tau: float = 0.0
    image_width: int = 128
    image_height: int = 128
    fov_deg: float = 90.0

    def __post_init__(self):
        if not (0.0 <= self.iou_min < self.iou_max <= 1.0):
            raise InvalidInputError("need 0 <= iou_min < iou_max <= 1")
        if not (0.0 <= self.coverage_stop <= 1.0):
            raise InvalidInputError("coverage_stop must be in [0, 1]")
        if self.n_c < 1:
            raise InvalidInputError("n_c must be >= 1")
        if self.prune_radius <= 0:
            raise InvalidInputError("prune_radius must be positive")
        if self.wall_band <= 0:
            raise InvalidInputError("wall_band must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")

    def intrinsics(self) -> Intrinsics:
        return Intrinsics.from_fov(self.image_width, self.image_height, self.fov_deg)


@dataclass
class CoverageMap:
    """Top-down (x, z) grid over the room footprint minus obstacle footprints.

    A cell counts as covered once any observed surface point projects into it.
    """

    origin: tuple[float, float]
    cell: float
    nx: int
    nz: int
    footprint: frozenset
    covered: set = field(default_factory=set)

    @staticmethod
    def build(scene: BoxScene, cell: float) -> "CoverageMap":
        if cell <= 0:
            raise InvalidInputError("coverage cell size must be positive")
        x0, z0 = float(scene.room.minimum[0]), float(scene.room.minimum[2])
        nx = max(1, math.ceil((scene.room.maximum[0] - x0) / cell))
        nz = max(1, math.ceil((scene.room.maximum[2] - z0) / cell))
        cells = set()
        for ix in range(nx):
            for iz in range(nz):
                cx = x0 + (ix + 0.5) * cell
                cz = z0 + (iz + 0.5) * cell
                inside_obstacle = any(
                    ob.minimum[0] <= cx <= ob.maximum[0] and ob.minimum[2] <= cz <= ob.maximum[2]
                    for ob in scene.obstacles
                )
                if not inside_obstacle:
                    cells.add((ix, iz))
        return CoverageMap((x0, z0), cell, nx, nz, frozenset(cells))

    def project(self, points: np.ndarray) -> frozenset:
        """Footprint cells hit by world points (clamped to the grid)."""
        if len(points) == 0:
            return frozenset()
        ix = np.clip(np.floor((points[:, 0] - self.origin[0]) / self.cell).astype(np.int64), 0, self.nx - 1)
        iz = np.clip(np.floor((points[:, 2] - self.origin[1]) / self.cell).astype(np.int64), 0, self.nz - 1)
        return frozenset(zip(ix.tolist(), iz.tolist())) & self.footprint

    def mark(self, cells) -> None:
        self.covered |= set(cells)

    @property
    def total_cells(self) -> int:
        return len(self.footprint)


def coverage_fraction(coverage: CoverageMap) -> float:
    """Covered fraction of the footprint."""
    if coverage.total_cells == 0:
        raise InvalidInputError("coverage map has an empty footprint")
    return len(coverage.covered) / coverage.total_cells


@dataclass
class Candidate:
    """A sampled pose with its rendered depth, voxelized surface, and the
    floor-plan cells that surface projects onto."""

    pose: Pose
    depth: DepthImage
    cells: SurfaceVoxelSet
    floor_cells: frozenset


def score(candidate: Candidate, coverage: CoverageMap, alpha: float, beta: float) -> float:
    """alpha * (raw count of new floor cells) + beta * (raw count of seen ones)."""
    new = len(candidate.floor_cells - coverage.covered)
    seen = len(candidate.floor_cells & coverage.covered)
    return alpha * new + beta * seen


def prune(positions: np.ndarray, selected_xz, radius: float) -> np.ndarray:
    """Drop (x, z) positions within `radius` (inclusive) of the selected one."""
    if radius <= 0:
        raise InvalidInputError("prune radius must be positive")
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    sel = np.asarray(selected_xz, dtype=np.float64).reshape(2)
    keep = np.linalg.norm(positions - sel, axis=1) > radius
    return positions[keep]


def admissible(candidate_cells: SurfaceVoxelSet, selected_cells, iou_min: float, iou_max: float) -> bool:
    """True for the first view; afterwards true iff the best IoU against the
    selected views lies in [iou_min, iou_max] (no view may exceed iou_max and
    at least one must reach iou_min)."""
    selected_cells = list(selected_cells)
    if not selected_cells:
        return True
    best = 0.0
    for cells in selected_cells:
        v = surface_iou(candidate_cells, cells)
        if v > iou_max:
            return False
        best = max(best, v)
    return best >= iou_min


class _Band:
    """Candidate-position band along walls and obstacle faces, discretized on
    a fine grid. Sampling picks an unpruned grid cell uniformly, then jitters
    inside it."""

    def __init__(self, scene: BoxScene, cfg: GenConfig):
        self.scene = scene
        self.cfg = cfg
        x0, z0 = float(scene.room.minimum[0]), float(scene.room.minimum[2])
        x1, z1 = float(scene.room.maximum[0]), float(scene.room.maximum[2])
        step = cfg.band_cell
        centers = []
        ix = 0
        x = x0 + step / 2
        while x < x1:
            z = z0 + step / 2
            while z < z1:
                if self._in_band(x, z):
                    centers.append((x, z))
                z += step
            x += step
            ix += 1
        if not centers:
            raise InvalidInputError("wall band contains no valid camera positions")
        self.centers = np.array(centers, dtype=np.float64)

    def _inside_obstacle_footprint(self, x: float, z: float) -> bool:
        return any(
            ob.minimum[0] <= x <= ob.maximum[0] and ob.minimum[2] <= z <= ob.maximum[2]
            for ob in self.scene.obstacles
        )

    def _face_distance(self, x: float, z: float):
        """(distance, yaw of the outward face normal) for the nearest wall or
        obstacle side face, measured in the floor plane."""
        room = self.scene.room
        cands = [
            (x - room.minimum[0], 0.0 + math.pi / 2),   # wall x=min, normal +x
            (room.maximum[0] - x, -math.pi / 2),         # wall x=max, normal -x
            (z - room.minimum[2], 0.0),                  # wall z=min, normal +z
            (room.maximum[2] - z, math.pi),              # wall z=max, normal -z
        ]
        for ob in self.scene.obstacles:
            dx = max(ob.minimum[0] - x, 0.0, x - ob.maximum[0])
            dz = max(ob.minimum[2] - z, 0.0, z - ob.maximum[2])
            dist = math.hypot(dx, dz)
            if ob.minimum[0] - x > 0:
                x_yaw = -math.pi / 2  # normal -x, away from the obstacle
            else:
                x_yaw = math.pi / 2
            if ob.minimum[2] - z > 0:
                z_yaw = math.pi
            else:
                z_yaw = 0.0
            yaw = x_yaw if dx >= dz else z_yaw
            cands.append((dist, yaw))
        return min(cands, key=lambda c: c[0])

    def _in_band(self, x: float, z: float) -> bool:
        if self._inside_obstacle_footprint(x, z):
            return False
        dist, _ = self._face_distance(x, z)
        return dist <= self.cfg.wall_band

    def available(self, pruned_xz) -> np.ndarray:
        pos = self.centers
        for p in pruned_xz:
            pos = prune(pos, p, self.cfg.prune_radius)
            if len(pos) == 0:
                break
        return pos

    def sample_position(self, rng: np.random.Generator, pruned_xz) -> tuple[float, float]:
        pos = self.available(pruned_xz)
        if len(pos) == 0:
            raise RegionExhaustedError("all candidate positions within the wall band are pruned")
        half = self.cfg.band_cell / 2
        for _ in range(64):
            cx, cz = pos[int(rng.integers(len(pos)))]
            x = float(cx + rng.uniform(-half, half))
            z = float(cz + rng.uniform(-half, half))
            if not self._in_band(x, z):
                continue
            if any(math.hypot(x - px, z - pz) <= self.cfg.prune_radius for px, pz in pruned_xz):
                continue
            return x, z
        # Band cell centers are themselves valid positions.
        cx, cz = pos[int(rng.integers(len(pos)))]
        return float(cx), float(cz)

    def sample_pose(self, rng: np.random.Generator, pruned_xz) -> Pose:
        x, z = self.sample_position(rng, pruned_xz)
        _, face_yaw = self._face_distance(x, z)
        yaw = face_yaw + float(rng.uniform(-self.cfg.yaw_jitter, self.cfg.yaw_jitter))
        y = self.scene.floor_y + self.cfg.eye_height
        return Pose.looking([x, y, z], yaw)


def sample_candidates(
    scene: BoxScene,
    cfg: GenConfig,
    rng: np.random.Generator,
    pruned_xz=(),
    n: int | None = None,
    coverage: CoverageMap | None = None,
    band: _Band | None = None,
) -> list[Candidate]:
    """Render and voxelize `n` (default cfg.n_c) candidate poses from the band."""
    band = band or _Band(scene, cfg)
    coverage = coverage or CoverageMap.build(scene, cfg.coverage_cell)
    intr = cfg.intrinsics()
    out = []
    for _ in range(n if n is not None else cfg.n_c):
        pose = band.sample_pose(rng, pruned_xz)
        cam = CameraView(-1, intr, pose)
        depth = render_depth_box(scene, cam)
        pts = backproject(depth, cam)
        cells = voxelize(pts, cfg.resolution)
        out.append(Candidate(pose, depth, cells, coverage.project(pts)))
    return out


@dataclass
class Scenario:
    """One generated scene: views, depths, ground-truth degrees, binarized
    graph, and directed co-visibility masks for every overlapping pair."""

    scene_id: str
    seed: int
    resolution: float
    tau: float
    views: list
    depths: list
    weights: list
    gt_adjacency: np.ndarray
    masks: dict
    coverage: float
    images: list | None = None

    def weight_matrix(self) -> np.ndarray:
        n = len(self.views)
        index = {v.id: k for k, v in enumerate(self.views)}
        w = np.zeros((n, n))
        for pd in self.weights:
            w[index[pd.i], index[pd.j]] = w[index[pd.j], index[pd.i]] = pd.value
        return w

    def graph(self) -> CovisGraph:
        return CovisGraph(
            [v.id for v in self.views], self.weight_matrix(), self.gt_adjacency, self.tau
        )

    def pair_count(self) -> int:
        n = len(self.views)
        return n * (n - 1) // 2


def build_ground_truth(views, depths, cells_list, resolution: float, tau: float):
    """All-pairs degrees, binarized adjacency, and directed masks (degree > 0)."""
    n = len(views)
    weights = []
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = surface_iou(cells_list[i], cells_list[j])
            weights.append(PairDegree(views[i].id, views[j].id, v))
            w[i, j] = w[j, i] = v
    adjacency = binarize(w, tau)
    masks = {}
    for i in range(n):
        for j in range(n):
            if i != j and w[i, j] > 0:
                masks[(i, j)] = covis_mask(views[i], depths[i], cells_list[j], other_view=views[j].id)
    return weights, adjacency, masks


def generate_scenario(scene: BoxScene, cfg: GenConfig, scene_id: str = "scene") -> Scenario:
    """Run the placement loop to completion and assemble the scenario.

    Deterministic for a given (scene, cfg). Raises PartialScenarioError with
    the partial result if the iteration cap is reached (or the band is
    exhausted) before coverage exceeds cfg.coverage_stop.
    """
    if scene.floor_y + cfg.eye_height >= scene.room.maximum[1]:
        raise InvalidInputError("eye height puts the camera above the ceiling")
    rng = np.random.default_rng(cfg.seed)
    band = _Band(scene, cfg)
    coverage = CoverageMap.build(scene, cfg.coverage_cell)
    intr = cfg.intrinsics()

    poses: list[Pose] = []
    depths: list[DepthImage] = []
    cells_list: list[SurfaceVoxelSet] = []
    pruned: list[tuple[float, float]] = []
    exhausted = False

    for _ in range(cfg.max_iterations):
        if poses and coverage_fraction(coverage) > cfg.coverage_stop:
            break
        try:
            candidates = sample_candidates(
                scene, cfg, rng, pruned_xz=pruned, coverage=coverage, band=band
            )
        except RegionExhaustedError:
            exhausted = True
            break
        keep = [
            c for c in candidates if admissible(c.cells, cells_list, cfg.iou_min, cfg.iou_max)
        ]
        if not keep:
            continue
        scores = [score(c, coverage, cfg.alpha, cfg.beta) for c in keep]
        best = keep[int(np.argmax(scores))]
        poses.append(best.pose)
        depths.append(best.depth)
        cells_list.append(best.cells)
        coverage.mark(best.floor_cells)
        pruned.append((float(best.pose.position[0]), float(best.pose.position[2])))

    views = [CameraView(i, intr, pose) for i, pose in enumerate(poses)]
    weights, adjacency, masks = build_ground_truth(views, depths, cells_list, cfg.resolution, cfg.tau)
    final = coverage_fraction(coverage) if poses else 0.0
    scenario = Scenario(
        scene_id=scene_id,
        seed=cfg.seed,
        resolution=cfg.resolution,
        tau=cfg.tau,
        views=views,
        depths=depths,
        weights=weights,
        gt_adjacency=adjacency,
        masks=masks,
        coverage=final,
    )
    if final <= cfg.coverage_stop:
        reason = "candidate band exhausted" if exhausted else "iteration cap reached"
        raise PartialScenarioError(
            f"{reason} at coverage {final:.3f} <= target {cfg.coverage_stop}", scenario
        )
    return scenario
