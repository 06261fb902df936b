"""Scenario persistence: byte-deterministic file formats and import paths.

Formats (all little-endian, all JSON as UTF-8 with sorted keys):

* Scene file: JSON {"room": {"min", "max"}, "obstacles": [...], "floor_y"}.
* Depth file: magic "CVDZ", uint32 height, uint32 width, then
  height*width float32 depths in meters, row-major; 0.0 marks invalid.
* Mask file: text; header line "i j width height", then one line per row of
  alternating run lengths starting with a false-run.
* Graph file: JSON with node ids, upper-triangle [i, j, weight] triples for
  weights > 0, and optionally tau plus the binarized edge list.
* Image file: 8-bit binary PGM (P5).
* Manifest: JSON tying the above together; format_version gates loading.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .covis import CovisMask, PairDegree
from .errors import FormatError, InvalidInputError, MissingFileError, StoreError
from .geometry import Box, BoxScene, CameraView, DepthImage, Intrinsics, Pose
from .grapheval import binarize
from .matching import GrayImage
from .scenegen import Scenario, build_ground_truth
from .covis import view_cells

FORMAT_VERSION = 1
DEPTH_MAGIC = b"CVDZ"
MANIFEST_NAME = "manifest.json"
GRAPH_NAME = "gt_graph.json"
MASKS_DIR = "masks"
DEPTH_DIR = "depth"
IMAGES_DIR = "images"


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_json(path: Path):
    if not path.exists():
        raise MissingFileError(f"missing file: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise StoreError(f"cannot write {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    _write_bytes(path, text.encode("utf-8"))


# -- scene files --------------------------------------------------------------

def save_scene(scene: BoxScene, path) -> Path:
    path = Path(path)
    obj = {
        "room": {"min": scene.room.minimum.tolist(), "max": scene.room.maximum.tolist()},
        "obstacles": [
            {"min": ob.minimum.tolist(), "max": ob.maximum.tolist()} for ob in scene.obstacles
        ],
        "floor_y": scene.floor_y,
    }
    _write_text(path, _dump_json(obj))
    return path


def load_scene(path) -> BoxScene:
    obj = _read_json(Path(path))
    try:
        room = Box(obj["room"]["min"], obj["room"]["max"])
        obstacles = tuple(Box(ob["min"], ob["max"]) for ob in obj.get("obstacles", []))
        return BoxScene(room=room, obstacles=obstacles, floor_y=obj.get("floor_y"))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad scene file {path}: {exc}") from exc


# -- depth files ---------------------------------------------------------------

def write_depth(depth: DepthImage, path) -> Path:
    path = Path(path)
    header = DEPTH_MAGIC + np.array([depth.height, depth.width], dtype="<u4").tobytes()
    _write_bytes(path, header + depth.values.astype("<f4").tobytes())
    return path


def read_depth(path) -> DepthImage:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"missing depth file: {path}")
    raw = path.read_bytes()
    if raw[:4] != DEPTH_MAGIC:
        raise FormatError(f"bad depth magic in {path}: expected {DEPTH_MAGIC!r}, got {raw[:4]!r}")
    if len(raw) < 12:
        raise FormatError(f"truncated depth header in {path}")
    height, width = np.frombuffer(raw[4:12], dtype="<u4")
    values = np.frombuffer(raw[12:], dtype="<f4")
    if values.size != int(height) * int(width):
        raise FormatError(
            f"depth payload in {path} has {values.size} values, expected {int(height) * int(width)}"
        )
    return DepthImage(int(width), int(height), values.copy())


# -- mask files ---------------------------------------------------------------

def _encode_rle_row(row: np.ndarray) -> str:
    runs = []
    current = False
    count = 0
    for bit in row.tolist():
        if bit == current:
            count += 1
        else:
            runs.append(count)
            current = bit
            count = 1
    runs.append(count)
    return " ".join(str(r) for r in runs)


def write_mask(mask: CovisMask, path) -> Path:
    path = Path(path)
    lines = [f"{mask.source_view} {mask.other_view} {mask.width} {mask.height}"]
    grid = mask.grid()
    for row in grid:
        lines.append(_encode_rle_row(row))
    _write_text(path, "\n".join(lines) + "\n")
    return path


def read_mask(path) -> CovisMask:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"missing mask file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not re.fullmatch(r"-?\d+ -?\d+ \d+ \d+", lines[0]):
        raise FormatError(f"bad mask header in {path}")
    src, other, width, height = map(int, lines[0].split())
    if len(lines) != height + 1:
        raise FormatError(f"mask {path} has {len(lines) - 1} rows, expected {height}")
    bits = np.zeros((height, width), dtype=bool)
    for r, line in enumerate(lines[1:]):
        runs = [int(x) for x in line.split()]
        if any(r_ < 0 for r_ in runs) or sum(runs) != width:
            raise FormatError(f"mask {path} row {r} runs sum to {sum(runs)}, expected {width}")
        pos = 0
        value = False
        for run in runs:
            if value:
                bits[r, pos : pos + run] = True
            pos += run
            value = not value
    return CovisMask(width, height, bits.ravel(), src, other)


# -- image files (binary PGM) --------------------------------------------------

def write_image(img: GrayImage, path) -> Path:
    path = Path(path)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    _write_bytes(path, header + img.to_bytes())
    return path


def read_image(path) -> GrayImage:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"missing image file: {path}")
    raw = path.read_bytes()
    m = re.match(rb"P5\n(\d+) (\d+)\n255\n", raw)
    if not m:
        raise FormatError(f"bad PGM header in {path}")
    width, height = int(m.group(1)), int(m.group(2))
    payload = raw[m.end() :]
    if len(payload) != width * height:
        raise FormatError(f"PGM payload in {path} has {len(payload)} bytes, expected {width * height}")
    return GrayImage.from_bytes(width, height, payload)


# -- graph files ---------------------------------------------------------------

@dataclass
class GraphFile:
    """Decoded graph file: node ids plus weights and/or a binarized edge list."""

    nodes: list
    weights: np.ndarray | None
    tau: float | None
    edges: list | None

    def adjacency(self) -> np.ndarray:
        """Explicit edges when present, else binarized weights at tau."""
        n = len(self.nodes)
        if self.edges is not None:
            index = {node: k for k, node in enumerate(self.nodes)}
            adj = np.zeros((n, n), dtype=bool)
            for i, j in self.edges:
                if i not in index or j not in index:
                    raise FormatError(f"edge ({i}, {j}) references unknown node")
                adj[index[i], index[j]] = adj[index[j], index[i]] = True
            np.fill_diagonal(adj, False)
            return adj
        if self.weights is None:
            raise FormatError("graph file carries neither edges nor weights")
        return binarize(self.weights, self.tau if self.tau is not None else 0.0)

    def weight_matrix(self) -> np.ndarray:
        if self.weights is None:
            raise FormatError("graph file carries no weights")
        return self.weights


def graph_file_object(nodes, weights=None, tau=None, edges=None) -> dict:
    """The JSON object for a graph file; shared by files and the HTTP API."""
    nodes = list(nodes)
    obj = {"format_version": FORMAT_VERSION, "nodes": nodes}
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        index = {node: k for k, node in enumerate(nodes)}
        triples = []
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                if w[a, b] > 0:
                    triples.append([nodes[a], nodes[b], float(w[a, b])])
        obj["weights"] = triples
    if tau is not None:
        obj["tau"] = float(tau)
    if edges is not None:
        obj["edges"] = [[i, j] for i, j in edges]
    return obj


def write_graph_file(path, nodes, weights=None, tau=None, edges=None) -> Path:
    path = Path(path)
    _write_text(path, _dump_json(graph_file_object(nodes, weights, tau, edges)))
    return path


def load_graph_file(path) -> GraphFile:
    obj = _read_json(Path(path))
    if obj.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"unrecognized graph format_version {obj.get('format_version')!r} in {path}"
        )
    nodes = obj.get("nodes")
    if not isinstance(nodes, list):
        raise FormatError(f"graph file {path} lacks a node list")
    weights = None
    if "weights" in obj:
        index = {node: k for k, node in enumerate(nodes)}
        weights = np.zeros((len(nodes), len(nodes)))
        for i, j, w in obj["weights"]:
            if i not in index or j not in index:
                raise FormatError(f"weight entry ({i}, {j}) references unknown node in {path}")
            weights[index[i], index[j]] = weights[index[j], index[i]] = float(w)
    edges = [tuple(e) for e in obj["edges"]] if "edges" in obj else None
    return GraphFile(nodes, weights, obj.get("tau"), edges)


# -- scenario directories --------------------------------------------------------

def _depth_name(i: int) -> str:
    return f"{DEPTH_DIR}/view_{i:03d}.cvdz"


def _image_name(i: int) -> str:
    return f"{IMAGES_DIR}/view_{i:03d}.pgm"


def _mask_name(i: int, j: int) -> str:
    return f"{MASKS_DIR}/m_{i:03d}_{j:03d}.rle"


def save_scenario(scenario: Scenario, out_dir) -> Path:
    """Write a scenario directory; returns the manifest path. Deterministic:
    saving the same scenario twice yields byte-identical files."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / DEPTH_DIR).mkdir(exist_ok=True)
        (out / MASKS_DIR).mkdir(exist_ok=True)
        if scenario.images is not None:
            (out / IMAGES_DIR).mkdir(exist_ok=True)
    except OSError as exc:
        raise StoreError(f"cannot create scenario directory {out}: {exc}") from exc

    view_records = []
    for k, view in enumerate(scenario.views):
        write_depth(scenario.depths[k], out / _depth_name(k))
        record = {
            "id": view.id,
            "intrinsics": {
                "width": view.intrinsics.width,
                "height": view.intrinsics.height,
                "fx": view.intrinsics.fx,
                "fy": view.intrinsics.fy,
                "cx": view.intrinsics.cx,
                "cy": view.intrinsics.cy,
            },
            "pose": {
                "position": view.pose.position.tolist(),
                "quaternion": view.pose.quaternion.tolist(),
            },
            "depth": _depth_name(k),
            "image": None,
        }
        if scenario.images is not None:
            write_image(scenario.images[k], out / _image_name(k))
            record["image"] = _image_name(k)
        view_records.append(record)

    nodes = [v.id for v in scenario.views]
    write_graph_file(
        out / GRAPH_NAME,
        nodes,
        weights=scenario.weight_matrix(),
        tau=scenario.tau,
        edges=scenario.graph().edge_list(),
    )
    for (i, j), mask in sorted(scenario.masks.items()):
        write_mask(mask, out / _mask_name(i, j))

    manifest = {
        "format_version": FORMAT_VERSION,
        "scene_id": scenario.scene_id,
        "seed": scenario.seed,
        "resolution": scenario.resolution,
        "tau": scenario.tau,
        "coverage": scenario.coverage,
        "views": view_records,
        "graph": GRAPH_NAME,
        "masks_dir": MASKS_DIR,
    }
    manifest_path = out / MANIFEST_NAME
    _write_text(manifest_path, _dump_json(manifest))
    return manifest_path


def _view_from_record(record) -> CameraView:
    try:
        intr = record["intrinsics"]
        pose = record["pose"]
        return CameraView(
            record["id"],
            Intrinsics(intr["width"], intr["height"], intr["fx"], intr["fy"], intr["cx"], intr["cy"]),
            Pose(np.array(pose["position"]), np.array(pose["quaternion"])),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad view record: {exc}") from exc


def load_scenario(in_dir) -> Scenario:
    """Load and fully re-validate a scenario directory."""
    root = Path(in_dir)
    manifest_path = root / MANIFEST_NAME
    manifest = _read_json(manifest_path)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"unrecognized manifest format_version {manifest.get('format_version')!r} in {manifest_path}"
        )

    views, depths, images = [], [], []
    has_images = False
    for record in manifest["views"]:
        view = _view_from_record(record)
        depth = read_depth(root / record["depth"])
        if depth.width != view.intrinsics.width or depth.height != view.intrinsics.height:
            raise FormatError(f"depth size mismatch for view {view.id}")
        views.append(view)
        depths.append(depth)
        if record.get("image"):
            has_images = True
            images.append(read_image(root / record["image"]))
    if has_images and len(images) != len(views):
        raise FormatError("some views have images and some do not")
    if len({v.id for v in views}) != len(views):
        raise FormatError("duplicate view ids in manifest")

    gf = load_graph_file(root / manifest["graph"])
    if gf.weights is None or gf.tau is None:
        raise FormatError("scenario graph file must carry weights and tau")
    if gf.nodes != [v.id for v in views]:
        raise FormatError("graph node ids do not match manifest views")
    w = gf.weight_matrix()
    n = len(views)
    weights = [
        PairDegree(views[i].id, views[j].id, float(w[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
    ]
    adjacency = binarize(w, gf.tau)
    if gf.edges is not None:
        if sorted(map(tuple, gf.edges)) != sorted(
            (views[i].id, views[j].id) for i in range(n) for j in range(i + 1, n) if adjacency[i, j]
        ):
            raise FormatError("stored edge list is not the tau-binarization of the weights")

    masks = {}
    for i in range(n):
        for j in range(n):
            if i != j and w[i, j] > 0:
                mask = read_mask(root / manifest["masks_dir"] / f"m_{i:03d}_{j:03d}.rle")
                if (mask.width, mask.height) != (views[i].intrinsics.width, views[i].intrinsics.height):
                    raise FormatError(f"mask {i},{j} dimensions do not match view {i}")
                if mask.source_view != views[i].id or mask.other_view != views[j].id:
                    raise FormatError(f"mask {i},{j} header does not match its filename")
                masks[(i, j)] = mask

    return Scenario(
        scene_id=manifest["scene_id"],
        seed=manifest["seed"],
        resolution=manifest["resolution"],
        tau=manifest["tau"],
        views=views,
        depths=depths,
        weights=weights,
        gt_adjacency=adjacency,
        masks=masks,
        coverage=manifest.get("coverage"),
        images=images if has_images else None,
    )


def import_external(poses_file, depth_dir, resolution: float, tau: float = 0.0, scene_id: str | None = None) -> Scenario:
    """Build a scenario from externally produced poses and depth files.

    The poses file is JSON with a "views" list of view records (a scenario
    manifest works as-is). Depth files are matched to views in sorted filename
    order, so the counts must agree. Ground-truth weights and masks are
    recomputed from the depths exactly as for synthetic scenes.
    """
    poses_path = Path(poses_file)
    obj = _read_json(poses_path)
    if "views" not in obj or not isinstance(obj["views"], list):
        raise FormatError(f"poses file {poses_path} lacks a 'views' list")
    views = [_view_from_record(r) for r in obj["views"]]

    depth_root = Path(depth_dir)
    if not depth_root.is_dir():
        raise MissingFileError(f"missing depth directory: {depth_root}")
    depth_files = sorted(depth_root.glob("*.cvdz"))
    if len(depth_files) != len(views):
        raise InvalidInputError(
            f"pose count {len(views)} does not match depth file count {len(depth_files)}"
        )
    depths = [read_depth(p) for p in depth_files]
    for view, depth in zip(views, depths):
        if depth.width != view.intrinsics.width or depth.height != view.intrinsics.height:
            raise InvalidInputError(f"depth size mismatch for view {view.id}")

    cells = [view_cells(view, depth, resolution) for view, depth in zip(views, depths)]
    weights, adjacency, masks = build_ground_truth(views, depths, cells, resolution, tau)
    return Scenario(
        scene_id=scene_id or obj.get("scene_id", poses_path.stem),
        seed=int(obj.get("seed", 0)),
        resolution=resolution,
        tau=tau,
        views=views,
        depths=depths,
        weights=weights,
        gt_adjacency=adjacency,
        masks=masks,
        coverage=obj.get("coverage"),
    )
