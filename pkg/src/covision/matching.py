"""Classical local-feature matching baseline for edge-probability prediction.

The pipeline renders shaded grayscale views of a box scene with a procedural
per-face tile texture, detects corners with a contiguous-arc intensity test on
a 16-point circle, describes them with 256 seeded pairwise intensity
comparisons, matches mutual nearest neighbors under a ratio test, and verifies
matches by sampling 4-point planar projective fits. The edge probability of a
view pair is the inlier count over the maximum possible matches (the smaller
keypoint count).
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import BoxScene, CameraView, trace_scene

TEXTURE_SCALE = 0.5       # meters per texture tile
TEXTURE_AMPLITUDE = 0.6
AMBIENT = 0.30
DIFFUSE = 0.70
_LIGHT_DIR = np.array([-0.35, -0.80, -0.48])
_LIGHT_DIR = _LIGHT_DIR / np.linalg.norm(_LIGHT_DIR)

DETECT_THRESHOLD = 0.04
ARC_LENGTH = 9
NMS_BORDER = 12
DEFAULT_MAX_KEYPOINTS = 400

RATIO_TEST = 0.8
RANSAC_ITERATIONS = 500
INLIER_PIXELS = 3.0

# Bresenham circle of radius 3, in circular order.
_CIRCLE = [
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
]

# Fixed seeded sampling pattern for the 256 descriptor comparisons.
_PATTERN = np.random.default_rng(7041).integers(-8, 9, size=(256, 4))

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


@dataclass
class GrayImage:
    """Row-major grayscale intensities in [0, 1], quantized to 8-bit levels."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32).reshape(-1)
        if v.size != self.width * self.height:
            raise InvalidInputError(f"image has {v.size} values, expected {self.width * self.height}")
        self.values = np.clip(v, 0.0, 1.0)

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)

    def to_bytes(self) -> bytes:
        return np.round(self.values * 255.0).astype(np.uint8).tobytes()

    @staticmethod
    def from_bytes(width: int, height: int, raw: bytes) -> "GrayImage":
        data = np.frombuffer(raw, dtype=np.uint8).astype(np.float32) / np.float32(255.0)
        return GrayImage(width, height, data)

    def digest(self) -> bytes:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}".encode())
        h.update(self.to_bytes())
        return h.digest()


@dataclass(frozen=True)
class Keypoint:
    u: int
    v: int
    response: float
    descriptor: bytes  # 32 bytes = 256 comparison bits


def _hash01(face: np.ndarray, iu: np.ndarray, iv: np.ndarray) -> np.ndarray:
    """Deterministic per-tile value in [0, 1) from (face id, tile indices)."""
    h = face.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
    h ^= iu.astype(np.uint64) * np.uint64(0xBF58476D1CE4E5B9)
    h ^= iv.astype(np.uint64) * np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    h *= np.uint64(0xD6E8FEB86659FD93)
    h ^= h >> np.uint64(27)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def render_shaded(scene: BoxScene, cam: CameraView, texture_amplitude: float = TEXTURE_AMPLITUDE) -> GrayImage:
    """Lambertian shading against a fixed light, modulated by a per-face tile
    texture so flat walls still carry detectable structure. Deterministic."""
    tr = trace_scene(scene, cam)
    lambert = AMBIENT + DIFFUSE * np.maximum(0.0, -(tr.normals @ _LIGHT_DIR))

    # Tile coordinates live on the two in-plane axes of each hit face.
    normal_axis = np.argmax(np.abs(tr.normals), axis=2)
    h, w = lambert.shape
    axes = np.arange(3)
    su = np.empty((h, w))
    sv = np.empty((h, w))
    for a in range(3):
        others = axes[axes != a]
        m = normal_axis == a
        su[m] = tr.points[m, others[0]]
        sv[m] = tr.points[m, others[1]]
    iu = np.floor(su / TEXTURE_SCALE).astype(np.int64)
    iv = np.floor(sv / TEXTURE_SCALE).astype(np.int64)
    tex = _hash01(tr.face.astype(np.int64), iu, iv)

    shade = lambert * (1.0 - texture_amplitude / 2.0 + texture_amplitude * tex)
    quantized = np.round(np.clip(shade, 0.0, 1.0) * 255.0) / np.float32(255.0)
    return GrayImage(w, h, quantized.astype(np.float32).ravel())


def _box_blur(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img, dtype=np.float64)
    for dv in (-1, 0, 1):
        for du in (-1, 0, 1):
            out += padded[1 + dv : 1 + dv + img.shape[0], 1 + du : 1 + du + img.shape[1]]
    return out / 9.0


def detect(img: GrayImage, max_kp: int = DEFAULT_MAX_KEYPOINTS) -> list[Keypoint]:
    """Corner keypoints: a pixel qualifies when >= ARC_LENGTH contiguous circle
    samples are all brighter or all darker than the center by the threshold.
    Non-maximum suppression on the response, then the top max_kp."""
    if max_kp < 1:
        raise InvalidInputError("max_kp must be >= 1")
    g = img.grid().astype(np.float64)
    h, w = g.shape
    if h < 2 * NMS_BORDER + 1 or w < 2 * NMS_BORDER + 1:
        return []
    inner_v = slice(3, h - 3)
    inner_u = slice(3, w - 3)
    center = g[inner_v, inner_u]
    diffs = np.stack(
        [g[3 + dv : h - 3 + dv, 3 + du : w - 3 + du] - center for du, dv in _CIRCLE]
    )
    bright = diffs > DETECT_THRESHOLD
    dark = diffs < -DETECT_THRESHOLD

    def has_arc(flags):
        wrapped = np.concatenate([flags, flags[: ARC_LENGTH - 1]], axis=0)
        hit = np.zeros(flags.shape[1:], dtype=bool)
        for s in range(16):
            hit |= wrapped[s : s + ARC_LENGTH].all(axis=0)
        return hit

    corner = has_arc(bright) | has_arc(dark)
    response = np.where(corner, np.maximum(np.abs(diffs) - DETECT_THRESHOLD, 0.0).sum(axis=0), 0.0)

    resp = np.zeros((h, w))
    resp[inner_v, inner_u] = response
    # 3x3 non-maximum suppression.
    local_max = np.ones_like(resp, dtype=bool)
    for dv in (-1, 0, 1):
        for du in (-1, 0, 1):
            if dv == 0 and du == 0:
                continue
            shifted = np.roll(np.roll(resp, dv, axis=0), du, axis=1)
            local_max &= resp >= shifted
    keep = (resp > 0) & local_max
    keep[:NMS_BORDER, :] = keep[-NMS_BORDER:, :] = False
    keep[:, :NMS_BORDER] = keep[:, -NMS_BORDER:] = False

    vs, us = np.nonzero(keep)
    if len(vs) == 0:
        return []
    order = np.lexsort((us, vs, -resp[vs, us]))[:max_kp]
    vs, us = vs[order], us[order]

    blur = _box_blur(g)
    kps = []
    for u, v in zip(us.tolist(), vs.tolist()):
        a = blur[v + _PATTERN[:, 1], u + _PATTERN[:, 0]]
        b = blur[v + _PATTERN[:, 3], u + _PATTERN[:, 2]]
        bits = (a > b).astype(np.uint8)
        kps.append(Keypoint(u, v, float(resp[v, u]), np.packbits(bits).tobytes()))
    return kps


def _hamming_matrix(da: np.ndarray, db: np.ndarray) -> np.ndarray:
    xored = da[:, None, :] ^ db[None, :, :]
    return _POPCOUNT[xored].sum(axis=2).astype(np.int32)


def _mutual_matches(kp_a: list[Keypoint], kp_b: list[Keypoint]) -> list[tuple[int, int]]:
    da = np.frombuffer(b"".join(k.descriptor for k in kp_a), dtype=np.uint8).reshape(len(kp_a), 32)
    db = np.frombuffer(b"".join(k.descriptor for k in kp_b), dtype=np.uint8).reshape(len(kp_b), 32)
    dist = _hamming_matrix(da, db)

    best_j = dist.argmin(axis=1)
    best_i = dist.argmin(axis=0)
    matches = []
    for i, j in enumerate(best_j.tolist()):
        if best_i[j] != i:
            continue
        row = dist[i]
        best = int(row[j])
        if len(row) >= 2:
            second = int(np.partition(row, 1)[1])
        else:
            second = 0
        if second == 0 or best >= RATIO_TEST * second:
            continue
        matches.append((i, j))
    return matches


def _fit_homography(src: np.ndarray, dst: np.ndarray):
    """Exact projective fit from 4 correspondences via the null space."""
    rows = []
    for (x, y), (xp, yp) in zip(src, dst):
        rows.append([-x, -y, -1, 0, 0, 0, x * xp, y * xp, xp])
        rows.append([0, 0, 0, -x, -y, -1, x * yp, y * yp, yp])
    a = np.array(rows)
    _, s, vt = np.linalg.svd(a)
    if s[-2] < 1e-9:  # degenerate configuration
        return None
    hmat = vt[-1].reshape(3, 3)
    if abs(hmat[2, 2]) < 1e-12:
        return None
    return hmat / hmat[2, 2]


def _apply_homography(hmat: np.ndarray, pts: np.ndarray) -> np.ndarray:
    ones = np.ones((len(pts), 1))
    proj = np.hstack([pts, ones]) @ hmat.T
    with np.errstate(divide="ignore", invalid="ignore"):
        out = proj[:, :2] / proj[:, 2:3]
    out[~np.isfinite(out).all(axis=1)] = 1e12
    return out


def _verified_inliers(src: np.ndarray, dst: np.ndarray, rng: np.random.Generator) -> int:
    """Largest inlier count over seeded 4-point projective fits."""
    n = len(src)
    if n < 4:
        return 0
    best = 0
    for _ in range(RANSAC_ITERATIONS):
        pick = rng.choice(n, size=4, replace=False)
        hmat = _fit_homography(src[pick], dst[pick])
        if hmat is None:
            continue
        err = np.linalg.norm(_apply_homography(hmat, src) - dst, axis=1)
        best = max(best, int((err <= INLIER_PIXELS).sum()))
    return best


def match_pair(img_i: GrayImage, img_j: GrayImage, max_kp: int = DEFAULT_MAX_KEYPOINTS, seed: int = 0) -> float:
    """Edge probability for one view pair: verified matches over the maximum
    possible (the smaller keypoint count). Symmetric by construction: the two
    images are ordered canonically by content digest before verification."""
    kp_i = detect(img_i, max_kp)
    kp_j = detect(img_j, max_kp)
    return match_features(kp_i, img_i.digest(), kp_j, img_j.digest(), seed)


def match_features(kp_i, digest_i: bytes, kp_j, digest_j: bytes, seed: int = 0) -> float:
    if not kp_i or not kp_j:
        return 0.0
    if digest_j < digest_i:
        kp_i, kp_j = kp_j, kp_i
        digest_i, digest_j = digest_j, digest_i
    matches = _mutual_matches(kp_i, kp_j)
    denom = min(len(kp_i), len(kp_j))
    if not matches:
        return 0.0
    src = np.array([[kp_i[m].u, kp_i[m].v] for m, _ in matches], dtype=np.float64)
    dst = np.array([[kp_j[m].u, kp_j[m].v] for _, m in matches], dtype=np.float64)
    rng = np.random.default_rng(
        [seed, int.from_bytes(digest_i[:8], "big"), int.from_bytes(digest_j[:8], "big")]
    )
    inliers = _verified_inliers(src, dst, rng)
    return min(1.0, inliers / denom)


def predict_graph(scenario, max_kp: int = DEFAULT_MAX_KEYPOINTS, seed: int = 0, jobs: int = 1):
    """Predicted co-visibility weights for every unordered view pair of a
    scenario with rendered images. Detection runs once per view."""
    from .grapheval import CovisGraph

    if scenario.images is None:
        raise InvalidInputError("scenario has no rendered images; run the shaded renderer first")
    images = scenario.images
    n = len(images)
    features = [detect(img, max_kp) for img in images]
    digests = [img.digest() for img in images]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def work(pair):
        i, j = pair
        return match_features(features[i], digests[i], features[j], digests[j], seed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(work, pairs))
    else:
        values = [work(p) for p in pairs]

    w = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        w[i, j] = w[j, i] = v
    return CovisGraph([view.id for view in scenario.views], w)
