"""Independent reference implementations used to freeze expected test values.

Everything here is deliberately written on a different path from the package:
scalar loops instead of vectorized numpy, Python sets instead of matrices.
Keep these free of imports from covision internals beyond plain data access.
"""

from __future__ import annotations

import math


def slab_ray_box(origin, direction, box_min, box_max):
    """Scalar slab-method ray/AABB intersection.

    Returns (t_enter, t_exit) or None when the ray misses the box.
    """
    t0, t1 = -math.inf, math.inf
    for a in range(3):
        o, d = origin[a], direction[a]
        lo, hi = box_min[a], box_max[a]
        if d == 0.0:
            if not (lo <= o <= hi):
                return None
            continue
        ta = (lo - o) / d
        tb = (hi - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return None
    return (t0, t1)


def scene_depth_at_pixel(scene, cam, u, v):
    """Camera-frame depth of the nearest hit for one pixel, scalar math.

    Mirrors the renderer contract: ray through pixel (u, v) with the
    camera-frame z component normalized to 1, so the ray parameter is depth.
    """
    intr = cam.intrinsics
    d_cam = [(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0]
    r = cam.pose.rotation()
    d_world = [sum(r[i][j] * d_cam[j] for j in range(3)) for i in range(3)]
    o = list(cam.pose.position)

    best = math.inf
    hit = slab_ray_box(o, d_world, scene.room.minimum, scene.room.maximum)
    assert hit is not None, "camera must be inside the room"
    best = hit[1]
    for ob in scene.obstacles:
        h = slab_ray_box(o, d_world, ob.minimum, ob.maximum)
        if h is not None and h[0] > 1e-12 and h[0] < best:
            best = h[0]
    return best


def interval_overlap(a0, a1, b0, b1):
    return max(0.0, min(a1, b1) - max(a0, b0))


def wall_rectangle_pair_iou(rect_a, rect_b):
    """Continuous IoU of two axis-aligned rectangles on a shared wall plane.

    Rectangles are ((u0, u1), (v0, v1)) in the wall's 2D coordinates.
    Union computed by inclusion-exclusion; both rectangles must be non-empty.
    """
    (au0, au1), (av0, av1) = rect_a
    (bu0, bu1), (bv0, bv1) = rect_b
    area_a = (au1 - au0) * (av1 - av0)
    area_b = (bu1 - bu0) * (bv1 - bv0)
    inter = interval_overlap(au0, au1, bu0, bu1) * interval_overlap(av0, av1, bv0, bv1)
    union = area_a + area_b - inter
    if union <= 0:
        return 0.0
    return inter / union


def edge_set(adjacency):
    """Unordered edge set {frozenset((i, j))} from a square 0/1 matrix."""
    n = len(adjacency)
    edges = set()
    for i in range(n):
        for j in range(n):
            if i != j and adjacency[i][j]:
                edges.add(frozenset((i, j)))
    return edges


def graph_iou_bruteforce(adj_a, adj_b, eps=1e-9):
    """Edge-set IoU with the epsilon guard applied on the ordered-entry scale.

    The toolkit's metric sums ordered off-diagonal entries, so each unordered
    edge counts twice in both numerator and denominator.
    """
    ea = edge_set(adj_a)
    eb = edge_set(adj_b)
    inter = len(ea & eb)
    union = len(ea | eb)
    return (2.0 * inter) / (2.0 * union + eps)


def binarize_bruteforce(weights, tau):
    n = len(weights)
    return [[1 if (i != j and weights[i][j] > tau) else 0 for j in range(n)] for i in range(n)]


def auc_bruteforce(weights, gt_adj, n_thresholds, eps=1e-9):
    """Trapezoidal average of edge-set IoU over evenly spaced thresholds."""
    ts = [i / (n_thresholds - 1) for i in range(n_thresholds)]
    ious = [graph_iou_bruteforce(binarize_bruteforce(weights, t), gt_adj, eps) for t in ts]
    total = 0.0
    for i in range(n_thresholds - 1):
        total += (ious[i] + ious[i + 1]) / 2.0 * (ts[i + 1] - ts[i])
    return total
