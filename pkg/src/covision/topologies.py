"""Pairing-graph generators for downstream reconstruction and training-pair
selection: star, complete, edge-count-matched random, pose proximity, and
high-co-visibility graphs.

All generators return symmetric boolean adjacency matrices with zero diagonal,
indexed in the caller's node order.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .grapheval import _check_weights

HIGH_COVIS_MIN = 0.50
DEFAULT_PROXIMITY = 3.0


def _empty(n: int) -> np.ndarray:
    return np.zeros((n, n), dtype=bool)


def star(nodes, center) -> np.ndarray:
    """Edges from `center` to every other node: n - 1 edges."""
    nodes = list(nodes)
    if center not in nodes:
        raise InvalidInputError(f"center {center!r} is not a node")
    c = nodes.index(center)
    adj = _empty(len(nodes))
    adj[c, :] = True
    adj[:, c] = True
    adj[c, c] = False
    return adj


def complete(nodes) -> np.ndarray:
    """All n(n-1)/2 unordered edges."""
    n = len(list(nodes))
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return adj


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def random_matched(nodes, edge_count: int, seed: int) -> np.ndarray:
    """Uniform sample of `edge_count` unordered pairs, deterministic per seed."""
    n = len(list(nodes))
    pairs = all_pairs(n)
    if not (0 <= edge_count <= len(pairs)):
        raise InvalidInputError(f"edge_count {edge_count} outside [0, {len(pairs)}]")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pairs), size=edge_count, replace=False)
    adj = _empty(n)
    for k in chosen:
        i, j = pairs[int(k)]
        adj[i, j] = adj[j, i] = True
    return adj


def gt_proximity(positions, distance: float = DEFAULT_PROXIMITY) -> np.ndarray:
    """Edge iff camera positions are within `distance` meters (inclusive)."""
    if distance <= 0:
        raise InvalidInputError(f"distance must be positive, got {distance}")
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise InvalidInputError(f"positions must be (n, 3), got {pos.shape}")
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    adj = dist <= distance
    np.fill_diagonal(adj, False)
    return adj


def high_covis(weights) -> np.ndarray:
    """Edge iff d_ij >= 0.50 (boundary inclusive, unlike tau binarization)."""
    w = _check_weights(weights)
    adj = w >= HIGH_COVIS_MIN
    np.fill_diagonal(adj, False)
    return adj


def pair_list_lines(nodes, adjacency) -> list[str]:
    """Sorted "i j" lines for the upper-triangle edges, for external pipelines."""
    nodes = list(nodes)
    adj = np.asarray(adjacency, dtype=bool)
    lines = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if adj[i, j]:
                lines.append(f"{nodes[i]} {nodes[j]}")
    return sorted(lines)
