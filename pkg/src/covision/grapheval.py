"""Co-visibility graph representation and the Graph IoU / AUC metrics.

Graphs are undirected with weights d_ij in [0, 1], zero diagonal, and an
optional binarization a_ij = (d_ij > tau) with strict inequality. Graph IoU
sums ordered off-diagonal entries with an epsilon-guarded denominator; AUC is
the trapezoidal average of IoU over evenly spaced thresholds in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidInputError

EPSILON = 1e-9
DEFAULT_THRESHOLDS = 101
_SYMMETRY_TOL = 1e-12

PAIR_EASY_MIN = 0.50
PAIR_MEDIUM_MIN = 0.10
SCENE_EASY_MIN = 0.10
SCENE_MEDIUM_MIN = 0.04


def _check_weights(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInputError(f"weights must be square, got shape {w.shape}")
    if np.any(w < 0) or np.any(w > 1):
        raise InvalidInputError("weights must lie in [0, 1]")
    if np.max(np.abs(w - w.T), initial=0.0) > _SYMMETRY_TOL:
        raise InvalidInputError("weights must be symmetric")
    if np.any(np.diagonal(w) != 0):
        raise InvalidInputError("weight diagonal must be exactly zero")
    return w


def _check_adjacency(adj: np.ndarray) -> np.ndarray:
    a = np.asarray(adj)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"adjacency must be square, got shape {a.shape}")
    a = a.astype(bool)
    if np.any(a != a.T):
        raise InvalidInputError("adjacency must be symmetric")
    if np.any(np.diagonal(a)):
        raise InvalidInputError("adjacency diagonal must be zero")
    return a


@dataclass
class CovisGraph:
    """Node ids plus a symmetric weight matrix, optionally binarized at tau."""

    nodes: list
    weights: np.ndarray
    adjacency: np.ndarray | None = None
    tau: float | None = None

    def __post_init__(self):
        self.nodes = list(self.nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidInputError("node ids must be unique")
        self.weights = _check_weights(self.weights)
        if self.weights.shape[0] != len(self.nodes):
            raise InvalidInputError("weight matrix size does not match node count")
        if (self.adjacency is None) != (self.tau is None):
            raise InvalidInputError("adjacency and tau must be provided together")
        if self.adjacency is not None:
            self.adjacency = _check_adjacency(self.adjacency)
            if self.adjacency.shape != self.weights.shape:
                raise InvalidInputError("adjacency size does not match weights")
            if np.any(self.adjacency != binarize(self.weights, self.tau)):
                raise InvalidInputError("adjacency is not the tau-binarization of the weights")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def binarized(self, tau: float) -> "CovisGraph":
        return CovisGraph(self.nodes, self.weights, binarize(self.weights, tau), tau)

    def edge_list(self) -> list[tuple]:
        """Upper-triangle edges of the stored adjacency as node-id pairs."""
        if self.adjacency is None:
            raise InvalidInputError("graph carries no adjacency; binarize first")
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.adjacency[i, j]:
                    out.append((self.nodes[i], self.nodes[j]))
        return out


def binarize(weights, tau: float) -> np.ndarray:
    """Adjacency a_ij = (d_ij > tau), strict, symmetric, zero diagonal."""
    if not (0.0 <= tau <= 1.0):
        raise InvalidInputError(f"tau must be in [0, 1], got {tau}")
    w = _check_weights(weights)
    adj = w > tau
    np.fill_diagonal(adj, False)
    return adj


def graph_iou(a, b) -> float:
    """Edge overlap ratio: sum(a AND b) / (sum(a OR b) + epsilon).

    Sums run over all ordered off-diagonal entries; the double counting of
    undirected edges cancels in the ratio up to the epsilon guard. Two empty
    graphs score 0 by the literal formula.
    """
    a = _check_adjacency(a)
    b = _check_adjacency(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"graph size mismatch: {a.shape} vs {b.shape}")
    inter = float(np.sum(a & b))
    union = float(np.sum(a | b))
    return inter / (union + EPSILON)


def auc(weights_pred, gt_adjacency, n_thresholds: int = DEFAULT_THRESHOLDS) -> float:
    """Trapezoidal average of graph_iou(binarize(pred, t), gt) over evenly
    spaced thresholds t_i = i / (n_thresholds - 1)."""
    if n_thresholds < 2:
        raise InvalidInputError(f"need at least 2 thresholds, got {n_thresholds}")
    w = _check_weights(weights_pred)
    gt = _check_adjacency(gt_adjacency)
    ts = np.linspace(0.0, 1.0, n_thresholds)
    ious = np.array([graph_iou(binarize(w, float(t)), gt) for t in ts])
    return float(np.sum((ious[:-1] + ious[1:]) / 2.0 * np.diff(ts)))


def iou_curve(weights_pred, gt_adjacency, n_thresholds: int = DEFAULT_THRESHOLDS):
    """(threshold, IoU) pairs backing the AUC, for CSV export."""
    if n_thresholds < 2:
        raise InvalidInputError(f"need at least 2 thresholds, got {n_thresholds}")
    w = _check_weights(weights_pred)
    gt = _check_adjacency(gt_adjacency)
    return [(float(t), graph_iou(binarize(w, float(t)), gt)) for t in np.linspace(0.0, 1.0, n_thresholds)]


Level = Literal["easy", "medium", "hard"]


@dataclass(frozen=True)
class DifficultyLabel:
    axis: Literal["pair-overlap", "scene-sparsity"]
    level: Level


def difficulty_pair(overlap: float) -> DifficultyLabel:
    """Per-pair difficulty: easy >= 0.50, medium in [0.10, 0.50), hard < 0.10."""
    if not (0.0 <= overlap <= 1.0):
        raise InvalidInputError(f"overlap must be in [0, 1], got {overlap}")
    if overlap >= PAIR_EASY_MIN:
        level = "easy"
    elif overlap >= PAIR_MEDIUM_MIN:
        level = "medium"
    else:
        level = "hard"
    return DifficultyLabel("pair-overlap", level)


def difficulty_scene(pair_overlaps) -> DifficultyLabel:
    """Per-scene difficulty from the mean pairwise overlap:
    easy >= 0.10, medium in [0.04, 0.10), hard < 0.04."""
    overlaps = list(pair_overlaps)
    if not overlaps:
        raise InvalidInputError("scene difficulty needs at least one pair overlap")
    for v in overlaps:
        if not (0.0 <= v <= 1.0):
            raise InvalidInputError(f"overlap must be in [0, 1], got {v}")
    mean = sum(overlaps) / len(overlaps)
    if mean >= SCENE_EASY_MIN:
        level = "easy"
    elif mean >= SCENE_MEDIUM_MIN:
        level = "medium"
    else:
        level = "hard"
    return DifficultyLabel("scene-sparsity", level)
