"""Co-visibility toolkit: synthetic sparse-view scenario generation with
ground-truth co-visibility graphs, overlap masks, graph similarity metrics,
pairing topologies, a feature-matching predictor, and an annotation service.
"""

__version__ = "0.1.0"

from .covis import CovisMask, PairDegree, SurfaceVoxelSet, covis_mask, pair_degree, surface_iou, voxelize
from .geometry import (
    Box,
    BoxScene,
    CameraView,
    DepthImage,
    Intrinsics,
    Pose,
    backproject,
    project,
    render_depth_box,
)
from .grapheval import CovisGraph, auc, binarize, difficulty_pair, difficulty_scene, graph_iou
from .scenegen import GenConfig, Scenario, generate_scenario

__all__ = [
    "Box",
    "BoxScene",
    "CameraView",
    "CovisGraph",
    "CovisMask",
    "DepthImage",
    "GenConfig",
    "Intrinsics",
    "PairDegree",
    "Pose",
    "Scenario",
    "SurfaceVoxelSet",
    "auc",
    "backproject",
    "binarize",
    "covis_mask",
    "difficulty_pair",
    "difficulty_scene",
    "generate_scenario",
    "graph_iou",
    "pair_degree",
    "project",
    "render_depth_box",
    "surface_iou",
    "voxelize",
]
