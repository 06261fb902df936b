"""Hand-placed deterministic scenarios shared by service, CLI, and acceptance
tests. Camera layouts are chosen so the GT graph mixes strong, weak, and zero
overlaps."""

import numpy as np

from covision.covis import view_cells
from covision.geometry import Box, BoxScene, CameraView, Intrinsics, Pose, render_depth_box
from covision.matching import render_shaded
from covision.scenegen import Scenario, build_ground_truth

ROOM = BoxScene(
    room=Box([0.0, 0.0, 0.0], [10.0, 3.0, 8.0]),
    obstacles=(Box([4.2, 0.0001, 3.2], [5.8, 1.6, 4.4]),),
)


def make_scenario(placements, scene=ROOM, scene_id="fixture", resolution=0.05, tau=0.0,
                  size=96, fov=90.0, with_images=True, seed=0):
    """Build a scenario from (x, z, yaw) placements at eye height 1.5 m."""
    intr = Intrinsics.from_fov(size, size, fov)
    views, depths = [], []
    for k, (x, z, yaw) in enumerate(placements):
        cam = CameraView(k, intr, Pose.looking([x, 1.5, z], yaw))
        views.append(cam)
        depths.append(render_depth_box(scene, cam))
    cells = [view_cells(v, d, resolution) for v, d in zip(views, depths)]
    weights, adjacency, masks = build_ground_truth(views, depths, cells, resolution, tau)
    images = [render_shaded(scene, v) for v in views] if with_images else None
    return Scenario(
        scene_id=scene_id,
        seed=seed,
        resolution=resolution,
        tau=tau,
        views=views,
        depths=depths,
        weights=weights,
        gt_adjacency=adjacency,
        masks=masks,
        coverage=None,
        images=images,
    )


def six_view_placements():
    """Two clusters on opposite sides of the obstacle plus two roaming views."""
    return [
        (2.0, 1.0, 0.3),
        (3.0, 1.0, -0.2),
        (8.0, 6.8, np.pi + 0.2),
        (7.0, 7.0, np.pi - 0.3),
        (0.8, 4.0, np.pi / 2 - 0.4),
        (9.2, 4.0, -np.pi / 2 + 0.4),
    ]


def twelve_view_placements():
    """Four clusters of three nearby/rotated views: strong edges inside each
    cluster, weak-to-zero across clusters."""
    out = []
    clusters = [
        (2.0, 1.0, 0.0),
        (8.0, 1.0, 0.5),
        (8.0, 7.0, np.pi),
        (2.0, 7.0, np.pi - 0.5),
    ]
    for cx, cz, yaw in clusters:
        out.append((cx, cz, yaw))
        out.append((cx + 0.45, cz + 0.1, yaw + 0.18))
        out.append((cx - 0.35, cz + 0.2, yaw - 0.22))
    return out
