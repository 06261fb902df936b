"""Acceptance suite: one test per release criterion, at the stated tolerances.

Each test prints a PASS/FAIL line via the conftest hook. Oracles come from
oracles.py (scalar slab tracing, edge-set enumeration, rectangle overlap) and
stay independent of the library paths they check.
"""

import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from covision.cli import run as cli_run
from covision.covis import pair_degree
from covision.errors import FormatError, MissingFileError
from covision.geometry import Box, BoxScene, CameraView, Intrinsics, Pose, render_depth_box
from covision.grapheval import auc, binarize, difficulty_pair, difficulty_scene, graph_iou
from covision.matching import predict_graph
from covision.scenegen import CoverageMap, GenConfig, generate_scenario, prune, score
from covision.service import create_app
from covision.store import load_scenario, read_depth, save_scenario
from covision.topologies import complete, high_covis, random_matched, star

from fixtures import make_scenario, six_view_placements, twelve_view_placements
from oracles import auc_bruteforce, graph_iou_bruteforce, wall_rectangle_pair_iou
from test_scenegen import dummy_candidate


def sym_weights(n, rng):
    w = rng.uniform(0.0, 1.0, (n, n))
    w = np.where(rng.uniform(size=(n, n)) < 0.4, 0.0, w)
    w = np.triu(w, 1)
    return w + w.T


def test_metric_oracle_equivalence():
    """1,000 random 8-node cases: graph_iou and auc agree with brute force to
    1e-12, in under 5 seconds."""
    rng = np.random.default_rng(2024)
    start = time.time()
    for case in range(1000):
        w_pred = sym_weights(8, rng)
        w_gt = sym_weights(8, rng)
        tau_a = float(rng.uniform(0, 1))
        tau_b = float(rng.uniform(0, 1))
        a = binarize(w_pred, tau_a)
        b = binarize(w_gt, tau_b)
        assert graph_iou(a, b) == pytest.approx(
            graph_iou_bruteforce(a.tolist(), b.tolist()), abs=1e-12
        )
        n_thresholds = 101 if case < 20 else int(rng.integers(2, 22))
        assert auc(w_pred, b, n_thresholds) == pytest.approx(
            auc_bruteforce(w_pred.tolist(), b.tolist(), n_thresholds), abs=1e-12
        )
    elapsed = time.time() - start
    assert elapsed < 5.0, f"metric oracle sweep took {elapsed:.2f}s"


def test_perfect_predictor_auc_is_0995():
    """Weights 1 on GT edges and 0 elsewhere, 101 thresholds: AUC = 0.995."""
    rng = np.random.default_rng(7)
    gt = binarize(sym_weights(8, rng), 0.5)
    assert gt.any()
    assert auc(gt.astype(np.float64), gt, 101) == pytest.approx(0.995, abs=1e-9)


def test_scoring_and_pruning_conformance():
    """Scoring matches hand substitution at alpha=0.9, beta=0.1; pruning on a
    10^4-position grid removes exactly the positions within the radius."""
    footprint = frozenset((i, j) for i in range(40) for j in range(40))
    cov = CoverageMap((0.0, 0.0), 0.25, 40, 40, footprint)
    covered = {(i, j) for i in range(10) for j in range(5)}
    cov.mark(covered)
    novel = {(i, j) for i in range(20, 30) for j in range(10)}
    cand = dummy_candidate(covered | novel)
    assert score(cand, cov, 0.9, 0.1) == 0.9 * 100 + 0.1 * 50 == 95.0

    xs, zs = np.meshgrid(np.linspace(0, 9.9, 100), np.linspace(0, 7.9, 100))
    grid = np.stack([xs.ravel(), zs.ravel()], axis=1)
    assert grid.shape[0] == 10_000
    selected = (4.95, 3.95)
    radius = 1.3
    kept = prune(grid, selected, radius)
    dists = np.linalg.norm(grid - np.array(selected), axis=1)
    assert len(kept) == int((dists > radius).sum())
    kept_set = set(map(tuple, kept.tolist()))
    for pos, dist in zip(map(tuple, grid.tolist()), dists.tolist()):
        assert (pos in kept_set) == (dist > radius)


ACCEPTANCE_SCENES = {
    "empty": BoxScene(room=Box([0.0, 0.0, 0.0], [10.0, 3.0, 8.0])),
    "two-obstacles": BoxScene(
        room=Box([0.0, 0.0, 0.0], [10.0, 3.0, 8.0]),
        obstacles=(
            Box([2.0, 0.0001, 3.0], [3.5, 1.2, 4.5]),
            Box([6.5, 0.0001, 1.5], [8.0, 2.2, 2.5]),
        ),
    ),
    "four-obstacles": BoxScene(
        room=Box([0.0, 0.0, 0.0], [10.0, 3.0, 8.0]),
        obstacles=(
            Box([1.5, 0.0001, 1.5], [2.5, 1.0, 2.5]),
            Box([7.0, 0.0001, 5.5], [8.5, 2.0, 6.5]),
            Box([4.5, 0.0001, 3.5], [5.5, 1.4, 4.5]),
            Box([2.0, 0.0001, 6.0], [3.0, 1.8, 7.0]),
        ),
    ),
}


@pytest.mark.parametrize("name", list(ACCEPTANCE_SCENES))
def test_generation_contract(name, tmp_path):
    """Default config on a seeded box room: coverage > 0.80, admissibility
    window on every post-first view, prune-radius separation, byte-identical
    reruns, under 60 s per scene."""
    scene = ACCEPTANCE_SCENES[name]
    cfg = GenConfig(seed=42)
    start = time.time()
    scenario = generate_scenario(scene, cfg, name)
    elapsed = time.time() - start
    assert elapsed < 60.0, f"{name} took {elapsed:.1f}s"
    assert scenario.coverage > 0.80

    from covision.covis import surface_iou, view_cells

    cells = [view_cells(v, d, cfg.resolution) for v, d in zip(scenario.views, scenario.depths)]
    for k in range(1, len(scenario.views)):
        ious = [surface_iou(cells[k], cells[p]) for p in range(k)]
        assert max(ious) <= cfg.iou_max + 1e-12, f"view {k} exceeds the window"
        assert max(ious) >= cfg.iou_min - 1e-12, f"view {k} below the window"

    positions = np.array([[v.pose.position[0], v.pose.position[2]] for v in scenario.views])
    for i in range(len(positions)):
        for j in range(i + 1, len(positions)):
            assert np.linalg.norm(positions[i] - positions[j]) > cfg.prune_radius

    rerun = generate_scenario(scene, cfg, name)
    save_scenario(scenario, tmp_path / "a")
    save_scenario(rerun, tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_overlap_accuracy_on_20_wall_pairs():
    """pair_degree vs the continuous rectangle-overlap oracle: within +-0.02
    at 0.05 m resolution on 20 constructed wall-facing pairs.

    The facing wall sits at z = 7.98 so the observed plane is interior to a
    voxel layer; a wall exactly on a cell boundary would make the layer index
    flip on 1-ulp depth differences.
    """
    wall_z = 7.98
    room = BoxScene(room=Box([0.0, 0.0, 0.0], [10.0, 3.0, wall_z]))
    fx = 140.0
    intr = Intrinsics(128, 128, fx, fx, 64.0, 64.0)

    def wall_cam(x, z, vid):
        return CameraView(vid, intr, Pose.looking([x, 1.5, z], 0.0))

    def rect(cam):
        d = wall_z - cam.pose.position[2]
        us = np.linspace(0.0, 127.0, 509)  # pixel grid at 4x density
        xs = cam.pose.position[0] + (us - 64.0) * d / fx
        ys = cam.pose.position[1] - (us - 64.0) * d / fx
        return ((xs.min(), xs.max()), (ys.min(), ys.max()))

    pairs = []
    for sep in np.linspace(0.05, 2.2, 14):
        pairs.append((wall_cam(3.8, 4.967, 0), wall_cam(3.8 + sep, 4.967, 1)))
    for sep in [0.0, 0.3, 0.6, 0.9, 1.2, 1.5]:
        pairs.append((wall_cam(4.3, 5.017, 0), wall_cam(4.3 + sep, 4.917, 1)))
    assert len(pairs) == 20

    worst = 0.0
    for cam_a, cam_b in pairs:
        da = render_depth_box(room, cam_a)
        db = render_depth_box(room, cam_b)
        assert np.ptp(da.values) < 1e-6 and np.ptp(db.values) < 1e-6  # frusta fully on the wall
        expected = wall_rectangle_pair_iou(rect(cam_a), rect(cam_b))
        got = pair_degree(cam_a, da, cam_b, db, resolution=0.05).value
        worst = max(worst, abs(got - expected))
        assert got == pytest.approx(expected, abs=0.02)
    assert worst <= 0.02


def test_difficulty_bucketing_boundaries():
    """Boundary inputs land exactly on the documented sides."""
    assert difficulty_pair(0.50).level == "easy"
    assert difficulty_pair(0.4999).level == "medium"
    assert difficulty_pair(0.10).level == "medium"
    assert difficulty_pair(0.0999).level == "hard"
    assert difficulty_scene([0.10]).level == "easy"
    assert difficulty_scene([0.0999]).level == "medium"
    assert difficulty_scene([0.04]).level == "medium"
    assert difficulty_scene([0.0399]).level == "hard"


def test_topology_counts_and_uniformity():
    """Edge counts per generator; uniform single-edge draws over 10^4 seeds;
    high-covis boundary inclusive at 0.50."""
    nodes = list(range(7))
    assert star(nodes, 3).sum() == 2 * 6
    assert complete(nodes).sum() == 2 * (7 * 6 // 2)
    for count in (0, 4, 21):
        assert random_matched(nodes, count, seed=count).sum() == 2 * count

    counts = {}
    for seed in range(10_000):
        adj = random_matched(range(4), 1, seed=seed)
        i, j = map(int, np.argwhere(np.triu(adj))[0])
        counts[(i, j)] = counts.get((i, j), 0) + 1
    assert len(counts) == 6
    for pair, c in counts.items():
        assert abs(c / 10_000 - 1 / 6) < 0.02, pair

    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 0.50
    w[1, 2] = w[2, 1] = 0.499999
    hc = high_covis(w)
    assert hc[0, 1] and not hc[1, 2]


def test_baseline_signal_on_12_view_scenario():
    """Feature matching carries signal: mean weight over GT edges beats the
    mean over non-edges, and its AUC beats the all-zero predictor."""
    scenario = make_scenario(twelve_view_placements(), scene_id="twelve", size=96, seed=5)
    predicted = predict_graph(scenario, seed=5)
    gt = scenario.gt_adjacency
    triu = np.triu_indices(len(scenario.views), 1)
    edge_mask = gt[triu]
    weights = predicted.weights[triu]
    assert edge_mask.any() and (~edge_mask).any()
    mean_edges = float(weights[edge_mask].mean())
    mean_non = float(weights[~edge_mask].mean())
    assert mean_edges > mean_non, f"edges {mean_edges:.4f} <= non-edges {mean_non:.4f}"

    baseline_auc = auc(predicted.weights, gt)
    zero_auc = auc(np.zeros_like(predicted.weights), gt)
    assert baseline_auc > zero_auc
    assert zero_auc == 0.0


def test_persistence_round_trip_and_error_kinds(tmp_path):
    """Save/load bit identity on all numerics; corrupt-magic and missing-file
    failures raise distinct, named error types."""
    scenario = make_scenario(six_view_placements(), scene_id="persist", size=64)
    save_scenario(scenario, tmp_path / "s")
    loaded = load_scenario(tmp_path / "s")
    np.testing.assert_array_equal(loaded.weight_matrix(), scenario.weight_matrix())
    for a, b in zip(loaded.depths, scenario.depths):
        np.testing.assert_array_equal(a.values, b.values)
    for a, b in zip(loaded.views, scenario.views):
        np.testing.assert_array_equal(a.pose.position, b.pose.position)
        np.testing.assert_array_equal(a.pose.quaternion, b.pose.quaternion)
    for key in scenario.masks:
        np.testing.assert_array_equal(loaded.masks[key].bits, scenario.masks[key].bits)

    depth_file = sorted((tmp_path / "s" / "depth").iterdir())[0]
    original = depth_file.read_bytes()
    depth_file.write_bytes(b"JUNK" + original[4:])
    with pytest.raises(FormatError) as format_exc:
        read_depth(depth_file)
    assert "CVDZ" in str(format_exc.value)

    missing = tmp_path / "s" / "depth" / "absent.cvdz"
    with pytest.raises(MissingFileError) as missing_exc:
        read_depth(missing)
    assert str(missing) in str(missing_exc.value)
    assert type(format_exc.value) is not type(missing_exc.value)


def test_annotation_core_parity(tmp_path, capsys):
    """Scripted HTTP labeling of a 6-view scenario: the reported human-graph
    IoU equals the CLI eval of the exported graph on the 6-decimal rendering,
    agreement lists exactly the constructed conflicts, and a restarted service
    reproduces identical reports."""
    scenario = make_scenario(six_view_placements(), scene_id="parity", size=64)
    data_root = tmp_path / "data"
    save_scenario(scenario, data_root / "parity")
    app = create_app(data_root, seed=3)
    client = TestClient(app)

    gt = scenario.gt_adjacency
    pairs = [(i, j) for i in range(6) for j in range(i + 1, 6)]
    conflict_pairs = [pairs[1], pairs[7]]
    ts = 0
    for i, j in pairs:
        truth = "connected" if gt[i, j] else "not-connected"
        flipped = "not-connected" if gt[i, j] else "connected"
        for annotator, verdict in (("alice", truth),
                                   ("bob", flipped if (i, j) in conflict_pairs else truth)):
            ts += 1
            r = client.post(
                "/api/scenarios/parity/labels",
                json={"pair": [i, j], "annotator": annotator, "verdict": verdict, "timestamp": ts},
            )
            assert r.status_code == 200

    report = client.get("/api/scenarios/parity/agreement").json()
    assert report["conflicts"] == [list(p) for p in conflict_pairs]
    assert report["agreed"] == len(pairs) - len(conflict_pairs)

    body = client.get("/api/scenarios/parity/human-graph", params={"annotator": "alice"}).json()
    assert not body["partial"]
    exported = tmp_path / "alice_graph.json"
    exported.write_text(json.dumps(body["graph"], sort_keys=True, indent=2) + "\n")
    assert cli_run(["eval", "--pred", str(exported), "--gt", str(data_root / "parity" / "gt_graph.json")]) == 0
    cli_iou = capsys.readouterr().out.strip()
    assert cli_iou == f"{body['iou']:.6f}"
    assert cli_iou == "1.000000"  # alice matched the ground truth exactly

    restarted = TestClient(create_app(data_root, seed=77))
    assert restarted.get("/api/scenarios/parity/agreement").json() == report
    assert (
        restarted.get("/api/scenarios/parity/human-graph", params={"annotator": "alice"}).json()
        == body
    )
