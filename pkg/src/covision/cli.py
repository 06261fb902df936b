"""Command-line entry point.

Machine-readable single values (eval, auc) go to stdout with six decimals;
progress and tables meant for humans go to stderr. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import grapheval, topologies
from .errors import CovisionError, PartialScenarioError
from .matching import render_shaded
from .scenegen import GenConfig, generate_scenario
from .store import (
    load_graph_file,
    load_scenario,
    load_scene,
    save_scenario,
    write_graph_file,
)

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covision", description="Co-visibility scenario and graph toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario from a scene file")
    gen.add_argument("--scene", required=True, help="BoxScene JSON file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output scenario directory")
    gen.add_argument("--n-c", type=int, default=GenConfig.n_c)
    gen.add_argument("--prune-radius", type=float, default=GenConfig.prune_radius)
    gen.add_argument("--iou-min", type=float, default=GenConfig.iou_min)
    gen.add_argument("--iou-max", type=float, default=GenConfig.iou_max)
    gen.add_argument("--coverage-stop", type=float, default=GenConfig.coverage_stop)
    gen.add_argument("--wall-band", type=float, default=GenConfig.wall_band)
    gen.add_argument("--eye-height", type=float, default=GenConfig.eye_height)
    gen.add_argument("--resolution", type=float, default=GenConfig.resolution)
    gen.add_argument("--tau", type=float, default=GenConfig.tau)
    gen.add_argument("--fov", type=float, default=GenConfig.fov_deg)
    gen.add_argument("--width", type=int, default=GenConfig.image_width)
    gen.add_argument("--height", type=int, default=GenConfig.image_height)
    gen.add_argument("--max-iterations", type=int, default=GenConfig.max_iterations)
    gen.add_argument("--no-images", action="store_true", help="skip shaded renders")
    gen.add_argument("--jobs", type=int, default=1)

    graph = sub.add_parser("graph", help="binarize a scenario's ground-truth graph")
    graph.add_argument("--scenario", required=True)
    graph.add_argument("--tau", type=float, required=True)
    graph.add_argument("--out", default=None)

    ev = sub.add_parser("eval", help="Graph IoU between two graph files")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--gt", required=True)

    au = sub.add_parser("auc", help="threshold-averaged Graph IoU")
    au.add_argument("--pred", required=True)
    au.add_argument("--gt", required=True)
    au.add_argument("--thresholds", type=int, default=grapheval.DEFAULT_THRESHOLDS)
    au.add_argument("--curve", default=None, help="write threshold,iou CSV here")

    bucket = sub.add_parser("bucket", help="difficulty labels for a scenario")
    bucket.add_argument("--scenario", required=True)

    topo = sub.add_parser("topo", help="export a pairing topology")
    topo.add_argument("--kind", required=True,
                      choices=["star", "complete", "random", "gt_proximity", "covis", "high_covis"])
    topo.add_argument("--scenario", required=True)
    topo.add_argument("--center", type=int, default=None, help="star center view id")
    topo.add_argument("--distance", type=float, default=topologies.DEFAULT_PROXIMITY)
    topo.add_argument("--tau", type=float, default=None, help="threshold for --kind covis")
    topo.add_argument("--seed", type=int, default=0)
    topo.add_argument("--edges", type=int, default=None,
                      help="edge count for --kind random (default: match high_covis)")
    topo.add_argument("--out", default=None, help="output base path (.json and .pairs)")

    base = sub.add_parser("baseline", help="classical predictors")
    base_sub = base.add_subparsers(dest="baseline_command", required=True)
    match = base_sub.add_parser("match", help="feature-matching edge probabilities")
    match.add_argument("--scenario", required=True)
    match.add_argument("--max-kp", type=int, default=400)
    match.add_argument("--seed", type=int, default=0)
    match.add_argument("--jobs", type=int, default=1)
    match.add_argument("--out", default=None)

    serve = sub.add_parser("serve", help="run the annotation service")
    serve.add_argument("--data", default=os.environ.get("COVISION_DATA"),
                       help="scenario data root (default: $COVISION_DATA)")
    serve.add_argument("--port", type=int, default=8008)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--ui", default=None, help="directory of built UI assets to serve at /")

    return parser


def _cmd_gen(args) -> int:
    scene = load_scene(args.scene)
    cfg = GenConfig(
        seed=args.seed,
        n_c=args.n_c,
        prune_radius=args.prune_radius,
        iou_min=args.iou_min,
        iou_max=args.iou_max,
        coverage_stop=args.coverage_stop,
        wall_band=args.wall_band,
        eye_height=args.eye_height,
        resolution=args.resolution,
        tau=args.tau,
        fov_deg=args.fov,
        image_width=args.width,
        image_height=args.height,
        max_iterations=args.max_iterations,
    )
    scenario = generate_scenario(scene, cfg, scene_id=Path(args.scene).stem)
    if not args.no_images:
        scenario.images = [render_shaded(scene, view) for view in scenario.views]
    manifest = save_scenario(scenario, args.out)
    print(f"coverage {_fmt(scenario.coverage)}")
    print(f"views {len(scenario.views)}")
    print(f"manifest {manifest}", file=sys.stderr)
    return 0


def _cmd_graph(args) -> int:
    scenario = load_scenario(args.scenario)
    w = scenario.weight_matrix()
    adj = grapheval.binarize(w, args.tau)
    nodes = [v.id for v in scenario.views]
    edges = [
        (nodes[i], nodes[j])
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
        if adj[i, j]
    ]
    out = Path(args.out) if args.out else Path(args.scenario) / f"graph_tau_{args.tau:g}.json"
    write_graph_file(out, nodes, weights=w, tau=args.tau, edges=edges)
    print(out)
    return 0


def _aligned_graphs(pred_path, gt_path):
    """Load two graph files and align the prediction to the GT node order."""
    pred = load_graph_file(pred_path)
    gt = load_graph_file(gt_path)
    if set(pred.nodes) != set(gt.nodes):
        raise CovisionError(
            f"graphs cover different nodes: {sorted(pred.nodes)} vs {sorted(gt.nodes)}"
        )
    order = [pred.nodes.index(node) for node in gt.nodes]
    return pred, gt, np.array(order)


def _cmd_eval(args) -> int:
    pred, gt, order = _aligned_graphs(args.pred, args.gt)
    pred_adj = pred.adjacency()[np.ix_(order, order)]
    print(_fmt(grapheval.graph_iou(pred_adj, gt.adjacency())))
    return 0


def _cmd_auc(args) -> int:
    pred, gt, order = _aligned_graphs(args.pred, args.gt)
    weights = pred.weight_matrix()[np.ix_(order, order)]
    gt_adj = gt.adjacency()
    if args.curve:
        curve = grapheval.iou_curve(weights, gt_adj, args.thresholds)
        lines = ["threshold,iou"] + [f"{t:.6f},{v:.6f}" for t, v in curve]
        Path(args.curve).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(_fmt(grapheval.auc(weights, gt_adj, args.thresholds)))
    return 0


def _cmd_bucket(args) -> int:
    scenario = load_scenario(args.scenario)
    w = scenario.weight_matrix()
    nodes = [v.id for v in scenario.views]
    overlaps = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            label = grapheval.difficulty_pair(w[i, j])
            overlaps.append(w[i, j])
            print(f"pair {nodes[i]} {nodes[j]} {_fmt(w[i, j])} {label.level}")
    scene_label = grapheval.difficulty_scene(overlaps)
    print(f"scene {_fmt(float(np.mean(overlaps)))} {scene_label.level}")
    return 0


def _cmd_topo(args) -> int:
    scenario = load_scenario(args.scenario)
    nodes = [v.id for v in scenario.views]
    w = scenario.weight_matrix()
    if args.kind == "star":
        center = args.center if args.center is not None else nodes[0]
        adj = topologies.star(nodes, center)
    elif args.kind == "complete":
        adj = topologies.complete(nodes)
    elif args.kind == "random":
        count = args.edges
        if count is None:
            count = int(topologies.high_covis(w).sum()) // 2
        adj = topologies.random_matched(nodes, count, args.seed)
    elif args.kind == "gt_proximity":
        positions = [v.pose.position for v in scenario.views]
        adj = topologies.gt_proximity(positions, args.distance)
    elif args.kind == "covis":
        adj = grapheval.binarize(w, args.tau if args.tau is not None else scenario.tau)
    else:  # high_covis
        adj = topologies.high_covis(w)

    edges = [
        (nodes[i], nodes[j])
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
        if adj[i, j]
    ]
    base = Path(args.out) if args.out else Path(args.scenario) / f"topo_{args.kind}"
    write_graph_file(base.with_suffix(".json"), nodes, edges=edges)
    pairs = topologies.pair_list_lines(nodes, adj)
    base.with_suffix(".pairs").write_text("\n".join(pairs) + ("\n" if pairs else ""), encoding="utf-8")
    print(base.with_suffix(".json"))
    print(base.with_suffix(".pairs"))
    return 0


def _cmd_baseline_match(args) -> int:
    from .matching import predict_graph

    scenario = load_scenario(args.scenario)
    graph = predict_graph(scenario, max_kp=args.max_kp, seed=args.seed, jobs=args.jobs)
    out = Path(args.out) if args.out else Path(args.scenario) / "predicted_graph.json"
    write_graph_file(out, graph.nodes, weights=graph.weights)
    print(out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if not args.data:
        raise CovisionError("no data root: pass --data or set COVISION_DATA")
    app = create_app(args.data, seed=args.seed, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "graph":
            return _cmd_graph(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "auc":
            return _cmd_auc(args)
        if args.command == "bucket":
            return _cmd_bucket(args)
        if args.command == "topo":
            return _cmd_topo(args)
        if args.command == "baseline":
            return _cmd_baseline_match(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except PartialScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (CovisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    raise AssertionError(f"unhandled command {args.command}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
