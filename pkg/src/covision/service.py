"""HTTP annotation service: uniform pair serving, append-only label capture,
double-annotation agreement reports, and human-vs-GT graph IoU.

Every submitted label is one JSON line in the scenario's annotations.jsonl,
flushed on write; reports are pure functions of that log, so restarting the
service over an existing log reproduces them exactly.
"""

from __future__ import annotations

import io
import json
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import Response

from . import grapheval
from .errors import FormatError
from .store import MANIFEST_NAME, graph_file_object, load_scenario

VERDICTS = ("connected", "not-connected", "flagged")
LOG_NAME = "annotations.jsonl"


@dataclass(frozen=True)
class AnnotationEvent:
    """One human judgment on an unordered view pair (i < j)."""

    scenario: str
    pair: tuple[int, int]
    annotator: str
    verdict: str
    timestamp: int  # UTC milliseconds

    def to_json(self) -> str:
        obj = asdict(self)
        obj["pair"] = list(self.pair)
        return json.dumps(obj, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "AnnotationEvent":
        obj = json.loads(line)
        return AnnotationEvent(
            scenario=obj["scenario"],
            pair=(int(obj["pair"][0]), int(obj["pair"][1])),
            annotator=obj["annotator"],
            verdict=obj["verdict"],
            timestamp=int(obj["timestamp"]),
        )


class ScenarioSession:
    """One scenario's views, GT graph, and its append-only event log."""

    def __init__(self, scenario_id: str, directory: Path):
        self.id = scenario_id
        self.directory = directory
        self.scenario = load_scenario(directory)
        self.nodes = [v.id for v in self.scenario.views]
        self.pairs = [
            (self.nodes[i], self.nodes[j])
            for i in range(len(self.nodes))
            for j in range(i + 1, len(self.nodes))
        ]
        self.events: list[AnnotationEvent] = []
        self.log_path = directory / LOG_NAME
        self._lock = threading.Lock()
        if self.log_path.exists():
            for n, line in enumerate(self.log_path.read_text(encoding="utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    self.events.append(AnnotationEvent.from_json(line))
                except (KeyError, ValueError, json.JSONDecodeError) as exc:
                    raise FormatError(f"corrupt event log {self.log_path}:{n + 1}: {exc}") from exc

    def append(self, event: AnnotationEvent) -> int:
        with self._lock:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(event.to_json() + "\n")
                fh.flush()
            self.events.append(event)
            return len(self.events)

    def latest_verdicts(self) -> dict:
        """{(annotator, pair): verdict}; later events supersede earlier ones."""
        latest = {}
        for ev in self.events:
            latest[(ev.annotator, ev.pair)] = ev.verdict
        return latest

    def annotators(self) -> list[str]:
        return sorted({ev.annotator for ev in self.events})

    def labeled_pairs(self, annotator: str) -> set:
        return {ev.pair for ev in self.events if ev.annotator == annotator}

    def agreement(self) -> dict:
        latest = self.latest_verdicts()
        by_pair: dict[tuple, dict] = {}
        for (annotator, pair), verdict in latest.items():
            by_pair.setdefault(pair, {})[annotator] = verdict

        agreed, conflicts, flagged_only = [], [], []
        for pair in self.pairs:
            verdicts = by_pair.get(pair)
            if not verdicts:
                continue
            firm = [v for v in verdicts.values() if v != "flagged"]
            if not firm:
                flagged_only.append(list(pair))
            elif len(firm) >= 2:
                (conflicts if len(set(firm)) > 1 else agreed).append(list(pair))

        total = len(self.pairs)
        completion = {
            annotator: (len(self.labeled_pairs(annotator)) / total if total else 0.0)
            for annotator in self.annotators()
        }
        return {
            "scenario": self.id,
            "pairs": [
                {"pair": list(pair), "verdicts": by_pair[pair]}
                for pair in self.pairs
                if pair in by_pair
            ],
            "agreed": len(agreed),
            "agreed_pairs": agreed,
            "conflicts": conflicts,
            "flagged": flagged_only,
            "completion": completion,
            "total_pairs": total,
        }

    def human_graph(self, annotator: str) -> dict:
        latest = self.latest_verdicts()
        verdicts = {pair: v for (a, pair), v in latest.items() if a == annotator}
        if not verdicts:
            raise HTTPException(404, f"unknown annotator {annotator!r} for scenario {self.id}")
        partial = len(verdicts) < len(self.pairs)
        edges = sorted(pair for pair, v in verdicts.items() if v == "connected")

        index = {node: k for k, node in enumerate(self.nodes)}
        n = len(self.nodes)
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            adj[index[i], index[j]] = adj[index[j], index[i]] = True
        iou = grapheval.graph_iou(adj, self.scenario.gt_adjacency)
        return {
            "scenario": self.id,
            "annotator": annotator,
            "partial": partial,
            "iou": iou,
            "nodes": self.nodes,
            "edges": [list(e) for e in edges],
            "graph": graph_file_object(self.nodes, edges=edges),
        }


def _png_bytes(img) -> bytes:
    from PIL import Image

    pil = Image.frombytes("L", (img.width, img.height), img.to_bytes())
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def create_app(data_root, seed: int = 0, ui_dir=None) -> FastAPI:
    """Build the service over a directory of scenario subdirectories."""
    root = Path(data_root)
    if not root.is_dir():
        raise FormatError(f"data root {root} is not a directory")
    sessions: dict[str, ScenarioSession] = {}
    for sub in sorted(root.iterdir()):
        if sub.is_dir() and (sub / MANIFEST_NAME).exists():
            sessions[sub.name] = ScenarioSession(sub.name, sub)

    rng = np.random.default_rng(seed)
    app = FastAPI(title="covision annotation service")

    def session_of(scenario_id: str) -> ScenarioSession:
        if scenario_id not in sessions:
            raise HTTPException(404, f"unknown scenario {scenario_id!r}")
        return sessions[scenario_id]

    @app.get("/api/scenarios")
    def list_scenarios():
        return {
            "scenarios": [
                {
                    "id": s.id,
                    "views": len(s.nodes),
                    "pairs": len(s.pairs),
                    "has_images": s.scenario.images is not None,
                }
                for s in sessions.values()
            ]
        }

    @app.get("/api/scenarios/{scenario_id}/next")
    def next_pair(scenario_id: str, annotator: str = Query(...)):
        if not annotator:
            raise HTTPException(400, "annotator must be non-empty")
        s = session_of(scenario_id)
        done = s.labeled_pairs(annotator)
        remaining = [p for p in s.pairs if p not in done]
        if not remaining:
            return {"done": True, "labeled": len(s.pairs), "total": len(s.pairs)}
        i, j = remaining[int(rng.integers(len(remaining)))]
        return {
            "done": False,
            "pair": [i, j],
            "images": [
                f"/api/scenarios/{scenario_id}/images/{i}",
                f"/api/scenarios/{scenario_id}/images/{j}",
            ],
            "labeled": len(done),
            "total": len(s.pairs),
        }

    @app.get("/api/scenarios/{scenario_id}/images/{view_id}")
    def image(scenario_id: str, view_id: int):
        s = session_of(scenario_id)
        if view_id not in s.nodes:
            raise HTTPException(404, f"unknown view {view_id}")
        if s.scenario.images is None:
            raise HTTPException(404, f"scenario {scenario_id!r} has no rendered images")
        img = s.scenario.images[s.nodes.index(view_id)]
        return Response(content=_png_bytes(img), media_type="image/png")

    @app.post("/api/scenarios/{scenario_id}/labels")
    def submit_label(scenario_id: str, body: dict):
        s = session_of(scenario_id)
        pair = body.get("pair")
        annotator = body.get("annotator")
        verdict = body.get("verdict")
        if not isinstance(annotator, str) or not annotator:
            raise HTTPException(400, "annotator must be a non-empty string")
        if verdict not in VERDICTS:
            raise HTTPException(400, f"verdict must be one of {VERDICTS}")
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(x, int) for x in pair)
        ):
            raise HTTPException(400, "pair must be [i, j] with integer view ids")
        i, j = pair
        if i >= j:
            raise HTTPException(400, f"pair must satisfy i < j, got ({i}, {j})")
        if (i, j) not in set(s.pairs):
            raise HTTPException(400, f"pair ({i}, {j}) is not a view pair of {scenario_id!r}")
        timestamp = body.get("timestamp")
        if timestamp is None:
            timestamp = int(time.time() * 1000)
        event = AnnotationEvent(scenario_id, (i, j), annotator, verdict, int(timestamp))
        count = s.append(event)
        return {
            "ok": True,
            "events": count,
            "labeled": len(s.labeled_pairs(annotator)),
            "total": len(s.pairs),
        }

    @app.get("/api/scenarios/{scenario_id}/agreement")
    def agreement(scenario_id: str):
        return session_of(scenario_id).agreement()

    @app.get("/api/scenarios/{scenario_id}/human-graph")
    def human_graph(scenario_id: str, annotator: str = Query(...)):
        return session_of(scenario_id).human_graph(annotator)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app
