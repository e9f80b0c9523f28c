"""File formats for graphs, weights, trajectories, and environments.

Graphs and weight vectors are single JSON documents; trajectories are
JSON lines (one object per trajectory) with a plain-CSV alternative
(one comma-separated vertex sequence per row); environments are JSON
lines of {"v0", "beta", "phi", "q"}.  Loaders raise ParseError naming
the offending field so the CLI can surface it machine-readably.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .environment import Environment
from .graphs import Graph
from .walk import Trajectory

__all__ = [
    "ParseError",
    "dump_environments",
    "dump_graph",
    "dump_trajectories",
    "dump_weights",
    "load_environments",
    "load_graph",
    "load_trajectories",
    "load_weights",
]


class ParseError(ValueError):
    """An input file does not match its declared format."""


def _read_json(path, what: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} file {path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{what} file {path}: expected a JSON object")
    return doc


def _require(doc: dict, field: str, path, what: str):
    if field not in doc:
        raise ParseError(f"{what} file {path}: field '{field}' missing")
    return doc[field]


def load_graph(path) -> Graph:
    """Read {"n": int, "edges": [[i, j], ...]}."""
    doc = _read_json(path, "graph")
    n = _require(doc, "n", path, "graph")
    edges = _require(doc, "edges", path, "graph")
    if not isinstance(n, int):
        raise ParseError(f"graph file {path}: field 'n' must be an integer")
    if not isinstance(edges, list):
        raise ParseError(f"graph file {path}: field 'edges' must be a list of pairs")
    try:
        return Graph(n=n, edges=tuple(tuple(e) for e in edges))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"graph file {path}: field 'edges' invalid ({exc})") from exc


def dump_graph(g: Graph, path) -> None:
    doc = {"n": g.n, "edges": [list(e) for e in g.edges]}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_weights(path, g: Graph | None = None) -> np.ndarray:
    """Read {"weights": [...]}, aligned to the canonical edge order."""
    doc = _read_json(path, "weights")
    weights = _require(doc, "weights", path, "weights")
    if not isinstance(weights, list):
        raise ParseError(f"weights file {path}: field 'weights' must be a list")
    try:
        w = np.asarray(weights, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"weights file {path}: field 'weights' not numeric") from exc
    if w.ndim != 1:
        raise ParseError(f"weights file {path}: field 'weights' must be a flat list")
    if g is not None and w.shape != (g.m,):
        raise ParseError(
            f"weights file {path}: field 'weights' has {w.size} entries, graph has {g.m} edges"
        )
    return w


def dump_weights(w, path) -> None:
    doc = {"weights": [float(x) for x in np.asarray(w, dtype=np.float64)]}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def dump_trajectories(trajectories, path, fmt: str = "jsonl") -> None:
    """Write trajectories as JSON lines or CSV rows of vertex sequences."""
    lines = []
    for t in trajectories:
        steps = t.steps if isinstance(t, Trajectory) else np.asarray(t)
        seq = [int(x) for x in steps]
        if fmt == "jsonl":
            lines.append(json.dumps({"v0": seq[0], "steps": seq}))
        elif fmt == "csv":
            lines.append(",".join(str(x) for x in seq))
        else:
            raise ValueError(f"unknown trajectory format {fmt!r}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_trajectories(path) -> list[Trajectory]:
    """Read trajectories from a JSONL (or CSV, by sniffing) file."""
    text = Path(path).read_text(encoding="utf-8")
    out = []
    for idx, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("{"):
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"trajectory file {path}:{idx}: invalid JSON") from exc
            steps = doc.get("steps")
            if steps is None:
                raise ParseError(f"trajectory file {path}:{idx}: field 'steps' missing")
            v0 = doc.get("v0", steps[0] if steps else None)
            if not steps or steps[0] != v0:
                raise ParseError(
                    f"trajectory file {path}:{idx}: field 'v0' disagrees with steps[0]"
                )
        else:
            try:
                steps = [int(x) for x in line.split(",")]
            except ValueError as exc:
                raise ParseError(
                    f"trajectory file {path}:{idx}: row is neither JSON nor integers"
                ) from exc
            v0 = steps[0]
        try:
            out.append(Trajectory(v0=int(v0), steps=np.asarray(steps, dtype=np.int64)))
        except ValueError as exc:
            raise ParseError(f"trajectory file {path}:{idx}: {exc}") from exc
    if not out:
        raise ParseError(f"trajectory file {path}: no trajectories found")
    return out


def dump_environments(envs, path) -> None:
    """Write one JSON object per line: {"v0", "beta", "phi", "q"}."""
    lines = []
    for env in envs:
        lines.append(
            json.dumps(
                {
                    "v0": int(env.v0),
                    "beta": [float(x) for x in env.beta],
                    "phi": [float(x) for x in env.phi],
                    "q": [float(x) for x in env.q],
                }
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_environments(path, g: Graph | None = None) -> list[Environment]:
    text = Path(path).read_text(encoding="utf-8")
    out = []
    for idx, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"environment file {path}:{idx}: invalid JSON") from exc
        for field in ("v0", "beta", "phi", "q"):
            if field not in doc:
                raise ParseError(
                    f"environment file {path}:{idx}: field '{field}' missing"
                )
        env = Environment(
            v0=int(doc["v0"]),
            beta=np.asarray(doc["beta"], dtype=np.float64),
            phi=np.asarray(doc["phi"], dtype=np.float64),
            q=np.asarray(doc["q"], dtype=np.float64),
        )
        if g is not None:
            try:
                env.validate(g)
            except ValueError as exc:
                raise ParseError(f"environment file {path}:{idx}: {exc}") from exc
        out.append(env)
    if not out:
        raise ParseError(f"environment file {path}: no environments found")
    return out
