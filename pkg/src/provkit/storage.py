"""Internal dataset serialization.

Graphs are stored one JSON object per line::

    {"id": "...", "label": "...", "nodes": [{"id": "...", "labels": [...]}], "edges": [[src, dst, "gen"], ...]}

Node entries and label lists are sorted lexicographically on write so that
writing the same dataset twice yields byte-identical files.  A dataset
directory pairs the graph file(s) with a ``manifest.json`` recording the file
list, the class labels and the generation parameters.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import Dataset, GraphFamily, ProvGraph
from .provjson import DataFormatError

MANIFEST_NAME = "manifest.json"
GRAPHS_NAME = "graphs.jsonl"
FORMAT_TAG = "provkit-dataset/1"


def graph_to_record(graph: ProvGraph, label: str) -> dict:
    return {
        "id": graph.graph_id,
        "label": label,
        "nodes": [
            {"id": nid, "labels": sorted(labels)}
            for nid, labels in sorted(graph.nodes.items())
        ],
        "edges": [list(e) for e in graph.edges],
    }


def record_to_graph(record: dict) -> tuple[ProvGraph, str]:
    try:
        gid = record["id"]
        label = record["label"]
        nodes = {n["id"]: frozenset(n["labels"]) for n in record["nodes"]}
        edges = tuple((s, d, l) for s, d, l in record["edges"])
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed graph record: {exc}") from exc
    if not isinstance(label, str):
        raise DataFormatError(f"graph {gid!r}: class label must be a string")
    try:
        return ProvGraph(gid, nodes, edges), label
    except ValueError as exc:
        raise DataFormatError(f"graph {gid!r}: {exc}") from exc


def save_internal(dataset: Dataset, out_dir: str | Path) -> Path:
    """Write ``dataset`` under ``out_dir`` and return the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for g in dataset.family:
        rec = graph_to_record(g, dataset.class_labels[g.graph_id])
        lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
    (out / GRAPHS_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {
        "format": FORMAT_TAG,
        "files": [GRAPHS_NAME],
        "class_labels": dict(sorted(dataset.class_labels.items())),
        "meta": dataset.meta,
    }
    (out / MANIFEST_NAME).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out / MANIFEST_NAME


def load_internal(path: str | Path) -> Dataset:
    """Load a dataset from a directory, a manifest file, or a bare ``.jsonl``."""
    p = Path(path)
    if p.is_dir():
        p = p / MANIFEST_NAME
    if not p.exists():
        raise DataFormatError(f"no such dataset: {path}")
    if p.name.endswith(".jsonl"):
        graphs, labels = _read_graph_file(p)
        return Dataset(GraphFamily(tuple(graphs)), labels, {})
    try:
        manifest = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{p}: not valid JSON: {exc}") from exc
    if manifest.get("format") != FORMAT_TAG:
        raise DataFormatError(f"{p}: unrecognized manifest format {manifest.get('format')!r}")
    graphs: list[ProvGraph] = []
    labels: dict[str, str] = {}
    for name in manifest.get("files", []):
        file_graphs, file_labels = _read_graph_file(p.parent / name)
        graphs.extend(file_graphs)
        labels.update(file_labels)
    declared = manifest.get("class_labels", {})
    if declared and declared != labels:
        raise DataFormatError(f"{p}: manifest class labels disagree with graph records")
    return Dataset(GraphFamily(tuple(graphs)), labels, manifest.get("meta", {}))


def _read_graph_file(path: Path) -> tuple[list[ProvGraph], dict[str, str]]:
    if not path.exists():
        raise DataFormatError(f"missing graph file: {path}")
    graphs = []
    labels = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            graph, label = record_to_graph(record)
            if graph.graph_id in labels:
                raise DataFormatError(f"{path}:{lineno}: duplicate graph id {graph.graph_id!r}")
            graphs.append(graph)
            labels[graph.graph_id] = label
    return graphs, labels
