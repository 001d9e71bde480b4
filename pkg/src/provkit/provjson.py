"""PROV-JSON ingestion.

Maps the three node sections (``entity``, ``activity``, ``agent``) and the
twelve supported binary relations onto a :class:`~provkit.model.ProvGraph`.
Unsupported constructs (bundles, unknown relation sections) are skipped with
a warning; extra attributes on supported relations (roles, times) are
likewise ignored.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Any

from .model import GENERIC_LABELS, ProvGraph


class ProvJsonWarning(UserWarning):
    """Raised (as a warning) for skipped PROV-JSON constructs."""


class DataFormatError(ValueError):
    """Malformed input data: bad JSON, missing fields, broken references."""


#: Node section name -> generic label.
_NODE_SECTIONS = {"entity": "ent", "activity": "act", "agent": "ag"}

#: Relation section -> (edge label, source field, destination field).
_RELATIONS: dict[str, tuple[str, str, str]] = {
    "wasDerivedFrom": ("der", "prov:generatedEntity", "prov:usedEntity"),
    "specializationOf": ("spe", "prov:specificEntity", "prov:generalEntity"),
    "alternateOf": ("alt", "prov:alternate1", "prov:alternate2"),
    "wasInvalidatedBy": ("wib", "prov:entity", "prov:activity"),
    "wasGeneratedBy": ("gen", "prov:entity", "prov:activity"),
    "used": ("use", "prov:activity", "prov:entity"),
    "wasAttributedTo": ("wat", "prov:entity", "prov:agent"),
    "wasAssociatedWith": ("waw", "prov:activity", "prov:agent"),
    "actedOnBehalfOf": ("abo", "prov:delegate", "prov:responsible"),
    "wasStartedBy": ("wsb", "prov:activity", "prov:trigger"),
    "wasEndedBy": ("web", "prov:activity", "prov:trigger"),
    "wasInformedBy": ("wifb", "prov:informed", "prov:informant"),
}

#: Sections that carry no node/edge information and are silently acceptable.
_IGNORABLE = {"prefix"}


def _type_strings(value: Any) -> list[str]:
    """Extract application label strings from a ``prov:type`` value."""
    if isinstance(value, list):
        out: list[str] = []
        for item in value:
            out.extend(_type_strings(item))
        return out
    if isinstance(value, dict):
        inner = value.get("$")
        return _type_strings(inner) if inner is not None else []
    if isinstance(value, str):
        return [value] if value else []
    return [str(value)]


def load_provjson(
    source: str | Path | dict,
    label_mode: str = "application",
    graph_id: str | None = None,
) -> ProvGraph:
    """Load one PROV-JSON document as a provenance graph.

    ``source`` may be a path to a JSON file or an already-parsed document
    dict.  ``label_mode`` selects ``"generic"`` (node kinds only) or
    ``"application"`` (kinds plus ``prov:type`` labels).  Nodes referenced by
    a relation but never declared are auto-declared with the generic label
    the relation column expects, with a warning.
    """
    if label_mode not in ("generic", "application"):
        raise ValueError(f"unknown label mode {label_mode!r}")
    if isinstance(source, (str, Path)):
        path = Path(source)
        if graph_id is None:
            graph_id = path.stem
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    else:
        doc = source
        if graph_id is None:
            graph_id = "document"
    if not isinstance(doc, dict):
        raise DataFormatError("PROV-JSON document must be a JSON object")

    nodes: dict[str, set[str]] = {}
    skipped: list[str] = []

    for section, kind in _NODE_SECTIONS.items():
        members = doc.get(section, {})
        if not isinstance(members, dict):
            raise DataFormatError(f"section {section!r} must be an object")
        for nid, attrs in members.items():
            labels = nodes.setdefault(str(nid), set())
            labels.add(kind)
            if label_mode == "application" and isinstance(attrs, dict):
                for key, value in attrs.items():
                    if key == "prov:type":
                        labels.update(_type_strings(value))

    edges: list[tuple[str, str, str]] = []
    for section, members in doc.items():
        if section in _NODE_SECTIONS or section in _IGNORABLE:
            continue
        if section not in _RELATIONS:
            skipped.append(section)
            continue
        label, src_field, dst_field = _RELATIONS[section]
        if not isinstance(members, dict):
            raise DataFormatError(f"relation section {section!r} must be an object")
        for rid, rec in members.items():
            if not isinstance(rec, dict):
                raise DataFormatError(f"relation {rid!r} in {section!r} must be an object")
            src = rec.get(src_field)
            dst = rec.get(dst_field)
            if src is None or dst is None:
                raise DataFormatError(
                    f"relation {rid!r} in {section!r} lacks {src_field!r}/{dst_field!r}"
                )
            for endpoint, column in ((str(src), 0), (str(dst), 1)):
                if endpoint not in nodes:
                    kind = _expected_kind(section, column)
                    nodes[endpoint] = {kind}
                    warnings.warn(
                        f"{graph_id}: auto-declared {endpoint!r} as {kind!r} "
                        f"(referenced by {section})",
                        ProvJsonWarning,
                        stacklevel=2,
                    )
            edges.append((str(src), str(dst), label))

    if skipped:
        warnings.warn(
            f"{graph_id}: skipped unsupported sections: {sorted(set(skipped))}",
            ProvJsonWarning,
            stacklevel=2,
        )
    if not nodes:
        raise DataFormatError("document declares no nodes")

    try:
        return ProvGraph(graph_id, {k: frozenset(v) for k, v in nodes.items()}, tuple(edges))
    except ValueError as exc:
        raise DataFormatError(str(exc)) from exc


def _expected_kind(section: str, column: int) -> str:
    from .model import EDGE_KINDS

    label = _RELATIONS[section][0]
    return EDGE_KINDS[label][column]
