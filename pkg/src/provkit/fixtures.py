"""Small hand-built graphs used as worked examples and regression anchors.

``admission_fixture`` models one hospital stay: successive patient states
derive from one another, an admission and a treatment activity each use the
prior state and generate the next, and each activity is associated with the
ward it happened in.  The first and last states specialize the person
entity.  Node names and application labels follow the ``mimic:`` namespace
used by the corresponding clinical records.

``feature_vector_fixture`` is deliberately synthetic: a nine-node graph
whose depth-0/depth-1 feature vector is exactly ``(5, 2, 2, 2, 1, 1, 2)``
under the canonical per-depth universe ordering.  Several of its edges break
the advisory endpoint-kind table on purpose; the graph exists to pin the
feature-counting pipeline, not to model provenance.

``pattern_fixtures`` returns two trees whose roots share the same depth-2
type even though the trees are structurally different, which forward-walk
label summaries cannot see but Weisfeiler-Lehman color refinement can.
"""

from __future__ import annotations

from .model import ProvGraph


def admission_fixture() -> ProvGraph:
    nodes = {
        "person13": {"ent", "mimic:Person"},
        "patient7_0": {"ent", "mimic:Patient"},
        "patient7_1": {"ent", "mimic:Patient"},
        "patient7_2": {"ent", "mimic:Patient"},
        "patient7_3": {"ent", "mimic:Patient", "mimic:DischargedPatient"},
        "admitting3": {"act", "mimic:Admitting"},
        "treating5": {"act", "mimic:Treating"},
        "ward27": {"ag", "mimic:Ward"},
        "ward51": {"ag", "mimic:Ward"},
    }
    edges = [
        ("patient7_0", "person13", "spe"),
        ("patient7_3", "person13", "spe"),
        ("patient7_1", "patient7_0", "der"),
        ("patient7_2", "patient7_1", "der"),
        ("patient7_3", "patient7_2", "der"),
        ("patient7_2", "admitting3", "gen"),
        ("patient7_3", "treating5", "gen"),
        ("admitting3", "patient7_1", "use"),
        ("treating5", "patient7_2", "use"),
        ("admitting3", "ward27", "waw"),
        ("treating5", "ward51", "waw"),
    ]
    return ProvGraph("admission", {k: frozenset(v) for k, v in nodes.items()}, tuple(edges))


def feature_vector_fixture() -> ProvGraph:
    nodes = {
        "a1": {"act"},
        "a2": {"act"},
        "a3": {"act"},
        "a4": {"act"},
        "a5": {"act"},
        "g1": {"ag"},
        "g2": {"ag"},
        "e1": {"ent"},
        "e2": {"ent"},
    }
    edges = [
        ("a1", "a5", "use"),
        ("a1", "g1", "waw"),
        ("a2", "a3", "use"),
        ("a2", "g2", "waw"),
        ("a3", "e1", "der"),
        ("a3", "a5", "gen"),
        ("a4", "e2", "spe"),
        ("e1", "e2", "der"),
        ("e2", "e1", "der"),
    ]
    return ProvGraph("vecfix", {k: frozenset(v) for k, v in nodes.items()}, tuple(edges))


def pattern_fixtures() -> tuple[ProvGraph, ProvGraph]:
    p1 = ProvGraph(
        "pattern1",
        {
            "root": frozenset({"ent"}),
            "e1": frozenset({"ent"}),
            "e2": frozenset({"ent"}),
            "e3": frozenset({"ent"}),
            "e4": frozenset({"ent"}),
            "a1": frozenset({"act"}),
            "a2": frozenset({"act"}),
        },
        (
            ("root", "e1", "der"),
            ("root", "a1", "gen"),
            ("e1", "e2", "der"),
            ("e1", "a2", "gen"),
            ("a1", "e3", "use"),
            ("a1", "e4", "use"),
        ),
    )
    p2 = ProvGraph(
        "pattern2",
        {
            "root": frozenset({"ent"}),
            "e1": frozenset({"ent"}),
            "e2": frozenset({"ent"}),
            "e3": frozenset({"ent"}),
            "e4": frozenset({"ent"}),
            "a1": frozenset({"act"}),
            "a2": frozenset({"act"}),
        },
        (
            ("root", "e1", "der"),
            ("root", "e2", "der"),
            ("root", "a1", "gen"),
            ("e1", "a2", "gen"),
            ("e2", "e3", "der"),
            ("a1", "e4", "use"),
        ),
    )
    return p1, p2
