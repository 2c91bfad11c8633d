"""Conversion between nested unit trees and flat triple lists.

``flatten`` walks a tree pre-order and emits one triple per content edge;
``nest`` rebuilds the unique tree a triple list describes.  Provenance and
dangling predicates exist only on the tree side, so round-trip equality is
defined modulo both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotATree
from .issues import WARNING, ValidationIssue
from .model import CONTRIBUTION, Node, Predicate, Triple, UnitLabel, UnitTree, canonical_text


@dataclass
class FlattenedUnit:
    """Triples of one unit in emission order, plus codec warnings.

    For a well-formed tree the first triple is (Contribution, has, <unit>).
    """

    unit: UnitLabel
    triples: list[Triple] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)


def _is_dangling(child: Node | str | None) -> bool:
    if child is None:
        return True
    return isinstance(child, str) and not canonical_text(child)


def flatten(tree: UnitTree) -> FlattenedUnit:
    """Emit the tree's edges as triples, pre-order.

    Each edge (node, predicate, child) becomes (node.label, predicate,
    child label or literal).  The Contribution root's own edge comes first,
    so a well-formed unit starts with (Contribution, has, <unit name>).
    Provenance entries emit nothing.  Empty-valued predicates emit nothing
    and add a dangling-predicate warning.  Duplicate triples are kept and
    reported, never silently merged.
    """
    out = FlattenedUnit(tree.unit)
    seen: set[tuple[str, str, str]] = set()

    def visit(node: Node) -> None:
        for predicate, child in node.edges:
            if _is_dangling(child):
                out.warnings.append(ValidationIssue(
                    "dangling-predicate", WARNING,
                    f"{tree.unit.identifier}/{node.label}",
                    f"predicate {predicate.text!r} has no value"))
                continue
            obj = child.label if isinstance(child, Node) else child
            triple = Triple(node.label, predicate, canonical_text(obj))
            if triple.key() in seen:
                out.warnings.append(ValidationIssue(
                    "duplicate-triple", WARNING,
                    f"{tree.unit.identifier}/{node.label}",
                    f"duplicate triple {triple.key()}"))
            seen.add(triple.key())
            out.triples.append(triple)
            if isinstance(child, Node):
                visit(child)

    visit(tree.root)
    return out


def nest(triples: list[Triple], unit: UnitLabel) -> UnitTree:
    """Rebuild the unique tree whose flatten() output is set-equal to ``triples``.

    Triples are interpreted as labeled edges rooted at Contribution: every
    subject except Contribution must first appear as the object of an earlier
    triple, and no label may be the object of two distinct triples.  Objects
    that never occur as subjects become literals.  Exact duplicate triples
    collapse (set semantics); edge order follows first appearance.

    Raises:
        NotATree: orphan subject, cycle, or a label repeated as object.
    """
    subjects = {t.subject for t in triples}
    nodes: dict[str, Node] = {CONTRIBUTION: Node(CONTRIBUTION)}
    object_labels: set[str] = set()
    seen: set[tuple[str, str, str]] = set()

    for triple in triples:
        key = triple.key()
        if key in seen:
            continue
        seen.add(key)
        subj, pred_text, obj = key
        if subj == obj:
            raise NotATree(f"self loop on {subj!r}")
        if obj == CONTRIBUTION:
            raise NotATree("Contribution cannot be an object")
        if subj not in nodes:
            raise NotATree(f"orphan subject {subj!r}: never introduced as an object")
        parent = nodes[subj]
        # Objects reused as subjects are internal nodes; so are the unit
        # heads hanging directly off Contribution.  Everything else is a leaf
        # literal, the two being indistinguishable in triple form.
        if obj in subjects or subj == CONTRIBUTION:
            if obj in object_labels:
                raise NotATree(f"label {obj!r} used as object more than once")
            child = Node(obj)
            nodes[obj] = child
            parent.add(triple.predicate, child)
            object_labels.add(obj)
        else:
            parent.add(triple.predicate, obj)

    return UnitTree(unit, nodes[CONTRIBUTION])


def _content_edges(node: Node) -> list[tuple[Predicate, Node | str]]:
    return [(p, c) for p, c in node.edges if not _is_dangling(c)]


def trees_equivalent(a: Node, b: Node) -> bool:
    """Structural equality ignoring provenance and dangling predicates.

    A childless node and a literal with the same label compare equal; the
    triple representation cannot tell them apart.
    """

    def child_eq(x: Node | str, y: Node | str) -> bool:
        x_label = x.label if isinstance(x, Node) else x
        y_label = y.label if isinstance(y, Node) else y
        if canonical_text(x_label) != canonical_text(y_label):
            return False
        x_edges = _content_edges(x) if isinstance(x, Node) else []
        y_edges = _content_edges(y) if isinstance(y, Node) else []
        if len(x_edges) != len(y_edges):
            return False
        return all(px.text == py.text and child_eq(cx, cy)
                   for (px, cx), (py, cy) in zip(x_edges, y_edges))

    return child_eq(a, b)


def roundtrip_check(tree: UnitTree) -> bool:
    """True iff nest(flatten(tree)) reproduces the tree.

    Equality is modulo provenance and dangling predicates, neither of which
    is representable in triples.
    """
    try:
        rebuilt = nest(flatten(tree).triples, tree.unit)
    except NotATree:
        return False
    return trees_equivalent(tree.root, rebuilt.root)
