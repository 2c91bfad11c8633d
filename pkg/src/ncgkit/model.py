"""Domain types of the NCG annotation scheme.

Everything here is an in-memory value: the twelve information-unit labels,
tokenized sentences, phrase spans, triples, the nested unit tree, and the
per-paper / corpus containers.  All small types are frozen; trees are built
by parsers and treated as read-only afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import UnknownUnitLabel

CONTRIBUTION = "Contribution"


def canonical_text(raw: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends.

    Case and every non-whitespace character are preserved: the scheme keeps
    surface forms verbatim, including tokenizer oddities like "–" or "?".
    """
    return " ".join(raw.split())


class UnitLabel(Enum):
    """Closed set of the 12 information-unit types."""

    RESEARCH_PROBLEM = "ResearchProblem"
    APPROACH = "Approach"
    MODEL = "Model"
    CODE = "Code"
    DATASET = "Dataset"
    EXPERIMENTAL_SETUP = "ExperimentalSetup"
    HYPERPARAMETERS = "Hyperparameters"
    BASELINES = "Baselines"
    RESULTS = "Results"
    TASKS = "Tasks"
    EXPERIMENTS = "Experiments"
    ABLATION_ANALYSIS = "AblationAnalysis"

    @property
    def identifier(self) -> str:
        """One-token name, used in file names (e.g. ``ResearchProblem``)."""
        return self.value

    @property
    def display(self) -> str:
        """Spaced display name (e.g. ``Research Problem``)."""
        return re.sub(r"(?<!^)(?=[A-Z])", " ", self.value)


#: Alternative surface names folded into a canonical unit.
_UNIT_ALIASES = {
    "method": UnitLabel.APPROACH,
    "application": UnitLabel.APPROACH,
    "system": UnitLabel.MODEL,
    "architecture": UnitLabel.MODEL,
}

_UNIT_LOOKUP: dict[str, UnitLabel] = {}
for _label in UnitLabel:
    _UNIT_LOOKUP[_label.value.lower()] = _label
for _alias, _label in _UNIT_ALIASES.items():
    _UNIT_LOOKUP[_alias] = _label


def normalize_unit_label(raw: str) -> UnitLabel:
    """Map a surface unit name onto one of the 12 canonical labels.

    Matching ignores case and internal whitespace, so ``Experimental Setup``
    and ``experimentalsetup`` both resolve.  ``method``/``application`` fold
    into Approach and ``system``/``architecture`` into Model.

    Raises:
        UnknownUnitLabel: the name matches no canonical unit or alias.
    """
    key = re.sub(r"\s+", "", raw).lower()
    if not key:
        raise UnknownUnitLabel("empty unit name")
    try:
        return _UNIT_LOOKUP[key]
    except KeyError:
        raise UnknownUnitLabel(f"not an information unit: {raw!r}") from None


@dataclass(frozen=True)
class Sentence:
    """One pre-tokenized plaintext line of a paper.

    ``index`` is the 1-based line position; ``text`` is always the tokens
    joined by single spaces.
    """

    paper_id: str
    index: int
    tokens: tuple[str, ...]
    text: str = field(init=False)

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"sentence index must be >= 1, got {self.index}")
        if not self.tokens:
            raise ValueError("sentence has no tokens")
        object.__setattr__(self, "text", " ".join(self.tokens))


@dataclass(frozen=True)
class PhraseSpan:
    """A scientific-term or predicate phrase inside one sentence.

    Token offsets are 0-based, start inclusive, end exclusive.  ``text`` must
    equal the covered tokens joined by single spaces; parsers enforce this
    against the referenced sentence.
    """

    sentence_index: int
    start_tok: int
    end_tok: int
    text: str

    def __post_init__(self) -> None:
        if self.start_tok < 0 or self.start_tok >= self.end_tok:
            raise ValueError(
                f"bad span offsets [{self.start_tok}, {self.end_tok})"
            )

    def token_count(self) -> int:
        return self.end_tok - self.start_tok


class PredicateKind(Enum):
    TEXTUAL = "Textual"
    FILLER_HAS = "FillerHas"
    FILLER_NAME = "FillerName"
    FILLER_HAS_ACRONYM = "FillerHasAcronym"


_FILLER_TEXTS = {
    "has": PredicateKind.FILLER_HAS,
    "name": PredicateKind.FILLER_NAME,
    "hasAcronym": PredicateKind.FILLER_HAS_ACRONYM,
}


@dataclass(frozen=True)
class Predicate:
    """A relation surface string plus its filler classification.

    Exactly ``has``, ``name``, and ``hasAcronym`` are fillers; every other
    text is Textual.  The pairing is checked on construction.
    """

    text: str
    kind: PredicateKind

    def __post_init__(self) -> None:
        expected = _FILLER_TEXTS.get(self.text, PredicateKind.TEXTUAL)
        if self.kind is not expected:
            raise ValueError(f"predicate {self.text!r} must have kind {expected}")

    @classmethod
    def from_text(cls, raw: str) -> "Predicate":
        text = canonical_text(raw)
        return cls(text, _FILLER_TEXTS.get(text, PredicateKind.TEXTUAL))

    @property
    def is_filler(self) -> bool:
        return self.kind is not PredicateKind.TEXTUAL


HAS = Predicate.from_text("has")


@dataclass(frozen=True)
class Triple:
    """A (subject, predicate, object) surface-form statement."""

    subject: str
    predicate: Predicate
    object: str

    def __post_init__(self) -> None:
        for part in (self.subject, self.predicate.text, self.object):
            if not canonical_text(part):
                raise ValueError(f"empty triple field in ({self.subject!r}, "
                                 f"{self.predicate.text!r}, {self.object!r})")

    @classmethod
    def of(cls, subject: str, predicate: str, obj: str) -> "Triple":
        """Build a triple from raw strings, canonicalizing whitespace."""
        return cls(canonical_text(subject), Predicate.from_text(predicate),
                   canonical_text(obj))

    def key(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate.text, self.object)


@dataclass
class Node:
    """One labeled node of a unit tree.

    ``provenance`` holds the "from sentence" strings attached to this node;
    they are metadata and never become triples.  An edge child is a Node, a
    literal string, or None for a predicate whose value was empty in the
    source file (a dangling predicate).  Edge order is the order of
    appearance in the source file.
    """

    label: str
    provenance: list[str] = field(default_factory=list)
    edges: list[tuple[Predicate, "Node | str | None"]] = field(default_factory=list)

    def add(self, predicate: Predicate, child: "Node | str | None") -> None:
        self.edges.append((predicate, child))

    def child_nodes(self) -> list["Node"]:
        return [c for _, c in self.edges if isinstance(c, Node)]

    def walk(self):
        """Yield this node and every descendant node, pre-order."""
        yield self
        for _, child in self.edges:
            if isinstance(child, Node):
                yield from child.walk()


@dataclass
class UnitTree:
    """The nested annotation of one information unit.

    ``root`` is the materialized "Contribution" super-root; in well-formed
    data it has a single ``has`` edge to the unit node, whose label matches
    the unit's display name.
    """

    unit: UnitLabel
    root: Node

    @classmethod
    def from_unit_node(cls, unit: UnitLabel, node: Node,
                       predicate: Predicate = HAS) -> "UnitTree":
        root = Node(CONTRIBUTION)
        root.add(predicate, node)
        return cls(unit, root)

    @property
    def unit_node(self) -> Node | None:
        """The first node hanging off the Contribution root, if any."""
        for _, child in self.root.edges:
            if isinstance(child, Node):
                return child
        return None

    def nodes(self):
        return self.root.walk()


@dataclass
class PaperAnnotation:
    """All annotation layers of one paper.

    Layer fields are ``None`` when the corresponding file was absent on
    disk, as opposed to present-but-empty.  ``sentences`` is the full
    tokenized document when the plaintext was loaded; validators use it as
    the provenance pool.
    """

    paper_id: str
    task: str
    total_sentence_count: int | None = None
    total_token_count: int | None = None
    contribution_sentence_indices: set[int] | None = None
    phrases: list[PhraseSpan] | None = None
    units: dict[UnitLabel, UnitTree] | None = None
    triples: dict[UnitLabel, list[Triple]] | None = None
    sentences: list[Sentence] | None = None

    def unit_labels(self) -> list[UnitLabel]:
        """Top-level units of this paper, in identifier order."""
        present: set[UnitLabel] = set()
        if self.units:
            present.update(self.units)
        if self.triples:
            present.update(self.triples)
        return sorted(present, key=lambda u: u.identifier)

    def sentence(self, index: int) -> Sentence | None:
        if self.sentences is None or not 1 <= index <= len(self.sentences):
            return None
        return self.sentences[index - 1]

    def contribution_texts(self) -> list[str]:
        """Texts of the selected contribution sentences, where resolvable."""
        if not self.contribution_sentence_indices:
            return []
        out = []
        for idx in sorted(self.contribution_sentence_indices):
            sent = self.sentence(idx)
            if sent is not None:
                out.append(sent.text)
        return out


@dataclass
class Corpus:
    """Papers grouped by task, in stable task and paper order."""

    tasks: dict[str, list[PaperAnnotation]] = field(default_factory=dict)

    def papers(self):
        for papers in self.tasks.values():
            yield from papers

    def paper_ids(self) -> list[str]:
        return [p.paper_id for p in self.papers()]

    def get(self, paper_id: str) -> PaperAnnotation | None:
        for paper in self.papers():
            if paper.paper_id == paper_id:
                return paper
        return None

    def __len__(self) -> int:
        return sum(len(v) for v in self.tasks.values())
