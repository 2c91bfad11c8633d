"""Reading and writing the on-disk annotation formats.

A corpus lives under one root directory, one subdirectory per task, one per
paper.  The default layout per paper:

    text.txt                one pre-tokenized sentence per line
    sentences.txt           1-based contribution sentence indices, one per line
    phrases.tsv             sentence_index <TAB> start_tok <TAB> end_tok <TAB> surface
    info-units/{Unit}.json  nested unit tree (predicate/node alternation)
    triples/{Unit}.txt      one (subject||predicate||object) line per triple

All patterns are overridable through a :class:`CorpusManifest`, so a dataset
with different naming is ingested by adjusting the manifest, not the code.
Files are UTF-8; byte-order marks are stripped.
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .codec import flatten, nest
from .errors import (
    AlternationError,
    FormatError,
    NotATree,
    SpanOutOfRange,
    SpanTextMismatch,
    UnknownUnitLabel,
)
from .issues import ERROR, WARNING, ValidationIssue
from .model import (
    CONTRIBUTION,
    Corpus,
    Node,
    PaperAnnotation,
    PhraseSpan,
    Predicate,
    Sentence,
    Triple,
    UnitLabel,
    UnitTree,
    canonical_text,
    normalize_unit_label,
)

PROVENANCE_KEY = "from sentence"

DEFAULT_LAYOUT = {
    "text": "{task}/{paper}/text.txt",
    "sentences": "{task}/{paper}/sentences.txt",
    "phrases": "{task}/{paper}/phrases.tsv",
    "units": "{task}/{paper}/info-units/{Unit}.json",
    "triples": "{task}/{paper}/triples/{Unit}.txt",
}


@dataclass
class CorpusManifest:
    """Where a corpus lives and how its files are named.

    ``layout`` maps file roles to path patterns containing ``{task}``,
    ``{paper}`` and (for per-unit files) ``{Unit}`` placeholders.  When
    ``task_names`` is None the tasks are discovered as the root's immediate
    subdirectories.  ``strict`` turns recoverable format deviations into
    raised errors.  ``sentence_totals``/``token_totals`` override the
    per-paper totals computed from the plaintext, for datasets whose
    published counting differs from line/token sums.
    """

    root_path: str | Path
    layout: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_LAYOUT))
    task_names: list[str] | None = None
    strict: bool = False
    offset_unit: str = "token"
    sentence_totals: dict[str, int] = field(default_factory=dict)
    token_totals: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged = dict(DEFAULT_LAYOUT)
        merged.update(self.layout)
        self.layout = merged
        for role, pattern in self.layout.items():
            if "{paper}" not in pattern:
                raise ValueError(f"layout[{role!r}] lacks a {{paper}} placeholder")
        if self.offset_unit not in ("token", "char"):
            raise ValueError(f"offset_unit must be token or char, got {self.offset_unit!r}")

    @classmethod
    def from_ini(cls, path: str | Path) -> "CorpusManifest":
        """Read a manifest from an INI-style file.

        Sections: ``[corpus]`` (root, tasks, strict, offset_unit),
        ``[layout]`` (role = pattern), ``[totals.sentences]`` and
        ``[totals.tokens]`` (paper_id = count).  A relative root is resolved
        against the manifest file's directory.
        """
        path = Path(path)
        cp = configparser.ConfigParser()
        cp.optionxform = str  # paper ids in totals sections are case-sensitive
        with open(path, encoding="utf-8-sig") as fh:
            cp.read_file(fh)
        corpus_sec = cp["corpus"] if cp.has_section("corpus") else {}
        root = Path(corpus_sec.get("root", "."))
        if not root.is_absolute():
            root = path.parent / root
        tasks_raw = corpus_sec.get("tasks", "")
        task_names = [t.strip() for t in tasks_raw.split(",") if t.strip()] or None
        layout = dict(cp["layout"]) if cp.has_section("layout") else {}
        totals_s = ({k: int(v) for k, v in cp["totals.sentences"].items()}
                    if cp.has_section("totals.sentences") else {})
        totals_t = ({k: int(v) for k, v in cp["totals.tokens"].items()}
                    if cp.has_section("totals.tokens") else {})
        strict = str(corpus_sec.get("strict", "false")).lower() in ("1", "true", "yes")
        return cls(root_path=root, layout=layout, task_names=task_names,
                   strict=strict,
                   offset_unit=corpus_sec.get("offset_unit", "token"),
                   sentence_totals=totals_s, token_totals=totals_t)

    def resolve(self, role: str, **kw: str) -> Path:
        return Path(self.root_path).joinpath(*self.layout[role].format(**kw).split("/"))


def _note(issues: list[ValidationIssue] | None, code: str, severity: str,
          location: str, message: str) -> None:
    if issues is not None:
        issues.append(ValidationIssue(code, severity, location, message))


# ---------------------------------------------------------------------------
# sentence indices


def parse_sentence_indices(text: str, *, issues: list[ValidationIssue] | None = None,
                           location: str = "") -> set[int]:
    """Parse one 1-based integer per line; duplicates collapse with a warning."""
    out: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if not re.fullmatch(r"\d+", line) or int(line) < 1:
            raise FormatError(f"not a positive sentence index: {line!r}",
                              path=location or None, line=lineno)
        value = int(line)
        if value in out:
            _note(issues, "duplicate-sentence-index", WARNING,
                  f"{location}:{lineno}", f"index {value} listed more than once")
        out.add(value)
    return out


# ---------------------------------------------------------------------------
# phrase spans


def _char_span_to_tokens(sentence: Sentence, start: int, end: int) -> tuple[int, int]:
    """Map a character span over the space-joined text onto token offsets."""
    bounds = []
    pos = 0
    for tok in sentence.tokens:
        bounds.append((pos, pos + len(tok)))
        pos += len(tok) + 1
    starts = {b[0]: i for i, b in enumerate(bounds)}
    ends = {b[1]: i + 1 for i, b in enumerate(bounds)}
    if start not in starts or end not in ends:
        raise SpanOutOfRange(f"char span [{start}, {end}) not on token boundaries")
    return starts[start], ends[end]


def parse_phrase_file(text: str, sentences: list[Sentence | None], *,
                      strict: bool = False, offset_unit: str = "token",
                      issues: list[ValidationIssue] | None = None,
                      location: str = "") -> list[PhraseSpan]:
    """Parse a 4-column TSV of phrase spans, validating against the sentences.

    The surface text must equal the covered tokens joined by spaces (both
    sides whitespace-normalized).  Out-of-range spans raise in strict mode
    and are dropped with an error issue otherwise; text mismatches raise in
    strict mode and are otherwise repaired from the sentence tokens with a
    warning, so every returned span satisfies its invariants.
    """
    by_index: dict[int, Sentence] = {
        s.index: s for s in sentences if s is not None
    }
    spans: list[PhraseSpan] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        cols = raw.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 tab-separated columns, got {len(cols)}",
                              path=location or None, line=lineno)
        try:
            idx, start, end = int(cols[0]), int(cols[1]), int(cols[2])
        except ValueError:
            raise FormatError(f"non-integer span fields: {cols[:3]}",
                              path=location or None, line=lineno) from None
        surface = canonical_text(cols[3])
        try:
            sent = by_index.get(idx)
            if sent is None:
                raise SpanOutOfRange(f"no sentence with index {idx}",
                                     path=location or None, line=lineno)
            if offset_unit == "char":
                start_tok, end_tok = _char_span_to_tokens(sent, start, end)
            else:
                start_tok, end_tok = start, end
            if not 0 <= start_tok < end_tok <= len(sent.tokens):
                raise SpanOutOfRange(
                    f"span [{start_tok}, {end_tok}) outside sentence {idx} "
                    f"({len(sent.tokens)} tokens)",
                    path=location or None, line=lineno)
        except SpanOutOfRange as exc:
            if strict:
                raise
            _note(issues, "span-out-of-range", ERROR, f"{location}:{lineno}", str(exc))
            continue
        covered = " ".join(sent.tokens[start_tok:end_tok])
        if surface != covered:
            if strict:
                raise SpanTextMismatch(
                    f"surface {surface!r} != covered tokens {covered!r}",
                    path=location or None, line=lineno)
            _note(issues, "span-text-mismatch", WARNING, f"{location}:{lineno}",
                  f"surface {surface!r} repaired to {covered!r}")
        spans.append(PhraseSpan(idx, start_tok, end_tok, covered))
    return spans


# ---------------------------------------------------------------------------
# nested unit files


def _provenance_strings(value) -> list[str]:
    if isinstance(value, str):
        return [canonical_text(value)]
    if isinstance(value, list):
        return [canonical_text(str(v)) for v in value]
    return [canonical_text(str(value))]


def parse_unit_file(text: str, unit: UnitLabel, *,
                    issues: list[ValidationIssue] | None = None,
                    location: str = "") -> UnitTree:
    """Parse the nested JSON unit format into a tree.

    Keys alternate strictly between predicates and node labels starting
    from the implicit Contribution root, whose edges are the file's
    top-level keys.  ``from sentence`` keys (exact, case-sensitive) attach
    provenance to the nearest enclosing node wherever they appear.  A
    predicate with an empty value is kept as a dangling edge and reported.

    Raises:
        FormatError: malformed JSON or a non-object at the top level.
        AlternationError: a leaf string where a node's predicate map is
            required, i.e. a node label used as if it were a predicate.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed unit file: {exc.msg}",
                          path=location or None, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise FormatError("unit file must be a JSON object",
                          path=location or None)

    root = Node(CONTRIBUTION)
    _fill_predicates(root, data, location)

    unit_node = None
    content_edges = [(p, c) for p, c in root.edges if c is not None]
    if len(content_edges) == 1:
        pred, child = content_edges[0]
        if isinstance(child, Node) and pred.text == "has":
            try:
                if normalize_unit_label(child.label) is unit:
                    unit_node = child
            except UnknownUnitLabel:
                pass
    if unit_node is None:
        _note(issues, "root-not-unit", WARNING, location or unit.identifier,
              f"top level is not a single has-edge to a {unit.display} node")
    return UnitTree(unit, root)


def _fill_predicates(node: Node, mapping: dict, location: str) -> None:
    """Consume a node's value object: predicate keys plus provenance."""
    for key, value in mapping.items():
        if key == PROVENANCE_KEY:
            node.provenance.extend(_provenance_strings(value))
            continue
        pred_text = canonical_text(key)
        if not pred_text:
            raise FormatError("empty predicate key", path=location or None)
        _add_predicate_value(node, Predicate.from_text(pred_text), value, location)


def _add_predicate_value(node: Node, predicate: Predicate, value, location: str) -> None:
    """Attach one predicate value (string, list, or node map) to ``node``."""
    if value is None:
        node.add(predicate, None)
        return
    if isinstance(value, str):
        literal = canonical_text(value)
        node.add(predicate, literal if literal else None)
        return
    if isinstance(value, (int, float, bool)):
        node.add(predicate, json.dumps(value))
        return
    if isinstance(value, list):
        if not value:
            node.add(predicate, None)
            return
        for element in value:
            _add_predicate_value(node, predicate, element, location)
        return
    if isinstance(value, dict):
        if not value:
            node.add(predicate, None)
            return
        for key, child_value in value.items():
            if key == PROVENANCE_KEY:
                node.provenance.extend(_provenance_strings(child_value))
                continue
            label = canonical_text(key)
            if not label:
                raise FormatError("empty node label", path=location or None)
            child = Node(label)
            node.add(predicate, child)
            if isinstance(child_value, dict):
                _fill_predicates(child, child_value, location)
            elif isinstance(child_value, str) or child_value is None:
                raise AlternationError(
                    f"node {label!r} maps to a leaf value; a predicate map is "
                    f"required at node depth", path=location or None)
            else:
                raise AlternationError(
                    f"node {label!r} maps to {type(child_value).__name__}; "
                    f"a predicate map is required at node depth",
                    path=location or None)
        return
    raise FormatError(f"unsupported value of type {type(value).__name__}",
                      path=location or None)


def write_unit_file(tree: UnitTree) -> str:
    """Serialize a tree back to the nested JSON unit format."""
    return json.dumps(_node_object(tree.root), indent=2, ensure_ascii=False) + "\n"


def _node_object(node: Node) -> dict:
    out: dict = {}
    grouped: dict[str, list[Node | str | None]] = {}
    order: list[str] = []
    for predicate, child in node.edges:
        if predicate.text not in grouped:
            grouped[predicate.text] = []
            order.append(predicate.text)
        grouped[predicate.text].append(child)
    for pred_text in order:
        out[pred_text] = _predicate_object(grouped[pred_text])
    if node.provenance:
        out[PROVENANCE_KEY] = (node.provenance[0] if len(node.provenance) == 1
                               else list(node.provenance))
    return out


def _predicate_object(children: list[Node | str | None]):
    if len(children) == 1:
        child = children[0]
        if child is None:
            return {}
        if isinstance(child, str):
            return child
        return {child.label: _node_object(child)}
    labels = [c.label for c in children if isinstance(c, Node)]
    if len(labels) == len(children) and len(set(labels)) == len(labels):
        return {c.label: _node_object(c) for c in children}
    rendered: list = []
    for child in children:
        if child is None:
            rendered.append({})
        elif isinstance(child, str):
            rendered.append(child)
        else:
            rendered.append({child.label: _node_object(child)})
    return rendered


# ---------------------------------------------------------------------------
# triple line files


def parse_triple_lines(text: str, *, issues: list[ValidationIssue] | None = None,
                       location: str = "") -> list[Triple]:
    """Parse ``(subject||predicate||object)`` lines.

    The canonical delimiter is ``||``; a single ``|`` is accepted leniently
    with a warning.  A line must yield exactly three non-empty fields.
    """
    triples: list[Triple] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise FormatError("triple line must be wrapped in parentheses",
                              path=location or None, line=lineno)
        fields = line[1:-1].split("||")
        if len(fields) != 3 and any("|" in f for f in fields):
            refined: list[str] = []
            for piece in fields:
                refined.extend(piece.split("|"))
            if len(refined) == 3:
                _note(issues, "single-pipe-delimiter", WARNING,
                      f"{location}:{lineno}", f"single | delimiter in {line!r}")
                fields = refined
        if len(fields) != 3:
            raise FormatError(
                f"expected 3 fields after delimiter splitting, got {len(fields)}",
                path=location or None, line=lineno)
        subject, pred, obj = (canonical_text(f) for f in fields)
        if not (subject and pred and obj):
            raise FormatError(f"empty field in triple line {line!r}",
                              path=location or None, line=lineno)
        triples.append(Triple.of(subject, pred, obj))
    return triples


def write_triple_lines(triples: list[Triple]) -> str:
    """One ``(s||p||o)`` line per triple in input order, LF-terminated."""
    return "".join(f"({t.subject}||{t.predicate.text}||{t.object})\n" for t in triples)


# ---------------------------------------------------------------------------
# corpus loading


def _read(path: Path) -> str:
    with open(path, encoding="utf-8-sig") as fh:
        return fh.read()


def _discover_papers(manifest: CorpusManifest, task: str) -> list[str]:
    """Find paper names by globbing the text pattern's {paper} component.

    Only the path up to the {paper} component is required to exist, so a
    paper directory lacking its plaintext file is still discovered and gets
    a proper missing-text error instead of vanishing silently.
    """
    pattern = manifest.layout["text"]
    parts = pattern.split("/")
    paper_idx = next(i for i, p in enumerate(parts) if "{paper}" in p)
    component = parts[paper_idx]
    comp_re = re.compile(
        "^" + re.escape(component.format(task=task, paper="\x00")).replace("\x00", "(.+)") + "$")
    glob_pattern = "/".join(p.format(task=task, paper="*", Unit="*")
                            for p in parts[:paper_idx + 1])
    names = set()
    for hit in Path(manifest.root_path).glob(glob_pattern):
        if paper_idx < len(parts) - 1 and not hit.is_dir():
            continue
        rel = hit.relative_to(manifest.root_path)
        match = comp_re.match(rel.parts[paper_idx])
        if match:
            names.add(match.group(1))
    return sorted(names)


def _glob_unit_files(manifest: CorpusManifest, role: str, task: str,
                     paper: str) -> list[tuple[str, Path]]:
    pattern = manifest.layout[role]
    parts = pattern.split("/")
    unit_idx = next((i for i, p in enumerate(parts) if "{Unit}" in p), None)
    if unit_idx is None:
        return []
    component = parts[unit_idx]
    comp_re = re.compile(
        "^" + re.escape(component.format(task=task, paper=paper, Unit="\x00"))
        .replace("\x00", "(.+)") + "$")
    glob_pattern = "/".join(p.format(task=task, paper=paper, Unit="*") for p in parts)
    out = []
    for hit in sorted(Path(manifest.root_path).glob(glob_pattern)):
        match = comp_re.match(hit.relative_to(manifest.root_path).parts[unit_idx])
        if match:
            out.append((match.group(1), hit))
    return out


def _load_paper(manifest: CorpusManifest, task: str, paper_id: str,
                issues: list[ValidationIssue]) -> PaperAnnotation | None:
    root = Path(manifest.root_path)
    strict = manifest.strict

    text_path = manifest.resolve("text", task=task, paper=paper_id)
    loc = str(text_path.relative_to(root))
    if not text_path.is_file():
        if strict:
            raise FormatError("missing plaintext file", path=loc)
        issues.append(ValidationIssue("missing-text", ERROR, loc,
                                      "plaintext absent; paper skipped"))
        return None

    sentences: list[Sentence | None] = []
    token_count = 0
    for i, line in enumerate(_read(text_path).splitlines(), 1):
        tokens = tuple(line.split())
        if tokens:
            sentences.append(Sentence(paper_id, i, tokens))
            token_count += len(tokens)
        else:
            sentences.append(None)

    paper = PaperAnnotation(
        paper_id=paper_id,
        task=task,
        total_sentence_count=manifest.sentence_totals.get(paper_id, len(sentences)),
        total_token_count=manifest.token_totals.get(paper_id, token_count),
        sentences=sentences,
    )

    sent_path = manifest.resolve("sentences", task=task, paper=paper_id)
    loc = str(sent_path.relative_to(root)) if sent_path.is_relative_to(root) else str(sent_path)
    if sent_path.is_file():
        try:
            paper.contribution_sentence_indices = parse_sentence_indices(
                _read(sent_path), issues=issues, location=loc)
        except FormatError as exc:
            if strict:
                raise
            issues.append(ValidationIssue("format-error", ERROR, loc, str(exc)))
    else:
        issues.append(ValidationIssue("missing-sentences", WARNING, loc,
                                      "sentence-index file absent"))

    phrase_path = manifest.resolve("phrases", task=task, paper=paper_id)
    loc = str(phrase_path.relative_to(root)) if phrase_path.is_relative_to(root) else str(phrase_path)
    if phrase_path.is_file():
        try:
            paper.phrases = parse_phrase_file(
                _read(phrase_path), sentences, strict=strict,
                offset_unit=manifest.offset_unit, issues=issues, location=loc)
        except FormatError as exc:
            if strict:
                raise
            issues.append(ValidationIssue("format-error", ERROR, loc, str(exc)))
    else:
        issues.append(ValidationIssue("missing-phrases", WARNING, loc,
                                      "phrase file absent"))

    units: dict[UnitLabel, UnitTree] = {}
    unit_files = _glob_unit_files(manifest, "units", task, paper_id)
    for name, path in unit_files:
        loc = str(path.relative_to(root))
        try:
            unit = normalize_unit_label(name)
        except UnknownUnitLabel as exc:
            issues.append(ValidationIssue("unknown-unit-label", WARNING, loc, str(exc)))
            continue
        try:
            units[unit] = parse_unit_file(_read(path), unit, issues=issues, location=loc)
        except FormatError as exc:
            if strict:
                raise
            issues.append(ValidationIssue("format-error", ERROR, loc, str(exc)))
    if unit_files:
        paper.units = units
    else:
        issues.append(ValidationIssue(
            "missing-units", WARNING, f"{task}/{paper_id}",
            "no information-unit files found"))

    triples: dict[UnitLabel, list[Triple]] = {}
    triple_files = _glob_unit_files(manifest, "triples", task, paper_id)
    for name, path in triple_files:
        loc = str(path.relative_to(root))
        try:
            unit = normalize_unit_label(name)
        except UnknownUnitLabel as exc:
            issues.append(ValidationIssue("unknown-unit-label", WARNING, loc, str(exc)))
            continue
        try:
            triples[unit] = parse_triple_lines(_read(path), issues=issues, location=loc)
        except FormatError as exc:
            if strict:
                raise
            issues.append(ValidationIssue("format-error", ERROR, loc, str(exc)))
    if triple_files:
        paper.triples = triples
    elif paper.units:
        issues.append(ValidationIssue(
            "missing-triples", WARNING, f"{task}/{paper_id}",
            "no triples files; derived by flattening the unit trees"))

    _reconcile_units_and_triples(manifest, task, paper, issues)
    return paper


def _reconcile_units_and_triples(manifest: CorpusManifest, task: str,
                                 paper: PaperAnnotation,
                                 issues: list[ValidationIssue]) -> None:
    """Keep the units and triples maps covering the same unit set.

    Units without a shipped triples file get flatten() output; triples
    without a tree get nest() output where the triples form a tree.  When
    both exist, the flattened tree must be set-equal to the file; any
    difference is itemized as a warning, never silently dropped.
    """
    units = paper.units or {}
    triples = paper.triples if paper.triples is not None else {}
    for unit, tree in units.items():
        flat = flatten(tree)
        issues.extend(
            ValidationIssue(w.code, w.severity,
                            f"{task}/{paper.paper_id}/{w.location}", w.message)
            for w in flat.warnings)
        if unit not in triples:
            triples[unit] = flat.triples
        else:
            file_keys = {t.key() for t in triples[unit]}
            tree_keys = {t.key() for t in flat.triples}
            if file_keys != tree_keys:
                missing = sorted(tree_keys - file_keys)
                extra = sorted(file_keys - tree_keys)
                issues.append(ValidationIssue(
                    "triples-file-mismatch", WARNING,
                    f"{task}/{paper.paper_id}/{unit.identifier}",
                    f"tree-only: {missing}; file-only: {extra}"))
    for unit in list(triples):
        if unit not in units:
            try:
                units[unit] = nest(triples[unit], unit)
            except NotATree as exc:
                issues.append(ValidationIssue(
                    "nest-failed", WARNING,
                    f"{task}/{paper.paper_id}/{unit.identifier}", str(exc)))
    if paper.units is not None or units:
        paper.units = units
    if paper.triples is not None or triples:
        paper.triples = triples


def load_corpus(manifest: CorpusManifest) -> tuple[Corpus, list[ValidationIssue]]:
    """Assemble a Corpus from disk, collecting recoverable issues.

    Papers are discovered per task by resolving the manifest's text
    pattern.  Missing optional files yield warnings; a missing plaintext
    file yields an error and the paper is skipped (non-strict mode).
    Loading is deterministic: tasks and papers are visited in sorted order
    unless the manifest pins task order.
    """
    root = Path(manifest.root_path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root does not exist: {root}")
    issues: list[ValidationIssue] = []
    if manifest.task_names is not None:
        tasks = list(manifest.task_names)
    else:
        tasks = sorted(d.name for d in root.iterdir() if d.is_dir())
    corpus = Corpus()
    seen: set[str] = set()
    for task in tasks:
        papers: list[PaperAnnotation] = []
        for paper_id in _discover_papers(manifest, task):
            if paper_id in seen:
                issues.append(ValidationIssue(
                    "duplicate-paper-id", ERROR, f"{task}/{paper_id}",
                    "paper id already seen under another task; skipped"))
                continue
            paper = _load_paper(manifest, task, paper_id, issues)
            if paper is not None:
                papers.append(paper)
                seen.add(paper_id)
        if papers:
            corpus.tasks[task] = papers
    if not seen:
        issues.append(ValidationIssue("empty-corpus", WARNING, str(root),
                                      "no papers found"))
    return corpus, issues
