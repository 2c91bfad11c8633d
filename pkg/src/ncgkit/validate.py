"""Machine checks of the NCG scheme rules over loaded annotations.

All findings are data (ValidationIssue), never raised: a report ``passes``
when it contains no Error-severity issues.  Checks are deterministic and
per-paper, so corpus validation parallelizes trivially.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .codec import flatten
from .errors import UnknownUnitLabel
from .issues import ERROR, WARNING, ValidationIssue
from .model import (
    Corpus,
    PaperAnnotation,
    PredicateKind,
    UnitLabel,
    UnitTree,
    canonical_text,
    normalize_unit_label,
)

#: Units that may appear as internal nodes only inside Experiments or Tasks.
SUB_UNIT_LABELS = {
    UnitLabel.EXPERIMENTAL_SETUP,
    UnitLabel.HYPERPARAMETERS,
    UnitLabel.RESULTS,
    UnitLabel.TASKS,
}

ENCAPSULATING_UNITS = {UnitLabel.EXPERIMENTS, UnitLabel.TASKS}

PROVENANCE_OFF = "Off"
PROVENANCE_WARN = "Warn"
PROVENANCE_ERROR = "Error"


@dataclass
class ValidationPolicy:
    """Which checks run and how hard they bite.

    Defaults follow the scheme's own reading: Results may be satisfied by a
    node nested inside Experiments or Tasks, provenance mismatches warn
    rather than fail, and a phrase longer than ``max_phrase_tokens`` tokens
    is only an informational warning (0 disables).
    """

    require_mandatory_units: bool = True
    allow_results_via_encapsulation: bool = True
    provenance_check: str = PROVENANCE_WARN
    filler_whitelist_check: bool = True
    duplicate_triple_check: bool = True
    max_phrase_tokens: int = 10

    def __post_init__(self) -> None:
        if self.provenance_check not in (PROVENANCE_OFF, PROVENANCE_WARN, PROVENANCE_ERROR):
            raise ValueError(f"bad provenance_check: {self.provenance_check!r}")


@dataclass
class ValidationReport:
    paper_id: str
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(i.severity == ERROR for i in self.issues)

    def as_lines(self) -> str:
        return "".join(f"{self.paper_id}\t{i.code}\t{i.severity}\t{i.message}\n"
                       for i in self.issues)


def _normalize_or_none(label: str) -> UnitLabel | None:
    try:
        return normalize_unit_label(label)
    except UnknownUnitLabel:
        return None


def _tree_contains_node(tree: UnitTree, unit: UnitLabel) -> bool:
    """True if any node below the unit node carries the unit's name."""
    top = tree.unit_node
    for node in tree.nodes():
        if node is tree.root or node is top:
            continue
        if _normalize_or_none(node.label) is unit:
            return True
    return False


def _sentence_pool(paper: PaperAnnotation) -> list[str]:
    """Canonical texts a surface form may be grounded in."""
    pool = [canonical_text(t) for t in paper.contribution_texts()]
    if paper.units:
        for tree in paper.units.values():
            for node in tree.nodes():
                pool.extend(canonical_text(p) for p in node.provenance)
    return pool


def _in_pool(surface: str, pool: list[str]) -> bool:
    needle = canonical_text(surface)
    return any(needle in hay for hay in pool)


def validate_paper(paper: PaperAnnotation,
                   policy: ValidationPolicy | None = None) -> ValidationReport:
    """Run every scheme check over one paper.

    Checks: mandatory units (ResearchProblem; exactly one of Approach or
    Model; Results, top-level or nested in an encapsulating unit),
    encapsulation of sub-units, the has/name/hasAcronym filler whitelist,
    provenance grounding of surface forms, duplicate triples, sentence
    index bounds, and the optional phrase-length lint.  The two
    text-grounding checks need source text and are skipped when the paper
    carries neither contribution sentences nor provenance strings.
    """
    policy = policy or ValidationPolicy()
    report = ValidationReport(paper.paper_id)
    issues = report.issues
    units = paper.units or {}

    if policy.require_mandatory_units:
        _check_mandatory(paper, units, policy, issues)
    _check_encapsulation(units, issues)
    pool = _sentence_pool(paper)
    for unit in sorted(units, key=lambda u: u.identifier):
        flat = flatten(units[unit])
        if policy.duplicate_triple_check:
            for warning in flat.warnings:
                if warning.code == "duplicate-triple":
                    issues.append(ValidationIssue(
                        "duplicate-triple", ERROR, warning.location, warning.message))
        if pool:
            _check_surfaces(unit, flat.triples, pool, policy, issues)
        _check_filler_placement(unit, units[unit], issues)
    _check_sentence_bounds(paper, issues)
    _check_phrase_length(paper, policy, issues)
    return report


def _check_mandatory(paper: PaperAnnotation, units: dict[UnitLabel, UnitTree],
                     policy: ValidationPolicy, issues: list[ValidationIssue]) -> None:
    where = paper.paper_id
    if UnitLabel.RESEARCH_PROBLEM not in units:
        issues.append(ValidationIssue(
            "mandatory-unit-missing", ERROR, where, "no ResearchProblem unit"))

    has_approach = UnitLabel.APPROACH in units
    has_model = UnitLabel.MODEL in units
    if not has_approach and not has_model:
        issues.append(ValidationIssue(
            "mandatory-unit-missing", ERROR, where, "neither Approach nor Model"))
    elif has_approach and has_model:
        issues.append(ValidationIssue(
            "approach-model-both", WARNING, where,
            "both Approach and Model annotated; the scheme expects one"))

    results_ok = UnitLabel.RESULTS in units
    if not results_ok and policy.allow_results_via_encapsulation:
        results_ok = any(
            _tree_contains_node(units[enc], UnitLabel.RESULTS)
            for enc in ENCAPSULATING_UNITS if enc in units)
    if not results_ok:
        issues.append(ValidationIssue(
            "mandatory-unit-missing", ERROR, where,
            "no Results unit, top-level or encapsulated"))


def _check_encapsulation(units: dict[UnitLabel, UnitTree],
                         issues: list[ValidationIssue]) -> None:
    for unit in sorted(units, key=lambda u: u.identifier):
        if unit in ENCAPSULATING_UNITS:
            continue
        tree = units[unit]
        top = tree.unit_node
        for node in tree.nodes():
            if node is tree.root or node is top:
                continue
            nested = _normalize_or_none(node.label)
            if nested in SUB_UNIT_LABELS:
                issues.append(ValidationIssue(
                    "encapsulation-violation", ERROR,
                    f"{unit.identifier}/{node.label}",
                    f"{nested.identifier} node may only appear inside "
                    f"Experiments or Tasks"))


def _check_surfaces(unit: UnitLabel, triples, pool: list[str],
                    policy: ValidationPolicy, issues: list[ValidationIssue]) -> None:
    """Filler whitelist for predicates, provenance grounding for all parts."""
    prov_severity = (ERROR if policy.provenance_check == PROVENANCE_ERROR else WARNING)
    for triple in triples:
        if (triple.predicate.kind is PredicateKind.TEXTUAL
                and not _in_pool(triple.predicate.text, pool)):
            if policy.filler_whitelist_check:
                issues.append(ValidationIssue(
                    "filler-whitelist", ERROR, f"{unit.identifier}/{triple.subject}",
                    f"predicate {triple.predicate.text!r} not found in any "
                    f"annotated sentence and not a filler"))
            elif policy.provenance_check != PROVENANCE_OFF:
                issues.append(ValidationIssue(
                    "provenance-missing", prov_severity,
                    f"{unit.identifier}/{triple.subject}",
                    f"predicate {triple.predicate.text!r} not found in any "
                    f"source sentence"))
        if policy.provenance_check == PROVENANCE_OFF:
            continue
        for role, surface in (("subject", triple.subject), ("object", triple.object)):
            if surface == "Contribution" or _normalize_or_none(surface) is not None:
                continue
            if not _in_pool(surface, pool):
                issues.append(ValidationIssue(
                    "provenance-missing", prov_severity,
                    f"{unit.identifier}/{triple.subject}",
                    f"{role} {surface!r} not found in any source sentence"))


def _check_filler_placement(unit: UnitLabel, tree: UnitTree,
                            issues: list[ValidationIssue]) -> None:
    """name/hasAcronym are meant to name the Approach or Model node."""
    for node in tree.nodes():
        for predicate, _child in node.edges:
            if predicate.kind in (PredicateKind.FILLER_NAME,
                                  PredicateKind.FILLER_HAS_ACRONYM):
                subject_unit = _normalize_or_none(node.label)
                if subject_unit not in (UnitLabel.APPROACH, UnitLabel.MODEL):
                    issues.append(ValidationIssue(
                        "filler-placement", WARNING,
                        f"{unit.identifier}/{node.label}",
                        f"{predicate.text!r} used on a node other than "
                        f"Approach/Model"))


def _check_sentence_bounds(paper: PaperAnnotation,
                           issues: list[ValidationIssue]) -> None:
    if not paper.contribution_sentence_indices or paper.total_sentence_count is None:
        return
    for index in sorted(paper.contribution_sentence_indices):
        if not 1 <= index <= paper.total_sentence_count:
            issues.append(ValidationIssue(
                "sentence-out-of-bounds", ERROR, paper.paper_id,
                f"sentence index {index} outside 1..{paper.total_sentence_count}"))


def _check_phrase_length(paper: PaperAnnotation, policy: ValidationPolicy,
                         issues: list[ValidationIssue]) -> None:
    if policy.max_phrase_tokens <= 0 or not paper.phrases:
        return
    for span in paper.phrases:
        if span.token_count() > policy.max_phrase_tokens:
            issues.append(ValidationIssue(
                "phrase-too-long", WARNING,
                f"{paper.paper_id}:{span.sentence_index}",
                f"phrase of {span.token_count()} tokens exceeds "
                f"{policy.max_phrase_tokens}: {span.text!r}"))


def validate_corpus(corpus: Corpus,
                    policy: ValidationPolicy | None = None,
                    jobs: int = 1) -> list[ValidationReport]:
    """One report per paper, in corpus order."""
    policy = policy or ValidationPolicy()
    papers = list(corpus.papers())
    if jobs > 1 and len(papers) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda p: validate_paper(p, policy), papers))
    return [validate_paper(paper, policy) for paper in papers]


def summarize_reports(reports: list[ValidationReport]) -> Counter:
    """Issue counts by code over a set of reports."""
    counts: Counter = Counter()
    for report in reports:
        for issue in report.issues:
            counts[issue.code] += 1
    return counts
