"""Command-line entry point.

Subcommands cover the whole pipeline: validate, stats, unit-stats, score,
flatten, nest, build-kg, traverse, compare.  Corpus-reading commands take
``--manifest`` (falling back to the NCG_MANIFEST environment variable); a
directory passed as manifest means "default layout rooted here".  Outputs
are byte-identical across runs; version headers appear only with
``--verbose``.  Exit codes: 0 success, 1 validation errors or ``--check``
mismatch, 2 usage or format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .compare import compare, render, table_to_dict
from .corpus_io import (
    CorpusManifest,
    load_corpus,
    parse_triple_lines,
    parse_unit_file,
    write_triple_lines,
    write_unit_file,
)
from .codec import flatten, nest
from .errors import NcgError
from .issues import ERROR
from .kg import PER_PAPER, SURFACE_MERGE, build_graph, export_ntriples, traverse
from .metrics import (
    GRANULARITIES,
    MatchConfig,
    corpus_stats,
    score,
    unit_stats,
)
from .model import UnitLabel, normalize_unit_label
from .validate import ValidationPolicy, summarize_reports, validate_corpus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncg", description="NCG annotation toolkit")
    parser.add_argument("--verbose", action="store_true",
                        help="include version headers in output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", default=os.environ.get("NCG_MANIFEST"),
                       help="manifest file or corpus root directory "
                            "(default: $NCG_MANIFEST)")
        p.add_argument("--strict", action="store_true",
                       help="fail on recoverable format deviations")
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("validate", help="check the scheme rules over a corpus")
    add_corpus_args(p)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--provenance-check", choices=["Off", "Warn", "Error"],
                   default="Warn")
    p.add_argument("--max-phrase-tokens", type=int, default=10)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus characteristics per task")
    add_corpus_args(p)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--check", metavar="EXPECTED",
                   help="compare against an expected-values JSON file")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("unit-stats", help="triples and papers per unit")
    add_corpus_args(p)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--check", metavar="EXPECTED")
    p.set_defaults(func=cmd_unit_stats)

    p = sub.add_parser("score", help="agreement between two corpora")
    p.add_argument("--gold", required=True, help="gold manifest or root")
    p.add_argument("--pred", required=True, help="predicted manifest or root")
    p.add_argument("--granularity",
                   choices=list(GRANULARITIES), default=None,
                   help="score one granularity (default: all four)")
    p.add_argument("--phrase-match",
                   choices=["exact-text", "exact-span", "partial-overlap"],
                   default="exact-text")
    p.add_argument("--triple-scope", choices=["per-unit", "per-paper"],
                   default="per-unit")
    p.add_argument("--fold", choices=["none", "casefold"], default="none")
    p.add_argument("--macro-mode", choices=["harmonic-pr", "mean-f1"],
                   default="harmonic-pr")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("flatten", help="unit tree file to triple lines")
    p.add_argument("path", help="unit JSON file or paper directory")
    p.add_argument("--unit", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("nest", help="triple lines to a unit tree file")
    p.add_argument("path", help="triples file or paper directory")
    p.add_argument("--unit", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_nest)

    p = sub.add_parser("build-kg", help="export the corpus as N-Triples")
    add_corpus_args(p)
    p.add_argument("--merge", choices=[PER_PAPER, SURFACE_MERGE],
                   default=PER_PAPER)
    p.add_argument("--format", choices=["nt"], default="nt")
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("traverse", help="walk a paper's graph branch")
    add_corpus_args(p)
    p.add_argument("--paper", required=True)
    p.add_argument("--start", required=True, help="label of the start node")
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=cmd_traverse)

    p = sub.add_parser("compare", help="tabulated comparison across papers")
    add_corpus_args(p)
    p.add_argument("--unit", required=True)
    p.add_argument("--papers", required=True,
                   help="comma-separated paper ids (column order)")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--format", choices=["md", "csv", "json"], default="md")
    p.add_argument("--title", action="append", default=[],
                   metavar="PAPER=TITLE", help="column title override")
    p.set_defaults(func=cmd_compare)

    return parser


def _emit(args, text: str) -> None:
    if args.verbose:
        text = f"# ncgkit {__version__}\n" + text
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _manifest_from(path_or_none: str | None) -> CorpusManifest:
    if not path_or_none:
        raise NcgError("no manifest given: pass --manifest or set NCG_MANIFEST")
    path = Path(path_or_none)
    if path.is_dir():
        return CorpusManifest(root_path=path)
    return CorpusManifest.from_ini(path)


def _load(args) -> tuple:
    manifest = _manifest_from(args.manifest)
    if getattr(args, "strict", False):
        manifest.strict = True
    return load_corpus(manifest)


def _fmt_ratio(value: float) -> str:
    return f"{value:.4f}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    corpus, load_issues = _load(args)
    policy = ValidationPolicy(provenance_check=args.provenance_check,
                              max_phrase_tokens=args.max_phrase_tokens)
    reports = validate_corpus(corpus, policy, jobs=max(1, args.jobs))
    if args.format == "json":
        payload = {
            "load_issues": [vars(i) for i in load_issues],
            "reports": [
                {"paper_id": r.paper_id, "passed": r.passed,
                 "issues": [vars(i) for i in r.issues]}
                for r in reports
            ],
        }
        _emit(args, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        lines = [issue.as_line() + "\n" for issue in load_issues]
        lines += [report.as_lines() for report in reports]
        _emit(args, "".join(lines))
    summary = summarize_reports(reports)
    for code, count in sorted(summary.items()):
        print(f"{code}: {count}", file=sys.stderr)
    failed = any(not r.passed for r in reports)
    failed = failed or any(i.severity == ERROR for i in load_issues)
    return 1 if failed else 0


_STATS_COLUMNS = ("total_ius", "ann_sentences", "avg_ann_sentences",
                  "ann_phrases", "avg_toks_per_phrase", "avg_ann_phrase_toks",
                  "ann_triples")


def _stats_row_dict(row) -> dict:
    return {name: getattr(row, name) for name in _STATS_COLUMNS}


def cmd_stats(args) -> int:
    corpus, _ = _load(args)
    stats = corpus_stats(corpus)
    if args.format == "json":
        payload = {"per_task": {t: _stats_row_dict(r) for t, r in stats.per_task.items()},
                   "overall": _stats_row_dict(stats.overall)}
        _emit(args, json.dumps(payload, indent=2) + "\n")
    else:
        lines = ["task\t" + "\t".join(_STATS_COLUMNS) + "\n"]
        for task, row in list(stats.per_task.items()) + [("Overall", stats.overall)]:
            cells = [task]
            for name in _STATS_COLUMNS:
                value = getattr(row, name)
                cells.append(str(value) if isinstance(value, int) else _fmt_ratio(value))
            lines.append("\t".join(cells) + "\n")
        _emit(args, "".join(lines))
    if args.check:
        return _check_stats(stats, json.loads(Path(args.check).read_text(encoding="utf-8")))
    return 0


def _check_values(actual: dict, expected: dict, tolerance: float,
                  context: str, mismatches: list[str]) -> None:
    for key, want in expected.items():
        got = actual.get(key)
        if got is None:
            mismatches.append(f"{context}.{key}: missing in computed output")
        elif isinstance(want, float) or isinstance(got, float):
            if abs(float(got) - float(want)) > tolerance:
                mismatches.append(f"{context}.{key}: got {got}, want {want} "
                                  f"(tolerance {tolerance})")
        elif int(got) != int(want):
            mismatches.append(f"{context}.{key}: got {got}, want {want}")


def _check_stats(stats, expected: dict) -> int:
    tolerance = float(expected.get("ratio_tolerance", 0.005))
    mismatches: list[str] = []
    for task, fields in expected.get("per_task", {}).items():
        row = stats.per_task.get(task)
        if row is None:
            mismatches.append(f"per_task.{task}: task missing")
            continue
        _check_values(_stats_row_dict(row), fields, tolerance, task, mismatches)
    if "overall" in expected:
        _check_values(_stats_row_dict(stats.overall), expected["overall"],
                      tolerance, "overall", mismatches)
    for line in mismatches:
        print(f"CHECK FAIL {line}", file=sys.stderr)
    return 1 if mismatches else 0


def cmd_unit_stats(args) -> int:
    corpus, _ = _load(args)
    stats = unit_stats(corpus)
    rows = stats.sorted_rows()
    if args.format == "json":
        payload = {unit.identifier: {"triples": r.n_triples, "papers": r.n_papers,
                                     "ratio": r.ratio}
                   for unit, r in rows}
        _emit(args, json.dumps(payload, indent=2) + "\n")
    else:
        lines = ["unit\ttriples\tpapers\tratio\n"]
        lines += [f"{unit.identifier}\t{r.n_triples}\t{r.n_papers}\t{_fmt_ratio(r.ratio)}\n"
                  for unit, r in rows]
        _emit(args, "".join(lines))
    if args.check:
        expected = json.loads(Path(args.check).read_text(encoding="utf-8"))
        tolerance = float(expected.get("ratio_tolerance", 0.01))
        mismatches: list[str] = []
        by_name = {unit.identifier: r for unit, r in rows}
        for name, fields in expected.get("units", {}).items():
            row = by_name.get(name)
            if row is None:
                mismatches.append(f"units.{name}: unknown unit")
                continue
            actual = {"triples": row.n_triples, "papers": row.n_papers,
                      "ratio": row.ratio}
            _check_values(actual, fields, tolerance, name, mismatches)
        for line in mismatches:
            print(f"CHECK FAIL {line}", file=sys.stderr)
        return 1 if mismatches else 0
    return 0


def cmd_score(args) -> int:
    gold, _ = load_corpus(_manifest_from(args.gold))
    pred, _ = load_corpus(_manifest_from(args.pred))
    config = MatchConfig(
        phrase_match=args.phrase_match,
        triple_scope=args.triple_scope,
        text_fold=None if args.fold == "none" else args.fold,
        macro_mode=args.macro_mode)
    granularities = [args.granularity] if args.granularity else list(GRANULARITIES)
    reports = {g: score(gold, pred, g, config) for g in granularities}

    tasks: list[str] = []
    for report in reports.values():
        for task in report.per_task:
            if task not in tasks:
                tasks.append(task)
    header = ["task"]
    for g in granularities:
        header += [f"{g}_P", f"{g}_R", f"{g}_F1"]
    lines = ["\t".join(header) + "\n"]
    for row_name in tasks + ["micro", "macro"]:
        cells = [row_name]
        for g in granularities:
            report = reports[g]
            if row_name == "micro":
                value = report.micro
            elif row_name == "macro":
                value = report.macro
            else:
                value = report.per_task.get(row_name)
            if value is None:
                cells += ["-", "-", "-"]
            else:
                cells += [f"{value.precision:.2f}", f"{value.recall:.2f}",
                          f"{value.f1:.2f}"]
        lines.append("\t".join(cells) + "\n")
    _emit(args, "".join(lines))
    return 0


def _resolve_unit_path(path: Path, unit: UnitLabel, role: str) -> Path:
    if path.is_dir():
        sub = {"units": Path("info-units") / f"{unit.identifier}.json",
               "triples": Path("triples") / f"{unit.identifier}.txt"}[role]
        candidate = path / sub
        if candidate.is_file():
            return candidate
        flat = path / sub.name
        if flat.is_file():
            return flat
        raise NcgError(f"no {role} file for {unit.identifier} under {path}")
    return path


def cmd_flatten(args) -> int:
    unit = normalize_unit_label(args.unit)
    path = _resolve_unit_path(Path(args.path), unit, "units")
    tree = parse_unit_file(path.read_text(encoding="utf-8-sig"), unit,
                           location=str(path))
    _emit(args, write_triple_lines(flatten(tree).triples))
    return 0


def cmd_nest(args) -> int:
    unit = normalize_unit_label(args.unit)
    path = _resolve_unit_path(Path(args.path), unit, "triples")
    triples = parse_triple_lines(path.read_text(encoding="utf-8-sig"),
                                 location=str(path))
    tree = nest(triples, unit)
    _emit(args, write_unit_file(tree))
    return 0


def cmd_build_kg(args) -> int:
    corpus, _ = _load(args)
    graph = build_graph(corpus, merge=args.merge)
    _emit(args, export_ntriples(graph))
    return 0


def cmd_traverse(args) -> int:
    corpus, _ = _load(args)
    graph = build_graph(corpus)
    results = traverse(graph, args.paper, args.start, args.depth)
    lines = []
    for path, node in results:
        lines.append(("/".join(path) if path else ".") + "\t" + node.label + "\n")
    _emit(args, "".join(lines))
    return 0


def cmd_compare(args) -> int:
    corpus, _ = _load(args)
    unit = normalize_unit_label(args.unit)
    paper_ids = [p.strip() for p in args.papers.split(",") if p.strip()]
    titles = {}
    for entry in args.title:
        paper_id, _, title = entry.partition("=")
        titles[paper_id] = title
    table = compare(corpus, unit, paper_ids, depth=args.depth, titles=titles)
    if args.format == "json":
        _emit(args, json.dumps(table_to_dict(table), indent=2,
                               ensure_ascii=False) + "\n")
    else:
        _emit(args, render(table, args.format))
    return 0


# ---------------------------------------------------------------------------


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NcgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
