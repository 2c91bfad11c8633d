import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncgkit import (
    AlternationError,
    CorpusManifest,
    FormatError,
    PredicateKind,
    Sentence,
    SpanOutOfRange,
    SpanTextMismatch,
    Triple,
    UnitLabel,
    flatten,
    load_corpus,
    parse_phrase_file,
    parse_sentence_indices,
    parse_triple_lines,
    parse_unit_file,
    write_triple_lines,
    write_unit_file,
)
from ncgkit.issues import ERROR, WARNING


class TestSentenceIndices:
    def test_basic(self):
        assert parse_sentence_indices("3\n7\n12\n") == {3, 7, 12}

    def test_empty_file(self):
        assert parse_sentence_indices("") == set()

    def test_duplicates_collapse_with_warning(self):
        issues = []
        assert parse_sentence_indices("7\n7\n", issues=issues) == {7}
        assert [i.code for i in issues] == ["duplicate-sentence-index"]

    def test_non_integer_line(self):
        with pytest.raises(FormatError):
            parse_sentence_indices("3\nseven\n")

    def test_zero_rejected(self):
        with pytest.raises(FormatError):
            parse_sentence_indices("0\n")

    def test_blank_lines_allowed(self):
        assert parse_sentence_indices("3\n\n7\n") == {3, 7}


def sentence_159() -> Sentence:
    tokens = ("As", "expected", "adding", "features", "computed", "by",
              "neural", "networks", "consistently", "improves", "the",
              "performance", "over", "the", "baseline", "performance")
    return Sentence("cho2014", 159, tokens)


class TestPhraseFile:
    def test_valid_span(self):
        spans = parse_phrase_file("159\t2\t4\tadding features", [sentence_159()])
        assert len(spans) == 1
        span = spans[0]
        assert (span.sentence_index, span.start_tok, span.end_tok) == (159, 2, 4)
        assert span.text == "adding features"

    def test_out_of_range_strict(self):
        with pytest.raises(SpanOutOfRange):
            parse_phrase_file("159\t14\t20\tx y", [sentence_159()], strict=True)

    def test_out_of_range_lenient_drops_span(self):
        issues = []
        spans = parse_phrase_file("159\t14\t20\tx y", [sentence_159()],
                                  issues=issues)
        assert spans == []
        assert [(i.code, i.severity) for i in issues] == [("span-out-of-range", ERROR)]

    def test_unknown_sentence_index(self):
        with pytest.raises(SpanOutOfRange):
            parse_phrase_file("7\t0\t1\tAs", [sentence_159()], strict=True)

    def test_text_mismatch_strict(self):
        with pytest.raises(SpanTextMismatch):
            parse_phrase_file("159\t2\t4\tadding feature", [sentence_159()],
                              strict=True)

    def test_text_mismatch_lenient_repairs(self):
        issues = []
        spans = parse_phrase_file("159\t2\t4\tadding feature", [sentence_159()],
                                  issues=issues)
        assert spans[0].text == "adding features"
        assert [(i.code, i.severity) for i in issues] == [("span-text-mismatch", WARNING)]

    def test_column_count_enforced(self):
        with pytest.raises(FormatError):
            parse_phrase_file("159\t2\t4", [sentence_159()])

    def test_char_offsets(self):
        sent = sentence_159()
        start = len("As expected ")
        end = start + len("adding features")
        spans = parse_phrase_file(f"159\t{start}\t{end}\tadding features",
                                  [sent], offset_unit="char")
        assert (spans[0].start_tok, spans[0].end_tok) == (2, 4)

    def test_char_offsets_must_align(self):
        with pytest.raises(SpanOutOfRange):
            parse_phrase_file("159\t1\t5\ts expe", [sentence_159()],
                              offset_unit="char", strict=True)

    @settings(max_examples=100)
    @given(st.integers(0, 15), st.integers(1, 16))
    def test_accepted_spans_satisfy_invariants(self, start, end):
        sent = sentence_159()
        text = " ".join(sent.tokens[start:end])
        line = f"159\t{start}\t{end}\t{text}"
        issues = []
        spans = parse_phrase_file(line, [sent], issues=issues)
        for span in spans:
            assert 0 <= span.start_tok < span.end_tok <= len(sent.tokens)
            assert span.text == " ".join(sent.tokens[span.start_tok:span.end_tok])


class TestUnitFile:
    def test_hoisted_results_unit(self, results_unit_text):
        tree = parse_unit_file(results_unit_text, UnitLabel.RESULTS)
        labels = sorted(n.label for n in tree.nodes())
        assert labels == ["ACE datasets", "Contribution", "F1 measure",
                          "GENIA dataset", "Results"]
        results = tree.unit_node
        assert results.provenance == [
            "Our neural transition -based model achieves the best results in "
            "ACE datasets and comparable results in GENIA dataset in terms of "
            "F1 measure ."]
        flat = flatten(tree)
        assert len(flat.triples) == 6

    def test_minimal_unit(self):
        tree = parse_unit_file('{"has": {"Results": {"from sentence": "s"}}}',
                               UnitLabel.RESULTS)
        assert tree.unit_node.label == "Results"
        assert tree.unit_node.edges == []
        assert tree.unit_node.provenance == ["s"]

    def test_stack_lstm_fragment_dangles(self, data_dir):
        text = (data_dir / "stack_lstm_fragment.json").read_text(encoding="utf-8")
        issues = []
        tree = parse_unit_file(text, UnitLabel.MODEL, issues=issues)
        stack = tree.root.edges[0][1]
        assert stack.label == "Stack - LSTM"
        assert stack.provenance  # provenance from inside the incorporate value
        dangling = [p.text for p, c in stack.edges if c is None]
        assert dangling == ["to represent", "has"]
        flat = flatten(tree)
        assert [w.code for w in flat.warnings] == ["dangling-predicate"] * 2
        # the fragment's top level is employ -> Stack - LSTM, not has -> Model
        assert "root-not-unit" in {i.code for i in issues}

    def test_list_values_with_embedded_provenance(self, data_dir):
        text = (data_dir / "conll_pilot_stage.json").read_text(encoding="utf-8")
        tree = parse_unit_file(text, UnitLabel.RESULTS)
        conll = None
        for node in tree.nodes():
            if node.label == "CoNLL":
                conll = node
        assert conll is not None
        assert len(conll.edges) == 2  # two list literals
        assert conll.provenance and conll.provenance[0].startswith("First,")

    def test_alternation_error(self):
        with pytest.raises(AlternationError):
            parse_unit_file('{"has": {"Results": {"in": {"ACE": "oops"}}}}',
                            UnitLabel.RESULTS)

    def test_malformed_json(self):
        with pytest.raises(FormatError):
            parse_unit_file('{"has": ', UnitLabel.RESULTS)

    def test_non_object_top_level(self):
        with pytest.raises(FormatError):
            parse_unit_file('["x"]', UnitLabel.RESULTS)

    def test_write_round_trips(self, results_unit_text, data_dir):
        for text in (results_unit_text,
                     (data_dir / "conll_adjudicated_stage.json").read_text(
                         encoding="utf-8")):
            tree = parse_unit_file(text, UnitLabel.RESULTS)
            written = write_unit_file(tree)
            reparsed = parse_unit_file(written, UnitLabel.RESULTS)
            assert write_unit_file(reparsed) == written


class TestTripleLines:
    def test_double_pipe(self):
        triples = parse_triple_lines("(Results||on||QASent dataset)")
        assert triples[0].key() == ("Results", "on", "QASent dataset")
        assert triples[0].predicate.kind is PredicateKind.TEXTUAL

    def test_filler_has(self):
        triples = parse_triple_lines("(Contribution||has||Results)")
        assert triples[0].predicate.kind is PredicateKind.FILLER_HAS

    def test_single_pipe_lenient_with_warning(self):
        issues = []
        triples = parse_triple_lines("(Contribution|has||Results)", issues=issues)
        assert triples[0].key() == ("Contribution", "has", "Results")
        assert [i.code for i in issues] == ["single-pipe-delimiter"]

    def test_field_count_violation(self):
        with pytest.raises(FormatError):
            parse_triple_lines("(a||b)")

    def test_results_file_parses_thirteen(self, results_triples_text):
        issues = []
        triples = parse_triple_lines(results_triples_text, issues=issues)
        assert len(triples) == 13
        # the file mixes | and || on four lines
        assert len([i for i in issues if i.code == "single-pipe-delimiter"]) == 4

    def test_write_empty(self):
        assert write_triple_lines([]) == ""

    def test_write_single(self):
        assert write_triple_lines([Triple.of("a", "has", "b")]) == "(a||has||b)\n"

    def test_round_trip(self, results_triples_text):
        triples = parse_triple_lines(results_triples_text)
        assert parse_triple_lines(write_triple_lines(triples)) == triples


# ---------------------------------------------------------------------------
# corpus loading


def make_paper(root, task, paper, text="a b c\nd e f\n", sentences="1\n",
               units=None, triples=None):
    d = root / task / paper
    (d / "info-units").mkdir(parents=True, exist_ok=True)
    (d / "text.txt").write_text(text, encoding="utf-8")
    if sentences is not None:
        (d / "sentences.txt").write_text(sentences, encoding="utf-8")
    for name, payload in (units or {}).items():
        (d / "info-units" / f"{name}.json").write_text(
            json.dumps(payload), encoding="utf-8")
    if triples:
        (d / "triples").mkdir(exist_ok=True)
        for name, payload in triples.items():
            (d / "triples" / f"{name}.txt").write_text(payload, encoding="utf-8")
    return d


MINIMAL_UNITS = {
    "ResearchProblem": {"has": {"Research Problem": {"has": "a b c"}}},
    "Model": {"has": {"Model": {"name": "d"}}},
    "Results": {"has": {"Results": {"improves": "e f"}}},
}


class TestLoadCorpus:
    def test_empty_directory(self, tmp_path):
        corpus, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert len(corpus) == 0
        assert [i.code for i in issues] == ["empty-corpus"]

    def test_basic_load(self, tmp_path):
        make_paper(tmp_path, "t1", "p1", units=MINIMAL_UNITS)
        make_paper(tmp_path, "t2", "p2", units=MINIMAL_UNITS)
        corpus, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert corpus.paper_ids() == ["p1", "p2"]
        paper = corpus.get("p1")
        assert paper.total_sentence_count == 2
        assert paper.total_token_count == 6
        assert paper.contribution_sentence_indices == {1}
        assert set(paper.units) == {UnitLabel.RESEARCH_PROBLEM, UnitLabel.MODEL,
                                    UnitLabel.RESULTS}
        # triples derived from the trees
        assert len(paper.triples[UnitLabel.RESULTS]) == 2

    def test_unknown_unit_file_skipped_with_issue(self, tmp_path):
        make_paper(tmp_path, "t", "p",
                   units={**MINIMAL_UNITS, "Objective": {"has": {"Objective": {}}}})
        corpus, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert "unknown-unit-label" in {i.code for i in issues}
        assert UnitLabel.RESULTS in corpus.get("p").units
        assert len(corpus.get("p").units) == 3

    def test_missing_text_skips_paper_with_error(self, tmp_path):
        make_paper(tmp_path, "t", "good", units=MINIMAL_UNITS)
        d = tmp_path / "t" / "bad"
        (d / "info-units").mkdir(parents=True)
        (d / "sentences.txt").write_text("1\n", encoding="utf-8")
        corpus, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert corpus.paper_ids() == ["good"]
        assert ("missing-text", ERROR) in {(i.code, i.severity) for i in issues}

    def test_missing_text_strict_raises(self, tmp_path):
        d = tmp_path / "t" / "bad"
        d.mkdir(parents=True)
        with pytest.raises(FormatError):
            load_corpus(CorpusManifest(root_path=tmp_path, strict=True))

    def test_deterministic(self, tmp_path):
        make_paper(tmp_path, "t", "p1", units=MINIMAL_UNITS)
        make_paper(tmp_path, "t", "p2", units=MINIMAL_UNITS)
        a, issues_a = load_corpus(CorpusManifest(root_path=tmp_path))
        b, issues_b = load_corpus(CorpusManifest(root_path=tmp_path))
        assert a == b
        assert issues_a == issues_b

    def test_triples_only_unit_gets_nested(self, tmp_path):
        make_paper(tmp_path, "t", "p", units=MINIMAL_UNITS,
                   triples={"Baselines": "(Contribution||has||Baselines)\n"
                                        "(Baselines||compared against||prior work)\n"})
        corpus, _ = load_corpus(CorpusManifest(root_path=tmp_path))
        paper = corpus.get("p")
        assert UnitLabel.BASELINES in paper.units
        assert paper.units[UnitLabel.BASELINES].unit_node.label == "Baselines"

    def test_tree_and_file_mismatch_reported(self, tmp_path):
        make_paper(tmp_path, "t", "p", units=MINIMAL_UNITS,
                   triples={"Results": "(Contribution||has||Results)\n"
                                       "(Results||improves||something else)\n"})
        _, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert "triples-file-mismatch" in {i.code for i in issues}

    def test_strict_mode_raises_on_bad_file(self, tmp_path):
        make_paper(tmp_path, "t", "p", sentences="NaN\n", units=MINIMAL_UNITS)
        with pytest.raises(FormatError):
            load_corpus(CorpusManifest(root_path=tmp_path, strict=True))

    def test_manifest_ini_round_trip(self, tmp_path):
        make_paper(tmp_path / "data", "t", "R69764", units=MINIMAL_UNITS)
        manifest_path = tmp_path / "corpus.ini"
        manifest_path.write_text(
            "[corpus]\nroot = data\ntasks = t\n\n"
            "[totals.tokens]\nR69764 = 123\n", encoding="utf-8")
        manifest = CorpusManifest.from_ini(manifest_path)
        corpus, _ = load_corpus(manifest)
        # option keys keep their case so mixed-case paper ids resolve
        assert corpus.get("R69764").total_token_count == 123

    def test_duplicate_paper_id_across_tasks(self, tmp_path):
        make_paper(tmp_path, "t1", "p", units=MINIMAL_UNITS)
        make_paper(tmp_path, "t2", "p", units=MINIMAL_UNITS)
        corpus, issues = load_corpus(CorpusManifest(root_path=tmp_path))
        assert len(corpus) == 1
        assert "duplicate-paper-id" in {i.code for i in issues}
