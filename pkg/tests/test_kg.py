import pytest

from ncgkit import (
    Corpus,
    PaperAnnotation,
    UnitLabel,
    UnknownStartNode,
    build_graph,
    coin_uri,
    edge_signature,
    export_ntriples,
    flatten,
    import_ntriples,
    nest,
    parse_triple_lines,
    parse_unit_file,
    traverse,
)
from ncgkit.kg import LITERAL, RESOURCE, Graph


def corpus_with(units_by_paper: dict[str, dict[UnitLabel, object]]) -> Corpus:
    papers = []
    for pid, units in units_by_paper.items():
        papers.append(PaperAnnotation(
            paper_id=pid, task="t", total_sentence_count=1,
            total_token_count=1, contribution_sentence_indices=set(),
            phrases=[], units=units, triples=None))
    return Corpus({"t": papers})


@pytest.fixture()
def results_corpus(results_unit_text):
    tree = parse_unit_file(results_unit_text, UnitLabel.RESULTS)
    return corpus_with({"wang2018": {UnitLabel.RESULTS: tree}})


class TestBuildGraph:
    def test_hoisted_results_counts(self, results_corpus):
        graph = build_graph(results_corpus)
        assert len(graph.nodes) == 7
        assert len(graph.edges) == 6
        kinds = sorted(n.kind for n in graph.nodes.values())
        assert kinds.count(LITERAL) == 2
        assert kinds.count(RESOURCE) == 5

    def test_empty_corpus(self):
        graph = build_graph(Corpus())
        assert not graph.nodes and not graph.edges

    def test_edge_count_equals_flattened_triples(self, results_corpus):
        graph = build_graph(results_corpus)
        total = 0
        for paper in results_corpus.papers():
            for tree in paper.units.values():
                total += len(flatten(tree).triples)
        assert len(graph.edges) == total

    def test_surface_merge_shares_nodes(self):
        tree_a = parse_unit_file(
            '{"has": {"Results": {"on": "CoNLL"}}}', UnitLabel.RESULTS)
        tree_b = parse_unit_file(
            '{"has": {"Baselines": {"evaluated on": "CoNLL"}}}',
            UnitLabel.BASELINES)
        corpus = corpus_with({"paperA": {UnitLabel.RESULTS: tree_a},
                              "paperB": {UnitLabel.BASELINES: tree_b}})
        merged = build_graph(corpus, merge="surface")
        conll = [n for n in merged.nodes.values() if n.label == "CoNLL"]
        assert len(conll) == 1
        in_edges = [e for e in merged.edges if e[2] == conll[0].uri]
        assert {merged.nodes[s].label for s, _, _ in in_edges} == {"Results",
                                                                   "Baselines"}
        # contribution roots never merge
        assert len(merged.roots) == 2
        # no label-level edge is lost relative to per-paper identity
        per_paper = build_graph(corpus)
        assert set(edge_signature(merged)) == set(edge_signature(per_paper))

    def test_per_paper_keeps_same_surface_distinct(self, results_triples_text):
        tree_a = nest(parse_triple_lines(results_triples_text), UnitLabel.RESULTS)
        tree_b = nest(parse_triple_lines(results_triples_text), UnitLabel.RESULTS)
        corpus = corpus_with({"paperA": {UnitLabel.RESULTS: tree_a},
                              "paperB": {UnitLabel.RESULTS: tree_b}})
        graph = build_graph(corpus)
        assert len([n for n in graph.nodes.values()
                    if n.label == "QASent dataset"]) == 2


class TestCoinUri:
    def test_deterministic(self):
        a = coin_uri("R69764", UnitLabel.RESULTS, ("has", "Results"))
        b = coin_uri("R69764", UnitLabel.RESULTS, ("has", "Results"))
        assert a == b

    def test_prefix_scheme(self):
        uri = coin_uri("R69764", UnitLabel.RESULTS, ("has", "Results"))
        assert uri.startswith("ncg:R69764/Results/")

    def test_distinct_paths_distinct_uris(self):
        seen = set()
        paths = [("has", "Results"), ("has", "Results", "on", "CoNLL"),
                 ("has", "Model"), ()]
        for path in paths:
            seen.add(coin_uri("p", UnitLabel.RESULTS, path))
        assert len(seen) == len(paths)

    def test_paper_ids_with_unsafe_characters(self):
        uri = coin_uri("a b/c", UnitLabel.CODE, ("has", "Code"))
        assert " " not in uri and uri.count("/") == 2


class TestExport:
    def test_empty_graph_exports_empty_string(self):
        assert export_ntriples(Graph()) == ""

    def test_reimport_is_isomorphic(self, results_corpus):
        graph = build_graph(results_corpus)
        text = export_ntriples(graph)
        rebuilt = import_ntriples(text)
        assert edge_signature(rebuilt) == edge_signature(graph)
        assert len(rebuilt.edges) == len(graph.edges)

    def test_byte_stable_within_process(self, results_corpus):
        a = export_ntriples(build_graph(results_corpus))
        b = export_ntriples(build_graph(results_corpus))
        assert a == b

    def test_statement_lines_sorted(self, results_corpus):
        text = export_ntriples(build_graph(results_corpus))
        statements = [l for l in text.splitlines() if not l.startswith("#")]
        assert statements == sorted(statements)

    def test_literal_quote_escaping(self):
        tree = parse_unit_file(
            '{"has": {"Results": {"reports": "a \\"quoted\\" value"}}}',
            UnitLabel.RESULTS)
        corpus = corpus_with({"p": {UnitLabel.RESULTS: tree}})
        text = export_ntriples(build_graph(corpus))
        assert '"a \\"quoted\\" value"' in text
        rebuilt = import_ntriples(text)
        labels = {n.label for n in rebuilt.nodes.values()}
        assert 'a "quoted" value' in labels

    def test_predicate_slug_collisions_stay_distinct(self):
        tree = parse_unit_file(
            '{"has": {"Results": {"in terms of": "x", "in-terms-of": "y"}}}',
            UnitLabel.RESULTS)
        corpus = corpus_with({"p": {UnitLabel.RESULTS: tree}})
        graph = build_graph(corpus)
        text = export_ntriples(graph)
        rebuilt = import_ntriples(text)
        assert edge_signature(rebuilt) == edge_signature(graph)


class TestTraverse:
    def test_depth_one_lists_on_children(self, results_triples_text):
        tree = nest(parse_triple_lines(results_triples_text), UnitLabel.RESULTS)
        corpus = corpus_with({"wang2016": {UnitLabel.RESULTS: tree}})
        graph = build_graph(corpus)
        results = traverse(graph, "wang2016", "Results", 1)
        children = sorted(node.label for path, node in results if len(path) == 1)
        assert children == ["MSRP dataset", "QASent dataset", "Wiki QA dataset"]
        assert all(path == ("on",) for path, n in results if len(path) == 1)

    def test_depth_zero_is_start_only(self, results_corpus):
        graph = build_graph(results_corpus)
        results = traverse(graph, "wang2018", "Results", 0)
        assert len(results) == 1
        assert results[0][0] == ()
        assert results[0][1].label == "Results"

    def test_unknown_start(self, results_corpus):
        graph = build_graph(results_corpus)
        with pytest.raises(UnknownStartNode):
            traverse(graph, "wang2018", "Nonexistent", 1)
        with pytest.raises(UnknownStartNode):
            traverse(graph, "ghost-paper", "Results", 1)

    def test_full_depth_reaches_leaves(self, results_corpus):
        graph = build_graph(results_corpus)
        results = traverse(graph, "wang2018", "Results", 10)
        labels = {node.label for _, node in results}
        assert {"Results", "F1 measure", "ACE datasets", "GENIA dataset",
                "best results", "comparable results"} <= labels
