import io

import numpy as np
import pytest

from taxalign.errors import (CycleError, DanglingEdgeError, DuplicateNodeError,
                             ParseError)
from taxalign.taxonomy import (TaxNode, TaxonomyGraph, add_virtual_top, build_closure,
                               collapse_sense_siblings, dump_taxonomy, load_taxonomy)

from .helpers import ancestors_by_matrix, random_taxonomy


def load(text: str) -> TaxonomyGraph:
    return load_taxonomy(io.StringIO(text))


class TestLoad:
    def test_minimal(self):
        g = load("N\ta\tanimal\nN\tb\tave\nE\ta\tb\n")
        assert len(g) == 2
        assert g.n_edges == 1
        assert g.roots == ("a",)
        assert g.hyponyms_of("a") == ("b",)

    def test_self_loop_is_cycle(self):
        with pytest.raises(CycleError):
            load("N\ta\tanimal\nE\ta\ta\n")

    def test_longer_cycle_names_a_member(self):
        with pytest.raises(CycleError) as err:
            load("N\ta\tx\nN\tb\ty\nN\tc\tz\nE\ta\tb\nE\tb\tc\nE\tc\ta\n")
        assert err.value.node_id in {"a", "b", "c"}

    def test_worked_fragment_shape(self, worked):
        assert len(worked.src) == 4
        assert worked.src.n_edges == 3
        assert worked.src.roots == ("animal",)
        assert worked.src.node("faisan").word == "faisán"

    def test_comments_and_blanks_ignored(self):
        g = load("# header\n\nN\ta\tword\n   \nN\tb\tother\nE\ta\tb\n")
        assert len(g) == 2

    def test_malformed_record_reports_line(self):
        with pytest.raises(ParseError) as err:
            load("N\ta\tword\nN\tb\n")
        assert err.value.line == 2

    def test_duplicate_id(self):
        with pytest.raises(DuplicateNodeError):
            load("N\ta\tword\nN\ta\tother\n")

    def test_dangling_edge(self):
        with pytest.raises(DanglingEdgeError):
            load("N\ta\tword\nE\ta\tmissing\n")

    def test_edge_before_node_is_dangling(self):
        with pytest.raises(DanglingEdgeError):
            load("N\ta\tword\nE\ta\tb\nN\tb\tlate\n")

    def test_bad_sense(self):
        with pytest.raises(ParseError):
            load("N\ta\tword\tsense=zero\n")
        with pytest.raises(ParseError):
            load("N\ta\tword\tsense=0\n")

    def test_unknown_record_and_field(self):
        with pytest.raises(ParseError):
            load("Q\ta\tword\n")
        with pytest.raises(ParseError):
            load("N\ta\tword\tcolour=red\n")

    def test_node_fields_parsed(self):
        g = load("N\ta\tbanco\tsense=2\tfile=noun.artifact\tsyn=bench,seat\n")
        node = g.node("a")
        assert node.sense == 2
        assert node.semfile == "noun.artifact"
        assert node.syn == ("bench", "seat")

    def test_duplicate_edge_collapsed(self):
        g = load("N\ta\tx\nN\tb\ty\nE\ta\tb\nE\ta\tb\n")
        assert g.n_edges == 1


class TestClosure:
    def test_root_has_no_ancestors(self):
        idx = build_closure(load("N\ta\tx\nN\tb\ty\nE\ta\tb\n"))
        assert idx.ancestors_of("a") == frozenset()

    def test_chain(self):
        idx = build_closure(load("N\ta\tx\nN\tb\ty\nN\tc\tz\nE\ta\tb\nE\tb\tc\n"))
        assert idx.ancestors_of("c") == {"a", "b"}
        assert idx.hypernyms_of("c") == {"b"}
        assert idx.descendants_of("a") == {"b", "c"}

    def test_worked_fragment(self, worked):
        idx = worked.src_index
        assert idx.ancestors_of("rapaz") == {"ave", "animal"}
        assert idx.hypernyms_of("rapaz") == {"ave"}
        assert idx.descendants_of("animal") == {"ave", "faisan", "rapaz"}

    def test_idempotent_and_disjoint(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            g = random_taxonomy(rng, max_nodes=40)
            first = build_closure(g)
            second = build_closure(g)
            for nid in g.ids:
                assert first.ancestors_of(nid) == second.ancestors_of(nid)
                assert first.descendants_of(nid) == second.descendants_of(nid)
                assert not first.ancestors_of(nid) & first.descendants_of(nid)
                assert first.hypernyms_of(nid) <= first.ancestors_of(nid)
                assert first.hyponyms_of(nid) <= first.descendants_of(nid)

    def test_matches_matrix_composition_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            g = random_taxonomy(rng, max_nodes=50)
            idx = build_closure(g)
            expected = ancestors_by_matrix(g)
            for nid in g.ids:
                assert idx.ancestors_of(nid) == expected[nid]


class TestVirtualTop:
    def test_forest_gets_single_root(self):
        g = load("N\tr1\tuno\nN\tr2\tdos\nN\tc\ttres\nE\tr1\tc\n")
        out, pins = add_virtual_top(g, top_word="top")
        assert len(out.roots) == 1
        top = out.roots[0]
        assert out.hyponyms_of(top) == ("r1", "r2")
        assert len(out) == len(g) + 1
        assert pins == {}

    def test_single_rooted_still_inserted(self):
        g = load("N\ta\tx\nN\tb\ty\nE\ta\tb\n")
        out, _ = add_virtual_top(g)
        assert len(out.roots) == 1
        assert out.roots[0] == "__TOP__"
        assert out.hyponyms_of("__TOP__") == ("a",)

    def test_two_trees_attach_to_file_top(self):
        g = load("N\tave\tave\nN\tpez\tpez\nN\tf\tfaisan\nN\tt\ttrucha\n"
                 "E\tave\tf\nE\tpez\tt\n")
        out, pins = add_virtual_top(g, top_word="animal", attach_to="top.animal")
        assert len(out.roots) == 1
        assert len(out) == 5
        assert pins == {out.roots[0]: "top.animal"}

    def test_id_collision_appends_counter(self):
        g = load("N\t__TOP__\tx\nN\tb\ty\nE\t__TOP__\tb\n")
        out, _ = add_virtual_top(g)
        assert out.roots[0] == "__TOP__2"


MERGE_FIXTURE = """\
N\tr\troot
N\ta1\tbanco
N\ta2\tbanco
N\tb1\tmesa
N\tb2\tvaso
N\tc1\tsilla
N\tc2\tsilla
N\td\tflor
N\te\tpan
N\tf\tsol
E\tr\ta1
E\tr\ta2
E\tr\tc1
E\tr\tc2
E\ta1\tb1
E\ta2\tb2
E\tc1\te
E\tc2\tf
E\tb1\td
"""


class TestCollapse:
    def test_same_word_siblings_merge(self):
        g = load("N\tr\troot\nN\tb1\tbanco\tsense=1\nN\tb2\tbanco\tsense=2\n"
                 "N\tc\tchild\nN\td\tother\nE\tr\tb1\nE\tr\tb2\nE\tb1\tc\nE\tb2\td\n")
        out, merge_map = collapse_sense_siblings(g)
        assert len(out) == 4
        assert merge_map["b2"] == "b1"
        assert merge_map["b1"] == "b1"
        assert set(out.hyponyms_of("b1")) == {"c", "d"}
        assert out.node("b1").sense is None

    def test_same_word_different_parents_not_merged(self):
        g = load("N\tr1\tx\nN\tr2\ty\nN\tb1\tbanco\nN\tb2\tbanco\n"
                 "E\tr1\tb1\nE\tr2\tb2\n")
        out, merge_map = collapse_sense_siblings(g)
        assert len(out) == 4
        assert all(old == new for old, new in merge_map.items())

    def test_ten_node_fixture_counts(self):
        # Hand count: {a1,a2} and {c1,c2} merge; 10 -> 8 nodes and the nine
        # original edges collapse to seven distinct ones.
        out, merge_map = collapse_sense_siblings(load(MERGE_FIXTURE))
        assert len(out) == 8
        assert out.n_edges == 7
        assert merge_map == {"r": "r", "a1": "a1", "a2": "a1", "b1": "b1", "b2": "b2",
                             "c1": "c1", "c2": "c1", "d": "d", "e": "e", "f": "f"}
        assert set(out.hyponyms_of("a1")) == {"b1", "b2"}
        assert set(out.hyponyms_of("c1")) == {"e", "f"}

    def test_cascading_merge_runs_to_fixed_point(self):
        g = load("N\tr\troot\nN\ta1\tbanco\nN\ta2\tbanco\nN\tb1\tmesa\nN\tb2\tmesa\n"
                 "E\tr\ta1\nE\tr\ta2\nE\ta1\tb1\nE\ta2\tb2\n")
        out, merge_map = collapse_sense_siblings(g)
        assert len(out) == 3
        assert merge_map["b2"] == "b1"
        again, identity = collapse_sense_siblings(out)
        assert len(again) == 3
        assert all(old == new for old, new in identity.items())

    def test_random_properties(self):
        rng = np.random.default_rng(3)
        words = ["uno", "dos", "tres", "cuatro"]
        for _ in range(20):
            n = int(rng.integers(3, 25))
            nodes = [TaxNode(f"n{i:02d}", words[int(rng.integers(0, len(words)))])
                     for i in range(n)]
            edges = [(f"n{int(rng.integers(0, i)):02d}", f"n{i:02d}")
                     for i in range(1, n) if rng.random() < 0.9]
            g = TaxonomyGraph(nodes, edges)
            out, merge_map = collapse_sense_siblings(g)
            assert len(out) <= len(g)
            for old, new in merge_map.items():
                assert g.node(old).word == out.node(new).word
            out2, again = collapse_sense_siblings(out)
            assert len(out2) == len(out)
            assert all(old == new for old, new in again.items())


class TestDump:
    def test_roundtrip(self, worked):
        buf = io.StringIO()
        dump_taxonomy(worked.tgt, buf)
        reloaded = load(buf.getvalue())
        assert reloaded.ids == worked.tgt.ids
        assert list(reloaded.edges()) == list(worked.tgt.edges())
        for nid in worked.tgt.ids:
            assert reloaded.node(nid) == worked.tgt.node(nid)
