import itertools

import pytest

from itpcheck.cfg import (
    build_cfg,
    control_dependence,
    dominators,
    immediate_post_dominator,
    loops_enclosing,
    natural_loops,
    nearest_common_post_dominator,
    post_dominators,
    to_dot,
    transitively_controls,
)
from itpcheck.frontend import parse
from itpcheck.syntax import ENTRY, EXIT, Location

from .conftest import load
from .oracles import path_post_dominators

COUNTING = parse(
    """\
int x = input();
int y = 0;
while (x < 3) {
    if (x == 1) {
        y = y + 1;
    }
    x = x + 1;
}
assert(y < 5);
"""
)


@pytest.fixture(scope="module")
def g():
    return build_cfg(COUNTING)


class TestBuild:
    def test_edges(self, g):
        assert g.edges() == [
            (ENTRY, 1, "fall"),
            (1, 2, "fall"),
            (2, 3, "fall"),
            (3, 4, "true"),
            (3, 7, "false"),
            (4, 5, "true"),
            (4, 6, "false"),
            (5, 6, "fall"),
            (6, 3, "fall"),
            (7, EXIT, "fall"),
        ]

    def test_nodes(self, g):
        assert len(g) == 9
        assert g.predicates == (3, 4)
        assert g.kind(1) == "assign_input"
        assert g.kind(7) == "assert"
        assert g.nodes[5].defines == "y"
        assert g.nodes[5].uses == {"y"}
        assert g.nodes[3].uses == {"x"}
        assert g.nodes[5].text == "y = y + 1;"
        assert g.nodes[ENTRY].text == "ENTRY"

    def test_navigation(self, g):
        assert g.predecessors(3) == (2, 6)
        assert g.successors(3) == (4, 7)
        assert g.branch(3, True) == 4
        assert g.branch(3, False) == 7
        assert g.step(5) == 6

    def test_ast_link(self, g):
        assert g.ast_link[3] == Location((), 0)
        assert g.ast_link[5] == Location(((0, "body"), (0, "then")), 0)
        assert g.ast_link[2] == Location(None, 1)

    def test_empty_arms_keep_both_edges(self):
        g = build_cfg(
            parse("int x = 0; if (x == 0) { } x = 1; assert(x == 1);")
        )
        assert [e for e in g.edges() if e[0] == 2] == [
            (2, 3, "false"),
            (2, 3, "true"),
        ]
        assert g.successors(2) == (3,)

    def test_assert_inside_a_branch_flows_to_exit(self):
        g = build_cfg(
            parse("int x = 0; if (x == 0) { assert(x == 0); } x = 1;")
        )
        assert g.successors(3) == (EXIT,)
        assert g.branch(2, False) == 4


class TestDominance:
    def test_post_dominators(self, g):
        pdom = post_dominators(g)
        assert pdom[4] == {4, 6, 3, 7, EXIT}
        assert pdom[3] == {3, 7, EXIT}
        assert immediate_post_dominator(pdom, 4) == 6
        assert immediate_post_dominator(pdom, EXIT) is None

    def test_dominators(self, g):
        dom = dominators(g)
        assert dom[5] == {ENTRY, 1, 2, 3, 4, 5}
        assert dom[7] == {ENTRY, 1, 2, 3, 7}

    def test_nearest_common_post_dominator(self, g):
        assert nearest_common_post_dominator(g, [4, 5]) == 6
        assert nearest_common_post_dominator(g, [2, 6]) == 3
        assert nearest_common_post_dominator(g, [7]) == EXIT

    def test_post_dominators_match_path_oracle(self, fixture_name):
        g = build_cfg(load(fixture_name))
        assert post_dominators(g) == path_post_dominators(g)

    def test_nearest_common_post_dominator_is_nearest(self, fixture_name):
        g = build_cfg(load(fixture_name))
        oracle = path_post_dominators(g)
        pdom = post_dominators(g)
        nodes = sorted(n for n in oracle if n != EXIT)
        for ns in itertools.combinations_with_replacement(nodes, 2):
            m = nearest_common_post_dominator(g, ns, pdom)
            common = {
                k for k in oracle if all(k in oracle[n] - {n} for n in ns)
            }
            assert m in common, ns
            # every other common post-dominator comes after m
            assert all(k in oracle[m] for k in common), ns


class TestControlDependence:
    def test_direct(self, g):
        cd = control_dependence(g)
        assert cd[5] == {4}
        assert cd[4] == {3}
        assert cd[6] == {3}
        assert cd[3] == {3}
        assert cd[7] == set()
        assert cd[1] == set()

    def test_transitive(self, g):
        cd = control_dependence(g)
        assert transitively_controls(cd, 5) == {3, 4}
        assert transitively_controls(cd, 7) == set()


class TestLoops:
    def test_single(self, g):
        [loop] = natural_loops(g)
        assert loop.header == 3
        assert loop.body == {3, 4, 5, 6}
        assert loop.back_edges == {(6, 3)}
        assert loop.depth == 1
        assert 5 in loop
        assert 7 not in loop

    def test_nesting(self):
        g = build_cfg(load("m1"))
        loops = natural_loops(g)
        assert [lp.header for lp in loops] == [11, 14, 18, 20]
        inner = loops[-1]
        assert inner.parent is not None
        assert inner.parent.header == 18
        assert inner.depth == 2
        assert [lp.header for lp in loops_enclosing(loops, 22)] == [18, 20]
        assert loops_enclosing(loops, 29) == []


class TestDot:
    def test_nodes_and_edges(self, g):
        dot = to_dot(g, natural_loops(g))
        assert dot.startswith("digraph cfg {\n")
        assert '  n0 [label="0: entry: ENTRY"];' in dot
        assert 'n4 [label="4: predicate: if (x == 1)"];' in dot
        assert "  n3 -> n4 [label=\"true\"];" in dot
        assert "  n7 -> nexit;" in dot
        assert "subgraph cluster_3 {" in dot

    def test_nested_clusters(self):
        g = build_cfg(load("m1"))
        dot = to_dot(g, natural_loops(g))
        outer = dot.index("subgraph cluster_18 {")
        inner = dot.index("subgraph cluster_20 {")
        assert outer < inner
        assert dot.index("n22 [") > inner
