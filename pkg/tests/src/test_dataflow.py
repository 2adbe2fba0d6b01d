import pytest

from itpcheck.cfg import build_cfg
from itpcheck.checker import verify
from itpcheck.dataflow import (
    backward_slice,
    du_closure,
    live_variables,
    reaching_definitions,
    slice_program,
)
from itpcheck.frontend import parse, pretty_print

from .conftest import load
from .oracles import path_liveness

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

DETOUR = parse(
    """\
int x = input();
int y = 0;
int w = 0;
w = x * 2;
if (w > 2) {
    w = 0;
}
y = x + 1;
assert(y != 0);
"""
)


class TestReachingDefinitions:
    def test_definitions(self):
        du = reaching_definitions(build_cfg(COUNTING))
        assert du.defs == {"x": {1, 6}, "y": {2, 5}}

    def test_loop_merges_definitions(self):
        du = reaching_definitions(build_cfg(COUNTING))
        assert du.reach_in[3] == {("x", 1), ("x", 6), ("y", 2), ("y", 5)}
        assert du.reach_out[5] == {("x", 1), ("x", 6), ("y", 5)}
        assert du.reaching({"y"}, 7) == {2, 5}

    def test_kill(self):
        du = reaching_definitions(build_cfg(DETOUR))
        assert du.reaching({"y"}, 8) == {7}
        assert du.reaching({"w"}, 7) == {4, 6}

    def test_closure(self):
        g = build_cfg(DETOUR)
        du = reaching_definitions(g)
        assert du_closure(du, {"y"}, 8) == {7, 1}
        assert du.closure({"w"}, 7) == {4, 6, 1}
        assert du_closure(du, {"x", "w"}, 4) == {1, 3}


class TestLiveness:
    def test_plain(self):
        g = build_cfg(COUNTING)
        live = live_variables(g, ({"y"}, 7))
        assert live.live_in[7] == {"y"}
        assert live.live_out[3] == {"x", "y"}
        assert live.live_out[1] == {"x"}
        assert live.live_in[1] == set()

    def test_barrier(self):
        g = build_cfg(COUNTING)
        live = live_variables(g, ({"y"}, 7), barrier=4)
        assert live.live_out[3] == {"y"}
        assert live.live_in[3] == {"x", "y"}

    def test_identity(self):
        g = build_cfg(DETOUR)
        plain = live_variables(g, ({"y"}, 8))
        assert plain.live_out[4] == {"w", "x"}
        skipped = live_variables(g, ({"y"}, 8), identity_nodes={5})
        assert skipped.live_out[4] == {"x"}

    @pytest.mark.parametrize("name", ["r1", "i1", "i2"])
    def test_matches_path_oracle(self, name):
        p = load(name)
        g = build_cfg(p)
        a = p.assertion.label
        live = live_variables(g, (g.nodes[a].uses, a))
        for n in g.nodes:
            if n in (a, g.exit):
                continue
            assert live.live_out[n] == path_liveness(
                g, g.nodes[a].uses, n, a
            ), n


class TestSlice:
    def test_nodes(self):
        assert backward_slice(DETOUR, build_cfg(DETOUR)) == {1, 7, 8}

    def test_control_dependence(self):
        assert backward_slice(COUNTING, build_cfg(COUNTING)) == {
            1,
            2,
            3,
            4,
            5,
            6,
            7,
        }

    def test_program(self):
        keep = backward_slice(DETOUR, build_cfg(DETOUR))
        sliced = slice_program(DETOUR, keep)
        assert pretty_print(sliced) == (
            "int x = input();\n"
            "int y = 0;\n"
            "int w = 0;\n"
            "skip;\n"
            "skip;\n"
            "y = x + 1;\n"
            "assert(y != 0);\n"
        )
        assert [s.label for s in sliced.body] == [4, 5, 7, 8]

    def test_verdict_is_kept(self, fixture_name):
        p = load(fixture_name)
        sliced = slice_program(p, backward_slice(p, build_cfg(p)))
        assert type(verify(sliced)) is type(verify(p))
