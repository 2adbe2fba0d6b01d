import pytest

from itpcheck.checker import (
    BudgetExceeded,
    CheckConfig,
    Holds,
    Status,
    Violated,
    apply_binary,
    execute,
    input_variables,
    predicate_outcomes,
    reachable_states,
    replay,
    runs_for,
    verify,
    violating_suffix,
)
from itpcheck.frontend import parse

from .conftest import load, site_for


class TestExecute:
    def test_steps(self):
        p = parse("int x = input(); x = x + 1; assert(x > 0);")
        trace = execute(p, {"x": 2})
        assert trace.path == (0, 1, 2, 3)
        assert trace.status is Status.ASSERT_OK
        assert trace.store(1) == {"x": 0}
        assert trace.store(3) == {"x": 3}
        assert trace.visits(2) == [2]

    def test_nondet_defaults_to_lowest_value(self):
        p = parse("int x = *; int y = *; assert(x <= y);")
        trace = execute(p, {}, [3], CheckConfig(-1, 3))
        assert trace.nondet_choices == (3, -1)
        assert trace.status is Status.ASSERT_FAIL

    def test_assert_never_reached(self):
        p = parse("int x = input(); if (x > 5) { assert(false); }")
        trace = execute(p, {"x": 0})
        assert trace.status is Status.EXITED
        assert trace.path[-1] == -1

    def test_division_by_zero(self):
        p = parse("int x = input(); int y = 0; y = 6 / x; assert(y < 9);")
        assert execute(p, {"x": 0}).status is Status.DIV_BY_ZERO
        assert execute(p, {"x": -4}).store(4) == {"x": -4, "y": -1}

    def test_budget(self):
        p = parse("int x = 0; while (x < 1) { skip; } assert(x == 0);")
        trace = execute(p, {}, cfg=CheckConfig(step_budget=50))
        assert trace.status is Status.BUDGET
        assert len(trace.steps) == 50

    def test_input_read_twice(self):
        p = parse(
            """\
int s = 0;
int x = 0;
int i = 0;
while (i < 2) {
    x = input();
    s = s + x;
    i = i + 1;
}
assert(s < 5);
"""
        )
        assert input_variables(p) == ("x",)
        trace = execute(p, {"x": 2})
        assert trace.status is Status.ASSERT_OK
        assert trace.store(len(trace.steps) - 1)["s"] == 4
        verdict = verify(p)
        assert isinstance(verdict, Violated)
        assert verdict.inputs == {"x": 3}

    def test_halt(self):
        p = parse("int x = input(); if (x > 0) { halt; } assert(x > 0);")
        assert execute(p, {"x": 1}).status is Status.HALTED
        assert execute(p, {"x": 1}).path[-1] == 3
        verdict = verify(p)
        assert isinstance(verdict, Violated)
        assert verdict.inputs == {"x": -2}


@pytest.mark.parametrize(
    "op, a, b, expected",
    [
        ("/", -7, 2, -3),
        ("/", 7, -2, -3),
        ("%", -7, 2, -1),
        ("%", 7, -2, 1),
        ("+", 2**63 - 1, 1, -(2**63)),
        ("*", 2**62, 4, 0),
        ("<=", 2, 2, True),
        ("!=", 2, 2, False),
    ],
)
def test_apply_binary(op, a, b, expected):
    assert apply_binary(op, a, b) == expected


def test_input_variables_are_sorted():
    assert input_variables(load("m1")) == ("a", "k", "n")


def test_runs_for_enumerates_choices():
    p = parse("int x = *; int y = *; assert(x != y);")
    traces = list(runs_for(p, {}, CheckConfig(0, 1)))
    assert [t.nondet_choices for t in traces] == [
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 1),
    ]


class TestVerify:
    def test_holds(self):
        verdict = verify(parse("int x = input(); assert(x < 4);"))
        assert verdict == Holds(exhaustive=True, runs=6)

    def test_least_violating_input(self):
        p = parse(
            "int x = input(); int y = input();\n"
            "assert(x + y < 4);\n"
        )
        verdict = verify(p)
        assert isinstance(verdict, Violated)
        assert verdict.inputs == {"x": 1, "y": 3}

    def test_nondeterminism(self):
        p = parse("int x = *; assert(x != 2);")
        verdict = verify(p)
        assert isinstance(verdict, Violated)
        assert verdict.inputs == {}
        assert verdict.cex.nondet_choices == (2,)

    def test_division_by_zero_is_counted(self):
        p = parse("int x = input(); int y = 0; y = 6 / x; assert(y < 9);")
        assert verify(p) == Holds(runs=6, div_by_zero=1)

    def test_budget_exceeded(self):
        p = parse(
            "int n = input(); int i = 0;\n"
            "while (i < n) { i = i + 1; }\n"
            "while (n > 2) { skip; }\n"
            "assert(i >= 0);\n"
        )
        verdict = verify(p, CheckConfig(step_budget=100))
        assert verdict == BudgetExceeded(runs=6, completed=5, budget_hits=1)

    def test_max_runs(self):
        p = parse("int x = input(); assert(x < 4);")
        verdict = verify(p, CheckConfig(max_runs=2))
        assert verdict == Holds(exhaustive=False, runs=2)

    def test_domain(self):
        p = parse("int x = input(); assert(x < 4);")
        verdict = verify(p, CheckConfig(domain_lo=4, domain_hi=4))
        assert isinstance(verdict, Violated)

    @pytest.mark.parametrize(
        "name, expected",
        [
            ("m1", Holds),
            ("m1_mut", Violated),
            ("m1_const", Holds),
            ("r1", Violated),
            ("r3", Holds),
        ],
    )
    def test_fixtures(self, name, expected):
        assert isinstance(verify(load(name)), expected)


def test_replay():
    p = load("m1_mut")
    result = replay(p, {"a": -2, "k": -2, "n": 1})
    assert isinstance(result.verdict, Violated)
    assert result.trace is result.verdict.cex
    assert result.trace.store(-1)["j"] == 7

    result = replay(p, {"a": 1, "k": -2, "n": 1})
    assert result.verdict == Holds(runs=1)
    assert result.trace.status is Status.ASSERT_OK


class TestSuffix:
    def test_from_last_visit(self):
        p = load("r1")
        site = site_for(p, 7)
        verdict = verify(site.abstracted())
        assert isinstance(verdict, Violated)
        suffix = violating_suffix(verdict.cex, site)
        assert suffix is not None
        assert suffix.path == (10, 7, 8, 9)
        assert suffix.c_outcome is True
        assert suffix.sigma_prime == {"z": 3, "x": 3, "y": 1, "r": 0}

    def test_point_not_visited(self):
        p = load("i1")
        site = site_for(p, 9)
        trace = execute(site.abstracted(), {"z": 3, "x": 0, "y": 0})
        assert trace.visits(site.computing_point) == []
        assert violating_suffix(trace, site) is None

    def test_predicate_outcomes(self):
        p = load("r2")
        site = site_for(p, 9)
        trace = execute(p, {"n": 3})
        assert predicate_outcomes(trace, site) == [False, True, True]


def test_reachable_states():
    p = parse("int x = input(); int y = 0; y = x * x; assert(y < 10);")
    states = reachable_states(p, 4, CheckConfig(-1, 1))
    assert states == {
        (("x", -1), ("y", 1)),
        (("x", 0), ("y", 0)),
        (("x", 1), ("y", 1)),
    }
