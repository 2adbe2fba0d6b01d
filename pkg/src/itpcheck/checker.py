"""Bounded-exhaustive property checking of MiniImp programs.

Every input vector over the configured domain is combined with every
sequence of nondeterministic choices, and each combination is executed
on the control-flow graph. An input vector holds one value per variable
read by ``input()``, so repeated reads of a variable in one run agree.
Verdicts are only ever relative to the domain and the step budget."""

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import (
    Dict,
    FrozenSet,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .cfg import Cfg, build_cfg
from .common import add_slots
from .frontend import wrap
from .itp import PredicateSite
from .syntax import (
    ENTRY,
    EXIT,
    Assert,
    Assign,
    BoolConst,
    Expr,
    If,
    IntConst,
    NodeId,
    Program,
    Unary,
    Var,
    While,
)

logger = logging.getLogger(__name__)

Value = Union[int, bool]
Store = Tuple[int, ...]
"Variable values, ordered like the program's declarations"
Step = Tuple[NodeId, Store]
"A node and the store as the node is about to execute"


@add_slots
@dataclass(frozen=True)
class CheckConfig:
    domain_lo: int = -2
    domain_hi: int = 3
    step_budget: int = 20_000
    max_runs: Optional[int] = None
    "Stop enumerating after this many executions; None for no limit"

    @property
    def domain(self) -> range:
        return range(self.domain_lo, self.domain_hi + 1)


class Status(enum.Enum):
    ASSERT_OK = "assert_ok"
    ASSERT_FAIL = "assert_fail"
    BUDGET = "budget"
    DIV_BY_ZERO = "div_by_zero"
    EXITED = "exited"
    "EXIT reached without passing the assertion"
    HALTED = "halted"


@add_slots
@dataclass(frozen=True)
class Trace:
    variables: Tuple[str, ...]
    steps: Tuple[Step, ...]
    input_vector: Mapping[str, int]
    nondet_choices: Tuple[int, ...]
    status: Status

    @property
    def path(self) -> Tuple[NodeId, ...]:
        return tuple(n for n, _ in self.steps)

    def store(self, index: int) -> Dict[str, int]:
        return dict(zip(self.variables, self.steps[index][1]))

    def visits(self, node: NodeId) -> List[int]:
        return [i for i, (n, _) in enumerate(self.steps) if n == node]


@add_slots
@dataclass(frozen=True)
class Holds:
    exhaustive: bool = True
    runs: int = 0
    div_by_zero: int = 0


@add_slots
@dataclass(frozen=True)
class Violated:
    cex: Trace

    @property
    def inputs(self) -> Mapping[str, int]:
        return self.cex.input_vector


@add_slots
@dataclass(frozen=True)
class BudgetExceeded:
    runs: int
    completed: int
    budget_hits: int
    div_by_zero: int = 0


Verdict = Union[Holds, Violated, BudgetExceeded]


class _DivisionByZero(Exception):
    pass


def _divide(a: int, b: int) -> int:
    if b == 0:
        raise _DivisionByZero()
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def apply_binary(op: str, a: Value, b: Value) -> Value:
    "Integer semantics of 64-bit C, with division truncating toward zero"
    if op == "+":
        return wrap(a + b)
    elif op == "-":
        return wrap(a - b)
    elif op == "*":
        return wrap(a * b)
    elif op == "/":
        return wrap(_divide(a, b))
    elif op == "%":
        return wrap(a - b * _divide(a, b))
    elif op == "<":
        return a < b
    elif op == "<=":
        return a <= b
    elif op == ">":
        return a > b
    elif op == ">=":
        return a >= b
    elif op == "==":
        return a == b
    elif op == "!=":
        return a != b
    raise ValueError(f"unknown operator {op!r}")  # pragma: no cover


def evaluate(e: Expr, store: Mapping[str, int]) -> Value:
    if isinstance(e, IntConst):
        return e.value
    elif isinstance(e, BoolConst):
        return e.value
    elif isinstance(e, Var):
        return store[e.name]
    elif isinstance(e, Unary):
        value = evaluate(e.operand, store)
        return (not value) if e.op == "!" else wrap(-value)
    elif e.op == "&&":
        return bool(evaluate(e.left, store)) and bool(
            evaluate(e.right, store)
        )
    elif e.op == "||":
        return bool(evaluate(e.left, store)) or bool(
            evaluate(e.right, store)
        )
    return apply_binary(
        e.op, evaluate(e.left, store), evaluate(e.right, store)
    )


def input_variables(p: Program) -> Tuple[str, ...]:
    "Variables read by ``input()``, in enumeration order"
    return tuple(
        sorted(
            {
                n.defines
                for n in build_cfg(p).nodes.values()
                if n.kind == "assign_input" and n.defines is not None
            }
        )
    )


def execute(
    p: Program,
    inputs: Mapping[str, int],
    nondet: Sequence[int] = (),
    cfg: CheckConfig = CheckConfig(),
    g: Optional[Cfg] = None,
) -> Trace:
    """Run the program once. ``input()`` for a variable always reads
    ``inputs[var]``; each ``*`` takes the next value of ``nondet``, or the
    lowest domain value once those run out."""
    g = g or build_cfg(p)
    variables = p.variables
    store = dict.fromkeys(variables, 0)
    choices = list(nondet)
    taken = 0
    steps: List[Step] = []
    node = ENTRY

    def snapshot() -> Store:
        return tuple(store[v] for v in variables)

    while True:
        if len(steps) >= cfg.step_budget:
            status = Status.BUDGET
            break
        steps.append((node, snapshot()))
        if node == EXIT:
            status = Status.EXITED
            break
        kind = g.kind(node)
        stmt = g.nodes[node].stmt
        try:
            if kind == "assign":
                assert isinstance(stmt, Assign)
                store[stmt.var] = int(evaluate(stmt.expr, store))
            elif kind == "assign_input":
                var = g.nodes[node].defines
                assert var is not None
                store[var] = inputs[var]
            elif kind == "assign_nondet":
                var = g.nodes[node].defines
                assert var is not None
                if taken == len(choices):
                    choices.append(cfg.domain_lo)
                store[var] = choices[taken]
                taken += 1
            elif kind == "predicate":
                assert isinstance(stmt, (If, While))
                node = g.branch(node, bool(evaluate(stmt.cond, store)))
                continue
            elif kind == "assert":
                assert isinstance(stmt, Assert)
                ok = evaluate(stmt.expr, store)
                status = Status.ASSERT_OK if ok else Status.ASSERT_FAIL
                break
            elif kind == "halt":
                status = Status.HALTED
                break
        except _DivisionByZero:
            status = Status.DIV_BY_ZERO
            break
        node = g.step(node)

    return Trace(
        variables=variables,
        steps=tuple(steps),
        input_vector=dict(inputs),
        nondet_choices=tuple(choices[:taken]),
        status=status,
    )


def _next_choices(
    choices: Sequence[int], cfg: CheckConfig
) -> Optional[List[int]]:
    "The next choice prefix in depth-first ascending order"
    prefix = list(choices)
    while prefix and prefix[-1] >= cfg.domain_hi:
        prefix.pop()
    if not prefix:
        return None
    prefix[-1] += 1
    return prefix


def runs_for(
    p: Program,
    inputs: Mapping[str, int],
    cfg: CheckConfig = CheckConfig(),
    g: Optional[Cfg] = None,
) -> Iterator[Trace]:
    "Every execution for one input vector, over all nondeterministic choices"
    g = g or build_cfg(p)
    choices: Optional[List[int]] = []
    while choices is not None:
        trace = execute(p, inputs, choices, cfg, g)
        yield trace
        choices = _next_choices(trace.nondet_choices, cfg)


def all_runs(
    p: Program, cfg: CheckConfig = CheckConfig(), g: Optional[Cfg] = None
) -> Iterator[Trace]:
    "Every execution over the domain, inputs in lexicographic order"
    g = g or build_cfg(p)
    names = input_variables(p)
    for values in itertools.product(cfg.domain, repeat=len(names)):
        yield from runs_for(p, dict(zip(names, values)), cfg, g)


def _tally(traces: Iterator[Trace], cfg: CheckConfig) -> Verdict:
    runs = completed = budget_hits = div_by_zero = 0
    exhaustive = True
    for trace in traces:
        if cfg.max_runs is not None and runs >= cfg.max_runs:
            exhaustive = False
            break
        runs += 1
        if trace.status is Status.ASSERT_FAIL:
            logger.debug("violation found after %d run(s)", runs)
            return Violated(trace)
        elif trace.status is Status.BUDGET:
            budget_hits += 1
        elif trace.status is Status.DIV_BY_ZERO:
            div_by_zero += 1
        else:
            completed += 1
    logger.debug(
        "%d run(s): %d completed, %d over budget, %d division(s) by zero",
        runs,
        completed,
        budget_hits,
        div_by_zero,
    )
    if budget_hits:
        return BudgetExceeded(runs, completed, budget_hits, div_by_zero)
    return Holds(exhaustive, runs, div_by_zero)


def verify(p: Program, cfg: CheckConfig = CheckConfig()) -> Verdict:
    """The first violation in enumeration order, which makes the returned
    input vector the lexicographically least violating one"""
    return _tally(all_runs(p, cfg), cfg)


@add_slots
@dataclass(frozen=True)
class Replay:
    verdict: Verdict
    trace: Trace
    "The violating execution if there is one, else the first execution"


def replay(
    p: Program, inputs: Mapping[str, int], cfg: CheckConfig = CheckConfig()
) -> Replay:
    g = build_cfg(p)
    runs = list(runs_for(p, inputs, cfg, g))
    verdict = _tally(iter(runs), cfg)
    if isinstance(verdict, Violated):
        return Replay(verdict, verdict.cex)
    return Replay(verdict, runs[0])


@add_slots
@dataclass(frozen=True)
class ViolatingSuffix:
    variables: Tuple[str, ...]
    steps: Tuple[Step, ...]
    "From the last visit of the computing point to the failing assertion"
    c_outcome: Optional[bool]
    "The value of the predicate on the suffix; None if the suffix avoids it"

    @property
    def path(self) -> Tuple[NodeId, ...]:
        return tuple(n for n, _ in self.steps)

    @property
    def sigma_prime(self) -> Dict[str, int]:
        return dict(zip(self.variables, self.steps[0][1]))

    def store(self, index: int) -> Dict[str, int]:
        return dict(zip(self.variables, self.steps[index][1]))


def predicate_outcomes(t: Trace, site: PredicateSite) -> List[bool]:
    "Values of the site's predicate at each of its visits in the trace"
    stmt = site.original.statement(site.predicate_node)
    assert isinstance(stmt, (If, While))
    return [
        bool(evaluate(stmt.cond, t.store(i)))
        for i in t.visits(site.predicate_node)
    ]


def violating_suffix(
    t: Trace, site: PredicateSite
) -> Optional[ViolatingSuffix]:
    visits = t.visits(site.computing_point)
    if not visits:
        return None
    start = visits[-1]
    steps = t.steps[start:]
    suffix = Trace(t.variables, steps, t.input_vector, (), t.status)
    outcomes = predicate_outcomes(suffix, site)
    if len(set(outcomes)) > 1:
        logger.warning(
            "predicate %d changes value on a violating suffix",
            site.predicate_node,
        )
    return ViolatingSuffix(
        t.variables,
        steps,
        outcomes[0] if outcomes else None,
    )


def reachable_states(
    p: Program,
    node: NodeId,
    cfg: CheckConfig = CheckConfig(),
    g: Optional[Cfg] = None,
) -> FrozenSet[Tuple[Tuple[str, int], ...]]:
    "Every store seen at ``node`` over all executions in the domain"
    g = g or build_cfg(p)
    states = set()
    for trace in all_runs(p, cfg, g):
        for i in trace.visits(node):
            states.add(tuple(sorted(trace.store(i).items())))
    return frozenset(states)
