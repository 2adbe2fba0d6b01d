"""Program transformations: the abstraction at a computing point,
the auxiliary checking problems, and weakest preconditions of paths"""

import logging
from dataclasses import dataclass
from typing import Tuple

from .cfg import build_cfg
from .checker import ViolatingSuffix, apply_binary, evaluate
from .common import add_slots
from .itp import PredicateSite
from .syntax import (
    FALSE,
    Assert,
    Assign,
    Binary,
    BoolConst,
    Expr,
    Halt,
    If,
    IntConst,
    LabelSupply,
    Location,
    NodeId,
    Program,
    Unary,
    Var,
    While,
    conjoin,
    insert_at,
    locate,
    negate,
    remove_statements,
    replace_condition,
    replace_statement,
    substitute,
)

logger = logging.getLogger(__name__)

Formula = Expr
"A boolean expression over program variables"


class NonlinearPath(Exception):
    def __init__(self, node: NodeId) -> None:
        self.node = node

    def __str__(self) -> str:
        return f"Path revisits computing point {self.node}."


@add_slots
@dataclass(frozen=True)
class AbstractionResult:
    abstract_program: Program
    site: PredicateSite
    inserted_nodes: Tuple[NodeId, ...]


def abstract(p: Program, site: PredicateSite) -> AbstractionResult:
    "Make the predicate's variables nondeterministic at its computing point"
    assert p == site.original, "site was computed for another program"
    return AbstractionResult(
        site.abstracted(), site, tuple(s.label for s in site.nondets())
    )


def strip(result: AbstractionResult) -> Program:
    "Undo ``abstract``, including the computing point marker"
    return remove_statements(
        result.abstract_program,
        set(result.inserted_nodes) | {result.site.computing_point},
    )


def _predicate(site: PredicateSite) -> Expr:
    stmt = site.original.statement(site.predicate_node)
    assert isinstance(stmt, (If, While))
    return stmt.cond


def _check_at_point(p: Program, site: PredicateSite, expr: Expr) -> Program:
    """Check ``expr`` on every visit of the computing point with
    ``if (!expr) { assert(false); }``. The old assertion becomes ``halt``:
    runs still end there, and only its verdict is dropped."""
    supply = LabelSupply(site.abstracted())
    old = p.assertion
    p = replace_statement(
        p, old.label, [Halt(label=old.label, line=old.line)]
    )
    check = If(
        simplify(negate(expr)),
        (Assert(FALSE, label=supply()),),
        (),
        label=supply(),
    )
    loc = locate(p, site.computing_point)
    assert loc.block is not None
    return insert_at(p, Location(loc.block, loc.index + 1), [check])


def build_phat(p: Program, site: PredicateSite, b: bool) -> Program:
    """Check that the predicate is constantly ``not b``: assert that at the
    computing point and fix the branch to ``not b``.
    The assertion reads the original predicate, not the fixed branch."""
    assert p == site.original
    cond = _predicate(site)
    fixed = replace_condition(
        site.program, site.predicate_node, BoolConst(not b)
    )
    return _check_at_point(fixed, site, negate(cond) if b else cond)


def build_ptilde(p: Program, site: PredicateSite, b: bool) -> Program:
    "The program with the predicate replaced by the constant ``not b``"
    return replace_condition(p, site.predicate_node, BoolConst(not b))


def weakest_precondition(p: Program, pi: ViolatingSuffix) -> Formula:
    """Condition on the store at the start of ``pi`` under which following
    its path ends in a failing assertion. ``p`` is the program the path
    was observed in. Values chosen by ``*`` or read by ``input()`` along
    the way are substituted as observed."""
    g = build_cfg(p)
    start, *_, last = pi.path
    failing = g.nodes[last].stmt
    assert isinstance(failing, Assert)
    psi: Expr = negate(failing.expr)

    for i in range(len(pi.steps) - 2, 0, -1):
        node = pi.path[i]
        if node == start:
            raise NonlinearPath(start)
        stmt = g.nodes[node].stmt
        kind = g.kind(node)
        if kind == "assign":
            assert isinstance(stmt, Assign)
            psi = substitute(psi, {stmt.var: stmt.expr})
        elif kind in ("assign_nondet", "assign_input"):
            var = g.nodes[node].defines
            assert var is not None
            psi = substitute(psi, {var: IntConst(pi.store(i + 1)[var])})
        elif kind == "predicate":
            assert isinstance(stmt, (If, While))
            taken = bool(evaluate(stmt.cond, pi.store(i)))
            psi = conjoin(stmt.cond if taken else negate(stmt.cond), psi)
    return simplify(psi)


def build_wp_problem(
    p: Program, site: PredicateSite, psi: Formula
) -> Program:
    "Violations of this program are inputs reaching the point with ``psi``"
    assert p == site.original
    return _check_at_point(site.program, site, simplify(negate(psi)))


def simplify(e: Expr) -> Expr:
    "Constant folding; never changes the value of an expression"
    if isinstance(e, Unary):
        operand = simplify(e.operand)
        if e.op == "!":
            return negate(operand)
        if isinstance(operand, IntConst):
            return IntConst(int(apply_binary("-", 0, operand.value)))
        return Unary(e.op, operand)
    elif isinstance(e, (IntConst, BoolConst, Var)):
        return e

    left, right = simplify(e.left), simplify(e.right)
    if e.op in ("&&", "||"):
        # the left operand decides whether the right one is evaluated
        absorbing = e.op == "||"
        if isinstance(left, BoolConst):
            return left if left.value is absorbing else right
        if isinstance(right, BoolConst) and right.value is not absorbing:
            return left
    elif isinstance(left, IntConst) and isinstance(right, IntConst):
        if e.op not in ("/", "%") or right.value != 0:
            value = apply_binary(e.op, left.value, right.value)
            if isinstance(value, bool):
                return BoolConst(value)
            return IntConst(value)
    return Binary(e.op, left, right)
