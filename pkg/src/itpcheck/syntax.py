"The MiniImp abstract syntax tree and structural program editing"

from dataclasses import dataclass, field, replace
from functools import reduce
from typing import (
    Callable,
    Collection,
    FrozenSet,
    Iterator,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .common import add_slots

NodeId = int
"Label of a statement, which doubles as the id of its CFG node."

ENTRY: NodeId = 0
EXIT: NodeId = -1

ARITHMETIC_OPS = frozenset(["+", "-", "*", "/", "%"])
COMPARISON_OPS = frozenset(["<", "<=", ">", ">=", "==", "!="])
LOGICAL_OPS = frozenset(["&&", "||"])


@add_slots
@dataclass(frozen=True)
class IntConst:
    value: int


@add_slots
@dataclass(frozen=True)
class BoolConst:
    value: bool


@add_slots
@dataclass(frozen=True)
class Var:
    name: str


@add_slots
@dataclass(frozen=True)
class Unary:
    op: str
    "Either ``-`` (negation) or ``!`` (logical not)"
    operand: "Expr"


@add_slots
@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntConst, BoolConst, Var, Unary, Binary]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def free_vars(e: Expr) -> FrozenSet[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    elif isinstance(e, Unary):
        return free_vars(e.operand)
    elif isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    else:
        return frozenset()


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    "Simultaneously replace variables by expressions"
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    elif isinstance(e, Unary):
        return Unary(e.op, substitute(e.operand, mapping))
    elif isinstance(e, Binary):
        return Binary(
            e.op, substitute(e.left, mapping), substitute(e.right, mapping)
        )
    else:
        return e


def negate(e: Expr) -> Expr:
    if isinstance(e, BoolConst):
        return BoolConst(not e.value)
    elif isinstance(e, Unary) and e.op == "!":
        return e.operand
    return Unary("!", e)


def conjoin(a: Expr, b: Expr) -> Expr:
    return Binary("&&", a, b)


# Statements. ``label`` and ``line`` identify a statement but are not part
# of its structure: two programs that differ only in labels are equal.


@add_slots
@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class AssignNondet:
    "``x = *;``"
    var: str
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class AssignInput:
    "``x = input();``"
    var: str
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...]
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class While:
    cond: Expr
    body: Tuple["Stmt", ...]
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class Assert:
    expr: Expr
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class Skip:
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


@add_slots
@dataclass(frozen=True)
class Halt:
    "``halt;`` ends the run without a verdict, like a passing assertion"
    label: NodeId = field(default=0, compare=False)
    line: int = field(default=0, compare=False)


Stmt = Union[
    Assign, AssignNondet, AssignInput, If, While, Assert, Skip, Halt
]
Definition = Union[Assign, AssignNondet, AssignInput]
Block = Tuple[Stmt, ...]


@add_slots
@dataclass(frozen=True)
class Decl:
    "A declaration, desugared into its initializing definition"
    name: str
    init: Definition


Arm = str
"Which block of a compound statement: ``then``, ``else`` or ``body``"

_ARM_FIELDS = {"then": "then", "else": "orelse", "body": "body"}

BlockPath = Tuple[Tuple[int, Arm], ...]
"Route from the top-level body to a nested block"


@add_slots
@dataclass(frozen=True)
class Location:
    """Position of a statement, or of a gap between statements when used
    as an insertion point. ``block`` is None for the declaration section."""

    block: Optional[BlockPath]
    index: int


BODY_START = Location((), 0)


@add_slots
@dataclass(frozen=True)
class Program:
    decls: Tuple[Decl, ...]
    body: Block

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.decls)

    @property
    def assert_site(self) -> Location:
        return next(
            loc for loc, s in walk(self) if isinstance(s, Assert)
        )

    @property
    def assertion(self) -> Assert:
        return next(s for _, s in walk(self) if isinstance(s, Assert))

    def statement(self, label: NodeId) -> Stmt:
        return statement_at(self, locate(self, label))

    def max_label(self) -> NodeId:
        return max((s.label for _, s in walk(self)), default=ENTRY)


def walk(p: Program) -> Iterator[Tuple[Location, Stmt]]:
    "All statements in preorder, declaration initializers first"
    for i, d in enumerate(p.decls):
        yield Location(None, i), d.init
    yield from _walk_block(p.body, ())


def _walk_block(
    block: Block, path: BlockPath
) -> Iterator[Tuple[Location, Stmt]]:
    for i, s in enumerate(block):
        yield Location(path, i), s
        for arm, sub in _arms(s):
            yield from _walk_block(sub, path + ((i, arm),))


def _arms(s: Stmt) -> Iterator[Tuple[Arm, Block]]:
    if isinstance(s, If):
        yield "then", s.then
        yield "else", s.orelse
    elif isinstance(s, While):
        yield "body", s.body


def block_at(p: Program, path: BlockPath) -> Block:
    return reduce(
        lambda block, step: getattr(block[step[0]], _ARM_FIELDS[step[1]]),
        path,
        p.body,
    )


def statement_at(p: Program, loc: Location) -> Stmt:
    if loc.block is None:
        return p.decls[loc.index].init
    return block_at(p, loc.block)[loc.index]


def locate(p: Program, label: NodeId) -> Location:
    for loc, s in walk(p):
        if s.label == label:
            return loc
    raise KeyError(label)


def enclosing_statements(loc: Location) -> Iterator[Location]:
    "Locations of the compound statements around a location, innermost last"
    path = loc.block or ()
    for depth in range(len(path)):
        yield Location(path[:depth], path[depth][0])


def _update_block(
    block: Block, path: BlockPath, f: Callable[[Block], Block]
) -> Block:
    if not path:
        return f(block)
    (index, arm), rest = path[0], path[1:]
    stmt = block[index]
    attr = _ARM_FIELDS[arm]
    updated = replace(  # type: ignore[type-var]
        stmt, **{attr: _update_block(getattr(stmt, attr), rest, f)}
    )
    return block[:index] + (updated,) + block[index + 1 :]  # noqa


def normalize_point(point: Location) -> Location:
    """Points inside the declaration section move to the start of the body.
    Initializers use no variables, so the move never changes a value."""
    return BODY_START if point.block is None else point


def insert_at(p: Program, point: Location, stmts: Sequence[Stmt]) -> Program:
    point = normalize_point(point)
    assert point.block is not None
    return replace(
        p,
        body=_update_block(
            p.body,
            point.block,
            lambda b: b[: point.index] + tuple(stmts) + b[point.index :],
        ),
    )


def insert_before(
    p: Program, label: NodeId, stmts: Sequence[Stmt]
) -> Program:
    return insert_at(p, locate(p, label), stmts)


def replace_statement(
    p: Program, label: NodeId, stmts: Sequence[Stmt]
) -> Program:
    "Replace the labelled statement by zero or more statements"
    loc = locate(p, label)
    if loc.block is None:
        [new] = stmts
        assert isinstance(new, (Assign, AssignInput, AssignNondet))
        decl = p.decls[loc.index]
        return replace(
            p,
            decls=p.decls[: loc.index]
            + (replace(decl, init=new),)
            + p.decls[loc.index + 1 :],  # noqa
        )
    return replace(
        p,
        body=_update_block(
            p.body,
            loc.block,
            lambda b: b[: loc.index] + tuple(stmts) + b[loc.index + 1 :],
        ),
    )


def replace_condition(p: Program, label: NodeId, cond: Expr) -> Program:
    stmt = p.statement(label)
    assert isinstance(stmt, (If, While))
    return replace_statement(p, label, [replace(stmt, cond=cond)])


def remove_statements(p: Program, labels: Collection[NodeId]) -> Program:
    def _prune(block: Block) -> Block:
        return tuple(
            _prune_arms(s) for s in block if s.label not in labels
        )

    def _prune_arms(s: Stmt) -> Stmt:
        if isinstance(s, If):
            return replace(s, then=_prune(s.then), orelse=_prune(s.orelse))
        elif isinstance(s, While):
            return replace(s, body=_prune(s.body))
        return s

    return replace(p, body=_prune(p.body))


def number(p: Program) -> Program:
    "Relabel every statement 1, 2, 3, ... in preorder"
    counter = iter(range(1, 1 << 62))

    def _block(block: Block) -> Block:
        return tuple(map(_stmt, block))

    def _stmt(s: Stmt) -> Stmt:
        label = next(counter)
        if isinstance(s, If):
            then = _block(s.then)
            return replace(s, label=label, then=then, orelse=_block(s.orelse))
        elif isinstance(s, While):
            return replace(s, label=label, body=_block(s.body))
        return replace(s, label=label)  # type: ignore[type-var]

    decls = tuple(
        replace(d, init=_stmt(d.init)) for d in p.decls  # type: ignore
    )
    return Program(decls, _block(p.body))


class LabelSupply:
    "Hands out labels that do not occur in a program yet"

    __slots__ = ("_next",)

    def __init__(self, p: Program) -> None:
        self._next = p.max_label() + 1

    def __call__(self) -> NodeId:
        label, self._next = self._next, self._next + 1
        return label


def defined_var(s: Stmt) -> Optional[str]:
    if isinstance(s, (Assign, AssignInput, AssignNondet)):
        return s.var
    return None


def used_vars(s: Stmt) -> FrozenSet[str]:
    if isinstance(s, Assign):
        return free_vars(s.expr)
    elif isinstance(s, (If, While)):
        return free_vars(s.cond)
    elif isinstance(s, Assert):
        return free_vars(s.expr)
    return frozenset()
