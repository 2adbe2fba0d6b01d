"Parse, validate and pretty-print MiniImp programs"

import logging
from typing import Any, Dict, Iterable, List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, UnexpectedToken

from .syntax import (
    ARITHMETIC_OPS,
    COMPARISON_OPS,
    LOGICAL_OPS,
    Assert,
    Assign,
    AssignInput,
    AssignNondet,
    Binary,
    Block,
    BoolConst,
    Decl,
    Definition,
    Expr,
    Halt,
    If,
    IntConst,
    Location,
    Program,
    Skip,
    Stmt,
    Unary,
    Var,
    While,
    block_at,
    number,
    used_vars,
    walk,
)

__all__ = [
    "DiagnosticError",
    "ParseError",
    "ValidationError",
    "parse",
    "pretty_print",
    "format_expr",
    "validate",
    "wrap",
]

logger = logging.getLogger(__name__)

GRAMMAR = r"""
start: decl* stmt+

decl: "int" NAME ["=" init] ";"

?init: INT              -> init_const
     | "-" INT          -> init_negative
     | "input" "(" ")"  -> init_input
     | "*"              -> init_nondet

?stmt: NAME "=" expr ";"                       -> assign
     | NAME "=" "*" ";"                        -> assign_nondet
     | NAME "=" "input" "(" ")" ";"            -> assign_input
     | "if" "(" expr ")" block ["else" block]  -> if_stmt
     | "while" "(" expr ")" block              -> while_stmt
     | "assert" "(" expr ")" ";"               -> assert_stmt
     | "skip" ";"                              -> skip
     | "halt" ";"                              -> halt

block: "{" stmt* "}"

?expr: disj
?disj: conj
     | disj "||" conj -> or_
?conj: cmp
     | conj "&&" cmp -> and_
?cmp: sum
    | sum "<" sum  -> lt
    | sum "<=" sum -> le
    | sum ">" sum  -> gt
    | sum ">=" sum -> ge
    | sum "==" sum -> eq
    | sum "!=" sum -> ne
?sum: prod
    | sum "+" prod -> add
    | sum "-" prod -> sub
?prod: unary
     | prod "*" unary -> mul
     | prod "/" unary -> div
     | prod "%" unary -> mod
?unary: atom
      | "-" unary -> neg
      | "!" unary -> not_
?atom: INT       -> int_lit
     | "true"    -> true_lit
     | "false"   -> false_lit
     | NAME      -> var
     | "(" expr ")"

%import common.CNAME -> NAME
%import common.INT
%import common.WS
COMMENT: /\/\/[^\n]*/
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(
    GRAMMAR,
    parser="lalr",
    propagate_positions=True,
    maybe_placeholders=True,
)

_INT_BITS = 64


def wrap(value: int) -> int:
    "Wrap an integer to the signed 64-bit range"
    half = 1 << (_INT_BITS - 1)
    return (value + half) % (1 << _INT_BITS) - half


class DiagnosticError(Exception):
    "A problem with a MiniImp source, located in the text"

    def __init__(self, line: int, message: str) -> None:
        super().__init__(message)
        self.line = line
        self.message = message


class ParseError(DiagnosticError):
    "Malformed token or grammar violation"

    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(line, message)
        self.column = column

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


class ValidationError(DiagnosticError):
    "Well-formed syntax that breaks a static rule of MiniImp"

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def _line(meta: Any) -> int:
    return getattr(meta, "line", 0)


def _binary(op: str) -> Any:
    def build(self: Any, meta: Any, left: Expr, right: Expr) -> Expr:
        return Binary(op, left, right)

    return build


@v_args(inline=True, meta=True)
class _ToSyntax(Transformer):  # type: ignore[type-arg]
    def start(self, meta: Any, *items: Any) -> Program:
        decls = tuple(i for i in items if isinstance(i, Decl))
        body = tuple(i for i in items if not isinstance(i, Decl))
        return Program(decls, body)

    def decl(self, meta: Any, name: Token, init: Optional[Tuple]) -> Decl:
        kind, value = init or ("const", 0)
        line = _line(meta)
        definition: Definition
        if kind == "input":
            definition = AssignInput(str(name), line=line)
        elif kind == "nondet":
            definition = AssignNondet(str(name), line=line)
        else:
            definition = Assign(str(name), IntConst(value), line=line)
        return Decl(str(name), definition)

    def init_const(self, meta: Any, value: Token) -> Tuple[str, int]:
        return ("const", wrap(int(value)))

    def init_negative(self, meta: Any, value: Token) -> Tuple[str, int]:
        return ("const", wrap(-int(value)))

    def init_input(self, meta: Any) -> Tuple[str, int]:
        return ("input", 0)

    def init_nondet(self, meta: Any) -> Tuple[str, int]:
        return ("nondet", 0)

    def assign(self, meta: Any, name: Token, e: Expr) -> Stmt:
        return Assign(str(name), e, line=_line(meta))

    def assign_nondet(self, meta: Any, name: Token) -> Stmt:
        return AssignNondet(str(name), line=_line(meta))

    def assign_input(self, meta: Any, name: Token) -> Stmt:
        return AssignInput(str(name), line=_line(meta))

    def if_stmt(
        self, meta: Any, cond: Expr, then: Block, orelse: Optional[Block]
    ) -> Stmt:
        return If(cond, then, orelse or (), line=_line(meta))

    def while_stmt(self, meta: Any, cond: Expr, body: Block) -> Stmt:
        return While(cond, body, line=_line(meta))

    def assert_stmt(self, meta: Any, e: Expr) -> Stmt:
        return Assert(e, line=_line(meta))

    def skip(self, meta: Any) -> Stmt:
        return Skip(line=_line(meta))

    def halt(self, meta: Any) -> Stmt:
        return Halt(line=_line(meta))

    def block(self, meta: Any, *stmts: Stmt) -> Block:
        return stmts

    or_ = _binary("||")
    and_ = _binary("&&")
    lt = _binary("<")
    le = _binary("<=")
    gt = _binary(">")
    ge = _binary(">=")
    eq = _binary("==")
    ne = _binary("!=")
    add = _binary("+")
    sub = _binary("-")
    mul = _binary("*")
    div = _binary("/")
    mod = _binary("%")

    def neg(self, meta: Any, operand: Expr) -> Expr:
        # Fold literals so that ``-5`` prints and re-parses as one constant
        if isinstance(operand, IntConst):
            return IntConst(wrap(-operand.value))
        return Unary("-", operand)

    def not_(self, meta: Any, operand: Expr) -> Expr:
        return Unary("!", operand)

    def int_lit(self, meta: Any, value: Token) -> Expr:
        return IntConst(wrap(int(value)))

    def true_lit(self, meta: Any) -> Expr:
        return BoolConst(True)

    def false_lit(self, meta: Any) -> Expr:
        return BoolConst(False)

    def var(self, meta: Any, name: Token) -> Expr:
        return Var(str(name))


def parse(source: str) -> Program:
    "Parse and validate. Raises ParseError or ValidationError."
    try:
        tree = _PARSER.parse(source)
    except UnexpectedInput as e:
        if _at_end(e):
            lines = source.splitlines() or [""]
            raise ParseError(
                len(lines), len(lines[-1]) + 1, "unexpected end of input"
            ) from e
        raise ParseError(
            e.line, e.column, _describe_unexpected(e)
        ) from e
    program = number(_ToSyntax().transform(tree))
    validate(program)
    logger.debug(
        "parsed program with %d declaration(s)", len(program.decls)
    )
    return program


def _at_end(e: UnexpectedInput) -> bool:
    # the LALR parser reports running out of input as a $END token
    return isinstance(e, UnexpectedEOF) or (
        isinstance(e, UnexpectedToken) and e.token.type == "$END"
    )


def _describe_unexpected(e: UnexpectedInput) -> str:
    token = getattr(e, "token", None)
    if token is not None:
        return f"unexpected token {str(token)!r}"
    char = getattr(e, "char", None)
    if char is not None:
        return f"unexpected character {char!r}"
    return "invalid syntax"  # pragma: no cover


def validate(p: Program) -> None:
    "Raise ValidationError on the first broken static rule"
    declared: Dict[str, int] = {}
    for d in p.decls:
        if d.name in declared:
            raise ValidationError(
                d.init.line, f"variable {d.name!r} declared twice"
            )
        declared[d.name] = d.init.line

    for _, s in walk(p):
        target = getattr(s, "var", None)
        for name in sorted(used_vars(s) | ({target} - {None})):
            if name not in declared:
                raise ValidationError(
                    s.line, f"undeclared variable {name!r}"
                )
        _check_types(s)

    asserts = [s for _, s in walk(p) if isinstance(s, Assert)]
    if len(asserts) != 1:
        raise ValidationError(
            asserts[1].line if asserts else 0,
            f"expected exactly one assert, found {len(asserts)}",
        )
    for loc, s in walk(p):
        if isinstance(s, (Assert, Halt)) and not _ends_block(p, loc):
            word = "assert" if isinstance(s, Assert) else "halt"
            raise ValidationError(
                s.line, f"{word} must be the last statement of its block"
            )


def _ends_block(p: Program, loc: Location) -> bool:
    assert loc.block is not None
    return loc.index == len(block_at(p, loc.block)) - 1


def _check_types(s: Stmt) -> None:
    if isinstance(s, Assign):
        _expect(s.expr, "int", s.line)
    elif isinstance(s, (If, While)):
        _expect(s.cond, "bool", s.line)
    elif isinstance(s, Assert):
        _expect(s.expr, "bool", s.line)


def _expect(e: Expr, expected: str, line: int) -> None:
    actual = type_of(e, line)
    if actual != expected:
        raise ValidationError(
            line,
            f"expected {expected} expression, got {actual}: {format_expr(e)}",
        )


def type_of(e: Expr, line: int = 0) -> str:
    if isinstance(e, (IntConst, Var)):
        return "int"
    elif isinstance(e, BoolConst):
        return "bool"
    elif isinstance(e, Unary):
        _expect(e.operand, "int" if e.op == "-" else "bool", line)
        return "int" if e.op == "-" else "bool"
    elif e.op in ARITHMETIC_OPS:
        _expect(e.left, "int", line)
        _expect(e.right, "int", line)
        return "int"
    elif e.op in LOGICAL_OPS:
        _expect(e.left, "bool", line)
        _expect(e.right, "bool", line)
        return "bool"
    else:
        assert e.op in COMPARISON_OPS
        if e.op in ("==", "!="):
            # equality is also defined between two booleans
            _expect(e.right, type_of(e.left, line), line)
        else:
            _expect(e.left, "int", line)
            _expect(e.right, "int", line)
        return "bool"


_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    **dict.fromkeys(COMPARISON_OPS, 3),
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
    "%": 5,
}
_UNARY = 6
_ATOM = 7


def format_expr(e: Expr) -> str:
    return _fmt(e)[0]


def _fmt(e: Expr) -> Tuple[str, int]:
    if isinstance(e, IntConst):
        return str(e.value), (_UNARY if e.value < 0 else _ATOM)
    elif isinstance(e, BoolConst):
        return ("true" if e.value else "false"), _ATOM
    elif isinstance(e, Var):
        return e.name, _ATOM
    elif isinstance(e, Unary):
        return e.op + _operand(e.operand, _UNARY), _UNARY
    else:
        prec = _PRECEDENCE[e.op]
        # left-associative, except comparisons which do not chain
        left_min = prec + 1 if e.op in COMPARISON_OPS else prec
        return (
            f"{_operand(e.left, left_min)} {e.op} "
            f"{_operand(e.right, prec + 1)}"
        ), prec


def _operand(e: Expr, minimum: int) -> str:
    text, prec = _fmt(e)
    return text if prec >= minimum else f"({text})"


_INDENT = "    "


def pretty_print(p: Program) -> str:
    "Canonical source text; parsing it gives back an equal program"
    return "".join(
        [f"int {d.name} = {_init_text(d.init)};\n" for d in p.decls]
        + list(_block_lines(p.body, 0))
    )


def format_stmt(s: Stmt) -> str:
    "One-line summary of a statement, as used in graph labels"
    if isinstance(s, If):
        return f"if ({format_expr(s.cond)})"
    elif isinstance(s, While):
        return f"while ({format_expr(s.cond)})"
    return "".join(_stmt_lines(s, 0)).strip()


def _init_text(d: Definition) -> str:
    if isinstance(d, AssignInput):
        return "input()"
    elif isinstance(d, AssignNondet):
        return "*"
    return format_expr(d.expr)


def _block_lines(block: Iterable[Stmt], depth: int) -> Iterable[str]:
    for s in block:
        yield from _stmt_lines(s, depth)


def _stmt_lines(s: Stmt, depth: int) -> List[str]:
    pad = _INDENT * depth
    if isinstance(s, Assign):
        return [f"{pad}{s.var} = {format_expr(s.expr)};\n"]
    elif isinstance(s, AssignNondet):
        return [f"{pad}{s.var} = *;\n"]
    elif isinstance(s, AssignInput):
        return [f"{pad}{s.var} = input();\n"]
    elif isinstance(s, Assert):
        return [f"{pad}assert({format_expr(s.expr)});\n"]
    elif isinstance(s, Skip):
        return [f"{pad}skip;\n"]
    elif isinstance(s, Halt):
        return [f"{pad}halt;\n"]
    elif isinstance(s, While):
        return [
            f"{pad}while ({format_expr(s.cond)}) {{\n",
            *_block_lines(s.body, depth + 1),
            f"{pad}}}\n",
        ]
    else:
        lines = [
            f"{pad}if ({format_expr(s.cond)}) {{\n",
            *_block_lines(s.then, depth + 1),
        ]
        if s.orelse:
            lines += [
                f"{pad}}} else {{\n",
                *_block_lines(s.orelse, depth + 1),
            ]
        return lines + [f"{pad}}}\n"]
