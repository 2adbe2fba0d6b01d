"""Seeded generator of small loop programs.

Programs read two inputs, keep loop bounds small and never divide, so
every one of them terminates quickly for every input in the default
domain. Loop counters never appear in branch predicates."""

import random
from typing import Iterator, List, Tuple

_INPUTS = ("p", "q")
_DATA = ("u", "v", "w")
_COUNTERS = ("i", "k")
_COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")


class _Writer:
    "Source text for one program, drawn from one random stream"

    def __init__(self, rng: random.Random) -> None:
        self.rng = rng
        self.counters = list(_COUNTERS)

    def operand(self) -> str:
        if self.rng.random() < 0.3:
            return str(self.rng.randint(-2, 3))
        return self.rng.choice(_DATA + _INPUTS)

    def expr(self) -> str:
        left, right = self.operand(), self.operand()
        return f"{left} {self.rng.choice('+-*')} {right}"

    def assign(self) -> str:
        return f"{self.rng.choice(_DATA)} = {self.expr()};"

    def condition(self) -> str:
        var = self.rng.choice(_DATA + _INPUTS)
        op = self.rng.choice(_COMPARISONS)
        return f"{var} {op} {self.rng.randint(-2, 3)}"

    def branch(self, depth: int) -> str:
        then = " ".join(self.block(depth + 1))
        if self.rng.random() < 0.5:
            return f"if ({self.condition()}) {{ {then} }}"
        orelse = " ".join(self.block(depth + 1))
        return f"if ({self.condition()}) {{ {then} }} else {{ {orelse} }}"

    def loop(self, depth: int) -> str:
        counter = self.counters.pop()
        bound = self.rng.randint(1, 2)
        body = " ".join(self.block(depth + 1))
        return (
            f"{counter} = 0; while ({counter} < {bound}) "
            f"{{ {body} {counter} = {counter} + 1; }}"
        )

    def statement(self, depth: int) -> str:
        roll = self.rng.random()
        if depth < 2 and self.counters and roll < 0.35:
            return self.loop(depth)
        elif depth < 2 and roll < 0.7:
            return self.branch(depth)
        return self.assign()

    def block(self, depth: int) -> List[str]:
        return [
            self.statement(depth) for _ in range(self.rng.randint(1, 2))
        ]

    def program(self) -> str:
        decls = [f"int {v} = input();" for v in _INPUTS]
        decls += [f"int {v} = 0;" for v in _DATA + _COUNTERS]
        body = [self.statement(0) for _ in range(self.rng.randint(2, 4))]
        a, b = self.rng.sample(_DATA, 2)
        op = self.rng.choice(_COMPARISONS)
        check = f"assert({a} + {b} {op} {self.rng.randint(-2, 3)});"
        return "\n".join(decls + body + [check]) + "\n"


def generate(seed: int, index: int) -> str:
    "Source text of one program, fully determined by its seed and index"
    return _Writer(random.Random(f"{seed}:{index}")).program()


def corpus(seed: int, count: int) -> Iterator[Tuple[str, str]]:
    "Names and sources of ``count`` generated programs"
    for index in range(count):
        yield f"gen-{seed}-{index:02d}.mi", generate(seed, index)
