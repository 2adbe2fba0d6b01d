"""Classical dataflow: reaching definitions, def-use closure,
live variables and backward slicing with respect to the assertion"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import (
    Any,
    Callable,
    Collection,
    Deque,
    Dict,
    FrozenSet,
    Iterable,
    Mapping,
    Optional,
    Set,
    Tuple,
)

from .cfg import Cfg, control_dependence
from .common import add_slots, closure
from .syntax import (
    Assert,
    Block,
    Halt,
    If,
    NodeId,
    Program,
    Skip,
    Stmt,
    While,
)

logger = logging.getLogger(__name__)

DefSite = Tuple[str, NodeId]
Facts = FrozenSet[Any]


@add_slots
@dataclass(frozen=True)
class DefUse:
    defs: Mapping[str, FrozenSet[NodeId]]
    reach_in: Mapping[NodeId, FrozenSet[DefSite]]
    reach_out: Mapping[NodeId, FrozenSet[DefSite]]
    uses: Mapping[NodeId, FrozenSet[str]]

    def reaching(
        self, names: Collection[str], node: NodeId
    ) -> FrozenSet[NodeId]:
        "Definitions of ``names`` reaching the entry of ``node``"
        return frozenset(d for v, d in self.reach_in[node] if v in names)

    def closure(
        self, names: Collection[str], node: NodeId
    ) -> FrozenSet[NodeId]:
        return du_closure(self, names, node)


@add_slots
@dataclass(frozen=True)
class Liveness:
    live_in: Mapping[NodeId, FrozenSet[str]]
    live_out: Mapping[NodeId, FrozenSet[str]]


def _solve(
    order: Iterable[NodeId],
    inputs: Callable[[NodeId], Iterable[NodeId]],
    outputs: Callable[[NodeId], Iterable[NodeId]],
    transfer: Callable[[NodeId, Facts], Facts],
) -> Tuple[Dict[NodeId, Facts], Dict[NodeId, Facts]]:
    "May-analysis worklist. ``inputs`` feed a node, ``outputs`` read it."
    nodes = list(order)
    before: Dict[NodeId, Facts] = {n: frozenset() for n in nodes}
    after = {n: transfer(n, frozenset()) for n in nodes}
    work: Deque[NodeId] = deque(nodes)
    queued = set(nodes)
    steps = 0
    while work:
        n = work.popleft()
        queued.discard(n)
        steps += 1
        joined = frozenset().union(
            *(after[m] for m in inputs(n) if m in after)
        )
        before[n] = joined
        result = transfer(n, joined)
        if result != after[n]:
            after[n] = result
            for m in outputs(n):
                if m in after and m not in queued:
                    work.append(m)
                    queued.add(m)
    logger.debug("dataflow fixed point after %d step(s)", steps)
    return before, after


def reaching_definitions(g: Cfg) -> DefUse:
    defs: Dict[str, Set[NodeId]] = {}
    for n, node in sorted(g.nodes.items()):
        if node.defines is not None:
            defs.setdefault(node.defines, set()).add(n)
    all_defs = {v: frozenset((v, d) for d in ds) for v, ds in defs.items()}

    def transfer(n: NodeId, reach: FrozenSet[DefSite]) -> FrozenSet[DefSite]:
        var = g.nodes[n].defines
        if var is None:
            return reach
        return (reach - all_defs[var]) | {(var, n)}

    reach_in, reach_out = _solve(
        sorted(g.nodes), g.predecessors, g.successors, transfer
    )
    return DefUse(
        defs={v: frozenset(ds) for v, ds in sorted(defs.items())},
        reach_in=reach_in,
        reach_out=reach_out,
        uses={n: node.uses for n, node in g.nodes.items()},
    )


def du_closure(
    du: DefUse, names: Collection[str], node: NodeId
) -> FrozenSet[NodeId]:
    """Definitions of ``names`` reaching ``node``, closed under the
    definitions reaching the uses of every definition in the set"""
    return closure(
        du.reaching(names, node), lambda d: du.reaching(du.uses[d], d)
    )


def _region(g: Cfg, seed: NodeId, barrier: Optional[NodeId]) -> Set[NodeId]:
    "Nodes reaching ``seed`` without passing through ``barrier`` on the way"
    region = {seed}
    todo = list(g.predecessors(seed))
    while todo:
        n = todo.pop()
        if n in region:
            continue
        region.add(n)
        if n != barrier:
            todo.extend(g.predecessors(n))
    return region


def live_variables(
    g: Cfg,
    seed: Tuple[Collection[str], NodeId],
    identity_nodes: Collection[NodeId] = frozenset(),
    barrier: Optional[NodeId] = None,
) -> Liveness:
    """Backward liveness of the seed variables at the seed node.

    Only paths ending at the first visit of the seed are followed, and
    none of them passes backward through ``barrier``. Nodes in
    ``identity_nodes`` neither use nor define anything."""
    names, target = seed
    names = frozenset(names)
    region = _region(g, target, barrier)

    def transfer(n: NodeId, live: FrozenSet[str]) -> FrozenSet[str]:
        if n == target:
            return names
        if n in identity_nodes:
            return live
        node = g.nodes[n]
        return node.uses | (live - {node.defines})

    def successors(n: NodeId) -> Iterable[NodeId]:
        return [
            s
            for s in g.successors(n)
            if s in region and (s != barrier or s == target)
        ]

    live_out, live_in = _solve(
        sorted(region, reverse=True), successors, g.predecessors, transfer
    )
    # callers read the barrier even when it cannot reach the seed
    if barrier is not None and barrier not in region:
        live_out[barrier] = frozenset()
        live_in[barrier] = frozenset()
    return Liveness(live_in=live_in, live_out=live_out)


def backward_slice(
    p: Program, g: Cfg, du: Optional[DefUse] = None
) -> FrozenSet[NodeId]:
    "Closure of data and control dependence from the assertion"
    du = du or reaching_definitions(g)
    cd = control_dependence(g)
    result = closure(
        [p.assertion.label], lambda n: du.reaching(du.uses[n], n) | cd[n]
    )
    logger.debug(
        "backward slice keeps %d of %d node(s)", len(result), len(g)
    )
    return result


def slice_program(p: Program, nodes: Collection[NodeId]) -> Program:
    """Statements outside ``nodes`` become ``skip``, except ``halt`` which
    decides where runs end.
    Declaration initializers are kept: they carry no dependencies."""

    def _block(block: Block) -> Block:
        return tuple(map(_stmt, block))

    def _stmt(s: Stmt) -> Stmt:
        if s.label not in nodes and not isinstance(s, (Assert, Halt)):
            return Skip(label=s.label, line=s.line)
        elif isinstance(s, If):
            return replace(s, then=_block(s.then), orelse=_block(s.orelse))
        elif isinstance(s, While):
            return replace(s, body=_block(s.body))
        return s

    return replace(p, body=_block(p.body))
