"""Extended value-impacting nodes, value bases and value-changing loops"""

import logging
from dataclasses import dataclass
from typing import (
    Collection,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Set,
    Tuple,
)

from .cfg import (
    Cfg,
    Loop,
    control_dependence,
    loops_enclosing,
    transitively_controls,
)
from .common import add_slots
from .dataflow import DefUse
from .syntax import NodeId

logger = logging.getLogger(__name__)

Target = Tuple[FrozenSet[str], NodeId]

_DEFINITIONS = frozenset(["assign", "assign_nondet", "assign_input"])
_SOURCES = frozenset(["assign_nondet", "assign_input"])

# marks a path reaching the target without passing an impacting node
_NONE = None


@add_slots
@dataclass(frozen=True)
class Evi:
    target: Target
    nodes: FrozenSet[NodeId]
    value_base: FrozenSet[str]

    def inside(self, loop: Loop) -> FrozenSet[NodeId]:
        return self.nodes & loop.body


def extended_value_impacting(
    g: Cfg,
    du: DefUse,
    target: Tuple[Collection[str], NodeId],
    cd: Optional[Mapping[NodeId, FrozenSet[NodeId]]] = None,
) -> Evi:
    """Least set of nodes closed under the four inclusion rules:
    definitions in the def-use closure of the target, definitions feeding
    an included node, predicates whose branches disagree on the first
    included node before the target, and predicates controlling the
    target that share a definition with an included node."""
    names, loc = frozenset(target[0]), target[1]
    cd = cd or control_dependence(g)
    controlling = transitively_controls(cd, loc)
    feeds: Dict[NodeId, FrozenSet[NodeId]] = {}

    def feeding(n: NodeId) -> FrozenSet[NodeId]:
        if n not in feeds:
            feeds[n] = frozenset(
                d
                for d in du.closure(du.uses[n], n)
                if g.kind(d) in _DEFINITIONS
            )
        return feeds[n]

    nodes: Set[NodeId] = {
        d for d in du.closure(names, loc) if g.kind(d) in _DEFINITIONS
    }
    rounds = 0
    while True:
        rounds += 1
        grown = set(nodes)
        for t in nodes:
            grown |= feeding(t)
        first = _first_impacting(g, grown, loc)
        for c in g.predicates:
            if c in grown or c == loc:
                continue
            if _branches_disagree(g, c, first) or (
                c in controlling
                and any(feeding(t) & feeding(c) for t in grown if t != c)
            ):
                grown.add(c)
        if grown == nodes:
            break
        nodes = grown
    logger.debug(
        "EVI(%s, %d): %d node(s) after %d round(s)",
        ",".join(sorted(names)),
        loc,
        len(nodes),
        rounds,
    )
    frozen = frozenset(nodes)
    return Evi((names, loc), frozen, _value_base(g, du, names, loc, frozen))


def _first_impacting(
    g: Cfg, impacting: Collection[NodeId], target: NodeId
) -> Dict[NodeId, FrozenSet[Optional[NodeId]]]:
    """For each node, the impacting nodes met first on its paths to the
    target, with ``_NONE`` for a path meeting none. Nodes without a path
    to the target are left out."""
    first: Dict[NodeId, FrozenSet[Optional[NodeId]]] = {
        target: frozenset([_NONE])
    }
    changed = True
    while changed:
        changed = False
        for n in sorted(g.nodes):
            if n == target:
                continue
            if n in impacting:
                found: FrozenSet[Optional[NodeId]] = frozenset([n])
                if not any(s in first for s in g.successors(n)):
                    continue
            else:
                found = frozenset().union(
                    *(first[s] for s in g.successors(n) if s in first)
                )
                if not found:
                    continue
            if first.get(n) != found:
                first[n] = found
                changed = True
    return first


def _branches_disagree(
    g: Cfg, c: NodeId, first: Mapping[NodeId, FrozenSet[Optional[NodeId]]]
) -> bool:
    then, orelse = g.branch(c, True), g.branch(c, False)
    if then not in first or orelse not in first:
        return False
    pairs = ((first[then], first[orelse]), (first[orelse], first[then]))
    for one, other in pairs:
        for t in one:
            if t is not _NONE and t != c and other != {t}:
                return True
    return False


def _value_base(
    g: Cfg,
    du: DefUse,
    names: FrozenSet[str],
    loc: NodeId,
    nodes: FrozenSet[NodeId],
) -> FrozenSet[str]:
    sources = {
        v
        for n in nodes
        if g.kind(n) in _SOURCES
        for v in [g.nodes[n].defines]
        if v is not None
    }
    undefined = {
        v
        for n, used in [(loc, names)] + [(n, du.uses[n]) for n in nodes]
        for v in used
        if not du.reaching([v], n)
    }
    return frozenset(sources | undefined)


def value_base(evi: Evi, g: Cfg, du: DefUse) -> FrozenSet[str]:
    "Variables whose incoming values decide the values of the target"
    names, loc = evi.target
    return _value_base(g, du, names, loc, evi.nodes)


def value_changing(evi: Evi, loop: Loop) -> bool:
    "Some impacting node lies inside the loop and some lies outside"
    inside = evi.inside(loop)
    return bool(inside) and inside != evi.nodes


def contained(evi: Evi, loop: Loop) -> bool:
    "The alternative reading: impacting nodes exist and all lie inside"
    inside = evi.inside(loop)
    return bool(inside) and inside == evi.nodes


def value_changing_loops(evi: Evi, loops: Iterable[Loop]) -> List[Loop]:
    """The loops around the target along which its value may change.
    This answers for one slice; ``loop_profiles`` builds the per-loop
    profile that pairs the slices of X and Y."""
    return [
        lp
        for lp in loops_enclosing(loops, evi.target[1])
        if value_changing(evi, lp)
    ]


@add_slots
@dataclass(frozen=True)
class LoopValueProfile:
    loop: Loop
    changes_x: bool
    changes_y: bool
    vb_loop: FrozenSet[str]
    contained_x: bool
    contained_y: bool


def loop_profiles(
    evi_x: Evi,
    evi_y: Evi,
    loops: Iterable[Loop],
    g: Cfg,
    du: DefUse,
) -> List[LoopValueProfile]:
    "One profile per loop enclosing the common target of both slices"
    assert evi_x.target[1] == evi_y.target[1]
    cd = control_dependence(g)
    profiles = []
    for lp in loops_enclosing(loops, evi_x.target[1]):
        header = extended_value_impacting(
            g, du, (du.uses[lp.header], lp.header), cd
        )
        profiles.append(
            LoopValueProfile(
                loop=lp,
                changes_x=value_changing(evi_x, lp),
                changes_y=value_changing(evi_y, lp),
                vb_loop=header.value_base,
                contained_x=contained(evi_x, lp),
                contained_y=contained(evi_y, lp),
            )
        )
    return profiles
