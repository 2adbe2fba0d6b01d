"""Control-flow graphs and the graph facts the analyses rely on:
dominance, post-dominance, control dependence and natural loops"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import (
    Collection,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Set,
    Tuple,
)

import networkx as nx

from .common import add_slots, closure
from .frontend import format_stmt
from .syntax import (
    ENTRY,
    EXIT,
    Assert,
    Assign,
    AssignInput,
    AssignNondet,
    Block,
    Halt,
    If,
    Location,
    NodeId,
    Program,
    Skip,
    Stmt,
    While,
    defined_var,
    used_vars,
    walk,
)

logger = logging.getLogger(__name__)

NodeKind = str
"""entry, exit, assign, assign_nondet, assign_input, predicate, assert,
halt or skip"""

EdgeLabel = str
"One of fall, true, false"


@add_slots
@dataclass(frozen=True)
class Node:
    id: NodeId
    kind: NodeKind
    stmt: Optional[Stmt] = field(default=None, compare=False)

    @property
    def defines(self) -> Optional[str]:
        return None if self.stmt is None else defined_var(self.stmt)

    @property
    def uses(self) -> FrozenSet[str]:
        return frozenset() if self.stmt is None else used_vars(self.stmt)

    @property
    def text(self) -> str:
        if self.stmt is None:
            return self.kind.upper()
        return format_stmt(self.stmt)


@add_slots
@dataclass(frozen=True)
class Cfg:
    nodes: Mapping[NodeId, Node]
    ast_link: Mapping[NodeId, Location]
    graph: nx.MultiDiGraph = field(compare=False, repr=False)
    entry: NodeId = ENTRY
    exit: NodeId = EXIT

    def successors(self, n: NodeId) -> Tuple[NodeId, ...]:
        return tuple(sorted(set(self.graph.successors(n))))

    def predecessors(self, n: NodeId) -> Tuple[NodeId, ...]:
        return tuple(sorted(set(self.graph.predecessors(n))))

    def edges(self) -> List[Tuple[NodeId, NodeId, EdgeLabel]]:
        return sorted(self.graph.edges(keys=True))

    def branch(self, n: NodeId, outcome: bool) -> NodeId:
        "Target of the true or false edge of a predicate node"
        key = "true" if outcome else "false"
        return next(
            dst for _, dst, k in self.graph.out_edges(n, keys=True) if k == key
        )

    def step(self, n: NodeId) -> NodeId:
        "The only successor of a non-predicate node"
        [dst] = self.graph.successors(n)
        return dst  # type: ignore[no-any-return]

    @property
    def predicates(self) -> Tuple[NodeId, ...]:
        return tuple(
            sorted(i for i, n in self.nodes.items() if n.kind == "predicate")
        )

    def kind(self, n: NodeId) -> NodeKind:
        return self.nodes[n].kind

    def __len__(self) -> int:
        return len(self.nodes)


def _kind(s: Stmt) -> NodeKind:
    if isinstance(s, Assign):
        return "assign"
    elif isinstance(s, AssignNondet):
        return "assign_nondet"
    elif isinstance(s, AssignInput):
        return "assign_input"
    elif isinstance(s, (If, While)):
        return "predicate"
    elif isinstance(s, Assert):
        return "assert"
    elif isinstance(s, Halt):
        return "halt"
    else:
        assert isinstance(s, Skip)
        return "skip"


def build_cfg(p: Program) -> Cfg:
    nodes = {ENTRY: Node(ENTRY, "entry"), EXIT: Node(EXIT, "exit")}
    ast_link: Dict[NodeId, Location] = {}
    for loc, s in walk(p):
        nodes[s.label] = Node(s.label, _kind(s), s)
        ast_link[s.label] = loc

    graph = nx.MultiDiGraph()
    graph.add_nodes_from(sorted(nodes))
    first = _link_block(graph, p.body, EXIT)
    for d in reversed(p.decls):
        graph.add_edge(d.init.label, first, key="fall")
        first = d.init.label
    graph.add_edge(ENTRY, first, key="fall")
    return Cfg(nodes, ast_link, graph)


def _link_block(graph: nx.MultiDiGraph, block: Block, after: NodeId) -> NodeId:
    "Link a block ahead of ``after``, returning the first node of the block"
    for s in reversed(block):
        if isinstance(s, While):
            body = _link_block(graph, s.body, s.label)
            graph.add_edge(s.label, body, "true")
            graph.add_edge(s.label, after, "false")
        elif isinstance(s, If):
            then = _link_block(graph, s.then, after)
            orelse = _link_block(graph, s.orelse, after)
            graph.add_edge(s.label, then, "true")
            graph.add_edge(s.label, orelse, "false")
        elif isinstance(s, (Assert, Halt)):
            graph.add_edge(s.label, EXIT, "fall")
        else:
            graph.add_edge(s.label, after, "fall")
        after = s.label
    return after


def _idom_chains(
    graph: nx.MultiDiGraph, start: NodeId
) -> Dict[NodeId, FrozenSet[NodeId]]:
    idom = nx.immediate_dominators(graph, start)
    chains: Dict[NodeId, FrozenSet[NodeId]] = {}

    def chain(n: NodeId) -> FrozenSet[NodeId]:
        if n not in chains:
            parent = idom.get(n, n)
            chains[n] = frozenset([n]) | (
                frozenset() if parent == n else chain(parent)
            )
        return chains[n]

    # some networkx versions leave ``start`` out of the mapping
    for n in sorted(set(idom) | {start}):
        chain(n)
    return chains


def post_dominators(g: Cfg) -> Dict[NodeId, FrozenSet[NodeId]]:
    "Reflexive post-dominator sets"
    return _idom_chains(g.graph.reverse(copy=True), g.exit)


def dominators(g: Cfg) -> Dict[NodeId, FrozenSet[NodeId]]:
    "Reflexive dominator sets"
    return _idom_chains(g.graph, g.entry)


def immediate_post_dominator(
    pdom: Mapping[NodeId, FrozenSet[NodeId]], n: NodeId
) -> Optional[NodeId]:
    strict = pdom[n] - {n}
    # the nearest one is post-dominated by all the others
    return max(strict, key=lambda m: len(pdom[m]), default=None)


def nearest_common_post_dominator(
    g: Cfg,
    ns: Collection[NodeId],
    pdom: Optional[Mapping[NodeId, FrozenSet[NodeId]]] = None,
) -> NodeId:
    """The nearest node strictly post-dominating every node in ``ns``.
    For a single node this is its immediate post-dominator."""
    assert ns, "need at least one node"
    pdom = pdom or post_dominators(g)
    common = reduce(
        frozenset.intersection, (pdom[n] - {n} for n in ns)
    )
    # EXIT post-dominates everything, so ``common`` is never empty
    # and post-dominance orders it as a chain.
    return max(common, key=lambda m: len(pdom[m]))


def control_dependence(
    g: Cfg, pdom: Optional[Mapping[NodeId, FrozenSet[NodeId]]] = None
) -> Dict[NodeId, FrozenSet[NodeId]]:
    "For each node, the predicates it is directly control dependent on"
    pdom = pdom or post_dominators(g)
    deps: Dict[NodeId, Set[NodeId]] = {n: set() for n in g.nodes}
    for src, dst, _ in g.edges():
        if g.kind(src) != "predicate" or dst in pdom[src] - {src}:
            continue
        stop = immediate_post_dominator(pdom, src)
        runner: Optional[NodeId] = dst
        while runner is not None and runner != stop:
            deps[runner].add(src)
            runner = immediate_post_dominator(pdom, runner)
    return {n: frozenset(d) for n, d in deps.items()}


def transitively_controls(
    cd: Mapping[NodeId, FrozenSet[NodeId]], n: NodeId
) -> FrozenSet[NodeId]:
    "All predicates controlling ``n``, directly or through other predicates"
    return closure(cd[n], cd.__getitem__)


@add_slots
@dataclass(frozen=True)
class Loop:
    header: NodeId
    body: FrozenSet[NodeId]
    back_edges: FrozenSet[Tuple[NodeId, NodeId]]
    parent: Optional["Loop"] = field(default=None, compare=False)

    def __contains__(self, n: object) -> bool:
        return n in self.body

    @property
    def depth(self) -> int:
        return 1 if self.parent is None else 1 + self.parent.depth


def natural_loops(
    g: Cfg, dom: Optional[Mapping[NodeId, FrozenSet[NodeId]]] = None
) -> List[Loop]:
    "One loop per header, outer loops before inner ones"
    dom = dom or dominators(g)
    back_edges: Dict[NodeId, Set[Tuple[NodeId, NodeId]]] = {}
    for src, dst, _ in g.edges():
        if dst in dom.get(src, ()):
            back_edges.setdefault(dst, set()).add((src, dst))

    bodies = {
        header: _loop_body(g, header, edges)
        for header, edges in back_edges.items()
    }
    loops: Dict[NodeId, Loop] = {}
    for header in sorted(bodies, key=lambda h: (-len(bodies[h]), h)):
        parent = min(
            (
                loops[h]
                for h in loops
                if header in bodies[h] and h != header
            ),
            key=lambda lp: len(lp.body),
            default=None,
        )
        loops[header] = Loop(
            header, bodies[header], frozenset(back_edges[header]), parent
        )
    logger.debug("found %d natural loop(s)", len(loops))
    return sorted(loops.values(), key=lambda lp: (lp.depth, lp.header))


def _loop_body(
    g: Cfg, header: NodeId, edges: Iterable[Tuple[NodeId, NodeId]]
) -> FrozenSet[NodeId]:
    def back(n: NodeId) -> Iterable[NodeId]:
        return () if n == header else g.predecessors(n)

    return closure((src for src, _ in edges), back) | {header}


def loops_enclosing(loops: Iterable[Loop], n: NodeId) -> List[Loop]:
    return [lp for lp in loops if n in lp.body]


def to_dot(g: Cfg, loops: Iterable[Loop] = ()) -> str:
    "Graphviz text. Loops become nested clusters."
    loops = list(loops)
    innermost: Dict[NodeId, Loop] = {}
    for lp in sorted(loops, key=lambda lp: lp.depth):
        for n in lp.body:
            innermost[n] = lp

    lines = ["digraph cfg {", '  node [shape=box, fontname="monospace"];']
    lines.extend(_dot_nodes(g, innermost, None, loops, "  "))
    for src, dst, label in g.edges():
        attrs = "" if label == "fall" else f' [label="{label}"]'
        lines.append(f"  n{_dot_id(src)} -> n{_dot_id(dst)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_nodes(
    g: Cfg,
    innermost: Mapping[NodeId, Loop],
    parent: Optional[Loop],
    loops: List[Loop],
    indent: str,
) -> Iterator[str]:
    for n in sorted(g.nodes):
        if innermost.get(n) is parent:
            node = g.nodes[n]
            label = f"{n}: {node.kind}: {node.text}".replace('"', '\\"')
            yield f'{indent}n{_dot_id(n)} [label="{label}"];'
    for lp in loops:
        if lp.parent is parent:
            yield f"{indent}subgraph cluster_{lp.header} {{"
            yield f'{indent}  label="loop {lp.header}";'
            yield from _dot_nodes(g, innermost, lp, loops, indent + "  ")
            yield f"{indent}}}"


def _dot_id(n: NodeId) -> str:
    return "exit" if n == EXIT else str(n)
