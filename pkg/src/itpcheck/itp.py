"""Predicate computing points and the sufficient criteria telling
whether a predicate's outcome is irrelevant to the assertion"""

import logging
from dataclasses import dataclass, field
from typing import (
    Collection,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Tuple,
)

import networkx as nx

from .cfg import (
    Cfg,
    Loop,
    build_cfg,
    immediate_post_dominator,
    loops_enclosing,
    natural_loops,
    nearest_common_post_dominator,
    post_dominators,
)
from .common import add_slots
from .dataflow import (
    DefUse,
    backward_slice,
    live_variables,
    reaching_definitions,
    slice_program,
)
from .evslice import (
    Evi,
    LoopValueProfile,
    extended_value_impacting,
    loop_profiles,
    value_changing,
)
from .frontend import format_expr
from .syntax import (
    EXIT,
    AssignNondet,
    If,
    LabelSupply,
    Location,
    NodeId,
    Program,
    Skip,
    While,
    insert_at,
    insert_before,
    normalize_point,
    used_vars,
)

logger = logging.getLogger(__name__)

PostDominators = Mapping[NodeId, FrozenSet[NodeId]]


class NoDefinition(Exception):
    def __init__(self, var: str, node: NodeId) -> None:
        self.var = var
        self.node = node

    def __str__(self) -> str:
        return f"No definition of '{self.var}' reaches predicate {self.node}."


class NoComputingPoint(Exception):
    def __init__(self, node: NodeId) -> None:
        self.node = node

    def __str__(self) -> str:
        return f"No computing point found for predicate {self.node}."


class Unreachable(Exception):
    def __init__(self, node: NodeId) -> None:
        self.node = node

    def __str__(self) -> str:
        return f"Assertion unreachable from computing point {self.node}."


@add_slots
@dataclass(frozen=True)
class PredicateSite:
    predicate_node: NodeId
    y_vars: FrozenSet[str]
    computing_point: NodeId
    "Label of the ``skip`` inserted at the computing point"
    nondet_labels: Tuple[NodeId, ...]
    "Labels reserved for the ``y = *`` statements of the abstraction"
    source: str
    original: Program = field(compare=False, repr=False)
    program: Program = field(compare=False, repr=False)
    "The original program with the computing point inserted"

    def nondets(self) -> Tuple[AssignNondet, ...]:
        return tuple(
            AssignNondet(v, label=label)
            for v, label in zip(sorted(self.y_vars), self.nondet_labels)
        )

    def abstracted(self) -> Program:
        "The normalized program with Y made nondeterministic at the point"
        return insert_before(
            self.program, self.computing_point, self.nondets()
        )


@add_slots
@dataclass(frozen=True)
class Criterion:
    holds: bool
    witness: Tuple[str, ...] = ()
    "Offending variables, or loop headers for the loop criterion"

    @classmethod
    def disjoint(
        cls, a: Collection[str], b: Collection[str]
    ) -> "Criterion":
        common = tuple(sorted(set(a) & set(b)))
        return cls(not common, common)


@add_slots
@dataclass(frozen=True)
class CriteriaReport:
    site: PredicateSite
    x_vars: FrozenSet[str]
    z_vars: FrozenSet[str]
    evi_x: Evi
    evi_y: Evi
    c1: Criterion
    c2: Criterion
    c3: Criterion
    c4: Criterion
    loops: Tuple[LoopValueProfile, ...]
    payoff: int
    candidate: bool

    @property
    def y_vars(self) -> FrozenSet[str]:
        return self.site.y_vars

    @property
    def vb_x(self) -> FrozenSet[str]:
        return self.evi_x.value_base

    @property
    def vb_y(self) -> FrozenSet[str]:
        return self.evi_y.value_base

    @property
    def itp(self) -> bool:
        return all(c.holds for c in (self.c1, self.c2, self.c3, self.c4))


def predicate_sites(
    p: Program, g: Cfg, du: Optional[DefUse] = None
) -> List[PredicateSite]:
    "A site for each predicate in the slice that has a computing point"
    du = du or reaching_definitions(g)
    pdom = post_dominators(g)
    sites = []
    for c in sorted(backward_slice(p, g, du) & set(g.predicates)):
        try:
            sites.append(predicate_site(p, g, du, c, pdom))
        except NoComputingPoint as e:
            logger.warning("skipping predicate %d: %s", c, e)
    return sites


def predicate_site(
    p: Program,
    g: Cfg,
    du: DefUse,
    c: NodeId,
    pdom: Optional[PostDominators] = None,
) -> PredicateSite:
    stmt = p.statement(c)
    assert isinstance(stmt, (If, While))
    y = used_vars(stmt)
    for v in sorted(y):
        if not du.reaching([v], c):
            raise NoDefinition(v, c)
    supply = LabelSupply(p)
    hat = supply()
    nondet_labels = tuple(supply() for _ in y)

    for point in _candidate_points(g, du.reaching(y, c), c, pdom):
        program = insert_at(p, point, [Skip(label=hat)])
        site = PredicateSite(
            c,
            y,
            hat,
            nondet_labels,
            format_expr(stmt.cond),
            original=p,
            program=program,
        )
        if _only_nondets_reach(site):
            logger.debug("predicate %d: computing point at %s", c, point)
            return site
        logger.debug("predicate %d: rejected point %s", c, point)
    raise NoComputingPoint(c)


def _candidate_points(
    g: Cfg,
    defs: FrozenSet[NodeId],
    c: NodeId,
    pdom: Optional[PostDominators] = None,
) -> Iterator[Location]:
    pdom = pdom or post_dominators(g)
    if len(defs) == 1:
        [d] = defs
        loc = g.ast_link[d]
        yield normalize_point(Location(loc.block, loc.index + 1))
    loops = {lp.header: lp for lp in natural_loops(g)}
    m: Optional[NodeId] = nearest_common_post_dominator(g, defs, pdom)
    while m is not None and m != EXIT:
        loc = g.ast_link[m]
        yield normalize_point(loc)
        if m in loops and c in loops[m] and loc.block is not None:
            yield Location(loc.block + ((loc.index, "body"),), 0)
        m = immediate_post_dominator(pdom, m)


def _only_nondets_reach(site: PredicateSite) -> bool:
    "In the abstracted program only the inserted ``*`` reach the predicate"
    g = build_cfg(site.abstracted())
    du = reaching_definitions(g)
    reaching = du.reaching(site.y_vars, site.predicate_node)
    return bool(reaching) and reaching <= set(site.nondet_labels)


def site_graph(site: PredicateSite) -> Tuple[Cfg, DefUse]:
    "Graph and definitions of the sliced normalized program"
    g = build_cfg(site.program)
    keep = backward_slice(site.program, g)
    g = build_cfg(slice_program(site.program, keep))
    return g, reaching_definitions(g)


def compute_x(site: PredicateSite, g: Cfg) -> FrozenSet[str]:
    "Variables live from the computing point to the assertion"
    a = site.program.assertion.label
    if not nx.has_path(g.graph, site.computing_point, a):
        raise Unreachable(site.computing_point)
    live = live_variables(
        g,
        (g.nodes[a].uses, a),
        identity_nodes={site.predicate_node},
        barrier=site.computing_point,
    )
    return live.live_out[site.computing_point]


def compute_z(
    site: PredicateSite, x: Collection[str], g: Cfg
) -> FrozenSet[str]:
    "Variables live on the cycles from the computing point back to itself"
    hat = site.computing_point
    live = live_variables(g, (x, hat), barrier=hat)
    return live.live_out[hat]


def evaluate_criteria(
    site: PredicateSite,
    g: Cfg,
    du: DefUse,
    loops: Optional[Iterable[Loop]] = None,
) -> CriteriaReport:
    loops = natural_loops(g) if loops is None else list(loops)
    hat = site.computing_point
    x = compute_x(site, g)
    z = compute_z(site, x, g)
    evi_x = extended_value_impacting(g, du, (x, hat))
    evi_y = extended_value_impacting(g, du, (site.y_vars, hat))
    enclosing = loops_enclosing(loops, hat)
    changing = [
        lp
        for lp in enclosing
        if value_changing(evi_x, lp) and value_changing(evi_y, lp)
    ]
    gain = payoff(site)
    report = CriteriaReport(
        site=site,
        x_vars=x,
        z_vars=z,
        evi_x=evi_x,
        evi_y=evi_y,
        c1=Criterion.disjoint(x, site.y_vars),
        c2=Criterion.disjoint(z, site.y_vars),
        c3=Criterion.disjoint(evi_x.value_base, evi_y.value_base),
        c4=Criterion(
            not changing, tuple(str(lp.header) for lp in changing)
        ),
        loops=tuple(loop_profiles(evi_x, evi_y, loops, g, du)),
        payoff=gain,
        candidate=bool(enclosing) or gain > 0,
    )
    logger.info(
        "predicate %d (%s): itp=%s",
        site.predicate_node,
        site.source,
        report.itp,
    )
    return report


def _loop_nodes(p: Program) -> FrozenSet[NodeId]:
    g = build_cfg(p)
    in_loops = frozenset().union(*(lp.body for lp in natural_loops(g)))
    return in_loops & backward_slice(p, g)


def payoff(site: PredicateSite) -> int:
    "Loop nodes of the sliced program that abstraction lets the slice drop"
    return len(_loop_nodes(site.original) - _loop_nodes(site.abstracted()))


def analyze(p: Program) -> List[CriteriaReport]:
    "Criteria for every predicate site, ordered by predicate node"
    g = build_cfg(p)
    reports = []
    for site in predicate_sites(p, g):
        sliced, du = site_graph(site)
        try:
            reports.append(evaluate_criteria(site, sliced, du))
        except Unreachable as e:
            logger.warning(
                "skipping predicate %d: %s", site.predicate_node, e
            )
    return reports


def rank(reports: Iterable[CriteriaReport]) -> List[CriteriaReport]:
    "ITP reports, largest payoff first"
    return sorted(
        (r for r in reports if r.itp),
        key=lambda r: (-r.payoff, r.site.predicate_node),
    )
