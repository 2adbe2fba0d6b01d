"""Property checking through an abstracted predicate: check the abstract
program, classify its counterexample, and settle the result on the
original program with auxiliary checking problems"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

from .checker import (
    BudgetExceeded,
    CheckConfig,
    Holds,
    Replay,
    Verdict,
    Violated,
    ViolatingSuffix,
    predicate_outcomes,
    replay,
    verify,
    violating_suffix,
)
from .common import add_slots
from .frontend import format_expr
from .itp import PredicateSite, evaluate_criteria, site_graph
from .syntax import Program
from .transform import (
    NonlinearPath,
    abstract,
    build_phat,
    build_ptilde,
    build_wp_problem,
    weakest_precondition,
)

logger = logging.getLogger(__name__)

CaseLabel = str


def _legal_logs() -> FrozenSet[Tuple[CaseLabel, ...]]:
    words = {("i",), ("ii",), ("iii", "1"), ("iii", "3b", "WP")}
    for case in ("3a", "3c"):
        words |= {("iii", case, "A", "WP"), ("iii", case, "B", "B")}
    for first, second, last in itertools.product("AB", "AB", ("WP", "B")):
        words.add(("iii", "2", first, second, last))
    return frozenset(words)


LEGAL_LOGS = _legal_logs()
"Every complete step log the procedure can produce"


def is_legal_log(labels: Sequence[CaseLabel], complete: bool = True) -> bool:
    "Whether the labels are a (prefix of a) run of the procedure"
    word = tuple(labels)
    if complete:
        return word in LEGAL_LOGS
    return any(w[: len(word)] == word for w in LEGAL_LOGS)


@add_slots
@dataclass(frozen=True)
class Inconclusive:
    reason: str


Final = Union[Holds, Violated, Inconclusive]


@add_slots
@dataclass(frozen=True)
class WorkflowStep:
    problem: str
    "Which program was checked: P', P, P^, P~ or WP"
    verdict: Verdict
    label: CaseLabel


@add_slots
@dataclass(frozen=True)
class WorkflowReport:
    site: PredicateSite
    steps: Tuple[WorkflowStep, ...]
    final: Final
    psi: Optional[str] = None
    "The precondition formula, when the refinement step ran"

    @property
    def labels(self) -> Tuple[CaseLabel, ...]:
        return tuple(s.label for s in self.steps)


class NotItp(Exception):
    def __init__(self, site: PredicateSite) -> None:
        self.site = site

    def __str__(self) -> str:
        return (
            f"Predicate {self.site.predicate_node} ({self.site.source}) "
            "does not meet the criteria; use override to run it anyway."
        )


@dataclass
class _Run:
    "Mutable state of one run of the procedure"
    p: Program
    site: PredicateSite
    cfg: CheckConfig
    steps: List[WorkflowStep] = field(default_factory=list)
    psi: Optional[str] = None

    def log(self, problem: str, verdict: Verdict, label: CaseLabel) -> None:
        logger.info("case %s: %s %s", label, problem, type(verdict).__name__)
        self.steps.append(WorkflowStep(problem, verdict, label))

    def report(self, final: Final) -> WorkflowReport:
        if isinstance(final, Inconclusive):
            logger.warning(
                "predicate %d: inconclusive: %s",
                self.site.predicate_node,
                final.reason,
            )
        return WorkflowReport(self.site, tuple(self.steps), final, self.psi)


def run_workflow(
    p: Program,
    site: PredicateSite,
    cfg: CheckConfig = CheckConfig(),
    override: bool = False,
) -> WorkflowReport:
    if not override:
        if not evaluate_criteria(site, *site_graph(site)).itp:
            raise NotItp(site)
    run = _Run(p, site, cfg)
    abstracted = abstract(p, site).abstract_program
    verdict = verify(abstracted, cfg)

    if isinstance(verdict, Holds):
        run.log("P'", verdict, "i")
        return run.report(verdict)
    elif isinstance(verdict, BudgetExceeded):
        return run.report(_over_budget(run, "P'", verdict))

    suffix = violating_suffix(verdict.cex, site)
    if suffix is None:
        run.log("P'", verdict, "ii")
        return run.report(_confirm(run, verdict))
    run.log("P'", verdict, "iii")

    again = replay(p, verdict.inputs, cfg)
    if isinstance(again.verdict, BudgetExceeded):
        return run.report(_over_budget(run, "P", again.verdict))
    elif isinstance(again.verdict, Violated):
        run.log("P", again.verdict, "1")
        return run.report(again.verdict)

    b = suffix.c_outcome
    if b is None:
        run.log("P", again.verdict, "2")
        return run.report(_case_two(run, suffix, abstracted))
    outcomes = predicate_outcomes(again.trace, site)
    if not outcomes:
        run.log("P", again.verdict, "3a")
    elif b in outcomes:
        run.log("P", again.verdict, "3b")
        return run.report(_refine(run, suffix, abstracted))
    else:
        run.log("P", again.verdict, "3c")

    phat = verify(build_phat(p, site, b), cfg)
    if isinstance(phat, BudgetExceeded):
        return run.report(_over_budget(run, "P^", phat))
    elif isinstance(phat, Violated):
        run.log("P^", phat, "A")
        return run.report(_refine(run, suffix, abstracted))
    run.log("P^", phat, "B")
    return run.report(_transfer(run, b))


def _case_two(
    run: _Run, suffix: ViolatingSuffix, abstracted: Program
) -> Final:
    "The suffix avoids the predicate, so both constant outcomes are tried"
    constant = None
    for b in (True, False):
        phat = verify(build_phat(run.p, run.site, b), run.cfg)
        if isinstance(phat, BudgetExceeded):
            return _over_budget(run, "P^", phat)
        run.log("P^", phat, "A" if isinstance(phat, Violated) else "B")
        if isinstance(phat, Holds) and constant is None:
            constant = b
    if any(s.label == "A" for s in run.steps):
        return _refine(run, suffix, abstracted)
    assert constant is not None
    return _transfer(run, constant)


def _transfer(run: _Run, b: bool) -> Final:
    "The predicate never takes value ``b``: fix it and check that program"
    verdict = verify(build_ptilde(run.p, run.site, b), run.cfg)
    if isinstance(verdict, BudgetExceeded):
        return _over_budget(run, "P~", verdict)
    run.log("P~", verdict, "B")
    if isinstance(verdict, Violated):
        return _confirm(run, verdict)
    return verdict


def _refine(
    run: _Run, suffix: ViolatingSuffix, abstracted: Program
) -> Final:
    "Search the original program for an input that follows the suffix"
    try:
        psi = weakest_precondition(abstracted, suffix)
    except NonlinearPath as e:
        return Inconclusive(str(e))
    run.psi = format_expr(psi)
    logger.info("precondition at the computing point: %s", run.psi)
    verdict = verify(build_wp_problem(run.p, run.site, psi), run.cfg)
    if isinstance(verdict, BudgetExceeded):
        return _over_budget(run, "WP", verdict)
    run.log("WP", verdict, "WP")
    if isinstance(verdict, Holds):
        return Inconclusive("ITP premise falsified at this domain")
    return _confirm(run, verdict)


def _confirm(run: _Run, found: Violated) -> Final:
    "Replay the input on the original program"
    again: Replay = replay(run.p, found.inputs, run.cfg)
    if isinstance(again.verdict, Violated):
        return again.verdict
    return Inconclusive(
        "counterexample not confirmed on the original program"
    )


def _over_budget(run: _Run, problem: str, verdict: BudgetExceeded) -> Final:
    return Inconclusive(
        f"step budget exceeded checking {problem} "
        f"({verdict.budget_hits} of {verdict.runs} run(s))"
    )
