import difflib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from textwrap import indent
from typing import (
    Any,
    Callable,
    NoReturn,
    Optional,
    Tuple,
    TypeVar,
    Union,
)

import click

from . import config, report
from .cfg import build_cfg, natural_loops, to_dot
from .checker import (
    BudgetExceeded,
    CheckConfig,
    Verdict,
    Violated,
    verify,
    violating_suffix,
)
from .common import add_slots
from .dataflow import (
    backward_slice,
    live_variables,
    reaching_definitions,
    slice_program,
)
from .frontend import DiagnosticError, parse, pretty_print
from .generate import corpus as generated_corpus
from .itp import (
    CriteriaReport,
    NoComputingPoint,
    NoDefinition,
    PredicateSite,
    Unreachable,
    analyze,
    predicate_site,
    rank,
)
from .syntax import NodeId, Program
from .transform import (
    NonlinearPath,
    abstract,
    build_phat,
    build_ptilde,
    build_wp_problem,
    weakest_precondition,
)
from .workflow import Inconclusive, NotItp, run_workflow

logger = logging.getLogger(__name__)

_F = TypeVar("_F", bound=Callable[..., Any])

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2
EXIT_INCONCLUSIVE = 3

Outcome = Union[Verdict, Inconclusive]


@add_slots
@dataclass(frozen=True)
class _Options:
    settings: Optional[Path]


@click.group("itp")
@click.option(
    "-v",
    "--verbose",
    count=True,
    help="Log progress to stderr. Repeat for debug output.",
)
@click.option(
    "--settings",
    help="Path to the configuration file to use. "
    "Allowed extensions are toml, cfg, ini.",
    type=click.Path(
        path_type=Path, exists=True, resolve_path=True, dir_okay=False
    ),
)
@click.version_option()
@click.pass_context
def root(ctx: click.Context, verbose: int, settings: Optional[Path]) -> None:
    "Find predicates irrelevant to a program's assertion, and check it."
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger(__package__).setLevel(level)
    ctx.obj = _Options(settings)


_source_argument = click.argument(
    "FILE",
    type=click.Path(
        path_type=Path, exists=True, dir_okay=False, resolve_path=True
    ),
)
_predicate_option = click.option(
    "--predicate",
    type=int,
    required=True,
    help="Node id of the predicate (an if or while statement).",
)
_out_option = click.option(
    "--out",
    type=click.Path(path_type=Path, dir_okay=False),
    help="Write the program here instead of to stdout.",
)
_json_option = click.option(
    "--json", "as_json", is_flag=True, help="Output a JSON report."
)


def _domain_options(f: _F) -> _F:
    for decorator in reversed(
        [
            click.option("--lo", type=int, help="Lowest domain value."),
            click.option("--hi", type=int, help="Highest domain value."),
            click.option(
                "--budget", type=int, help="Step budget per execution."
            ),
        ]
    ):
        f = decorator(f)
    return f


@root.command("parse")
@_source_argument
def parse_command(file: Path) -> None:
    "Check a program and print it in canonical form."
    program, _ = _load(file)
    print(pretty_print(program), end="")


@root.command("cfg-dot")
@_source_argument
@click.option(
    "--dot",
    type=click.Path(path_type=Path, dir_okay=False),
    help="Write the graph here instead of to stdout.",
)
def cfg_dot(file: Path, dot: Optional[Path]) -> None:
    "Draw the control-flow graph with its loops as Graphviz text."
    program, _ = _load(file)
    g = build_cfg(program)
    _emit(to_dot(g, natural_loops(g)), dot)


@root.command("slice")
@_source_argument
@_out_option
@_json_option
def slice_command(file: Path, out: Optional[Path], as_json: bool) -> None:
    "Backward slice from the assertion."
    program, _ = _load(file)
    nodes = backward_slice(program, build_cfg(program))
    if as_json:
        _emit(report.dumps({"nodes": sorted(nodes)}) + "\n", out)
    else:
        _emit(pretty_print(slice_program(program, nodes)), out)


@root.command("analyze")
@_source_argument
@click.option(
    "--rank",
    "ranked",
    is_flag=True,
    help="Only ITP predicates, with the largest loop payoff first.",
)
@_json_option
@click.option(
    "--dump-dataflow",
    is_flag=True,
    help="Include definition and liveness tables in the JSON report.",
)
@click.option(
    "--dump-evi",
    is_flag=True,
    help="Include the value-impacting nodes in the JSON report.",
)
@click.pass_obj
def analyze_command(
    opts: _Options,
    file: Path,
    ranked: bool,
    as_json: bool,
    dump_dataflow: bool,
    dump_evi: bool,
) -> None:
    "Evaluate the irrelevance criteria for every predicate in the slice."
    started = report.now()
    program, source = _load(file)
    conf = _collect(opts, None, None, None).check_config()
    reports = analyze(program)
    if ranked:
        reports = rank(reports)
    if as_json:
        manifest = report.RunManifest.create(
            "analyze", conf, source, started
        )
        out = report.envelope(
            manifest, [report.criteria_json(r, dump_evi) for r in reports]
        )
        if dump_dataflow:
            g = build_cfg(program)
            a = program.assertion.label
            live = live_variables(g, (g.nodes[a].uses, a))
            out["dataflow"] = report.dataflow_json(
                g, reaching_definitions(g), live
            )
        print(report.dumps(out))
    else:
        for r in reports:
            print(_describe(r))
        if not reports:
            print("No predicates to report.")


@root.command("abstract")
@_source_argument
@_predicate_option
@_out_option
def abstract_command(
    file: Path, predicate: NodeId, out: Optional[Path]
) -> None:
    "Make the predicate's variables nondeterministic at its computing point."
    program, _ = _load(file)
    site = _site(program, predicate)
    _emit(pretty_print(abstract(program, site).abstract_program), out)


@root.command("phat")
@_source_argument
@_predicate_option
@click.option(
    "--b", "b", type=bool, required=True, help="The violating value."
)
@_out_option
def phat_command(
    file: Path, predicate: NodeId, b: bool, out: Optional[Path]
) -> None:
    "Program checking that the predicate never takes the value B."
    program, _ = _load(file)
    site = _site(program, predicate)
    _emit(pretty_print(build_phat(program, site, b)), out)


@root.command("ptilde")
@_source_argument
@_predicate_option
@click.option(
    "--b", "b", type=bool, required=True, help="The violating value."
)
@_out_option
def ptilde_command(
    file: Path, predicate: NodeId, b: bool, out: Optional[Path]
) -> None:
    "The program with the predicate fixed to the negation of B."
    program, _ = _load(file)
    site = _site(program, predicate)
    _emit(pretty_print(build_ptilde(program, site, b)), out)


@root.command("wp")
@_source_argument
@_predicate_option
@_out_option
@_domain_options
@click.pass_obj
def wp_command(
    opts: _Options,
    file: Path,
    predicate: NodeId,
    out: Optional[Path],
    lo: Optional[int],
    hi: Optional[int],
    budget: Optional[int],
) -> None:
    """Program whose violations reach the computing point in a state that
    follows the abstract counterexample to the failing assertion."""
    program, _ = _load(file)
    site = _site(program, predicate)
    conf = _collect(opts, lo, hi, budget).check_config()
    abstracted = abstract(program, site).abstract_program
    verdict = verify(abstracted, conf)
    if not isinstance(verdict, Violated):
        _fail("The abstract program has no counterexample.")
    suffix = violating_suffix(verdict.cex, site)
    if suffix is None:
        _fail("The counterexample does not pass the computing point.")
    try:
        psi = weakest_precondition(abstracted, suffix)
    except NonlinearPath as e:
        _fail(str(e))
    _emit(pretty_print(build_wp_problem(program, site, psi)), out)


@root.command("verify")
@_source_argument
@_domain_options
@_json_option
@click.pass_obj
def verify_command(
    opts: _Options,
    file: Path,
    lo: Optional[int],
    hi: Optional[int],
    budget: Optional[int],
    as_json: bool,
) -> None:
    "Check the assertion for every input and choice in the domain."
    started = report.now()
    program, source = _load(file)
    conf = _collect(opts, lo, hi, budget).check_config()
    verdict = verify(program, conf)
    if as_json:
        manifest = report.RunManifest.create("verify", conf, source, started)
        print(
            report.dumps(
                report.envelope(manifest, report.verdict_json(verdict))
            )
        )
    else:
        print(_verdict_line(verdict))
    exit(_exit_code(verdict))


@root.command("workflow")
@_source_argument
@_predicate_option
@click.option(
    "--override",
    is_flag=True,
    help="Run even if the predicate does not meet the criteria.",
)
@_domain_options
@_json_option
@click.pass_obj
def workflow_command(
    opts: _Options,
    file: Path,
    predicate: NodeId,
    override: bool,
    lo: Optional[int],
    hi: Optional[int],
    budget: Optional[int],
    as_json: bool,
) -> None:
    "Check the assertion through the abstraction of one predicate."
    started = report.now()
    program, source = _load(file)
    site = _site(program, predicate)
    conf = _collect(opts, lo, hi, budget).check_config()
    try:
        result = run_workflow(program, site, conf, override)
    except (NotItp, Unreachable) as e:
        _fail(str(e))
    if as_json:
        manifest = report.RunManifest.create(
            "workflow", conf, source, started
        )
        print(
            report.dumps(
                report.envelope(manifest, report.workflow_json(result))
            )
        )
    else:
        print("Cases: " + " ".join(result.labels))
        if result.psi is not None:
            print(f"Precondition: {result.psi}")
        print(_verdict_line(result.final))
    exit(_exit_code(result.final))


@root.command("corpus")
@click.argument(
    "DIRECTORY",
    type=click.Path(path_type=Path, exists=True, file_okay=False),
)
@click.option(
    "--generate",
    "count",
    type=int,
    default=0,
    help="Add this many generated programs to the fixtures.",
)
@click.option(
    "--seed",
    type=int,
    default=0,
    envvar="ITP_SEED",
    show_default=True,
    help="Seed of the program generator.",
)
@click.option(
    "--golden",
    type=click.Path(path_type=Path, dir_okay=False),
    help="Compare the outcome table with this JSON file.",
)
@click.option("--jobs", type=int, help="Programs checked in parallel.")
@_domain_options
@click.pass_obj
def corpus_command(
    opts: _Options,
    directory: Path,
    count: int,
    seed: int,
    golden: Optional[Path],
    jobs: Optional[int],
    lo: Optional[int],
    hi: Optional[int],
    budget: Optional[int],
) -> None:
    """Run every .mi program in DIRECTORY through analysis and the
    workflow of each irrelevant predicate."""
    started = report.now()
    conf = _collect(opts, lo, hi, budget, jobs)
    programs = [
        (path.name, path.read_text(encoding="utf-8"))
        for path in sorted(directory.glob("*.mi"))
    ]
    programs.extend(generated_corpus(seed, count))
    check = conf.check_config()
    bounds = (check.domain_lo, check.domain_hi, check.step_budget)
    tasks = [(name, text, bounds) for name, text in programs]
    logger.info("checking %d program(s)", len(tasks))
    if conf.jobs > 1:
        with ProcessPoolExecutor(conf.jobs) as pool:
            results = list(pool.map(_corpus_entry, tasks))
    else:
        results = list(map(_corpus_entry, tasks))

    source = "".join(text for _, text in programs).encode()
    manifest = report.RunManifest.create("corpus", check, source, started)
    print(report.dumps(report.envelope(manifest, results)))
    if golden is not None:
        expected = json.loads(golden.read_text(encoding="utf-8"))
        table = report.outcome_table(results)
        if expected != table:
            diff = difflib.unified_diff(
                report.dumps(expected).splitlines(),
                report.dumps(table).splitlines(),
                str(golden),
                "corpus",
                lineterm="",
            )
            _fail(
                "Corpus results differ from the golden file.\n\n"
                + "\n".join(diff)
            )


_Task = Tuple[str, str, Tuple[int, int, int]]


def _corpus_entry(task: _Task) -> report.Json:
    "Verdict of the program, and criteria and workflow per predicate"
    name, text, (lo, hi, budget) = task
    conf = CheckConfig(lo, hi, budget)
    logger.info("corpus: %s", name)
    try:
        program = parse(text)
        reports = analyze(program)
    except (DiagnosticError, NoDefinition) as e:
        return {"name": name, "error": str(e)}
    verdict = report.verdict_json(verify(program, conf))
    verdict.pop("trace", None)
    sites = []
    for r in reports:
        site: report.Json = {
            "criteria": report.criteria_json(r),
            "workflow": None,
        }
        if r.itp:
            result = run_workflow(program, r.site, conf)
            site["workflow"] = {
                "labels": list(result.labels),
                "final": report.final_json(result.final),
            }
            site["workflow"]["final"].pop("trace", None)
        sites.append(site)
    return {"name": name, "verdict": verdict, "sites": sites}


def _load(path: Path) -> Tuple[Program, bytes]:
    source = path.read_bytes()
    try:
        return parse(source.decode("utf-8")), source
    except DiagnosticError as e:
        _fail(f"{path.name}: {e}")
    except UnicodeDecodeError:
        _fail(f"{path.name}: not UTF-8 text")


def _site(p: Program, node: NodeId) -> PredicateSite:
    g = build_cfg(p)
    if node not in g.predicates:
        _fail(f"Node {node} is not a predicate.")
    try:
        return predicate_site(p, g, reaching_definitions(g), node)
    except (NoDefinition, NoComputingPoint) as e:
        _fail(str(e))


def _collect(
    opts: _Options,
    lo: Optional[int],
    hi: Optional[int],
    budget: Optional[int],
    jobs: Optional[int] = None,
) -> config.Config:
    try:
        return config.collect(
            config.PartialConfig(
                domain_lo=lo,
                domain_hi=hi,
                step_budget=budget,
                max_runs=None,
                jobs=jobs,
            ),
            Path.cwd(),
            opts.settings,
        )
    except (
        config.InvalidKeys,
        config.InvalidValueType,
        config.InvalidValue,
        ValueError,
    ) as e:
        _fail(str(e))


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        print(text, end="")
    else:
        out.write_text(text, encoding="utf-8")


def _describe(r: CriteriaReport) -> str:
    marks = " ".join(
        f"{name}={'yes' if c.holds else 'no'}"
        for name, c in (("C1", r.c1), ("C2", r.c2), ("C3", r.c3), ("C4", r.c4))
    )
    verdict = "ITP" if r.itp else "not ITP"
    return (
        f"{r.site.predicate_node}: ({r.site.source}) {verdict}\n"
        + indent(
            f"computing point {r.site.computing_point}, payoff {r.payoff}\n"
            f"{marks}",
            "  ",
        )
    )


def _verdict_line(v: Outcome) -> str:
    if isinstance(v, Violated):
        inputs = ", ".join(f"{k}={x}" for k, x in sorted(v.inputs.items()))
        return f"Violated for input {inputs or '(none)'}"
    elif isinstance(v, BudgetExceeded):
        return (
            f"Inconclusive: step budget exceeded in "
            f"{v.budget_hits} of {v.runs} run(s)"
        )
    elif isinstance(v, Inconclusive):
        return f"Inconclusive: {v.reason}"
    return "Holds" + (f" ({v.runs} run(s))" if v.runs else "")


def _exit_code(v: Outcome) -> int:
    if isinstance(v, Violated):
        return EXIT_VIOLATED
    elif isinstance(v, (BudgetExceeded, Inconclusive)):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


_ERROR_PREFIX = "ERROR: "


def _format_error(msg: str) -> str:
    return (
        _ERROR_PREFIX
        + indent(msg, " " * len(_ERROR_PREFIX))[len(_ERROR_PREFIX) :]  # noqa
    )


def _fail(msg: str) -> NoReturn:
    print(_format_error(msg))
    exit(EXIT_ERROR)
