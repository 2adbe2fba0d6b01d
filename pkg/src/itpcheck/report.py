"JSON encoding of analysis results, verdicts and run manifests"

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Mapping, Optional

from . import __version__
from .cfg import Cfg
from .checker import (
    BudgetExceeded,
    CheckConfig,
    Holds,
    Trace,
    Verdict,
    Violated,
)
from .common import add_slots
from .dataflow import DefUse, Liveness
from .itp import CriteriaReport
from .workflow import Final, Inconclusive, WorkflowReport

Json = Dict[str, Any]


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@add_slots
@dataclass(frozen=True)
class RunManifest:
    version: str
    input_sha256: Optional[str]
    subcommand: str
    config: CheckConfig
    started: str
    finished: str

    @classmethod
    def create(
        cls,
        subcommand: str,
        config: CheckConfig,
        source: Optional[bytes],
        started: str,
    ) -> "RunManifest":
        digest = None if source is None else hashlib.sha256(source).hexdigest()
        return cls(__version__, digest, subcommand, config, started, now())


def manifest_json(m: RunManifest) -> Json:
    return {
        "version": m.version,
        "input_sha256": m.input_sha256,
        "subcommand": m.subcommand,
        "config": config_json(m.config),
        "started": m.started,
        "finished": m.finished,
    }


def config_json(c: CheckConfig) -> Json:
    return {
        "domain_lo": c.domain_lo,
        "domain_hi": c.domain_hi,
        "step_budget": c.step_budget,
        "max_runs": c.max_runs,
    }


def bounded(c: CheckConfig) -> Json:
    return {
        "domain": [c.domain_lo, c.domain_hi],
        "step_budget": c.step_budget,
        "note": (
            "verdicts only cover inputs and nondeterministic choices "
            "within the domain, and executions within the step budget"
        ),
    }


def envelope(manifest: RunManifest, result: Any) -> Json:
    return {
        "manifest": manifest_json(manifest),
        "bounded": bounded(manifest.config),
        "result": result,
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2)


def _names(names: Iterable[str]) -> List[str]:
    return sorted(names)


def criteria_json(r: CriteriaReport, dump_evi: bool = False) -> Json:
    criteria = {"c1": r.c1, "c2": r.c2, "c3": r.c3, "c4": r.c4}
    result: Json = {
        "predicate": r.site.source,
        "node": r.site.predicate_node,
        "computing_point": r.site.computing_point,
        "X": _names(r.x_vars),
        "Y": _names(r.y_vars),
        "Z": _names(r.z_vars),
        "VB_X": _names(r.vb_x),
        "VB_Y": _names(r.vb_y),
        **{name: c.holds for name, c in criteria.items()},
        "witnesses": {
            name: list(c.witness) for name, c in criteria.items()
        },
        "itp": r.itp,
        "payoff": r.payoff,
        "candidate": r.candidate,
        "loops": [
            {
                "header": lp.loop.header,
                "changes_x": lp.changes_x,
                "changes_y": lp.changes_y,
                "contained_x": lp.contained_x,
                "contained_y": lp.contained_y,
                "vb_loop": _names(lp.vb_loop),
            }
            for lp in r.loops
        ],
    }
    if dump_evi:
        result["evi"] = {
            "X": sorted(r.evi_x.nodes),
            "Y": sorted(r.evi_y.nodes),
        }
    return result


def trace_json(t: Trace) -> Json:
    return {
        "status": t.status.value,
        "inputs": dict(sorted(t.input_vector.items())),
        "nondet": list(t.nondet_choices),
        "trace": [[n, t.store(i)] for i, (n, _) in enumerate(t.steps)],
    }


def verdict_json(v: Verdict) -> Json:
    if isinstance(v, Holds):
        return {
            "status": "holds",
            "exhaustive": v.exhaustive,
            "runs": v.runs,
            "div_by_zero": v.div_by_zero,
        }
    elif isinstance(v, Violated):
        # the run status of a counterexample is always assert_fail
        return {**trace_json(v.cex), "status": "violated", "exhaustive": False}
    assert isinstance(v, BudgetExceeded)
    return {
        "status": "budget_exceeded",
        "exhaustive": False,
        "runs": v.runs,
        "completed": v.completed,
        "budget_hits": v.budget_hits,
        "div_by_zero": v.div_by_zero,
    }


def final_json(f: Final) -> Json:
    if isinstance(f, Inconclusive):
        return {"status": "inconclusive", "reason": f.reason}
    return verdict_json(f)


def workflow_json(w: WorkflowReport) -> Json:
    return {
        "predicate": w.site.source,
        "node": w.site.predicate_node,
        "computing_point": w.site.computing_point,
        "steps": [
            {
                "label": s.label,
                "problem": s.problem,
                "status": verdict_json(s.verdict)["status"],
            }
            for s in w.steps
        ],
        "psi": w.psi,
        "final": final_json(w.final),
    }


def _table(table: Mapping[int, Iterable[Any]]) -> Json:
    return {str(n): sorted(v) for n, v in sorted(table.items())}


def dataflow_json(g: Cfg, du: DefUse, live: Liveness) -> Json:
    return {
        "defs": {v: sorted(ds) for v, ds in du.defs.items()},
        "reach_in": {
            str(n): [[v, d] for v, d in sorted(facts)]
            for n, facts in sorted(du.reach_in.items())
        },
        "live_in": _table(live.live_in),
        "live_out": _table(live.live_out),
        "nodes": {
            str(n): {"kind": node.kind, "text": node.text}
            for n, node in sorted(g.nodes.items())
        },
    }


def _outcome(result: Json) -> Json:
    return {
        k: result[k] for k in ("status", "inputs", "reason") if k in result
    }


def outcome_table(results: Iterable[Json]) -> List[Json]:
    """The part of corpus results a golden file pins down: the verdict of
    each program and the workflow outcome of each predicate"""
    rows = []
    for entry in results:
        if "error" in entry:
            rows.append({"name": entry["name"], "error": entry["error"]})
            continue
        sites = []
        for site in entry["sites"]:
            workflow = site["workflow"]
            sites.append(
                {
                    "node": site["criteria"]["node"],
                    "itp": site["criteria"]["itp"],
                    "workflow": None
                    if workflow is None
                    else {
                        "labels": workflow["labels"],
                        "final": _outcome(workflow["final"]),
                    },
                }
            )
        rows.append(
            {
                "name": entry["name"],
                "verdict": _outcome(entry["verdict"]),
                "sites": sites,
            }
        )
    return rows
