from itpcheck.checker import verify
from itpcheck.report import outcome_table, verdict_json, workflow_json
from itpcheck.workflow import run_workflow

from .conftest import load, load_route, site_for


class TestVerdictJson:
    def test_violated(self):
        out = verdict_json(verify(load("r1")))
        assert out["status"] == "violated"
        assert out["exhaustive"] is False
        assert out["inputs"] == {"z": 3}
        assert out["nondet"] == []

    def test_holds(self):
        out = verdict_json(verify(load("r3")))
        assert out["status"] == "holds"
        assert out["exhaustive"] is True
        assert out["runs"] == 36


def test_workflow_steps():
    p = load_route("case_3c_refine")
    out = workflow_json(run_workflow(p, site_for(p, 5)))
    assert [(s["problem"], s["status"]) for s in out["steps"]] == [
        ("P'", "violated"),
        ("P", "holds"),
        ("P^", "violated"),
        ("WP", "violated"),
    ]
    assert out["psi"] == "!(t > 5)"
    assert out["final"]["status"] == "violated"


def test_outcome_table():
    results = [
        {"name": "bad.mi", "error": "line 1, column 9: unexpected '='"},
        {
            "name": "r3.mi",
            "verdict": {"status": "holds", "exhaustive": True, "runs": 36},
            "sites": [
                {
                    "criteria": {"node": 10, "itp": True, "X": ["x"]},
                    "workflow": {
                        "labels": ["i"],
                        "final": {"status": "holds", "runs": 36},
                    },
                },
                {"criteria": {"node": 12, "itp": False}, "workflow": None},
            ],
        },
    ]
    assert outcome_table(results) == [
        {"name": "bad.mi", "error": "line 1, column 9: unexpected '='"},
        {
            "name": "r3.mi",
            "verdict": {"status": "holds"},
            "sites": [
                {
                    "node": 10,
                    "itp": True,
                    "workflow": {
                        "labels": ["i"],
                        "final": {"status": "holds"},
                    },
                },
                {"node": 12, "itp": False, "workflow": None},
            ],
        },
    ]
