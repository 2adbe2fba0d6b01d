from pathlib import Path

import pytest

from itpcheck.cfg import build_cfg
from itpcheck.dataflow import reaching_definitions
from itpcheck.frontend import parse
from itpcheck.itp import PredicateSite, predicate_site
from itpcheck.syntax import NodeId, Program

EXAMPLES_DIR = Path(__file__).parents[1] / "examples"
FIXTURES = tuple(sorted(p.name for p in EXAMPLES_DIR.glob("*.mi")))
ROUTES_DIR = EXAMPLES_DIR / "routes"
ROUTES = tuple(sorted(p.name for p in ROUTES_DIR.glob("*.mi")))


def load(name: str, directory: Path = EXAMPLES_DIR) -> Program:
    return parse((directory / f"{name}.mi").read_text(encoding="utf-8"))


def load_route(name: str) -> Program:
    "A program written to drive the workflow down one particular route"
    return load(name, ROUTES_DIR)


@pytest.fixture(params=FIXTURES)
def fixture_name(request) -> str:
    "Each program of the corpus in turn, without its extension"
    return request.param[: -len(".mi")]


def site_for(p: Program, node: NodeId) -> PredicateSite:
    g = build_cfg(p)
    return predicate_site(p, g, reaching_definitions(g), node)
