import re
import sys
from pathlib import Path

import pytest

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from itpcheck.checker import CheckConfig
from itpcheck.config import (
    Config,
    InvalidKeys,
    InvalidValue,
    InvalidValueType,
    PartialConfig,
    collect,
    find_config_file,
)

EXAMPLE_TOML = b"""
[tool.foo]
bla = 5

[tool.itpcheck]
domain-lo = -1
step-budget = 500
jobs = 2
"""

EXAMPLE_INI = b"""
[foo]
bla = 5

[itpcheck]
domain-hi = 4
max-runs = 100
"""


_UNRELATED = b"[foo]\nbar = 5\n"


def _write(directory, files):
    for name, content in files.items():
        (directory / name).write_binary(content)


@pytest.mark.parametrize(
    "inner, outer, expect",
    [
        (
            {"pyproject.toml": EXAMPLE_TOML, "setup.cfg": EXAMPLE_INI},
            {"pyproject.toml": EXAMPLE_TOML},
            "inner/pyproject.toml",
        ),
        (
            {"pyproject.toml": _UNRELATED, "setup.cfg": EXAMPLE_INI},
            {"pyproject.toml": EXAMPLE_TOML},
            "inner/setup.cfg",
        ),
        (
            {"pyproject.toml": _UNRELATED, "setup.cfg": _UNRELATED},
            {"setup.cfg": EXAMPLE_INI},
            "setup.cfg",
        ),
        (
            {"pyproject.toml": b"[tool.itpcheck]\n"},
            {"pyproject.toml": EXAMPLE_TOML},
            "inner/pyproject.toml",
        ),
        ({"setup.cfg": _UNRELATED}, {"pyproject.toml": _UNRELATED}, None),
    ],
)
def test_find_config_file(tmpdir, inner, outer, expect):
    _write(tmpdir.ensure_dir("inner"), inner)
    _write(tmpdir, outer)
    found = find_config_file(Path(tmpdir / "inner"))
    if expect is None:
        assert found is None
    else:
        assert found == Path(tmpdir / expect)


class TestCollect:
    def test_defaults(self, tmpdir):
        conf = collect(PartialConfig.EMPTY, Path(tmpdir), None)
        assert conf == Config.DEFAULT
        assert conf.check_config() == CheckConfig()

    def test_file_then_cli(self, tmpdir):
        (tmpdir / "pyproject.toml").write_binary(EXAMPLE_TOML)
        conf = collect(
            PartialConfig(None, None, 900, None, None), Path(tmpdir), None
        )
        assert conf == Config(
            domain_lo=-1, domain_hi=3, step_budget=900, max_runs=None, jobs=2
        )
        assert conf.check_config() == CheckConfig(-1, 3, 900, None)

    def test_explicit_settings(self, tmpdir):
        (tmpdir / "pyproject.toml").write_binary(EXAMPLE_TOML)
        (tmpdir / "other.cfg").write_binary(EXAMPLE_INI)
        conf = collect(
            PartialConfig.EMPTY, Path(tmpdir), Path(tmpdir / "other.cfg")
        )
        assert conf.domain_lo == -2
        assert conf.domain_hi == 4
        assert conf.max_runs == 100

    def test_domain_inverted(self, tmpdir):
        with pytest.raises(InvalidValue, match="'domain-lo'"):
            collect(
                PartialConfig(3, -2, None, None, None), Path(tmpdir), None
            )

    @pytest.mark.parametrize("budget", [0, -4])
    def test_budget_too_small(self, tmpdir, budget):
        with pytest.raises(
            InvalidValue,
            match=re.escape(
                "Invalid value for 'step-budget': must be at least 1."
            ),
        ):
            collect(
                PartialConfig(None, None, budget, None, None),
                Path(tmpdir),
                None,
            )


class TestOptionsApply:
    def test_given(self):
        assert PartialConfig.EMPTY.given() == {}
        assert PartialConfig(0, None, None, 7, None).given() == {
            "domain_lo": 0,
            "max_runs": 7,
        }

    def test_empty(self):
        assert Config(-2, 3, 10, None, 1).apply(
            PartialConfig.EMPTY
        ) == Config(-2, 3, 10, None, 1)

    def test_different(self):
        assert Config(-2, 3, 10, None, 1).apply(
            PartialConfig(0, None, None, 7, None)
        ) == Config(0, 3, 10, 7, 1)

    def test_later_source_wins(self):
        base = Config.DEFAULT.apply(PartialConfig(None, 5, None, None, 4))
        assert base.apply(PartialConfig(None, 1, None, None, None)) == Config(
            -2, 1, 20000, None, 4
        )


class TestPartialOptionsFromToml:
    def test_options_from_toml(self, tmpdir):
        (tmpdir / "myconf.toml").write_binary(EXAMPLE_TOML)
        assert PartialConfig.load(
            Path(tmpdir / "myconf.toml")
        ) == PartialConfig(
            domain_lo=-1,
            domain_hi=None,
            step_budget=500,
            max_runs=None,
            jobs=2,
        )

    def test_invalid_toml(self, tmpdir):
        (tmpdir / "myconf.toml").write_binary(b"[foo inv]alid")
        with pytest.raises(tomllib.TOMLDecodeError):
            PartialConfig.load(Path(tmpdir / "myconf.toml"))

    def test_no_itpcheck_section(self, tmpdir):
        (tmpdir / "myconf.toml").write_binary(b"[tool.bla]\nk = 5\n")
        assert (
            PartialConfig.load(Path(tmpdir / "myconf.toml"))
            == PartialConfig.EMPTY
        )

    def test_empty(self, tmpdir):
        (tmpdir / "myconf.toml").write_binary(b"")
        assert (
            PartialConfig.load(Path(tmpdir / "myconf.toml"))
            == PartialConfig.EMPTY
        )

    def test_invalid_keys(self, tmpdir):
        (tmpdir / "myconf.toml").write_binary(
            b"""
[tool.itpcheck]
k = 9
jobs = 2
foo = 4
"""
        )
        with pytest.raises(
            InvalidKeys,
            match=re.escape("Invalid configuration key(s): 'foo', 'k'."),
        ):
            PartialConfig.load(Path(tmpdir / "myconf.toml"))

    @pytest.mark.parametrize("value", [b'"3"', b"true", b"2.5"])
    def test_invalid_types(self, tmpdir, value):
        (tmpdir / "myconf.toml").write_binary(
            b"[tool.itpcheck]\ndomain-hi = " + value + b"\n"
        )
        with pytest.raises(
            InvalidValueType,
            match=re.escape("Invalid value type for 'domain-hi'."),
        ):
            PartialConfig.load(Path(tmpdir / "myconf.toml"))


class TestPartialOptionsFromIni:
    def test_options_from_ini(self, tmpdir):
        (tmpdir / "setup.cfg").write_binary(EXAMPLE_INI)
        assert PartialConfig.load(Path(tmpdir / "setup.cfg")) == PartialConfig(
            domain_lo=None,
            domain_hi=4,
            step_budget=None,
            max_runs=100,
            jobs=None,
        )

    def test_empty_itpcheck_section(self, tmpdir):
        (tmpdir / "setup.cfg").write_text("[itpcheck]\n", encoding="utf-8")
        assert (
            PartialConfig.load(Path(tmpdir / "setup.cfg"))
            == PartialConfig.EMPTY
        )

    def test_invalid_types(self, tmpdir):
        (tmpdir / "setup.cfg").write_text(
            "[itpcheck]\ndomain-lo = low\n", encoding="utf-8"
        )
        with pytest.raises(
            InvalidValueType,
            match=re.escape("Invalid value type for 'domain-lo'."),
        ):
            PartialConfig.load(Path(tmpdir / "setup.cfg"))


def test_config_from_file_invalid_extension():
    with pytest.raises(ValueError, match="extension.*toml"):
        PartialConfig.load(Path("foo.py"))
