"""Settings for the bounded checker: the input domain, the step budget,
the run cap and the worker count. They come from defaults, then the
nearest ``pyproject.toml`` or ``setup.cfg``, then the command line."""

import configparser
import sys
from dataclasses import dataclass, fields, replace
from itertools import chain
from pathlib import Path
from typing import ClassVar, Collection, Dict, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .checker import CheckConfig
from .common import add_slots

_SECTION = "itpcheck"
_CONFIG_FILENAMES = ("pyproject.toml", "setup.cfg")


@add_slots
@dataclass(frozen=True)
class PartialConfig:
    "Settings from a single source. ``None`` means not given there."
    domain_lo: Optional[int]
    domain_hi: Optional[int]
    step_budget: Optional[int]
    max_runs: Optional[int]
    jobs: Optional[int]

    EMPTY: ClassVar["PartialConfig"]

    @classmethod
    def load(cls, p: Path) -> "PartialConfig":
        "May raise various exceptions on parse problems. File must exist."
        section = _section(p)
        if section is None:
            return cls.EMPTY
        unknown = section.keys() - _KEYS.keys()
        if unknown:
            raise InvalidKeys(unknown)
        return cls(
            **{
                attr: _read_int(key, section[key])
                if key in section
                else None
                for key, attr in _KEYS.items()
            }
        )

    def given(self) -> Dict[str, int]:
        return {
            f.name: getattr(self, f.name)
            for f in fields(PartialConfig)
            if getattr(self, f.name) is not None
        }


PartialConfig.EMPTY = PartialConfig(None, None, None, None, None)

# setting name in files -> attribute name
_KEYS = {
    f.name.replace("_", "-"): f.name for f in fields(PartialConfig)
}


@dataclass(frozen=True)
class Config(PartialConfig):
    "Every setting resolved. Only ``max_runs`` may stay unset."
    __slots__ = ()
    domain_lo: int
    domain_hi: int
    step_budget: int
    jobs: int

    DEFAULT: ClassVar["Config"]

    def apply(self, other: PartialConfig) -> "Config":
        return replace(self, **other.given())

    def validate(self) -> "Config":
        "Raise InvalidValue if the settings do not fit together"
        if self.domain_lo > self.domain_hi:
            raise InvalidValue("domain-lo", "must not exceed domain-hi")
        for attr in ("step_budget", "max_runs", "jobs"):
            value = getattr(self, attr)
            if value is not None and value < 1:
                raise InvalidValue(
                    attr.replace("_", "-"), "must be at least 1"
                )
        return self

    def check_config(self) -> CheckConfig:
        return CheckConfig(
            domain_lo=self.domain_lo,
            domain_hi=self.domain_hi,
            step_budget=self.step_budget,
            max_runs=self.max_runs,
        )


_DEFAULT_CHECK = CheckConfig()
Config.DEFAULT = Config(
    domain_lo=_DEFAULT_CHECK.domain_lo,
    domain_hi=_DEFAULT_CHECK.domain_hi,
    step_budget=_DEFAULT_CHECK.step_budget,
    max_runs=None,
    jobs=1,
)


def collect(
    from_cli: PartialConfig, cwd: Path, config: Optional[Path]
) -> Config:
    "Resolve the settings: defaults, then the settings file, then the CLI"
    path = config or find_config_file(cwd)
    from_file = PartialConfig.load(path) if path else PartialConfig.EMPTY
    return Config.DEFAULT.apply(from_file).apply(from_cli).validate()


def find_config_file(path: Path) -> Optional[Path]:
    "The nearest settings file with an itpcheck section, looking upwards"
    for directory in chain([path], path.parents):
        for name in _CONFIG_FILENAMES:
            candidate = directory / name
            if candidate.is_file() and _section(candidate) is not None:
                return candidate
    return None


def _section(p: Path) -> Optional[Mapping[str, object]]:
    "The raw itpcheck section of a settings file, if it has one"
    if p.suffix == ".toml":
        with p.open("rb") as rfile:
            section = tomllib.load(rfile).get("tool", {}).get(_SECTION)
        return section  # type: ignore[no-any-return]
    elif p.suffix in (".ini", ".cfg"):
        parser = configparser.ConfigParser()
        parser.read(p, encoding="utf-8")
        if not parser.has_section(_SECTION):
            return None
        return {k: _ini_number(v) for k, v in parser.items(_SECTION)}
    raise ValueError(
        "Settings file with invalid extension. Expected .toml, .ini, or .cfg"
    )


def _ini_number(raw: str) -> object:
    try:
        return int(raw)
    except ValueError:
        return raw


def _read_int(key: str, raw: object) -> int:
    # TOML booleans are ints to Python
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    raise InvalidValueType(key)


class InvalidKeys(Exception):
    def __init__(self, keys: Collection[str]) -> None:
        self.keys = keys

    def __str__(self) -> str:
        return (
            "Invalid configuration key(s): "
            + ", ".join(map("'{}'".format, sorted(self.keys)))
            + "."
        )


class InvalidValueType(Exception):
    def __init__(self, key: str) -> None:
        self.key = key

    def __str__(self) -> str:
        return f"Invalid value type for '{self.key}'."


class InvalidValue(Exception):
    def __init__(self, key: str, reason: str) -> None:
        self.key = key
        self.reason = reason

    def __str__(self) -> str:
        return f"Invalid value for '{self.key}': {self.reason}."
