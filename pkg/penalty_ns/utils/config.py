"""Run configuration: TOML parsing, validation, canonical form and hashing."""

from __future__ import annotations

import ast
import copy
import hashlib
import json
import logging
import math
import re
from typing import Any, Callable, Dict, Iterable, Mapping, Tuple

import tomli

from penalty_ns.hparams import (
    DEFAULT_CONFIG,
    INITIAL_CONDITIONS,
    SCHEME_TAGS,
    THRESHOLD_MODES,
)

logger = logging.getLogger(__name__)

_LINE_PATTERN = re.compile(r"line (\d+)")


class ConfigError(ValueError):
    """Invalid run configuration.

    Attributes:
        line: 1-based line of a syntax error, if known.
        key: Dotted key ("scheme.alpha") of a range or type error, if any.
    """

    def __init__(
        self, message: str, line: int | None = None, key: str | None = None
    ) -> None:
        """Initialize ConfigError."""
        super().__init__(message)
        self.line = line
        self.key = key


class RunConfig(dict):
    """Validated run configuration, indexed as config[section][key]."""

    def canonical(self) -> str:
        """Canonical TOML text."""
        return canonicalize(self)

    @property
    def hash(self) -> str:
        """Short manifest hash of the config."""
        return config_hash(self)


# =========================================================================== #
#                                 Range rules                                 #
# =========================================================================== #


def _positive(x) -> bool:
    return x > 0


def _at_least(bound) -> Callable[[Any], bool]:
    return lambda x: x >= bound


def _one_of(choices) -> Callable[[Any], bool]:
    return lambda x: x in choices


# Dotted key -> (predicate, description of the allowed range)
_RULES: Dict[str, Tuple[Callable[[Any], bool], str]] = {
    "grid.L": (_positive, "> 0"),
    "grid.N": (lambda x: x >= 8 and x % 2 == 0, "even and >= 8"),
    "grid.dealias_pad": (_at_least(1.5), ">= 1.5"),
    "grid.fft_workers": (_at_least(1), ">= 1"),
    "scheme.nu": (_positive, "> 0"),
    "scheme.T": (_positive, "> 0"),
    "scheme.M": (_at_least(0), ">= 0"),
    "scheme.epsilon": (_positive, "> 0"),
    "scheme.eta": (lambda x: 0 < x < 0.5, "in the open interval (0, 1/2)"),
    "scheme.alpha": (lambda x: x > 1, "> 1"),
    "scheme.picard_tol": (_positive, "> 0"),
    "scheme.picard_max_iter": (_at_least(1), ">= 1"),
    "scheme.divergence_guard": (lambda x: x > 1, "> 1"),
    "noise.J": (lambda x: x == -1 or x >= 1, "-1 (auto) or >= 1"),
    "noise.gamma": (lambda x: x > 2, "> 2"),
    "study.levels": (
        lambda x: len(x) >= 1 and all(m >= 1 for m in x)
        and len(set(x)) == len(x),
        "a non-empty list of distinct positive step counts",
    ),
    "study.M_ref": (_at_least(1), ">= 1"),
    "study.paths": (_at_least(1), ">= 1"),
    "study.base_seed": (lambda x: 0 <= x < 2**64, "in [0, 2^64)"),
    "study.workers": (_at_least(1), ">= 1"),
    "study.C": (lambda x: not math.isnan(x), "a number (< 0: median)"),
    "study.r": (_at_least(0), ">= 0"),
    "study.threshold_mode": (_one_of(THRESHOLD_MODES), str(THRESHOLD_MODES)),
    "study.threshold_quantile": (lambda x: 0 < x <= 1, "in (0, 1]"),
    "study.mu": (lambda x: not math.isnan(x), "a number (< 0: default)"),
    "study.init": (_one_of(INITIAL_CONDITIONS), str(INITIAL_CONDITIONS)),
    "study.init_amplitude": (_at_least(0), ">= 0"),
    "simulate.scheme": (_one_of(SCHEME_TAGS), str(SCHEME_TAGS)),
    "simulate.path_index": (_at_least(0), ">= 0"),
    "simulate.init": (_one_of(INITIAL_CONDITIONS), str(INITIAL_CONDITIONS)),
    "simulate.init_amplitude": (_at_least(0), ">= 0"),
    "simulate.checkpoint_every": (_at_least(0), ">= 0"),
    "output.verbosity": (_one_of((0, 1, 2)), "0, 1 or 2"),
}


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Convert value to the type of default or raise ConfigError."""
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
    elif isinstance(default, list):
        if isinstance(value, (list, tuple)) and all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            return list(value)
    expected = type(default).__name__
    if isinstance(default, list):
        expected = "list of int"
    raise ConfigError(
        f"{key} must be of type {expected}, but it is {value!r}!", key=key
    )


def _check_ranges(config: Mapping[str, Mapping[str, Any]]) -> None:
    for key, (predicate, allowed) in _RULES.items():
        section, name = key.split(".")
        value = config[section][name]
        if not predicate(value):
            raise ConfigError(
                f"{key} must be {allowed}, but it is {value!r}!", key=key
            )


def _check_cross(config: Mapping[str, Mapping[str, Any]]) -> None:
    N = config["grid"]["N"]
    J = config["noise"]["J"]
    if J != -1 and 2 * J + 1 > N:
        raise ConfigError(
            f"noise.J must satisfy 2J + 1 <= grid.N = {N}, but it is {J}!",
            key="noise.J",
        )
    M_ref = config["study"]["M_ref"]
    for M in config["study"]["levels"]:
        if M_ref % M != 0:
            raise ConfigError(
                f"study.levels must divide study.M_ref = {M_ref}, but "
                f"{M} does not!",
                key="study.levels",
            )


def validate(config: Mapping[str, Mapping[str, Any]]) -> RunConfig:
    """Type-check, range-check and cross-check a full config."""
    checked = RunConfig()
    for section, defaults in DEFAULT_CONFIG.items():
        if section not in config:
            raise ConfigError(f"Missing section [{section}]!", key=section)
        checked[section] = {}
        for name, default in defaults.items():
            key = f"{section}.{name}"
            if name not in config[section]:
                raise ConfigError(f"Missing key {key}!", key=key)
            checked[section][name] = _coerce(
                key, config[section][name], default
            )
    _check_ranges(checked)
    _check_cross(checked)
    return checked


# =========================================================================== #
#                                   Parsing                                   #
# =========================================================================== #


def default_config() -> RunConfig:
    """The documented default config."""
    return validate(copy.deepcopy(DEFAULT_CONFIG))


def _merge(
    config: Dict[str, Dict[str, Any]], loaded: Mapping[str, Any]
) -> None:
    for section, values in loaded.items():
        if section not in DEFAULT_CONFIG:
            raise ConfigError(f"Unknown section [{section}]!", key=section)
        if not isinstance(values, Mapping):
            raise ConfigError(
                f"{section} must be a section, but it is {values!r}!",
                key=section,
            )
        for name, value in values.items():
            if name not in DEFAULT_CONFIG[section]:
                raise ConfigError(
                    f"Unknown key {section}.{name}!", key=f"{section}.{name}"
                )
            config[section][name] = value


def apply_overrides(
    config: Dict[str, Dict[str, Any]], overrides: Iterable[str]
) -> None:
    """Apply "section.key=value" overrides in place.

    Values are evaluated with ast.literal_eval and fall back to the raw
    string, so both alpha=3 and init=zero work.
    """
    for opt in overrides:
        tokens = opt.split("=", 1)
        if len(tokens) != 2:
            raise ConfigError(
                "Options must be a key-value pair separated by '=', but "
                f"found {opt}."
            )
        params = tokens[0].strip().split(".")
        if len(params) != 2:
            raise ConfigError(
                f"Option key must be section.key, but it is {tokens[0]}!"
            )
        section, name = params
        if section not in DEFAULT_CONFIG or name not in DEFAULT_CONFIG[section]:
            raise ConfigError(
                f"This param ({tokens[0]}) is not defined in the config. "
                "This is likely not a valid param.",
                key=tokens[0],
            )
        try:
            value = ast.literal_eval(tokens[1].strip())
        except (ValueError, SyntaxError):
            value = tokens[1].strip()
        config[section][name] = value


def parse_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Parse TOML config text on top of the defaults.

    Args:
        text: Config text with [grid], [scheme], [noise], [study],
            [simulate] and [output] sections; missing keys keep defaults.
        overrides: "section.key=value" strings applied after the text.

    Raises:
        ConfigError: Syntax error (with line), unknown key, wrong type or
            value out of range (with the dotted key).
    """
    try:
        loaded = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        line = getattr(err, "lineno", None)
        if line is None:
            match = _LINE_PATTERN.search(str(err))
            line = int(match.group(1)) if match else None
        raise ConfigError(
            f"Config syntax error at line {line}: {err}", line=line
        ) from err
    config = copy.deepcopy(DEFAULT_CONFIG)
    _merge(config, loaded)
    apply_overrides(config, overrides)
    return validate(config)


# =========================================================================== #
#                          Canonical form and hashing                         #
# =========================================================================== #


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise TypeError(f"Cannot format {value!r} as TOML!")


def canonicalize(config: Mapping[str, Mapping[str, Any]]) -> str:
    """Every key in the default section and key order, repr floats."""
    lines = []
    for section, defaults in DEFAULT_CONFIG.items():
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        for name in defaults:
            lines.append(f"{name} = {_format_value(config[section][name])}")
    return "\n".join(lines) + "\n"


def config_hash(config: Mapping[str, Mapping[str, Any]]) -> str:
    """First 8 hex digits of the SHA-512 of the sorted JSON dump."""
    dict_str = json.dumps(config, sort_keys=True)
    return hashlib.sha512(dict_str.encode("utf-8")).hexdigest()[:8]
