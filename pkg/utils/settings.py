"""Template-driven validation of TOML run files.

Every leaf of the template is a table of checks (type, default, options,
regex, nmin, nmax, optional, explanation, example). Validation walks the
template, fills defaults and collects every violation before giving up.
"""
import copy
import math
import re
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import toml

from utils.exceptions import ConfigError

TEMPLATE_FILE = Path(__file__).parent / "config.template.toml"
CHECK_KEYS = {"type", "default", "options", "regex", "nmin", "nmax", "optional", "explanation", "example"}


def is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _to_float(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError
    # TOML accepts inf and nan, no setting does
    if not math.isfinite(value):
        raise ValueError
    return float(value)


def _to_int(value):
    if not is_int(value):
        raise TypeError
    return value


def _to_bool(value):
    if not isinstance(value, bool):
        raise TypeError
    return value


def _to_str(value):
    if not isinstance(value, str):
        raise TypeError
    return value


TYPES: Dict[str, Callable[[Any], Any]] = {"int": _to_int, "float": _to_float, "bool": _to_bool, "str": _to_str}


def is_check_table(node: Any) -> bool:
    return isinstance(node, dict) and bool(node) and set(node) <= CHECK_KEYS


def crawl(obj: dict, func: Callable[[List[str], Any], None], path: Optional[List[str]] = None) -> None:
    if path is None:
        path = []
    for key in obj.keys():
        if isinstance(obj[key], dict) and not is_check_table(obj[key]):
            crawl(obj[key], func, path + [key])
            continue
        func(path + [key], obj[key])


def check(value: Any, checks: dict, name: str) -> Tuple[Any, Optional[str]]:
    """Returns (coerced value, None) or (value, description of the violation)."""

    def describe(problem: str) -> str:
        hint = f" ({checks['explanation']})" if "explanation" in checks else ""
        example = f", e.g. {checks['example']!r}" if "example" in checks else ""
        return f"{name}: {problem}{hint}{example}"

    if "type" in checks:
        try:
            value = TYPES[checks["type"]](value)
        except (TypeError, ValueError):
            return value, describe(f"expected {checks['type']}, got {value!r}")
    if "options" in checks and value not in checks["options"]:
        return value, describe(f"{value!r} is not one of {checks['options']}")
    if "regex" in checks and (not isinstance(value, str) or re.match(checks["regex"], value) is None):
        return value, describe(f"{value!r} does not match {checks['regex']}")
    if isinstance(value, (str, bool)):
        return value, None
    sized = hasattr(value, "__iter__")
    measure = len(value) if sized else value
    what = "length" if sized else "value"
    if checks.get("nmin") is not None and measure < checks["nmin"]:
        return value, describe(f"{what} {measure!r} is below the minimum {checks['nmin']}")
    if checks.get("nmax") is not None and measure > checks["nmax"]:
        return value, describe(f"{what} {measure!r} is above the maximum {checks['nmax']}")
    return value, None


def crawl_and_check(obj: dict, path: List[str], checks: dict, problems: List[str], name: str = "") -> dict:
    node = obj
    for key in path[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            problems.append(f"{'.'.join(path[:-1])}: expected a table")
            return obj
    leaf = path[-1]
    dotted = name or ".".join(path)
    if leaf not in node:
        if "default" in checks:
            node[leaf] = copy.deepcopy(checks["default"])
        elif not checks.get("optional", False):
            problems.append(f"{dotted}: required key is missing")
        return obj
    node[leaf], problem = check(node[leaf], checks, dotted)
    if problem:
        problems.append(problem)
    return obj


def unknown_keys(obj: dict, template: dict, path: Optional[List[str]] = None) -> List[str]:
    path = path or []
    found = []
    for key, value in obj.items():
        if key not in template:
            found.append(".".join(path + [key]))
        elif isinstance(value, dict) and not is_check_table(template[key]):
            found.extend(unknown_keys(value, template[key], path + [key]))
    return found


def validate(raw: dict, template: dict) -> Tuple[dict, List[str]]:
    """Validated copy of raw with defaults filled, plus every violation found."""
    result = copy.deepcopy(raw)
    problems = [f"{key}: unknown key" for key in unknown_keys(raw, template)]
    crawl(template, lambda path, checks: crawl_and_check(result, path, checks, problems))
    return result, problems


def load_template(template_file=TEMPLATE_FILE) -> dict:
    return toml.load(template_file)


def validate_text(text: str, origin: str = "<config>", template_file=TEMPLATE_FILE) -> Dict:
    """Parses TOML text and validates it against the template.

    Raises:
        ConfigError: the text is not valid TOML, or lists every violated check.
    """
    try:
        raw = toml.loads(text)
    except toml.TomlDecodeError as error:
        raise ConfigError(f"could not parse {origin}", [str(error)])
    validated, problems = validate(raw, load_template(template_file))
    if problems:
        raise ConfigError(f"{origin} has {len(problems)} invalid setting(s)", problems)
    return validated
