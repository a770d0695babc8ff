"""INI configuration for the command line.

Sections::

    [space]      kind, n, k and any builder parameter (gamma, b, m, ...)
    [suite]      name, seed, points
    [integrate]  t1, step, x0, p0, chain

Matrix parameters are written row by row with ';' between rows, e.g.
``gamma = 1 + x1^2, 0; 0, 1``.  Errors carry the file and line of the
offending entry.
"""

import configparser
import re
from dataclasses import dataclass, field

from .catalog import DEFAULTS, KINDS
from .dynamics import CHAINS
from .expr import ExprError, parse_expr
from .suites import SUITES


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = f"{path or '<config>'}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(f"{where}{message}")


@dataclass
class Config:
    kind: str = None
    n: int = 2
    k: int = 3
    params: dict = field(default_factory=dict)
    suite: str = "all"
    seed: int = 0
    points: int = None
    integrate: dict = field(default_factory=dict)
    path: str = None


def _locate(text, section, key):
    """Line number of ``key`` inside ``[section]``, or of the section header."""
    current = None
    header = None
    for no, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if current == section:
                header = no
            continue
        if current == section and key is not None:
            m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
            if m and m.group(1).strip().lower() == key.lower():
                return no
    return header


def _vector(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"expected a comma separated list of numbers, got {text!r}") from None


INTEGRATE_KEYS = {"t1": float, "step": float, "x0": _vector, "p0": _vector, "chain": str}
SUITE_KEYS = {"name": str, "seed": int, "points": int}


def _coerce_param(kind, key, value):
    default = DEFAULTS.get(kind, {}).get(key)
    if isinstance(default, float):
        return float(value)
    return value.strip().strip('"').strip("'")


def parse_config(text, path=None):
    """Parse configuration text into a :class:`Config`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=path or "<config>")
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1] if hasattr(exc, "message") else str(exc),
                          path, exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("entries must follow a [section] header", path, exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", path, line) from None

    cfg = Config(path=path)
    for section in cp.sections():
        if section not in ("space", "suite", "integrate"):
            raise ConfigError(f"unknown section [{section}]", path, _locate(text, section, None))

    def fail(section, key, message):
        raise ConfigError(message, path, _locate(text, section, key))

    if cp.has_section("space"):
        sec = cp["space"]
        kind = sec.get("kind")
        if kind is None:
            fail("space", None, "[space] needs a kind")
        kind = kind.strip()
        if kind not in KINDS:
            fail("space", "kind", f"unknown space kind {kind!r}; choose from {', '.join(KINDS)}")
        cfg.kind = kind
        allowed = set(DEFAULTS[kind]) | {"gamma"}
        for key, value in sec.items():
            if key == "kind":
                continue
            if key in ("n", "k"):
                try:
                    setattr(cfg, key, int(value))
                except ValueError:
                    fail("space", key, f"{key} must be an integer, got {value!r}")
                if getattr(cfg, key) < (1 if key == "n" else 2):
                    fail("space", key, f"{key} is out of range")
                continue
            if key not in allowed:
                fail("space", key, f"unknown parameter {key!r} for {kind}")
            try:
                cfg.params[key] = _coerce_param(kind, key, value)
            except ValueError:
                fail("space", key, f"{key} must be a number, got {value!r}")
            if isinstance(cfg.params[key], str) and cfg.params[key] not in ("default", "none"):
                for piece in re.split(r"[;,]", cfg.params[key]):
                    try:
                        parse_expr(piece)
                    except ExprError as exc:
                        fail("space", key, f"{key}: {exc.message} in {piece.strip()!r}")

    if cp.has_section("suite"):
        for key, value in cp["suite"].items():
            if key not in SUITE_KEYS:
                fail("suite", key, f"unknown key {key!r} in [suite]")
            try:
                v = SUITE_KEYS[key](value)
            except ValueError:
                fail("suite", key, f"bad value {value!r} for {key}")
            if key == "name":
                if v not in SUITES + ("all",):
                    fail("suite", key, f"unknown suite {v!r}")
                cfg.suite = v
            else:
                setattr(cfg, key, v)

    if cp.has_section("integrate"):
        for key, value in cp["integrate"].items():
            if key not in INTEGRATE_KEYS:
                fail("integrate", key, f"unknown key {key!r} in [integrate]")
            try:
                v = INTEGRATE_KEYS[key](value)
            except ValueError as exc:
                fail("integrate", key, f"bad value for {key}: {exc}")
            if key == "chain" and v not in CHAINS:
                fail("integrate", key, f"chain must be one of {', '.join(CHAINS)}")
            if key in ("x0", "p0") and len(v) != cfg.n:
                fail("integrate", key, f"{key} needs {cfg.n} entries")
            if key in ("t1", "step") and not v > 0:
                fail("integrate", key, f"{key} must be positive")
            cfg.integrate[key] = v
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", path) from None
    return parse_config(text, path)
