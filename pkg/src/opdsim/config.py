"""Run configuration files: ``[section]`` headers and ``key = value`` lines.

configparser is not used because it cannot report the line of an offending
key, and unknown keys must be rejected with their line number.
"""

from dataclasses import dataclass, field
from pathlib import Path

from .experiment import ExperimentConfig, all_combos
from .placement import OBSTACLE_COUNTS, WINDOW_CODES
from .pointproc import CLUTTER_TYPES, MH_ITERATIONS
from .scene import DEFAULT_COST, DEFAULT_RADIUS, MarkModel


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        self.line = line
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _pair(v):
    parts = v.replace(",", " ").split()
    if len(parts) != 2:
        raise ValueError(f"expected two integers, got {v!r}")
    return int(parts[0]), int(parts[1])


def _choices(allowed):
    def parse(v):
        if v.strip().lower() == "all":
            return tuple(allowed)
        items = [s for s in v.replace(",", " ").split() if s]
        bad = [s for s in items if s not in allowed]
        if bad or not items:
            raise ValueError(f"unknown value(s) {', '.join(bad) or '(none)'}; allowed: {', '.join(map(str, allowed))}")
        return tuple(dict.fromkeys(items))
    return parse


def _counts(v):
    if v.strip().lower() == "all":
        return OBSTACLE_COUNTS
    items = tuple(dict.fromkeys(int(s) for s in v.replace(",", " ").split()))
    bad = [n for n in items if n not in OBSTACLE_COUNTS]
    if bad or not items:
        raise ValueError(f"obstacle counts must be drawn from {OBSTACLE_COUNTS}")
    return items


def _mark_model(v):
    if v == "default":
        return MarkModel()
    if v == "literal":
        return MarkModel.literal()
    raise ValueError("mark_model must be 'default' or 'literal'")


def _penalty(v):
    if v not in ("boundary", "any"):
        raise ValueError("penalty_rule must be 'boundary' or 'any'")
    return v


SCHEMA = {
    "experiment": {
        "root_seed": _int, "replications": _int, "n_clutter": _int, "radius": _float, "cost": _float,
        "lattice": _pair, "start": _pair, "target": _pair, "reuse_clutter": _bool,
        "mark_model": _mark_model, "penalty_rule": _penalty, "mh_iterations": _int,
    },
    "combos": {
        "clutter_types": _choices(CLUTTER_TYPES), "windows": _choices(WINDOW_CODES), "counts": _counts,
    },
    "output": {"results": str, "jobs": _int},
}


@dataclass
class RunConfig:
    experiment: ExperimentConfig
    results: Path = Path("results.csv")
    jobs: int = 1
    source: dict = field(default_factory=dict)  # parsed values, for echoing


def parse_config_text(text, path="<config>"):
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", path, lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]; known: {', '.join(SCHEMA)}", path, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        if section is None:
            raise ConfigError("key outside any [section]", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key '{key}' in [{section}]", path, lineno)
        if (section, key) in values:
            raise ConfigError(f"duplicate key '{key}' in [{section}]", path, lineno)
        try:
            values[(section, key)] = SCHEMA[section][key](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", path, lineno) from None
    return values


def build_run_config(values, path="<config>"):
    exp = {k: v for (s, k), v in values.items() if s == "experiment"}
    rename = {"start": "s", "target": "t"}
    exp = {rename.get(k, k): v for k, v in exp.items()}
    combos = all_combos(values.get(("combos", "clutter_types"), CLUTTER_TYPES),
                        values.get(("combos", "windows"), WINDOW_CODES),
                        values.get(("combos", "counts"), OBSTACLE_COUNTS))
    try:
        experiment = ExperimentConfig(combos=combos, **exp)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None
    jobs = values.get(("output", "jobs"), 1)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1", path)
    return RunConfig(experiment, Path(values.get(("output", "results"), "results.csv")), jobs,
                     {f"{s}.{k}": v for (s, k), v in values.items()})


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return build_run_config(parse_config_text(text, path), path)


DEFAULTS_TEXT = f"""\
[experiment]
root_seed = 0
replications = 100
n_clutter = 100
radius = {DEFAULT_RADIUS}
cost = {DEFAULT_COST}
lattice = 100 100
start = 50 100
target = 50 1
reuse_clutter = true
mark_model = default
penalty_rule = boundary
mh_iterations = {MH_ITERATIONS}

[combos]
clutter_types = all
windows = all
counts = all

[output]
results = results.csv
jobs = 1
"""
