"""Experiment configuration: YAML with line-anchored validation.

Layout::

    master_seed: 7
    experiments:
      - name: gnp-bound
        kind: verify-bound
        model: {family: gnp, p: 0.01}
        n: 200
        trials: 500

See README for the keys each experiment kind accepts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError

_MAP_TAG = "tag:yaml.org,2002:map"


class LineDict(dict):
    """A mapping that remembers the source line of itself and of each key."""

    line = None

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.key_lines = {}

    def line_of(self, key):
        return self.key_lines.get(key, self.line)


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = LineDict()
    out.line = node.start_mark.line + 1
    for k_node, v_node in node.value:
        key = loader.construct_object(k_node, deep=True)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", k_node.start_mark.line + 1)
        out[key] = loader.construct_object(v_node, deep=True)
        out.key_lines[key] = k_node.start_mark.line + 1
    return out


_Loader.add_constructor(_MAP_TAG, _construct_mapping)


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _int_or_list(v):
    return _int(v) or (isinstance(v, list) and bool(v) and all(_int(x) for x in v))


def _int_list(v):
    return isinstance(v, list) and bool(v) and all(_int(x) for x in v)


def _mapping(v):
    return isinstance(v, dict)


def _bool(v):
    return isinstance(v, bool)


def _str(v):
    return isinstance(v, str)


def _prob(v):
    return _num(v) and 0 < v < 1


def _str_list(v):
    return isinstance(v, list) and all(isinstance(x, str) for x in v)


# kind -> {key: (checker, description, default or REQUIRED)}
REQUIRED = object()

SCHEMA = {
    "sample": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "n": (_int, "an integer", REQUIRED),
        "trials": (_int, "an integer", 1),
    },
    "analyze": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "n": (_int, "an integer", REQUIRED),
        "trials": (_int, "an integer", REQUIRED),
        "statistics": (_str_list, "a list of statistic names", ["isolated_count", "avg_degree", "connectivity_indicator"]),
        "beta": (_num, "a number in [0, 1]", 1.0),
    },
    "verify-bound": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "n": (_int_or_list, "an integer or list of integers", REQUIRED),
        "trials": (_int, "an integer", REQUIRED),
    },
    "sweep": {
        "generator": (_str, "one of gnp | mixture | mobility", REQUIRED),
        "C": (_num, "a number", REQUIRED),
        "n_grid": (_int_list, "a list of integers", REQUIRED),
        "beta_rule": (_str, "one | one_minus_inv_sqrt", "one"),
        "trials": (_int, "an integer", REQUIRED),
        "mobility": (_mapping, "a mobility parameter mapping", None),
        "target_dbar": (_num, "a number", None),
        "pilot_trials": (_int, "an integer", 10),
    },
    "equivalence": {
        "model_a": (_mapping, "a model mapping", REQUIRED),
        "model_b": (_mapping, "a model mapping", REQUIRED),
        "n": (_int_or_list, "an integer or list of integers", REQUIRED),
        "trials": (_int, "an integer", REQUIRED),
        "alpha": (_prob, "a number in (0, 1)", 0.01),
        "mode": (_str, "labeled | isomorphism", "labeled"),
    },
    "ide-pos": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "n": (_int, "an integer", REQUIRED),
        "k": (_int, "an integer", 2),
        "trials": (_int, "an integer", REQUIRED),
        "alpha": (_prob, "a number in (0, 1)", 0.01),
        "checks": (_str_list, "a list drawn from ide, pos", ["ide", "pos"]),
        "battery": (_int, "an integer", 10),
    },
    "exchangeability": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "n": (_int, "an integer", REQUIRED),
        "trials": (_int, "an integer", REQUIRED),
        "alpha": (_prob, "a number in (0, 1)", 0.01),
    },
    "definetti": {
        "model": (_mapping, "a model mapping", REQUIRED),
        "anchor": (_int, "an integer", 1),
        "N": (_int, "an integer", REQUIRED),
        "trials": (_int, "an integer", 1),
        "alpha": (_prob, "a number in (0, 1)", 0.01),
        "uniform_test": (_bool, "true or false", False),
    },
    "mobility": {
        "config": (_mapping, "a mobility parameter mapping", {}),
        "n": (_int, "an integer", REQUIRED),
        "trials": (_int, "an integer", REQUIRED),
        "beta": (_num, "a number in [0, 1]", 1.0),
        "trace_trials": (_int, "an integer", 0),
    },
}


@dataclass
class Experiment:
    index: int
    name: str
    kind: str
    params: dict
    line: int | None = None
    key_lines: dict = field(default_factory=dict)

    def line_of(self, key):
        return self.key_lines.get(key, self.line)


@dataclass
class Config:
    path: str
    master_seed: int
    experiments: list
    digest: str


def _load_yaml(text, path):
    try:
        return yaml.load(text, Loader=_Loader)
    except ConfigError as exc:
        raise ConfigError(exc.message, exc.line, path) from None
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line, path) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}", None, path) from None


def _experiment(i, raw, path):
    if not isinstance(raw, dict):
        raise ConfigError(f"experiment #{i + 1} must be a mapping", getattr(raw, "line", None), path)
    line = raw.line
    kind = raw.get("kind")
    if kind not in SCHEMA:
        raise ConfigError(
            f"experiment #{i + 1}: kind must be one of {', '.join(SCHEMA)}, got {kind!r}", raw.line_of("kind"), path
        )
    name = raw.get("name", f"{kind}-{i + 1}")
    if not isinstance(name, str) or not name.replace("-", "").replace("_", "").isalnum():
        raise ConfigError(f"experiment name must be letters, digits, '-' or '_', got {name!r}", raw.line_of("name"), path)
    schema = SCHEMA[kind]
    params = {}
    for key in raw:
        if key in ("kind", "name"):
            continue
        if key not in schema:
            raise ConfigError(f"{kind} experiment does not take {key!r}; allowed: {', '.join(schema)}", raw.line_of(key), path)
    for key, (check, desc, default) in schema.items():
        if key in raw:
            if not check(raw[key]):
                raise ConfigError(f"{key!r} must be {desc}, got {raw[key]!r}", raw.line_of(key), path)
            params[key] = raw[key]
        elif default is REQUIRED:
            raise ConfigError(f"{kind} experiment is missing required key {key!r}", line, path)
        else:
            params[key] = default
    return Experiment(i, name, kind, params, line, dict(raw.key_lines))


def parse_config(text, path="<config>"):
    data = _load_yaml(text, path)
    if data is None:
        data = LineDict()
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping with 'experiments'", 1, path)
    extra = set(data) - {"master_seed", "experiments"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown top-level key {key!r}", data.line_of(key), path)
    seed = data.get("master_seed", 0)
    if not _int(seed) or not 0 <= seed < 2**64:
        raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {seed!r}", data.line_of("master_seed"), path)
    raw = data.get("experiments", [])
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        raise ConfigError("'experiments' must be a list", data.line_of("experiments"), path)
    exps = [_experiment(i, e, path) for i, e in enumerate(raw)]
    names = [e.name for e in exps]
    for e in exps:
        if names.count(e.name) > 1:
            raise ConfigError(f"duplicate experiment name {e.name!r}", e.line, path)
    digest = hashlib.sha256(text.encode()).hexdigest()
    return Config(path, seed, exps, digest)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))
