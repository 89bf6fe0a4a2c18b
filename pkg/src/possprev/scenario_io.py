"""Scenario documents: parsing with field/line diagnostics, and serialisation.

A document (YAML or JSON) is a single scenario mapping, a list of them, or a
mapping with a ``scenarios`` list.  One scenario::

    id: log-benchmark
    wealth: {w1: 10, w2: 10}
    loss: 5
    utilities: {u: {log: {}}, v: {crra: {eta: 2}}}
    loss_probability: {exp_loss: {p0: 0.5, k: 1}}
    weighting: {power: {k: 1}}              # optional, default uniform
    risk1: {triangular: [0, 1, 1]}          # optional
    risk2: [{triangular: [0, 1, 1]}, {discrete: [[-1, 0.5], [1, 0.5]]}]
    models: [benchmark, m4, m5]             # optional, default all supported
"""

from __future__ import annotations

import copy
import math
import re

import yaml

from .errors import ConstructionError, SchemaError
from .fuzzy import FuzzyNumber, WeightingFunction
from .models import ModelId, Scenario
from .preferences import LossProbability, UtilityFunction
from .stochastic import DiscreteRandomVariable, discretize_normal

SCENARIO_KEYS = {"id", "wealth", "loss", "utilities", "loss_probability", "weighting",
                 "risk1", "risk2", "models"}
UTILITY_PARAMS = {"log": (), "crra": ("eta",), "cara": ("alpha",), "quadratic": ("b",)}
LOSS_PARAMS = ("p0", "k")
FUZZY_KEYS = {"triangular": 3, "trapezoidal": 4, "sampled": None, "crisp": None}
RANDOM_KEYS = {"discrete", "normal", "point"}


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-7``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                |[0-9][0-9_]*[eE][-+]?[0-9]+
                |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                |\.(?:inf|Inf|INF)|\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


def _line_map(node, path=(), out=None):
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (k.value,)] = k.start_mark.line + 1
            _line_map(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


def _fmt(path):
    text = ""
    for p in path:
        text += f"[{p}]" if isinstance(p, int) else (f".{p}" if text else str(p))
    return text or "<document>"


class _Reader:
    """Walks one document, raising SchemaError with path and line."""

    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, msg):
        line = None
        for n in range(len(path), -1, -1):
            if tuple(path[:n]) in self.lines:
                line = self.lines[tuple(path[:n])]
                break
        raise SchemaError(msg, _fmt(path), line)

    def mapping(self, obj, path, allowed=None, required=()):
        if not isinstance(obj, dict):
            self.fail(path, f"expected a mapping, got {type(obj).__name__}")
        if allowed is not None:
            unknown = sorted(set(map(str, obj)) - set(allowed))
            if unknown:
                self.fail(path + (unknown[0],), f"unknown key {unknown[0]!r}")
        for key in required:
            if key not in obj:
                self.fail(path, f"missing required key {key!r}")
        return obj

    def number(self, obj, path, positive=False):
        if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
            self.fail(path, f"expected a finite number, got {obj!r}")
        if positive and obj <= 0:
            self.fail(path, f"must be > 0, got {obj!r}")
        return float(obj)

    def numbers(self, obj, path, n=None):
        if not isinstance(obj, list):
            self.fail(path, "expected a list of numbers")
        if n is not None and len(obj) != n:
            self.fail(path, f"expected {n} numbers, got {len(obj)}")
        return [self.number(x, path + (i,)) for i, x in enumerate(obj)]

    def rows(self, obj, path, width):
        if not isinstance(obj, list) or not obj:
            self.fail(path, f"expected a list of [{width} numbers] rows")
        return [self.numbers(r, path + (i,), width) for i, r in enumerate(obj)]

    def tagged(self, obj, path, options, extra=()):
        """``{family: payload}`` with exactly one known family key."""
        if isinstance(obj, str):
            obj = {obj: {}}
        self.mapping(obj, path)
        keys = [k for k in obj if k not in extra]
        if len(keys) != 1 or keys[0] not in options:
            self.fail(path, f"expected exactly one of {sorted(options)}")
        return keys[0], obj[keys[0]]

    def build(self, path, factory, *args):
        try:
            return factory(*args)
        except ConstructionError as exc:
            self.fail(path, str(exc))

    def utility(self, obj, path):
        fam, payload = self.tagged(obj, path, UTILITY_PARAMS)
        names = UTILITY_PARAMS[fam]
        self.mapping(payload or {}, path + (fam,), names, names)
        args = [self.number(payload[n], path + (fam, n)) for n in names]
        return self.build(path + (fam,), UtilityFunction, fam, *args)

    def loss(self, obj, path):
        fam, payload = self.tagged(obj, path, ("exp_loss", "rational_loss"))
        self.mapping(payload, path + (fam,), LOSS_PARAMS, LOSS_PARAMS)
        args = [self.number(payload[n], path + (fam, n)) for n in LOSS_PARAMS]
        return self.build(path + (fam,), LossProbability, fam, *args)

    def weighting(self, obj, path):
        fam, payload = self.tagged(obj, path, ("uniform", "power", "tabulated"))
        if fam == "uniform":
            self.mapping(payload or {}, path + (fam,), ())
            return WeightingFunction.uniform()
        if fam == "power":
            self.mapping(payload, path + (fam,), ("k",), ("k",))
            return self.build(path + (fam,), WeightingFunction.power_law,
                              self.number(payload["k"], path + (fam, "k")))
        return self.build(path + (fam,), WeightingFunction.tabulated,
                          self.rows(payload, path + (fam,), 2))

    def risk(self, obj, path):
        if isinstance(obj, list):
            if not 1 <= len(obj) <= 2:
                self.fail(path, "a period holds at most one fuzzy and one random risk")
            return tuple(self._one_risk(r, path + (i,)) for i, r in enumerate(obj))
        return self._one_risk(obj, path)

    def _one_risk(self, obj, path):
        fam, payload = self.tagged(obj, path, set(FUZZY_KEYS) | RANDOM_KEYS, ("shift",))
        shift = self.number(obj.get("shift", 0.0), path + ("shift",)) if isinstance(obj, dict) else 0.0
        p = path + (fam,)
        if fam == "triangular":
            return self.build(p, FuzzyNumber.triangular, *self.numbers(payload, p, 3), shift)
        if fam == "trapezoidal":
            return self.build(p, FuzzyNumber.trapezoidal, *self.numbers(payload, p, 4), shift)
        if fam == "sampled":
            return self.build(p, FuzzyNumber.sampled, self.rows(payload, p, 3), shift)
        if fam == "crisp":
            return FuzzyNumber.crisp(self.number(payload, p) + shift)
        if fam == "point":
            return DiscreteRandomVariable.point_mass(self.number(payload, p) + shift)
        if fam == "discrete":
            X = self.build(p, DiscreteRandomVariable, self.rows(payload, p, 2))
            return X.shifted(shift) if shift else X
        self.mapping(payload, p, ("mean", "stdev", "nodes"), ("mean", "stdev"))
        nodes = payload.get("nodes", 7)
        if not isinstance(nodes, int) or isinstance(nodes, bool):
            self.fail(p + ("nodes",), f"expected an integer, got {nodes!r}")
        X = self.build(p, discretize_normal, self.number(payload["mean"], p + ("mean",)),
                       self.number(payload["stdev"], p + ("stdev",)), nodes)
        return X.shifted(shift) if shift else X

    def scenario(self, obj, path, index):
        self.mapping(obj, path, SCENARIO_KEYS,
                     ("wealth", "loss", "utilities", "loss_probability"))
        name = obj.get("id", f"scenario-{index}")
        if not isinstance(name, (str, int)) or isinstance(name, bool):
            self.fail(path + ("id",), "id must be a string")
        wealth = self.mapping(obj["wealth"], path + ("wealth",), ("w1", "w2"), ("w1", "w2"))
        utils = self.mapping(obj["utilities"], path + ("utilities",), ("u", "v"), ("u", "v"))
        kw = dict(
            w1=self.number(wealth["w1"], path + ("wealth", "w1")),
            w2=self.number(wealth["w2"], path + ("wealth", "w2")),
            l=self.number(obj["loss"], path + ("loss",), positive=True),
            u=self.utility(utils["u"], path + ("utilities", "u")),
            v=self.utility(utils["v"], path + ("utilities", "v")),
            p=self.loss(obj["loss_probability"], path + ("loss_probability",)),
            f=(self.weighting(obj["weighting"], path + ("weighting",))
               if "weighting" in obj else WeightingFunction.uniform()),
            risk1=self.risk(obj["risk1"], path + ("risk1",)) if obj.get("risk1") is not None else None,
            risk2=self.risk(obj["risk2"], path + ("risk2",)) if obj.get("risk2") is not None else None,
            name=str(name),
        )
        s = self.build(path, Scenario, *kw.values())
        models = None
        if "models" in obj:
            if not isinstance(obj["models"], list):
                self.fail(path + ("models",), "expected a list of model ids")
            models = []
            for i, m in enumerate(obj["models"]):
                try:
                    models.append(ModelId.parse(m))
                except ValueError as exc:
                    self.fail(path + ("models", i), str(exc))
        return s, models


def parse_document(text: str):
    """Parse a document into ``[(Scenario, models or None), ...]`` and the raw data."""
    try:
        node = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"not valid YAML/JSON: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    if node is None:
        raise SchemaError("empty document")
    return parse_data(data, _line_map(node)), data


def parse_data(data, lines=None):
    """Build ``[(Scenario, models or None), ...]`` from an already loaded document."""
    reader = _Reader(lines or {})
    items, base = _scenario_list(reader, data)
    return [reader.scenario(obj, base + (i,) if base is not None else (), i)
            for i, obj in enumerate(items)]


def scenario_items(data):
    """The raw per-scenario mappings of a document, in order."""
    if isinstance(data, dict) and isinstance(data.get("scenarios"), list):
        return data["scenarios"]
    return data if isinstance(data, list) else [data]


def _scenario_list(reader, data):
    if isinstance(data, dict) and "scenarios" in data:
        reader.mapping(data, (), ("scenarios",))
        if not isinstance(data["scenarios"], list) or not data["scenarios"]:
            reader.fail(("scenarios",), "expected a non-empty list of scenarios")
        return data["scenarios"], ("scenarios",)
    if isinstance(data, list):
        if not data:
            reader.fail((), "empty scenario list")
        return data, ()
    return [data], None


def load_scenarios(path):
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())[0]


def set_path(data, dotted: str, value):
    """Return a deep copy of raw document ``data`` with ``dotted`` set to ``value``.

    Path components are mapping keys or list indices, e.g.
    ``risk2.triangular.1`` or ``scenarios.0.loss``.
    """
    out = copy.deepcopy(data)
    parts = dotted.split(".")
    node = out
    for i, part in enumerate(parts):
        key = int(part) if isinstance(node, list) and part.lstrip("-").isdigit() else part
        try:
            target = node[key]
        except (KeyError, IndexError, TypeError):
            raise SchemaError(f"no such field {part!r}", path=".".join(parts[:i + 1])) from None
        if i == len(parts) - 1:
            if isinstance(target, bool) or not isinstance(target, (int, float)):
                raise SchemaError("parameter path must address a numeric field", path=dotted)
            node[key] = value
        else:
            node = target
    return out


def _risk_dict(r):
    if isinstance(r, DiscreteRandomVariable):
        return {"discrete": [[x, p] for x, p in r.outcomes]}
    if r.family == "sampled":
        d = {"sampled": r.grid.tolist()}
    else:
        d = {r.family: list(r.params)}
    if r.shift:
        d["shift"] = r.shift
    return d


def scenario_to_dict(s: Scenario, models=None) -> dict:
    """Document form of ``s``; round-trips through :func:`parse_document`."""
    def util(u):
        names = UTILITY_PARAMS[u.family]
        return {u.family: {n: u.param for n in names}}

    if s.f.family == "uniform":
        weighting = {"uniform": {}}
    elif s.f.family == "power":
        weighting = {"power": {"k": s.f.exponent}}
    else:
        weighting = {"tabulated": s.f.grid.tolist()}
    out = {
        "id": s.name,
        "wealth": {"w1": s.w1, "w2": s.w2},
        "loss": s.l,
        "utilities": {"u": util(s.u), "v": util(s.v)},
        "loss_probability": {s.p.family: {"p0": s.p.p0, "k": s.p.k}},
        "weighting": weighting,
    }
    for key in ("risk1", "risk2"):
        r = getattr(s, key)
        if r is None:
            continue
        out[key] = ([_risk_dict(x) for x in r] if isinstance(r, (tuple, list))
                    else _risk_dict(r))
    if models:
        out["models"] = [ModelId.parse(m).value for m in models]
    return out
