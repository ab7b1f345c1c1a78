"""Scenario configs: schema checks, system construction and seeded templates.

A config is a JSON object::

    {"name": ..., "seed": 7, "transition": [[1, 1], [1, 1]], "alpha": 0.5, "beta": 1.0, "d": 2,
     "fields": {"C": <generator>},
     "systems": {"A": {"generator": <generator>},
                 "B": {"conjugate": {"of": "A", "field": "C", "inverse": true}}},
     "experiments": [{"id": "eq", "type": "periodic", ...}],
     "tolerances": {"tol_scale": 1.0}}

where ``<generator>`` is ``{"window_radius": m, "entries": {word: matrix}}``.
Other system forms are ``{"constant": M, "radius": r}``,
``{"perturb": {"of": S, "word": "010", "delta": M}}`` and
``{"random_near": {"base": M, "eps": e, "radius": r, "seed": s}}``.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cocycle import CocycleSystem, Generator, conjugate_system, perturb
from .errors import CocylabError, ConfigInvalid, UnknownTemplate
from .numerics import inverse
from .sft import Metric, TransitionStructure, format_word, parse_word

SYSTEM_FORMS = ("generator", "constant", "conjugate", "perturb", "random_near")
EXPERIMENT_TYPES = ("validate", "periodic", "bunching", "holonomy", "condition_b", "conjugacy",
                    "closing", "centralizer", "coset", "combine", "spectrum", "splitting")


def _fail(pointer: str, msg: str):
    raise ConfigInvalid(f"{pointer}: {msg}")


def _matrix(obj, pointer: str, d: int | None = None) -> np.ndarray:
    try:
        m = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        _fail(pointer, "not a numeric matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        _fail(pointer, f"expected a square matrix, got shape {m.shape}")
    if d is not None and m.shape[0] != d:
        _fail(pointer, f"expected a {d}x{d} matrix, got {m.shape[0]}x{m.shape[1]}")
    if not np.all(np.isfinite(m)):
        _fail(pointer, "matrix has non-finite entries")
    return m


def validate_config(cfg) -> dict:
    """Check the schema and return a normalized deep copy.

    Raises ConfigInvalid with a JSON-pointer style location.
    """
    if not isinstance(cfg, dict):
        _fail("", "config must be a JSON object")
    cfg = copy.deepcopy(cfg)
    q = cfg.get("transition")
    if not isinstance(q, list) or not q:
        _fail("/transition", "missing or empty transition matrix")
    k = len(q)
    for i, row in enumerate(q):
        if not isinstance(row, list) or len(row) != k:
            n = len(row) if isinstance(row, list) else "non-list"
            _fail(f"/transition/{i}", f"row {i} has length {n}, expected {k}")
        if any(v not in (0, 1) for v in row):
            _fail(f"/transition/{i}", f"row {i} has entries other than 0/1")
    for key, default in (("alpha", 0.5), ("beta", 1.0)):
        v = cfg.setdefault(key, default)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            _fail(f"/{key}", "must be a number")
    if not 0 < cfg["alpha"] < 1:
        _fail("/alpha", "must lie in (0, 1)")
    if not 0 < cfg["beta"] <= 1:
        _fail("/beta", "must lie in (0, 1]")
    seed = cfg.setdefault("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        _fail("/seed", "must be a nonnegative integer")
    cfg.setdefault("name", "scenario")
    d = cfg.get("d")
    if d is not None and (not isinstance(d, int) or d < 1):
        _fail("/d", "must be a positive integer")

    # a lone top-level generator is system A
    if "generator" in cfg:
        cfg.setdefault("systems", {})
        cfg["systems"].setdefault("A", {"generator": cfg.pop("generator")})
    fields = cfg.setdefault("fields", {})
    systems = cfg.setdefault("systems", {})
    if not isinstance(fields, dict):
        _fail("/fields", "must be an object")
    if not isinstance(systems, dict):
        _fail("/systems", "must be an object")
    for name, g in fields.items():
        _check_generator(g, f"/fields/{name}", k)
    for label, spec in systems.items():
        ptr = f"/systems/{label}"
        if not isinstance(spec, dict) or len(spec) != 1 or next(iter(spec)) not in SYSTEM_FORMS:
            _fail(ptr, f"must be an object with exactly one of {', '.join(SYSTEM_FORMS)}")
        form, body = next(iter(spec.items()))
        if form == "generator":
            _check_generator(body, f"{ptr}/generator", k)
        elif form == "constant":
            _matrix(body, f"{ptr}/constant")
        elif form in ("conjugate", "perturb"):
            if not isinstance(body, dict) or body.get("of") not in systems:
                _fail(f"{ptr}/{form}/of", "must name another system")
            if form == "conjugate" and ("field" in body) == ("matrix" in body):
                _fail(f"{ptr}/conjugate", "needs exactly one of 'field' or 'matrix'")
            if form == "conjugate" and "field" in body and body["field"] not in fields:
                _fail(f"{ptr}/conjugate/field", f"unknown field {body['field']!r}")
            if form == "perturb":
                if "word" not in body or "delta" not in body:
                    _fail(f"{ptr}/perturb", "needs 'word' and 'delta'")
                _matrix(body["delta"], f"{ptr}/perturb/delta")
        elif form == "random_near":
            if not isinstance(body, dict) or "base" not in body or "eps" not in body:
                _fail(f"{ptr}/random_near", "needs 'base' and 'eps'")
            _matrix(body["base"], f"{ptr}/random_near/base")
    exps = cfg.setdefault("experiments", [])
    if not isinstance(exps, list):
        _fail("/experiments", "must be a list")
    seen = set()
    for i, e in enumerate(exps):
        ptr = f"/experiments/{i}"
        if not isinstance(e, dict):
            _fail(ptr, "must be an object")
        if e.get("type") not in EXPERIMENT_TYPES:
            _fail(f"{ptr}/type", f"unknown experiment type {e.get('type')!r}")
        e.setdefault("id", f"{i:02d}-{e['type']}")
        if e["id"] in seen:
            _fail(f"{ptr}/id", f"duplicate id {e['id']!r}")
        seen.add(e["id"])
        if e.setdefault("expect", "PASS") not in ("PASS", "FAIL"):
            _fail(f"{ptr}/expect", "must be PASS or FAIL")
        for key in ("a", "b", "system"):
            if key in e and e[key] not in systems:
                _fail(f"{ptr}/{key}", f"unknown system {e[key]!r}")
    tol = cfg.setdefault("tolerances", {})
    if not isinstance(tol, dict):
        _fail("/tolerances", "must be an object")
    ts_ = tol.setdefault("tol_scale", 1.0)
    if not isinstance(ts_, (int, float)) or ts_ <= 0:
        _fail("/tolerances/tol_scale", "must be a positive number")
    return cfg


def _check_generator(g, ptr: str, k: int):
    if not isinstance(g, dict) or "window_radius" not in g or "entries" not in g:
        _fail(ptr, "generator needs 'window_radius' and 'entries'")
    m = g["window_radius"]
    if not isinstance(m, int) or m < 0:
        _fail(f"{ptr}/window_radius", "must be a nonnegative integer")
    for w in g["entries"]:
        try:
            word = parse_word(w)
        except ValueError as exc:
            _fail(f"{ptr}/entries/{w}", str(exc))
        if len(word) != 2 * m + 1 or any(not 0 <= s < k for s in word):
            _fail(f"{ptr}/entries/{w}", f"word must have length {2 * m + 1} over 0..{k - 1}")


def load_config(source) -> dict:
    """Read a config from a path, a JSON string or a dict and validate it."""
    if isinstance(source, dict):
        return validate_config(source)
    text = str(source)
    path = Path(text)
    if not text.lstrip().startswith("{"):
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    return validate_config(obj)


@dataclass
class Scenario:
    """A validated config with its shift, metric, fields and cocycles built."""

    config: dict
    ts: TransitionStructure
    metric: Metric
    fields: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.config["seed"]

    @property
    def tol_scale(self) -> float:
        return float(self.config["tolerances"]["tol_scale"])

    @property
    def d(self) -> int:
        return next(iter(self.systems.values())).d if self.systems else int(self.config.get("d") or 0)


def build_scenario(cfg: dict) -> Scenario:
    """Construct every field and system of a validated config."""
    ts = TransitionStructure.from_matrix(cfg["transition"])
    metric = Metric(float(cfg["alpha"]), float(cfg["beta"]))
    sc = Scenario(cfg, ts, metric)
    try:
        for name, g in cfg["fields"].items():
            sc.fields[name] = Generator.from_json(ts, g)
        specs = cfg["systems"]
        building: set = set()

        def get(label: str) -> CocycleSystem:
            if label in sc.systems:
                return sc.systems[label]
            if label in building:
                _fail(f"/systems/{label}", "cyclic system definition")
            building.add(label)
            sc.systems[label] = _make_system(sc, label, specs[label], get)
            return sc.systems[label]

        for label in specs:
            get(label)
    except ConfigInvalid:
        raise
    except CocylabError as exc:
        raise ConfigInvalid(f"/systems: {exc.code}: {exc}") from exc
    dims = {cs.d for cs in sc.systems.values()}
    if len(dims) > 1:
        _fail("/systems", f"systems have different dimensions {sorted(dims)}")
    if cfg.get("d") is not None and dims and dims != {cfg["d"]}:
        _fail("/d", f"declared d = {cfg['d']} but systems have d = {dims.pop()}")
    return sc


def _make_system(sc: Scenario, label: str, spec: dict, get) -> CocycleSystem:
    form, body = next(iter(spec.items()))
    ptr = f"/systems/{label}/{form}"
    if form == "generator":
        return CocycleSystem(Generator.from_json(sc.ts, body), sc.metric, label)
    if form == "constant":
        return CocycleSystem(Generator.constant(sc.ts, _matrix(body, ptr), int(spec.get("radius", 0))),
                             sc.metric, label)
    if form == "random_near":
        rng = np.random.default_rng(int(body.get("seed", sc.seed)))
        gen = Generator.random_near(sc.ts, int(body.get("radius", 1)), _matrix(body["base"], ptr),
                                    float(body["eps"]), rng)
        return CocycleSystem(gen, sc.metric, label)
    base = get(body["of"])
    if form == "perturb":
        return perturb(base, parse_word(body["word"]), _matrix(body["delta"], f"{ptr}/delta", base.d), label)
    if "matrix" in body:
        c = _matrix(body["matrix"], f"{ptr}/matrix", base.d)
        c = inverse(c) if body.get("inverse") else c
    else:
        c = sc.fields[body["field"]]
        if body.get("inverse"):
            c = Generator(c.ts, c.radius, {w: inverse(c.value(w)) for w in c.words})
    return conjugate_system(base, c, label)


# --------------------------------------------------------------------------
# templates

TEMPLATES = ("thm2.2-roundtrip", "thm2.4-conjugate-data", "cor4.2-crosscheck", "prop4.8-tower",
             "cor2.5-blocks", "negative-pcf")


def _full2(name: str, seed: int) -> dict:
    return {"name": name, "seed": seed, "transition": [[1, 1], [1, 1]], "alpha": 0.5, "beta": 1.0,
            "d": 2, "fields": {}, "systems": {}, "experiments": [], "tolerances": {"tol_scale": 1.0}}


def _near(ts, rng, radius: int, base, eps: float) -> dict:
    return Generator.random_near(ts, radius, base, eps, rng).to_json()


def _unit(rng, d: int = 2) -> list:
    m = rng.standard_normal((d, d))
    return (m / np.linalg.norm(m, 2)).tolist()


def _roundtrip(seed: int) -> dict:
    cfg = _full2("thm2.2-roundtrip", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    cfg["systems"]["A"] = {"generator": _near(ts, rng, 1, np.eye(2), 0.15)}
    # scalar ground truth, 1 at the fixed point so that C_p = I
    scal = Generator.from_function(
        ts, 1, lambda w: (1.0 if w == (0, 0, 0) else 1.0 + 0.3 * rng.uniform(-1, 1)) * np.eye(2))
    cfg["fields"]["C_true"] = scal.to_json()
    cfg["systems"]["B"] = {"conjugate": {"of": "A", "field": "C_true", "inverse": True}}
    cfg["experiments"] = [
        {"id": "validate", "type": "validate"},
        {"id": "periodic-equal", "type": "periodic", "a": "A", "b": "B", "mode": "EQUAL", "max_period": 10},
        {"id": "condition-b", "type": "condition_b", "a": "A", "b": "B", "c_p": "identity",
         "windows": [2, 4, 6, 8, 10]},
        {"id": "conjugacy", "type": "conjugacy", "a": "A", "b": "B", "c_p": "identity", "window": 10,
         "truth": "C_true", "samples": 20, "sample_radius": 6, "depth": 12, "n": 12},
        {"id": "holonomy", "type": "holonomy", "system": "A", "pairs": 200, "triples": 50},
        {"id": "centralizer", "type": "centralizer", "system": "A", "orbit": "0", "kmax": 12},
        {"id": "coset", "type": "coset", "a": "A", "b": "B", "window": 6, "c_p": "identity", "samples": 10,
         "cases": [{"label": "scaled", "c_p": {"of": "identity", "scale": 2.0}, "check": True},
                   {"label": "commutant-shifted", "c_p": {"of": "identity", "commutant_shift": [0.5, 1.0]},
                    "check": False}]},
        {"id": "combine", "type": "combine", "a": "A", "b": "B", "truth": "C_true", "powers": [2, 3],
         "window": 3, "samples": 10},
    ]
    return cfg


def _conjugate_data(seed: int) -> dict:
    cfg = _full2("thm2.4-conjugate-data", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    cfg["systems"]["B"] = {"generator": _near(ts, rng, 1, np.eye(2), 0.08)}
    rc, rho = 5, 0.5
    g = {(j, s): rng.standard_normal((2, 2)) for j in range(-rc, rc + 1) for s in range(2)}
    c = Generator.from_function(
        ts, rc, lambda w: np.eye(2) + 0.08 * sum(rho ** abs(j) * g[(j, w[j + rc])] for j in range(-rc, rc + 1)))
    cfg["fields"]["C_true"] = c.to_json()
    cfg["systems"]["A"] = {"conjugate": {"of": "B", "field": "C_true"}}
    cfg["experiments"] = [
        {"id": "validate", "type": "validate"},
        {"id": "bunching-A", "type": "bunching", "system": "A", "route": "both", "expect_verdict": "BUNCHED"},
        {"id": "periodic-conjugate", "type": "periodic", "a": "A", "b": "B", "mode": "CONJUGATE",
         "max_period": 8},
        {"id": "condition-b", "type": "condition_b", "a": "A", "b": "B", "c_p": "truth:C_true",
         "windows": [4, 6, 8, 10]},
        {"id": "conjugacy", "type": "conjugacy", "a": "A", "b": "B", "c_p": "truth:C_true", "window": 8,
         "truth": "C_true", "samples": 10, "sample_radius": 6, "depth": 8, "n": 12},
        {"id": "closing", "type": "closing", "a": "A", "b": "B", "c_p": "truth:C_true",
         "cores": ["1", "101", "11"], "n_min": 3, "n_max": 12, "orbit_source": "truth:C_true"},
    ]
    return cfg


def _negative(seed: int) -> dict:
    cfg = _full2("negative-pcf", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    cfg["systems"]["A"] = {"generator": _near(ts, rng, 1, np.eye(2), 0.15)}
    delta = (1e-2 * np.array(_unit(rng))).tolist()
    cfg["systems"]["B"] = {"perturb": {"of": "A", "word": "010", "delta": delta}}
    cfg["experiments"] = [
        {"id": "validate", "type": "validate"},
        {"id": "condition-b", "type": "condition_b", "a": "A", "b": "B", "c_p": "identity",
         "windows": [1, 2, 4, 6, 8, 10], "expect": "FAIL"},
        {"id": "closing", "type": "closing", "a": "A", "b": "B", "c_p": "identity", "cores": ["1"],
         "n_min": 3, "n_max": 12, "theta_from": "A", "expect": "FAIL"},
    ]
    return cfg


def _crosscheck(seed: int) -> dict:
    cfg = _full2("cor4.2-crosscheck", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    sy = cfg["systems"]
    sy["S00"] = {"constant": [[1.1, 0.0], [0.0, 1 / 1.1]]}
    for i in range(1, 10):
        sy[f"S{i:02d}"] = {"generator": _near(ts, rng, 1, np.eye(2), 0.05)}
    sy["V00"] = {"constant": [[2.0, 0.0], [0.0, 0.5]]}
    for i in range(1, 10):
        lam = float(rng.uniform(1.6, 3.0))
        sy[f"V{i:02d}"] = {"generator": _near(ts, rng, 1, np.diag([lam, 1 / lam]), 1e-3)}
    sy["D3"] = {"constant": [[3.0, 0.0], [0.0, 1 / 3]]}

    def conformal(w):
        s, phi = rng.uniform(0.8, 1.25), rng.uniform(0, 2 * math.pi)
        return s * np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])

    sy["CF"] = {"generator": Generator.from_function(ts, 1, conformal).to_json()}
    exps = [{"id": "validate", "type": "validate"}]
    for label in sy:
        if label[0] in "SV":
            exps.append({"id": f"bunching-{label}", "type": "bunching", "system": label, "route": "both",
                         "max_n": 24, "max_period": 10,
                         "expect_verdict": "BUNCHED" if label[0] == "S" else "NOT_BUNCHED"})
    exps += [
        {"id": "spectrum-D3", "type": "spectrum", "system": "D3", "max_period": 6, "steps": 500, "samples": 8,
         "exact": [math.log(3.0), -math.log(3.0)]},
        {"id": "spectrum-CF", "type": "spectrum", "system": "CF", "max_period": 8, "steps": 500, "samples": 8,
         "conformal": True},
        {"id": "spectrum-S01", "type": "spectrum", "system": "S01", "max_period": 8, "steps": 2000,
         "samples": 16, "crosscheck": True},
        {"id": "spectrum-V01", "type": "spectrum", "system": "V01", "max_period": 8, "steps": 2000,
         "samples": 16, "crosscheck": True},
    ]
    cfg["experiments"] = exps
    return cfg


def _tower(seed: int) -> dict:
    cfg = _full2("prop4.8-tower", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    th = 2 * math.pi / 3
    cfg["systems"] = {
        "T1": {"constant": [[2.0, 0.0], [0.0, -2.0]]},
        "T2": {"generator": _near(ts, rng, 1, np.diag([3.0, 1.5]), 0.05)},
        "T3": {"constant": (1.5 * np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])).tolist()},
    }
    cfg["experiments"] = [
        {"id": "tower-T1", "type": "centralizer", "system": "T1", "orbit": "0", "kmax": 12,
         "expect_dims": [2 if k % 2 else 4 for k in range(1, 13)], "expect_L_star": 2},
        {"id": "tower-T2-0", "type": "centralizer", "system": "T2", "orbit": "0", "kmax": 12,
         "expect_dims": [2] * 12, "expect_L_star": 1},
        {"id": "tower-T2-01", "type": "centralizer", "system": "T2", "orbit": "01", "kmax": 12,
         "expect_dims": [2] * 12, "expect_L_star": 1},
        {"id": "tower-T3", "type": "centralizer", "system": "T3", "orbit": "0", "kmax": 12, "expect_L_star": 3},
    ]
    return cfg


def _blocks(seed: int) -> dict:
    cfg = _full2("cor2.5-blocks", seed)
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    cfg["systems"]["A"] = {"constant": [[2.0, 0.0], [0.0, 0.5]]}
    cfg["fields"]["C_true"] = _near(ts, rng, 1, np.eye(2), 1e-3)
    cfg["systems"]["B"] = {"conjugate": {"of": "A", "field": "C_true"}}
    cfg["experiments"] = [
        {"id": "validate", "type": "validate"},
        {"id": "splitting", "type": "splitting", "a": "A", "b": "B", "depth": 8, "iterations": 60,
         "truth": "C_true", "window": 6, "samples": 10, "depth_check": 12},
    ]
    return cfg


_BUILDERS = {
    "thm2.2-roundtrip": _roundtrip,
    "thm2.4-conjugate-data": _conjugate_data,
    "cor4.2-crosscheck": _crosscheck,
    "prop4.8-tower": _tower,
    "cor2.5-blocks": _blocks,
    "negative-pcf": _negative,
}


def generate_scenario(template: str, seed: int = 0) -> dict:
    """Fully expanded config for a named template; identical for identical seeds."""
    try:
        builder = _BUILDERS[template]
    except KeyError:
        raise UnknownTemplate(f"unknown template {template!r}; known: {', '.join(TEMPLATES)}") from None
    return validate_config(builder(int(seed)))


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, indent=1)
