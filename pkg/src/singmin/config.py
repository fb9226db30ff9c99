"""JSON run specs: ``{family, n, alpha, u, functions, domain, grid, options}``.

Every validation error carries the path of the offending field, e.g.
``spec.functions[1].coeffs: ...``.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .functions import Profile
from .geometry import Direction, as_direction
from .residuals import (
    AffineTranslationSpec,
    BaseCurve,
    CylinderSpec,
    GeneralizedTranslationSpec,
    TranslationSpec,
)

FAMILIES = ("translation", "affine", "generalized", "cylinder", "field")
TOP_KEYS = {"family", "n", "alpha", "u", "functions", "domain", "grid", "options"}


@dataclass
class RunSpec:
    family: str
    n: int
    alpha: float
    u: Direction
    functions: list
    domain: list
    grid: object
    options: dict = field(default_factory=dict)
    geometry: object = None  # family-specific spec object


def _fail(path, msg):
    raise ValidationError(f"{path}: {msg}")


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(path, f"expected a finite number, got {value!r}")
    return float(value)


def _vector(value, path, size=None):
    if not isinstance(value, list) or not value:
        _fail(path, "expected a non-empty list of numbers")
    out = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])
    if size is not None and out.size != size:
        _fail(path, f"expected {size} entries, got {out.size}")
    return out


def _domain(value, path, dims):
    if not isinstance(value, list) or len(value) != dims:
        _fail(path, f"expected {dims} intervals [lo, hi]")
    out = []
    for i, iv in enumerate(value):
        lo, hi = _vector(iv, f"{path}[{i}]", 2)
        if not lo < hi:
            _fail(f"{path}[{i}]", f"need lo < hi, got [{lo}, {hi}]")
        out.append((float(lo), float(hi)))
    return out


def _grid(value, path, dims):
    items = [value] * dims if isinstance(value, int) and not isinstance(value, bool) else value
    if not isinstance(items, list) or len(items) != dims:
        _fail(path, f"expected an integer or {dims} integers")
    for i, g in enumerate(items):
        if isinstance(g, bool) or not isinstance(g, int) or g < 1:
            _fail(f"{path}[{i}]", f"expected a positive integer, got {g!r}")
    return list(items)


def _direction(value, path, dim):
    if value in ("vertical", None):
        return Direction.vertical(dim)
    if value == "horizontal":
        return Direction.horizontal(dim, 0)
    if isinstance(value, str):
        _fail(path, f"expected 'vertical', 'horizontal' or a vector, got {value!r}")
    try:
        return as_direction(_vector(value, path, dim), dim=dim)
    except ValidationError as exc:
        _fail(path, str(exc))


def _functions(value, path, count):
    if not isinstance(value, list):
        _fail(path, "expected a list of function specs")
    if len(value) != count:
        _fail(path, f"expected {count} functions, got {len(value)}")
    return [Profile.from_json(f, f"{path}[{i}]") for i, f in enumerate(value)]


def _curve(opts, profiles, domain, dim, path):
    if not isinstance(opts, dict) or "kind" not in opts:
        _fail(path, "expected an object with a 'kind' field")
    kind = opts["kind"]
    a = _vector(opts.get("a"), f"{path}.a", dim)
    b = _vector(opts.get("b"), f"{path}.b", dim)
    try:
        if kind == "planar_graph":
            if len(profiles) != 1:
                _fail("spec.functions", "planar_graph curves take exactly one function")
            origin = _vector(opts["origin"], f"{path}.origin", dim) if "origin" in opts else None
            return BaseCurve.planar_graph(profiles[0], a, b, origin, domain)
        if kind == "circle":
            center = _vector(opts.get("center"), f"{path}.center", dim)
            radius = _number(opts.get("radius"), f"{path}.radius")
            return BaseCurve.circle(center, radius, a, b, domain)
    except ValidationError as exc:
        msg = str(exc)
        raise ValidationError(msg if msg.startswith("spec.") else f"{path}: {msg}") from None
    _fail(f"{path}.kind", f"unknown curve kind {kind!r}; expected 'planar_graph' or 'circle'")


def parse_spec(data, families=FAMILIES):
    """Validate a decoded JSON object and build the family's geometry."""
    if not isinstance(data, dict):
        _fail("spec", "expected a JSON object")
    extra = set(data) - TOP_KEYS
    if extra:
        _fail("spec", f"unexpected keys {sorted(extra)}")
    family = data.get("family")
    if family not in families:
        _fail("spec.family", f"expected one of {list(families)}, got {family!r}")
    alpha = _number(data.get("alpha"), "spec.alpha")
    options = data.get("options", {})
    if not isinstance(options, dict):
        _fail("spec.options", "expected an object")
    raw_fns = data.get("functions", [])

    if family == "cylinder":
        rulings = np.array(
            [_vector(w, f"spec.options.rulings[{i}]") for i, w in enumerate(options.get("rulings", []))]
        )
        if "curve" not in options:
            _fail("spec.options.curve", "missing")
        dim = _vector(options["curve"].get("a"), "spec.options.curve.a").size if isinstance(options["curve"], dict) else 0
        n = dim - 1
        if rulings.size == 0:
            rulings = np.zeros((0, dim))
        elif rulings.shape[1] != dim:
            _fail("spec.options.rulings", f"rulings must have {dim} components")
    else:
        n = data.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            _fail("spec.n", f"expected a positive integer, got {n!r}")
    if "n" in data and data["n"] != n:
        _fail("spec.n", f"declared n = {data['n']!r} but the geometry has n = {n}")
    domain = _domain(data.get("domain"), "spec.domain", n)
    grid = _grid(data.get("grid", 9), "spec.grid", n)
    u = _direction(data.get("u"), "spec.u", n + 1)

    if family == "translation":
        profiles = _functions(raw_fns, "spec.functions", n)
        geom = TranslationSpec(profiles, domain)
    elif family == "affine":
        if n != 2:
            _fail("spec.n", "affine translation surfaces have n = 2")
        profiles = _functions(raw_fns, "spec.functions", 2)
        c = _number(options.get("c"), "spec.options.c")
        if c == 0:
            _fail("spec.options.c", "c must be nonzero (c = 0 is the translation family)")
        geom = AffineTranslationSpec(profiles[0], profiles[1], c, domain)
    elif family == "generalized":
        if n < 2:
            _fail("spec.n", "generalized translation graphs need n >= 2")
        profiles = _functions(raw_fns, "spec.functions", n)
        coeffs = _vector(options.get("coeffs"), "spec.options.coeffs", n - 1)
        geom = GeneralizedTranslationSpec(profiles[:-1], profiles[-1], coeffs, domain)
    elif family == "cylinder":
        count = 1 if options["curve"].get("kind") == "planar_graph" else 0
        profiles = _functions(raw_fns, "spec.functions", count)
        curve = _curve(options["curve"], profiles, domain[0], n + 1, "spec.options.curve")
        try:
            geom = CylinderSpec(rulings, curve, domain)
        except ValidationError as exc:
            _fail("spec.options", str(exc))
    else:  # field: boundary data f_1(x_1) + ... + f_n(x_n)
        if n not in (1, 2):
            _fail("spec.n", "the minimizer supports n = 1 or 2")
        profiles = _functions(raw_fns, "spec.functions", n)
        if not (np.allclose(u.u, Direction.vertical(n + 1).u) or np.allclose(u.u, Direction.horizontal(n + 1).u)):
            _fail("spec.u", "the minimizer supports u = 'vertical' or 'horizontal' only")
        if any(g < 3 for g in grid):
            _fail("spec.grid", "field grids need at least 3 nodes per axis")
        geom = None
    return RunSpec(family, n, alpha, u, profiles, domain, grid, options, geom)


def load_spec(path, families=FAMILIES):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read spec {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"spec {path} is not valid JSON: {exc}") from None
    return parse_spec(data, families)
