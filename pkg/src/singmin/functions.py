"""Single-variable profile functions with first and second derivatives.

Profiles are the building blocks of translation hypersurfaces, affine
translation graphs and cylinder base curves.  They evaluate on arrays and
can be described by small JSON dictionaries::

    {"kind": "polynomial", "coeffs": [c0, c1, c2]}          # c0 + c1 x + c2 x^2
    {"kind": "cosh", "a": 1, "b": 0, "scale": 1, "offset": 0}  # scale*cosh(a x + b) + offset
    {"kind": "tabulated", "x": [...], "f": [...], "df": [...], "d2f": [...]}
    {"kind": "sum", "terms": [{...}, {...}]}

Primitive kinds are ``cosh``, ``sinh``, ``exp``, ``log`` and ``arccosh``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly, CubicSpline

from ._validation import check_array, check_scalar
from .exceptions import EvaluationError, ValidationError


def _d_cosh(t):
    return np.cosh(t), np.sinh(t), np.cosh(t)


def _d_sinh(t):
    return np.sinh(t), np.cosh(t), np.sinh(t)


def _d_exp(t):
    e = np.exp(t)
    return e, e, e


def _d_log(t):
    return np.log(t), 1.0 / t, -1.0 / t**2


def _d_arccosh(t):
    root = np.sqrt(t * t - 1.0)
    return np.arccosh(t), 1.0 / root, -t / root**3


PRIMITIVES = {
    "cosh": _d_cosh,
    "sinh": _d_sinh,
    "exp": _d_exp,
    "log": _d_log,
    "arccosh": _d_arccosh,
}


@dataclass(frozen=True)
class Profile:
    """``x -> (f(x), f'(x), f''(x))``, vectorized over ``x``."""

    jet: Callable[[np.ndarray], tuple]
    description: dict

    def __call__(self, x):
        return self.value(x)

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            f, d1, d2 = (np.broadcast_to(np.asarray(v, dtype=float), x.shape) for v in self.jet(x))
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
            raise EvaluationError(f"profile {self.description.get('kind')} not finite on the given points")
        return f.copy(), d1.copy(), d2.copy()

    def value(self, x):
        return self.derivatives(x)[0]

    def is_exactly_linear(self):
        desc = self.description
        return desc["kind"] == "polynomial" and all(c == 0 for c in desc["coeffs"][2:])

    def to_json(self):
        return self.description

    def __add__(self, other):
        return sum_profile([self, other])

    # constructors ---------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs):
        """``sum_k coeffs[k] * x**k`` (ascending order)."""
        c = check_array(coeffs, "coeffs", ndim=1, min_size=1)
        p = np.polynomial.Polynomial(c)
        dp, ddp = p.deriv(1), p.deriv(2)
        return cls(lambda x: (p(x), dp(x), ddp(x)), {"kind": "polynomial", "coeffs": c.tolist()})

    @classmethod
    def linear(cls, slope, intercept=0.0):
        return cls.polynomial([intercept, slope])

    @classmethod
    def constant(cls, value):
        return cls.polynomial([value])

    @classmethod
    def primitive(cls, kind, a=1.0, b=0.0, scale=1.0, offset=0.0):
        """``scale * prim(a x + b) + offset``."""
        if kind not in PRIMITIVES:
            raise ValidationError(f"unknown primitive {kind!r}; expected one of {sorted(PRIMITIVES)}")
        a = check_scalar(a, "a")
        b = check_scalar(b, "b")
        scale = check_scalar(scale, "scale")
        offset = check_scalar(offset, "offset")
        prim = PRIMITIVES[kind]

        def jet(x):
            v, d1, d2 = prim(a * x + b)
            return scale * v + offset, scale * a * d1, scale * a * a * d2

        desc = {"kind": kind, "a": a, "b": b, "scale": scale, "offset": offset}
        return cls(jet, desc)

    @classmethod
    def tabulated(cls, x, f, df=None, d2f=None):
        """Piecewise polynomial through tabulated samples.

        With ``df`` and ``d2f`` the interpolant is the C^2 quintic Hermite
        spline, exact at the nodes; with values only a cubic spline is used.
        Evaluation outside ``[x[0], x[-1]]`` is an error.
        """
        x = check_array(x, "x", ndim=1, min_size=2)
        f = check_array(f, "f", ndim=1, shape=(x.size,))
        if np.any(np.diff(x) <= 0):
            raise ValidationError("tabulated x must be strictly increasing")
        desc = {"kind": "tabulated", "x": x.tolist(), "f": f.tolist()}
        if df is not None:
            df = check_array(df, "df", ndim=1, shape=(x.size,))
            desc["df"] = df.tolist()
            cols = [f, df]
            if d2f is not None:
                d2f = check_array(d2f, "d2f", ndim=1, shape=(x.size,))
                desc["d2f"] = d2f.tolist()
                cols.append(d2f)
            poly = BPoly.from_derivatives(x, np.column_stack(cols))
        else:
            poly = CubicSpline(x, f)
        d1, d2 = poly.derivative(1), poly.derivative(2)
        lo, hi = x[0], x[-1]
        span = hi - lo

        def jet(t):
            if np.any(t < lo - 1e-12 * span) or np.any(t > hi + 1e-12 * span):
                raise ValidationError(f"tabulated profile evaluated outside [{lo}, {hi}]")
            t = np.clip(t, lo, hi)
            return poly(t), d1(t), d2(t)

        return cls(jet, desc)

    @classmethod
    def from_json(cls, spec, path="function"):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ValidationError(f"{path}: expected an object with a 'kind' field")
        kind = spec["kind"]
        try:
            if kind == "polynomial":
                return cls.polynomial(spec["coeffs"])
            if kind in PRIMITIVES:
                extra = set(spec) - {"kind", "a", "b", "scale", "offset"}
                if extra:
                    raise ValidationError(f"unexpected keys {sorted(extra)}")
                return cls.primitive(kind, **{k: spec[k] for k in ("a", "b", "scale", "offset") if k in spec})
            if kind == "tabulated":
                return cls.tabulated(spec["x"], spec["f"], spec.get("df"), spec.get("d2f"))
            if kind == "sum":
                terms = spec["terms"]
                if not isinstance(terms, list) or not terms:
                    raise ValidationError("'terms' must be a non-empty list")
                return sum_profile([cls.from_json(t, f"{path}.terms[{i}]") for i, t in enumerate(terms)])
        except KeyError as exc:
            raise ValidationError(f"{path}: missing field {exc}") from None
        except ValidationError as exc:
            msg = str(exc)
            raise ValidationError(msg if msg.startswith(path) else f"{path}: {msg}") from None
        raise ValidationError(f"{path}: unknown function kind {kind!r}")


def sum_profile(profiles):
    profiles = list(profiles)

    def jet(x):
        parts = [p.jet(x) for p in profiles]
        return tuple(sum(part[k] for part in parts) for k in range(3))

    return Profile(jet, {"kind": "sum", "terms": [p.description for p in profiles]})
