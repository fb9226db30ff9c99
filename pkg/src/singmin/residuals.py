"""Singular-minimal residuals ``n H - alpha <xi, u> / <sigma, u>``.

Every family reports the residual in this normalized form (units of
curvature) so thresholds mean the same thing across families.  The
specialized evaluators use the cleared-denominator polynomial forms of the
family equations and divide back, which makes them an independent route
to the generic graph evaluator.

Batch evaluators (``*_residuals``) take an ``(m, k)`` array of points and
return NaN where a point violates the halfspace guard; scalar evaluators
raise :class:`DomainError` instead.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._parallel import chunked_map, stable_rms
from ._validation import DOMAIN_EPS, check_array, check_interval, check_orthonormal, check_scalar
from .exceptions import DomainError, ValidationError
from .functions import Profile
from .geometry import (
    GraphFn,
    as_direction,
    cross_product_n,
    n_mean_curvature_from_jet,
    normal_from_gradient,
)

# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """Pointwise residuals; NaN marks halfspace violations (excluded from norms)."""

    points: np.ndarray
    residuals: np.ndarray
    rms: float = field(init=False)
    max_abs: float = field(init=False)
    domain_violations: int = field(init=False)

    def __post_init__(self):
        res = np.asarray(self.residuals, dtype=float)
        valid = res[np.isfinite(res)]
        object.__setattr__(self, "rms", stable_rms(valid))
        object.__setattr__(self, "max_abs", float(np.max(np.abs(valid))) if valid.size else 0.0)
        object.__setattr__(self, "domain_violations", int(res.size - valid.size))

    @property
    def num_points(self):
        return int(np.asarray(self.residuals).size)

    def summary(self):
        return {
            "points": self.num_points,
            "rms": self.rms,
            "max_abs": self.max_abs,
            "domain_violations": self.domain_violations,
        }


def grid_points(domain, grid):
    """Tensor-product grid over a box; ``grid`` is an int or one int per axis."""
    domain = [check_interval(iv, f"domain[{i}]") for i, iv in enumerate(domain)]
    counts = [int(grid)] * len(domain) if np.isscalar(grid) else [int(g) for g in grid]
    if len(counts) != len(domain):
        raise ValidationError(f"grid has {len(counts)} entries for a {len(domain)}-d domain")
    if any(c < 1 for c in counts):
        raise ValidationError("grid counts must be >= 1")
    axes = [np.linspace(lo, hi, c) if c > 1 else np.array([0.5 * (lo + hi)]) for (lo, hi), c in zip(domain, counts)]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(domain))


def residual_report(batch, points, workers=None):
    """Evaluate a batch residual function and summarize it."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return ResidualReport(points, chunked_map(batch, points, workers))


# -- generic graphs -----------------------------------------------------------


def residual_from_jet(points, values, grad, hess, u, alpha):
    """Vectorized graph residual from a precomputed 2-jet.

    ``points`` is ``(m, n)``, ``values`` ``(m,)``, ``grad`` ``(m, n)``,
    ``hess`` ``(m, n, n)``; ``u`` has ``n + 1`` components.
    """
    points = np.atleast_2d(points)
    sigma = np.concatenate([points, np.asarray(values, dtype=float).reshape(-1, 1)], axis=1)
    height = sigma @ u
    xi_u = normal_from_gradient(grad) @ u
    nh = n_mean_curvature_from_jet(grad, hess)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = nh - alpha * xi_u / height
    return np.where(height > DOMAIN_EPS, out, np.nan)


def sm_residual_graph(f, u, alpha, x):
    """``n H(x) - alpha <xi(x), u> / <sigma(x), u>`` for the graph of ``f``."""
    u = as_direction(u, dim=f.n + 1).u
    alpha = check_scalar(alpha, "alpha")
    x = np.asarray(x, dtype=float).reshape(-1)
    value = f.evaluate(x)
    height = float(np.dot(np.append(x, value), u))
    if not height > DOMAIN_EPS:
        raise DomainError(f"point {np.append(x, value)} violates <sigma, u> > {DOMAIN_EPS:g}", point=x)
    grad = f.gradient(x)
    xi_u = float(normal_from_gradient(grad) @ u)
    return float(n_mean_curvature_from_jet(grad, f.hessian(x))) - alpha * xi_u / height


def graph_residuals(f, u, alpha, points):
    """Batch version of :func:`sm_residual_graph` (NaN on domain violation)."""
    out = []
    for x in np.atleast_2d(points):
        try:
            out.append(sm_residual_graph(f, u, alpha, x))
        except DomainError:
            out.append(np.nan)
    return np.array(out)


class _JetGraph:
    """Mixin: a spec exposing ``jet(X) -> (values, grad, hess)`` as a GraphFn."""

    def as_graph(self):
        def one(x, k):
            return self.jet(np.asarray(x, dtype=float).reshape(1, -1))[k][0]

        return GraphFn(lambda x: one(x, 0), self.n, lambda x: one(x, 1), lambda x: one(x, 2), name=type(self).__name__)


# -- translation hypersurfaces ------------------------------------------------


def _profile_list(profiles, name):
    profiles = list(profiles)
    for i, p in enumerate(profiles):
        if not isinstance(p, Profile):
            raise ValidationError(f"{name}[{i}] is not a Profile")
    return profiles


def _domain(domain, k):
    if domain is None:
        return None
    domain = [check_interval(iv, f"domain[{i}]") for i, iv in enumerate(domain)]
    if len(domain) != k:
        raise ValidationError(f"domain needs {k} intervals, got {len(domain)}")
    return tuple(domain)


@dataclass(frozen=True)
class TranslationSpec(_JetGraph):
    """Graph ``x_{n+1} = f_1(x_1) + ... + f_n(x_n)``."""

    profiles: Sequence[Profile]
    domain: Optional[Sequence] = None

    def __post_init__(self):
        profiles = _profile_list(self.profiles, "profiles")
        if len(profiles) < 1:
            raise ValidationError("translation spec needs at least one profile")
        object.__setattr__(self, "profiles", tuple(profiles))
        object.__setattr__(self, "domain", _domain(self.domain, len(profiles)))

    @property
    def n(self):
        return len(self.profiles)

    def profile_jets(self, X):
        X = np.atleast_2d(X)
        jets = [p.derivatives(X[:, i]) for i, p in enumerate(self.profiles)]
        return tuple(np.column_stack([j[k] for j in jets]) for k in range(3))

    def jet(self, X):
        vals, d1, d2 = self.profile_jets(X)
        hess = np.zeros(d2.shape + (d2.shape[1],))
        idx = np.arange(self.n)
        hess[:, idx, idx] = d2
        return vals.sum(axis=1), d1, hess


def translation_residuals(spec, alpha, X):
    """Cleared form with ``u = e_1``, divided by ``phi^3``.

    ``sum_i (1 + sum_{j != i} f_j'^2) f_i''  +  alpha f_1' phi^2 / x_1``
    over ``phi^3`` equals the generic graph residual.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _, d1, d2 = spec.profile_jets(X)
    phi2 = 1.0 + np.sum(d1 * d1, axis=1)
    lhs = np.sum((phi2[:, None] - d1 * d1) * d2, axis=1)
    x1 = X[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = -alpha * d1[:, 0] / x1 * phi2
        out = (lhs - rhs) / phi2**1.5
    return np.where(x1 > DOMAIN_EPS, out, np.nan)


def sm_residual_translation(spec, alpha, x):
    alpha = check_scalar(alpha, "alpha")
    x = check_array(x, "x", ndim=1, shape=(spec.n,))
    if not x[0] > DOMAIN_EPS:
        raise DomainError(f"x_1 = {x[0]} violates the halfspace x_1 > {DOMAIN_EPS:g}", point=x)
    return float(translation_residuals(spec, alpha, x[None, :])[0])


# -- affine translation graphs ------------------------------------------------


@dataclass(frozen=True)
class AffineTranslationSpec:
    """Graph ``z = f(x) + g(y + c x)`` with ``c != 0``.

    Points are given in the sheared parameters ``(xt, yt) = (x, y + c x)``.
    """

    f: Profile
    g: Profile
    c: float
    domain: Optional[Sequence] = None

    def __post_init__(self):
        _profile_list([self.f, self.g], "profiles")
        c = check_scalar(self.c, "c")
        if c == 0:
            raise ValidationError("c = 0 is a plain translation surface; use TranslationSpec")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "domain", _domain(self.domain, 2))

    n = 2

    def to_generalized(self):
        return GeneralizedTranslationSpec([self.f], self.g, [self.c])

    def to_graph_coordinates(self, P):
        """``(xt, yt) -> (x, y)`` with ``y = yt - c xt``."""
        P = np.atleast_2d(P)
        return np.column_stack([P[:, 0], P[:, 1] - self.c * P[:, 0]])

    def as_graph(self):
        return self.to_generalized().as_graph()


def affine_residuals(spec, alpha, P):
    """Cleared form with ``u = e_1``:

    ``([1 + g'^2] f'' + [1 + c^2 + f'^2] g'') / D + alpha (f' + c g') / xt``
    divided by ``sqrt(D)``, ``D = 1 + (f' + c g')^2 + g'^2``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    xt, yt = P[:, 0], P[:, 1]
    _, f1, f2 = spec.f.derivatives(xt)
    _, g1, g2 = spec.g.derivatives(yt)
    c = spec.c
    zx = f1 + c * g1
    denom = 1.0 + zx * zx + g1 * g1
    numer = (1.0 + g1 * g1) * f2 + (1.0 + c * c + f1 * f1) * g2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (numer / denom + alpha * zx / xt) / np.sqrt(denom)
    return np.where(xt > DOMAIN_EPS, out, np.nan)


def sm_residual_affine(spec, alpha, xt, yt):
    alpha = check_scalar(alpha, "alpha")
    xt = check_scalar(xt, "xt")
    yt = check_scalar(yt, "yt")
    if not xt > DOMAIN_EPS:
        raise DomainError(f"xt = {xt} violates the halfspace x > {DOMAIN_EPS:g}", point=(xt, yt))
    return float(affine_residuals(spec, alpha, [[xt, yt]])[0])


# -- generalized translation graphs ------------------------------------------


@dataclass(frozen=True)
class GeneralizedTranslationSpec(_JetGraph):
    """Graph ``z = f_1(x_1) + ... + f_{n-1}(x_{n-1}) + g(x_n + sum c_i x_i)``."""

    profiles: Sequence[Profile]
    g: Profile
    coeffs: Sequence[float]
    domain: Optional[Sequence] = None

    def __post_init__(self):
        profiles = _profile_list(self.profiles, "profiles")
        _profile_list([self.g], "g")
        coeffs = check_array(self.coeffs, "coeffs", ndim=1)
        if coeffs.size != len(profiles):
            raise ValidationError(f"need {len(profiles)} coefficients, got {coeffs.size}")
        if len(profiles) < 1:
            raise ValidationError("generalized translation graph needs n >= 2")
        object.__setattr__(self, "profiles", tuple(profiles))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "domain", _domain(self.domain, len(profiles) + 1))

    @property
    def n(self):
        return len(self.profiles) + 1

    def jet(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        c = self.coeffs
        arg = X[:, -1] + X[:, :-1] @ c
        gv, g1, g2 = self.g.derivatives(arg)
        jets = [p.derivatives(X[:, i]) for i, p in enumerate(self.profiles)]
        vals = gv + sum(j[0] for j in jets)
        grad = np.column_stack([j[1] + ci * g1 for j, ci in zip(jets, c)] + [g1])
        v = np.append(c, 1.0)
        hess = g2[:, None, None] * np.outer(v, v)[None, :, :]
        idx = np.arange(self.n - 1)
        hess[:, idx, idx] += np.column_stack([j[2] for j in jets])
        return vals, grad, hess


def jet_residuals(spec, u, alpha, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    u = as_direction(u, dim=X.shape[1] + 1).u
    vals, grad, hess = spec.jet(X)
    return residual_from_jet(X, vals, grad, hess, u, alpha)


def sm_residual_generalized(spec, u, alpha, x):
    """Generic graph residual of the composed function (any unit ``u``)."""
    u = as_direction(u, dim=spec.n + 1).u
    alpha = check_scalar(alpha, "alpha")
    x = check_array(x, "x", ndim=1, shape=(spec.n,))
    out = float(jet_residuals(spec, u, alpha, x[None, :])[0])
    if np.isnan(out):
        raise DomainError(f"point {x} violates <sigma, u> > {DOMAIN_EPS:g}", point=x)
    return out


# -- generalized cylinders ----------------------------------------------------


@dataclass(frozen=True)
class BaseCurve:
    """Regular curve ``s -> gamma(s)`` in R^{n+1} with two derivatives.

    ``jet(s)`` returns ``(points, velocity, acceleration)``, each ``(m, n+1)``.
    """

    jet: Callable[[np.ndarray], tuple]
    dim: int
    domain: tuple
    description: dict = field(default_factory=dict, compare=False)

    @classmethod
    def planar_graph(cls, profile, a, b, origin=None, domain=(-1.0, 1.0)):
        """``gamma(s) = origin + s a + f(s) b`` for orthonormal ``a, b``."""
        a = check_array(a, "a", ndim=1)
        b = check_array(b, "b", ndim=1, shape=(a.size,))
        check_orthonormal(np.vstack([a, b]), "plane basis", atol=1e-10)
        origin = np.zeros(a.size) if origin is None else check_array(origin, "origin", ndim=1, shape=(a.size,))

        def jet(s):
            s = np.asarray(s, dtype=float).reshape(-1)
            f, d1, d2 = profile.derivatives(s)
            pts = origin + s[:, None] * a + f[:, None] * b
            vel = a + d1[:, None] * b
            acc = d2[:, None] * b
            return pts, vel, acc

        desc = {"kind": "planar_graph", "profile": profile.description, "a": a.tolist(), "b": b.tolist(),
                "origin": origin.tolist()}
        return cls(jet, a.size, check_interval(domain, "curve domain"), desc)

    @classmethod
    def circle(cls, center, radius, a, b, domain=(0.0, 2 * np.pi)):
        a = check_array(a, "a", ndim=1)
        b = check_array(b, "b", ndim=1, shape=(a.size,))
        check_orthonormal(np.vstack([a, b]), "plane basis", atol=1e-10)
        center = check_array(center, "center", ndim=1, shape=(a.size,))
        r = check_scalar(radius, "radius", positive=True)

        def jet(s):
            s = np.asarray(s, dtype=float).reshape(-1)
            cs, sn = np.cos(s)[:, None], np.sin(s)[:, None]
            return center + r * (cs * a + sn * b), r * (-sn * a + cs * b), -r * (cs * a + sn * b)

        desc = {"kind": "circle", "center": center.tolist(), "radius": r, "a": a.tolist(), "b": b.tolist()}
        return cls(jet, a.size, check_interval(domain, "curve domain"), desc)

    @classmethod
    def from_planar_sample(cls, sample, a, b, origin=None):
        """Embed a :class:`PlanarCurveSample` via C^2 quintic Hermite interpolation."""
        from scipy.interpolate import BPoly

        a = check_array(a, "a", ndim=1)
        b = check_array(b, "b", ndim=1, shape=(a.size,))
        check_orthonormal(np.vstack([a, b]), "plane basis", atol=1e-10)
        origin = np.zeros(a.size) if origin is None else check_array(origin, "origin", ndim=1, shape=(a.size,))
        polys = [
            BPoly.from_derivatives(sample.s, np.column_stack(
                [sample.points[:, k], sample.velocity[:, k], sample.acceleration[:, k]]))
            for k in range(2)
        ]

        def jet(s):
            s = np.asarray(s, dtype=float).reshape(-1)
            out = []
            for order in range(3):
                c0, c1 = (p.derivative(order)(s) if order else p(s) for p in polys)
                base = origin if order == 0 else 0.0
                out.append(base + c0[:, None] * a + c1[:, None] * b)
            return tuple(out)

        return cls(jet, a.size, (float(sample.s[0]), float(sample.s[-1])), {"kind": "sample"})


@dataclass(frozen=True)
class CylinderSpec:
    """Generalized cylinder ``gamma(s) + sum t_i w_i`` with orthonormal rulings.

    The base curve must lie in a plane parallel to the orthogonal
    complement of the rulings; both conditions are checked, never repaired.
    ``domain`` lists the ``s`` interval followed by one interval per ``t_i``.
    """

    rulings: np.ndarray
    curve: BaseCurve
    domain: Optional[Sequence] = None
    _frame: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = check_array(self.rulings, "rulings", ndim=2)
        dim = w.shape[1]
        if w.shape[0] != dim - 2:
            raise ValidationError(f"need n-1 = {dim - 2} rulings in R^{dim}, got {w.shape[0]}")
        if self.curve.dim != dim:
            raise ValidationError(f"base curve lives in R^{self.curve.dim}, rulings in R^{dim}")
        check_orthonormal(w, "rulings", atol=1e-10)
        lo, hi = self.curve.domain
        _, vel, acc = self.curve.jet(np.linspace(lo, hi, 17))
        tang = vel / np.linalg.norm(vel, axis=1, keepdims=True)
        leak = np.max(np.abs(tang @ w.T)) if len(w) else 0.0
        if leak > 1e-8:
            raise ValidationError(f"base curve tangent is not orthogonal to the rulings (max |<T, w>| = {leak:.2e})")
        object.__setattr__(self, "rulings", w)
        object.__setattr__(self, "domain", _domain(self.domain, dim - 1))
        # xi = W x T is linear in T: column k is W x e_k
        frame = np.column_stack([cross_product_n(np.vstack([w, np.eye(dim)[k]])) for k in range(dim)])
        object.__setattr__(self, "_frame", frame)

    @property
    def n(self):
        return self.rulings.shape[1] - 1

    def normal(self, s):
        """``w_1 x ... x w_{n-1} x T(s)`` for each ``s`` (rows)."""
        _, vel, _ = self.curve.jet(np.atleast_1d(s))
        tang = vel / np.linalg.norm(vel, axis=1, keepdims=True)
        return tang @ self._frame.T

    def curvature(self, s):
        """Curvature of the base curve signed against :meth:`normal`."""
        _, vel, acc = self.curve.jet(np.atleast_1d(s))
        xi = (vel / np.linalg.norm(vel, axis=1, keepdims=True)) @ self._frame.T
        return np.sum(acc * xi, axis=1) / np.sum(vel * vel, axis=1)

    def point(self, s, t):
        pts, _, _ = self.curve.jet(np.atleast_1d(s))
        return pts + np.atleast_2d(t) @ self.rulings

    def cleared(self, u, alpha, S):
        """``kappa sum <w_i,u> t_i + kappa <gamma,u> - alpha <xi,u>`` and its denominator."""
        S = np.atleast_2d(np.asarray(S, dtype=float))
        s, t = S[:, 0], S[:, 1:]
        pts, vel, acc = self.curve.jet(s)
        tang = vel / np.linalg.norm(vel, axis=1, keepdims=True)
        xi = tang @ self._frame.T
        kappa = np.sum(acc * xi, axis=1) / np.sum(vel * vel, axis=1)
        denom = t @ (self.rulings @ u) + pts @ u
        return kappa * denom - alpha * (xi @ u), denom


def cylinder_residuals(spec, u, alpha, S):
    """Batch residual at parameters ``S = [(s, t_1, ..., t_{n-1}), ...]``."""
    u = as_direction(u, dim=spec.n + 1).u
    cleared, denom = spec.cleared(u, alpha, S)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = cleared / denom
    return np.where(denom > DOMAIN_EPS, out, np.nan)


def sm_residual_cylinder(spec, u, alpha, s, t):
    alpha = check_scalar(alpha, "alpha")
    s = check_scalar(s, "s")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size != spec.n - 1:
        raise ValidationError(f"expected {spec.n - 1} ruling parameters, got {t.size}")
    out = float(cylinder_residuals(spec, u, alpha, np.append(s, t)[None, :])[0])
    if np.isnan(out):
        raise DomainError(f"cylinder point at s={s}, t={t.tolist()} violates the halfspace", point=(s, t))
    return out
