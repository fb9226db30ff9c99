"""The alpha-catenary ODE ``f'' / (1 + f'^2) = alpha / f``.

Curves are graphs ``y = f(s)`` over the axis orthogonal to ``u = (0, 1)``.
For ``alpha = 1`` the solutions are the catenaries ``cosh(lam*s + mu)/lam``.
Integration is classical fixed-step RK4 so output grids are deterministic.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import DOMAIN_EPS, check_array, check_scalar
from .exceptions import DomainError, NonConvergenceError, SingularityError, ValidationError
from .functions import Profile
from .geometry import as_direction

SINGULAR_EPS = 1e-9


@dataclass(frozen=True)
class FunctionSample:
    """Samples of a scalar function on a strictly increasing grid."""

    abscissae: np.ndarray
    values: np.ndarray
    derivatives: Optional[np.ndarray] = None
    second_derivatives: Optional[np.ndarray] = None

    def __post_init__(self):
        s = check_array(self.abscissae, "abscissae", ndim=1, min_size=1)
        object.__setattr__(self, "abscissae", s)
        object.__setattr__(self, "values", check_array(self.values, "values", ndim=1, shape=(s.size,)))
        for name in ("derivatives", "second_derivatives"):
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, check_array(arr, name, ndim=1, shape=(s.size,)))
        if np.any(np.diff(s) <= 0):
            raise ValidationError("abscissae must be strictly increasing")

    def __len__(self):
        return self.abscissae.size


@dataclass(frozen=True)
class CatenaryIVP:
    alpha: float
    s0: float
    f0: float
    df0: float
    s1: float
    step: float = 1e-3

    def __post_init__(self):
        for name in ("alpha", "s0", "df0", "s1"):
            object.__setattr__(self, name, check_scalar(getattr(self, name), name))
        f0 = check_scalar(self.f0, "f0")
        if f0 <= 0:
            raise DomainError(f"f0 = {f0} is not in the upper halfplane f > 0", point=(self.s0, f0))
        object.__setattr__(self, "f0", f0)
        step = check_scalar(self.step, "step", positive=True)
        if self.s1 == self.s0:
            raise ValidationError("s1 must differ from s0")
        if step > abs(self.s1 - self.s0):
            raise ValidationError(f"step {step} exceeds the interval length {abs(self.s1 - self.s0)}")
        object.__setattr__(self, "step", step)


def catenary_rhs(alpha, f, df):
    """``f'' = alpha * (1 + f'^2) / f``."""
    f = np.asarray(f, dtype=float)
    if np.any(f == 0):
        raise SingularityError("alpha-catenary equation is singular at f = 0")
    out = alpha * (1.0 + np.square(df)) / f
    return float(out) if out.ndim == 0 else out


def rk4(rhs, s0, y0, s1, num_steps, guard=None):
    """Classical RK4 on a uniform grid of ``num_steps`` steps.

    ``rhs(s, y)`` returns ``dy/ds``.  ``guard(s, y)`` may raise to abort.
    Returns ``(s, Y)`` with ``Y`` of shape ``(num_steps + 1, len(y0))``.
    """
    s = np.linspace(s0, s1, num_steps + 1)
    h = (s1 - s0) / num_steps
    y = np.array(y0, dtype=float)
    out = np.empty((num_steps + 1, y.size))
    out[0] = y
    for k in range(num_steps):
        sk = s[k]
        k1 = rhs(sk, y)
        k2 = rhs(sk + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(sk + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(sk + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if guard is not None:
            guard(s[k + 1], y)
        out[k + 1] = y
    return s, out


def _rk4_catenary(alpha, s0, f0, df0, s1, num_steps):
    # scalar kernel; numpy overhead dominates at this size
    h = (s1 - s0) / num_steps
    f, d = float(f0), float(df0)
    fs, ds = [f], [d]
    for k in range(num_steps):
        a1 = alpha * (1.0 + d * d) / f
        fb, db = f + 0.5 * h * d, d + 0.5 * h * a1
        if fb <= SINGULAR_EPS:
            break
        a2 = alpha * (1.0 + db * db) / fb
        fc, dc = f + 0.5 * h * db, d + 0.5 * h * a2
        if fc <= SINGULAR_EPS:
            break
        a3 = alpha * (1.0 + dc * dc) / fc
        fd, dd = f + h * dc, d + h * a3
        if fd <= SINGULAR_EPS:
            break
        a4 = alpha * (1.0 + dd * dd) / fd
        f = f + (h / 6.0) * (d + 2.0 * db + 2.0 * dc + dd)
        d = d + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if not f > SINGULAR_EPS:
            break
        fs.append(f)
        ds.append(d)
    if len(fs) < num_steps + 1:
        reached = s0 + (len(fs) - 1) * h
        raise SingularityError(
            f"trajectory reached the singular set f <= {SINGULAR_EPS:g} after s = {reached}", abscissa=reached
        )
    return np.linspace(s0, s1, num_steps + 1), np.array(fs), np.array(ds)


def _num_steps(ivp):
    return max(1, int(np.ceil(abs(ivp.s1 - ivp.s0) / ivp.step - 1e-9)))


def integrate_catenary(ivp):
    """Integrate the alpha-catenary IVP with fixed-step RK4.

    The effective step is ``|s1 - s0| / ceil(|s1 - s0| / step)``.  The
    sample is returned on increasing abscissae even when ``s1 < s0``.
    """
    s, f, df = _rk4_catenary(ivp.alpha, ivp.s0, ivp.f0, ivp.df0, ivp.s1, _num_steps(ivp))
    d2f = ivp.alpha * (1.0 + df * df) / f
    if ivp.s1 < ivp.s0:
        s, f, df, d2f = s[::-1], f[::-1], df[::-1], d2f[::-1]
    return FunctionSample(s, f, df, d2f)


def richardson_endpoint(ivp):
    """Endpoint value with a step-halving error estimate.

    Returns ``(extrapolated, coarse, fine)`` where ``fine`` uses half the
    step of ``coarse`` and ``extrapolated = fine + (fine - coarse) / 15``.
    """
    n = _num_steps(ivp)
    coarse, fine = (
        _rk4_catenary(ivp.alpha, ivp.s0, ivp.f0, ivp.df0, ivp.s1, steps)[1][-1] for steps in (n, 2 * n)
    )
    return fine + (fine - coarse) / 15.0, coarse, fine


def catenary_closed_form(lam, mu, s):
    """``cosh(lam*s + mu) / lam``."""
    lam = check_scalar(lam, "lambda", nonzero=True)
    mu = check_scalar(mu, "mu")
    out = np.cosh(lam * np.asarray(s, dtype=float) + mu) / lam
    return float(out) if out.ndim == 0 else out


def _shoot_end(alpha, s0, f0, s1, df0, num_steps):
    try:
        end = _rk4_catenary(alpha, s0, f0, df0, s1, num_steps)[1][-1]
    except SingularityError:
        return 0.0
    # steep launches overflow; keep the residual finite and ordered
    return end if math.isfinite(end) else 1e300


def shoot_catenary_bvp(alpha, s0, f_at_s0, s1, f_at_s1, tol=1e-10, step=1e-3, df0_guess=None):
    """Solve the two-point problem ``f(s0) = f_at_s0, f(s1) = f_at_s1``.

    A log-spaced sweep of initial slopes over ``[-1e3, 1e3]`` brackets the
    roots of ``F(m) = f(s1; f'(s0) = m) - f_at_s1``; trajectories that hit
    the singular set count as ``f(s1) = 0``.  The bracket nearest to
    ``df0_guess`` (default: the chord slope) is refined by safeguarded
    secant iteration.  For ``alpha > 0`` two solutions often exist and
    ``df0_guess`` selects between them.
    """
    alpha = check_scalar(alpha, "alpha")
    s0 = check_scalar(s0, "s0")
    s1 = check_scalar(s1, "s1")
    f_at_s0 = check_scalar(f_at_s0, "f_at_s0")
    f_at_s1 = check_scalar(f_at_s1, "f_at_s1")
    tol = check_scalar(tol, "tol", positive=True)
    if f_at_s0 <= 0 or f_at_s1 <= 0:
        raise DomainError("boundary values must be positive (upper halfplane)")
    if s0 == s1:
        raise ValidationError("s1 must differ from s0")
    ivp = CatenaryIVP(alpha, s0, f_at_s0, 0.0, s1, step)
    n = _num_steps(ivp)
    guess = (f_at_s1 - f_at_s0) / (s1 - s0) if df0_guess is None else check_scalar(df0_guess, "df0_guess")

    def resid(m):
        return _shoot_end(alpha, s0, f_at_s0, s1, m, n) - f_at_s1

    mags = np.logspace(-3, 3, 25)
    slopes = np.unique(np.concatenate([-mags[::-1], [0.0], mags, [guess]]))
    values = np.array([resid(m) for m in slopes])
    best = int(np.argmin(np.abs(values)))
    if abs(values[best]) < tol:
        return _final(ivp, slopes[best])
    brackets = [
        (slopes[i], slopes[i + 1], values[i], values[i + 1])
        for i in range(slopes.size - 1)
        if np.sign(values[i]) != np.sign(values[i + 1])
    ]
    if not brackets:
        raise NonConvergenceError(
            "no sign change of the shooting residual over slopes in [-1e3, 1e3]",
            best=slopes[best],
            residual=abs(values[best]),
        )
    a, b, fa, fb = min(brackets, key=lambda br: min(abs(br[0] - guess), abs(br[1] - guess)))
    best_m, best_r = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    x0, x1, r0, r1 = a, b, fa, fb
    for _ in range(100):
        m = x1 - r1 * (x1 - x0) / (r1 - r0) if r1 != r0 else 0.5 * (a + b)
        if not (min(a, b) < m < max(a, b)):
            m = 0.5 * (a + b)
        rm = resid(m)
        if abs(rm) < abs(best_r):
            best_m, best_r = m, rm
        if abs(rm) < tol:
            return _final(ivp, m)
        if np.sign(rm) == np.sign(fa):
            a, fa = m, rm
        else:
            b, fb = m, rm
        x0, r0, x1, r1 = x1, r1, m, rm
    raise NonConvergenceError(
        f"shooting did not reach tol {tol:g} within 100 iterations", best=best_m, residual=abs(best_r)
    )


def _final(ivp, df0):
    return integrate_catenary(CatenaryIVP(ivp.alpha, ivp.s0, ivp.f0, float(df0), ivp.s1, ivp.step))


@dataclass(frozen=True)
class PlanarCurveSample:
    """Samples of a regular planar curve with first and second derivatives.

    Tangent, principal normal (tangent rotated by +90 degrees) and signed
    curvature are derived.  For a graph ``(s, f(s))`` this gives
    ``N = (-f', 1) / sqrt(1 + f'^2)`` and ``kappa = f'' / (1 + f'^2)^(3/2)``.
    """

    s: np.ndarray
    points: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    tangent: np.ndarray = field(init=False, repr=False)
    normal: np.ndarray = field(init=False, repr=False)
    curvature: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = check_array(self.s, "s", ndim=1, min_size=1)
        m = s.size
        pts = check_array(self.points, "points", ndim=2, shape=(m, 2))
        vel = check_array(self.velocity, "velocity", ndim=2, shape=(m, 2))
        acc = check_array(self.acceleration, "acceleration", ndim=2, shape=(m, 2))
        speed = np.linalg.norm(vel, axis=1)
        if np.any(speed == 0):
            raise ValidationError("curve is not regular (zero velocity)")
        tangent = vel / speed[:, None]
        normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
        kappa = (vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]) / speed**3
        for name, value in (("s", s), ("points", pts), ("velocity", vel), ("acceleration", acc),
                            ("tangent", tangent), ("normal", normal), ("curvature", kappa)):
            object.__setattr__(self, name, value)

    @classmethod
    def from_graph(cls, s, f, df, d2f):
        s = np.asarray(s, dtype=float)
        one = np.ones_like(s)
        return cls(s, np.column_stack([s, f]), np.column_stack([one, df]),
                   np.column_stack([np.zeros_like(s), d2f]))

    @classmethod
    def from_sample(cls, sample):
        if sample.derivatives is None or sample.second_derivatives is None:
            raise ValidationError("sample needs first and second derivatives")
        return cls.from_graph(sample.abscissae, sample.values, sample.derivatives, sample.second_derivatives)


def curvature_residual_1d(curve, alpha, u=(0.0, 1.0)):
    """Pointwise ``kappa - alpha * <N, u> / <gamma, u>``."""
    alpha = check_scalar(alpha, "alpha")
    u = as_direction(u, dim=2).u
    height = curve.points @ u
    bad = np.flatnonzero(height <= DOMAIN_EPS)
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"curve leaves the halfplane <gamma, u> > 0 at s = {curve.s[i]}",
                          point=curve.points[i])
    return curve.curvature - alpha * (curve.normal @ u) / height


def resample(sample, abscissae):
    """Evaluate the C^2 quintic Hermite interpolant of a full sample."""
    prof = Profile.tabulated(sample.abscissae, sample.values, sample.derivatives, sample.second_derivatives)
    f, df, d2f = prof.derivatives(np.asarray(abscissae, dtype=float))
    return FunctionSample(np.asarray(abscissae, dtype=float), f, df, d2f)
