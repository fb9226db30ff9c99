"""Sampled classification into hyperplanes and alpha-catenary cylinders.

The trichotomy is exact in theory; numerically every decision is a
threshold comparison against a caller-supplied ``tol`` that is recorded in
the returned :class:`Classification`.
"""

import enum
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from ._parallel import resolve_workers
from ._validation import check_int, check_scalar
from .catenary import FunctionSample, rk4
from .exceptions import NonConvergenceError, ValidationError
from .functions import Profile
from .geometry import Direction, as_direction
from .residuals import (
    AffineTranslationSpec,
    BaseCurve,
    CylinderSpec,
    TranslationSpec,
    affine_residuals,
    cylinder_residuals,
    grid_points,
    residual_report,
    translation_residuals,
)

DEFAULT_TOL = 1e-6
MAX_GRID_POINTS = 4096


class Verdict(str, enum.Enum):
    HYPERPLANE = "Hyperplane"
    ALPHA_CATENARY_CYLINDER = "AlphaCatenaryCylinder"
    NOT_SINGULAR_MINIMAL = "NotSingularMinimal"


@dataclass
class Classification:
    verdict: Verdict
    residual_rms: float
    residual_max: float
    tol: float
    second_derivative_norms: list
    nonlinear_axes: list
    catenary_fit: Optional[dict] = None
    domain_violations: int = 0
    notes: list = field(default_factory=list)

    def to_json(self):
        out = asdict(self)
        out["verdict"] = self.verdict.value
        return out


# -- profile tests ------------------------------------------------------------


def _second_differences(sample):
    s, f = sample.abscissae, sample.values
    d1 = np.diff(f) / np.diff(s)
    d2 = 2.0 * np.diff(d1) / (s[2:] - s[:-2])
    return d1, d2


def detect_linear(sample, tol=DEFAULT_TOL):
    """True iff ``max |f''| <= tol * (1 + max |f'|)`` by divided differences."""
    tol = check_scalar(tol, "tol", positive=True)
    if len(sample) < 5:
        raise ValidationError(f"detect_linear needs at least 5 samples, got {len(sample)}")
    d1, d2 = _second_differences(sample)
    return bool(np.max(np.abs(d2)) <= tol * (1.0 + np.max(np.abs(d1))))


def fit_catenary(sample, max_iter=100, xtol=1e-13):
    """Least-squares fit of ``cosh(lam*s + mu) / lam`` by damped Gauss-Newton.

    Seeded with ``lam = 1 / min(values)`` and ``mu = -lam * s_min`` at the
    sample minimum.  Returns ``(lam, mu, rms)``.
    """
    s, y = sample.abscissae, sample.values
    if np.any(y <= 0):
        raise ValidationError("fit_catenary needs positive values")
    k = int(np.argmin(y))
    theta = np.array([1.0 / y[k], -s[k] / y[k]])

    def resid(th):
        lam, mu = th
        return np.cosh(lam * s + mu) / lam - y

    def cost(r):
        return float(r @ r)

    r = resid(theta)
    c = cost(r)
    for _ in range(max_iter):
        lam, mu = theta
        arg = lam * s + mu
        ch, sh = np.cosh(arg), np.sinh(arg)
        jac = np.column_stack([-ch / lam**2 + s * sh / lam, sh / lam])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        t = 1.0
        while t > 1e-12:
            trial = theta + t * step
            if trial[0] != 0:
                with np.errstate(over="ignore", invalid="ignore"):
                    r_new = resid(trial)
                c_new = cost(r_new) if np.all(np.isfinite(r_new)) else np.inf
                if c_new <= c:
                    break
            t *= 0.5
        else:
            # no descent possible along the Gauss-Newton direction: stationary
            return float(theta[0]), float(theta[1]), float(np.sqrt(c / s.size))
        moved = t * np.linalg.norm(step)
        theta, r, c = trial, r_new, c_new
        if moved <= xtol * (1.0 + np.linalg.norm(theta)):
            return float(theta[0]), float(theta[1]), float(np.sqrt(c / s.size))
    raise NonConvergenceError(
        f"Gauss-Newton catenary fit did not converge in {max_iter} iterations",
        best=(float(theta[0]), float(theta[1])),
        residual=float(np.sqrt(c / s.size)),
    )


def _sample_profile(profile, interval, num):
    s = np.linspace(interval[0], interval[1], num)
    return FunctionSample(s, profile.value(s))


def _mean_slope(sample):
    s, f = sample.abscissae, sample.values
    return float((f[-1] - f[0]) / (s[-1] - s[0]))


def _points(domain, grid, seed=0):
    total = int(np.prod([grid] * len(domain))) if np.isscalar(grid) else int(np.prod(grid))
    if total <= MAX_GRID_POINTS:
        return grid_points(domain, grid)
    lo = np.array([d[0] for d in domain])
    hi = np.array([d[1] for d in domain])
    unit = qmc.Halton(d=len(domain), scramble=True, seed=seed).random(MAX_GRID_POINTS)
    return qmc.scale(unit, lo, hi)


def _fit_evidence(abscissae, heights, notes):
    order = np.argsort(abscissae)
    s, h = abscissae[order], heights[order]
    if np.any(np.diff(s) <= 0):
        notes.append("catenary fit skipped: base curve is not a graph over the fit axis")
        return None
    try:
        lam, mu, rms = fit_catenary(FunctionSample(s, h))
    except (NonConvergenceError, ValidationError) as exc:
        notes.append(f"catenary fit failed: {exc}")
        return None
    return {"lambda": lam, "mu": mu, "rms": rms}


def _decide(rms, tol, nonlinear, parallel_ok, notes):
    if not rms < tol:
        return Verdict.NOT_SINGULAR_MINIMAL
    if not nonlinear:
        if parallel_ok:
            return Verdict.HYPERPLANE
        notes.append("theorem-tension: linear profiles with small residual but not parallel to u")
        return Verdict.NOT_SINGULAR_MINIMAL
    if len(nonlinear) == 1:
        return Verdict.ALPHA_CATENARY_CYLINDER
    notes.append("theorem-tension: residual below tol with two or more non-linear profiles")
    return Verdict.NOT_SINGULAR_MINIMAL


# -- classifiers --------------------------------------------------------------


def classify_translation(spec, alpha, tol=DEFAULT_TOL, grid=9, profile_samples=65, workers=None):
    """Classify a sampled translation hypersurface (``u = e_1``)."""
    alpha = check_scalar(alpha, "alpha")
    tol = check_scalar(tol, "tol", positive=True)
    if spec.domain is None:
        raise ValidationError("classification needs spec.domain")
    report = residual_report(lambda X: translation_residuals(spec, alpha, X), _points(spec.domain, grid), workers)
    samples = [_sample_profile(p, iv, profile_samples) for p, iv in zip(spec.profiles, spec.domain)]
    norms = [float(np.max(np.abs(_second_differences(smp)[1]))) for smp in samples]
    nonlinear = [i for i, smp in enumerate(samples) if not detect_linear(smp, tol)]
    notes = []
    slope1 = np.max(np.abs(np.diff(samples[0].values) / np.diff(samples[0].abscissae)))
    verdict = _decide(report.rms, tol, nonlinear, slope1 <= tol or abs(alpha) <= tol, notes)
    fit = None
    if verdict is Verdict.ALPHA_CATENARY_CYLINDER:
        if nonlinear != [0]:
            notes.append("theorem-tension: the non-linear profile is not the u-direction profile f_1")
        elif alpha == 1.0:
            slopes = np.array([_mean_slope(smp) for smp in samples[1:]])
            scale = np.sqrt(1.0 + slopes @ slopes)
            fit = _fit_evidence(samples[0].values / scale, samples[0].abscissae, notes)
    return Classification(verdict, report.rms, report.max_abs, tol, norms, nonlinear, fit,
                          report.domain_violations, notes)


def classify_affine(spec, alpha, tol=DEFAULT_TOL, grid=17, profile_samples=65, workers=None):
    """Classify ``z = f(x) + g(y + c x)`` with ``u = e_1``."""
    alpha = check_scalar(alpha, "alpha")
    tol = check_scalar(tol, "tol", positive=True)
    if spec.domain is None:
        raise ValidationError("classification needs spec.domain")
    report = residual_report(lambda P: affine_residuals(spec, alpha, P), _points(spec.domain, grid), workers)
    samples = [_sample_profile(p, iv, profile_samples) for p, iv in zip((spec.f, spec.g), spec.domain)]
    norms = [float(np.max(np.abs(_second_differences(smp)[1]))) for smp in samples]
    nonlinear = [i for i, smp in enumerate(samples) if not detect_linear(smp, tol)]
    notes = []
    zx = _mean_slope(samples[0]) + spec.c * _mean_slope(samples[1])
    verdict = _decide(report.rms, tol, nonlinear, abs(zx) <= tol or abs(alpha) <= tol, notes)
    fit = None
    if verdict is Verdict.ALPHA_CATENARY_CYLINDER:
        if nonlinear != [0]:
            notes.append("theorem-tension: g is non-linear while f is linear")
        elif alpha == 1.0:
            lam = _mean_slope(samples[1])
            x = samples[0].abscissae
            s = (samples[0].values + lam * spec.c * x) / np.sqrt(1.0 + lam * lam)
            fit = _fit_evidence(s, x, notes)
    return Classification(verdict, report.rms, report.max_abs, tol, norms, nonlinear, fit,
                          report.domain_violations, notes)


def classify_cylinder(spec, u, alpha, tol=DEFAULT_TOL, grid=9, workers=None):
    """Classify a sampled generalized cylinder for an arbitrary unit ``u``."""
    u = as_direction(u, dim=spec.n + 1)
    alpha = check_scalar(alpha, "alpha")
    tol = check_scalar(tol, "tol", positive=True)
    if spec.domain is None:
        raise ValidationError("classification needs spec.domain")
    report = residual_report(lambda S: cylinder_residuals(spec, u, alpha, S), _points(spec.domain, grid), workers)
    s = np.linspace(*spec.domain[0], 65)
    kappa = spec.curvature(s)
    kmax = float(np.max(np.abs(kappa)))
    nonlinear = [0] if kmax > tol else []
    notes = []
    pts, _, _ = spec.curve.jet(s)
    normal0 = spec.normal(s[:1])[0]
    parallel = abs(float(normal0 @ u.u)) <= tol and kmax <= tol
    verdict = _decide(report.rms, tol, nonlinear, parallel or abs(alpha) <= tol, notes)
    fit = None
    if verdict is Verdict.ALPHA_CATENARY_CYLINDER:
        if np.max(np.abs(spec.rulings @ u.u)) > tol:
            notes.append("theorem-tension: rulings are not orthogonal to u")
        elif alpha == 1.0:
            # in-plane axis orthogonal to u
            heights = pts @ u.u
            inplane = pts - heights[:, None] * u.u - (pts @ spec.rulings.T) @ spec.rulings
            axis = inplane[-1] - inplane[0]
            if np.linalg.norm(axis) > 0:
                axis = axis / np.linalg.norm(axis)
                fit = _fit_evidence(inplane @ axis, heights, notes)
    return Classification(verdict, report.rms, report.max_abs, tol, [kmax], nonlinear, fit,
                          report.domain_violations, notes)


# -- constructions ------------------------------------------------------------


def reduced_profile(alpha, slopes, interval, f0=0.0, df0=1.0, num_steps=2000):
    """Non-linear profile of a translation graph whose other profiles are linear.

    With ``f_k(x_k) = slopes[k] x_k`` for ``k >= 2`` and ``L = sum slopes^2``
    the translation equation reduces to

        (1 + L) f'' = -alpha f' (1 + L + f'^2) / x

    on ``x > 0``.  The RK4 trajectory from ``interval[0]`` is returned as a
    C^2 quintic Hermite :class:`Profile` over ``interval``.
    """
    alpha = check_scalar(alpha, "alpha")
    lo, hi = interval
    if not 0 < lo < hi:
        raise ValidationError("interval must satisfy 0 < lo < hi")
    big_l = float(np.sum(np.square(np.atleast_1d(slopes))))
    num_steps = check_int(num_steps, "num_steps", minimum=2)

    def rhs(x, y):
        return np.array([y[1], -alpha * y[1] * (1.0 + big_l + y[1] * y[1]) / ((1.0 + big_l) * x)])

    s, y = rk4(rhs, lo, np.array([f0, df0]), hi, num_steps)
    d2 = -alpha * y[:, 1] * (1.0 + big_l + y[:, 1] ** 2) / ((1.0 + big_l) * s)
    return Profile.tabulated(s, y[:, 0], y[:, 1], d2)


# -- falsification ------------------------------------------------------------


def _random_poly(rng, degree, lead_min=0.25):
    coeffs = rng.uniform(-2.0, 2.0, degree + 1)
    if abs(coeffs[-1]) < lead_min:
        coeffs[-1] = np.copysign(lead_min, coeffs[-1]) + coeffs[-1]
    return coeffs


def random_translation_spec(rng):
    n = int(rng.integers(2, 4))
    curved = int(rng.integers(2, n + 1))
    axes = rng.permutation(n)[:curved]
    profiles = []
    for i in range(n):
        if i in axes:
            profiles.append(Profile.polynomial(_random_poly(rng, int(rng.integers(2, 4)))))
        else:
            profiles.append(Profile.polynomial(rng.uniform(-2.0, 2.0, 2)))
    domain = [(0.5, 2.5)] + [(-1.0, 1.0)] * (n - 1)
    return TranslationSpec(profiles, domain)


def random_affine_spec(rng):
    c = float(rng.uniform(0.1, 2.0) * rng.choice([-1.0, 1.0]))
    f = Profile.polynomial(_random_poly(rng, int(rng.integers(2, 4))))
    g = Profile.polynomial(_random_poly(rng, int(rng.integers(2, 4))))
    return AffineTranslationSpec(f, g, c, [(0.5, 2.5), (-1.0, 1.0)])


def random_cylinder_spec(rng):
    """Cylinder in R^3 or R^4 with horizontal rulings and a polynomial base.

    The base is a degree 3-4 graph (non-constant curvature, never a
    catenary) over a random horizontal axis, lifted to height >= 0.5.
    """
    dim = int(rng.integers(3, 5))
    q, _ = np.linalg.qr(rng.normal(size=(dim - 1, dim - 1)))
    horiz = np.zeros((dim - 1, dim))
    horiz[:, :-1] = q.T
    a, rulings = horiz[0], horiz[1:]
    b = np.eye(dim)[-1]
    coeffs = _random_poly(rng, int(rng.integers(3, 5)))
    s = np.linspace(-1.0, 1.0, 201)
    lift = 0.5 - float(np.min(np.polynomial.Polynomial(coeffs)(s)))
    coeffs[0] += max(lift, 0.0)
    curve = BaseCurve.planar_graph(Profile.polynomial(coeffs), a, b, domain=(-1.0, 1.0))
    return CylinderSpec(rulings, curve, [(-1.0, 1.0)] + [(-1.0, 1.0)] * (dim - 2))


@dataclass
class SweepReport:
    family: str
    alpha: float
    trials: int
    seed: int
    tol: float
    counts: dict
    counterexamples: list

    def to_json(self):
        return asdict(self)


def falsification_sweep(family, alpha, trials, seed, tol=DEFAULT_TOL, workers=None):
    """Classify ``trials`` random curved specs; anything but NotSingularMinimal is reported.

    Specs are drawn from ``numpy.random.default_rng(seed)`` (PCG64), so the
    sequence is identical on every platform.
    """
    if family not in ("translation", "affine", "cylinder"):
        raise ValidationError(f"unknown family {family!r}")
    trials = check_int(trials, "trials", minimum=1)
    seed = check_int(seed, "seed", minimum=0)
    alpha = check_scalar(alpha, "alpha")
    rng = np.random.default_rng(seed)
    counts = {v.value: 0 for v in Verdict}
    counterexamples = []
    workers = resolve_workers(workers)
    for trial in range(trials):
        if family == "translation":
            spec = random_translation_spec(rng)
            result = classify_translation(spec, alpha, tol, workers=workers)
            desc = {"profiles": [p.description for p in spec.profiles], "domain": spec.domain}
        elif family == "affine":
            spec = random_affine_spec(rng)
            result = classify_affine(spec, alpha, tol, workers=workers)
            desc = {"f": spec.f.description, "g": spec.g.description, "c": spec.c, "domain": spec.domain}
        else:
            spec = random_cylinder_spec(rng)
            u = Direction.vertical(spec.n + 1)
            result = classify_cylinder(spec, u, alpha, tol, workers=workers)
            desc = {"rulings": spec.rulings.tolist(), "curve": spec.curve.description, "domain": spec.domain}
        counts[result.verdict.value] += 1
        if result.verdict is not Verdict.NOT_SINGULAR_MINIMAL:
            counterexamples.append({"trial": trial, "spec": desc, "classification": result.to_json()})
    return SweepReport(family, alpha, trials, seed, tol, counts, counterexamples)
