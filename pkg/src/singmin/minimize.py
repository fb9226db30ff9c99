"""Discrete potential alpha-energy of graph fields and its minimization.

The energy of a graph ``x -> f(x)`` over a rectangular lattice is

    E(f) = sum_cells |cell| * g(q_c, u)^alpha * sqrt(1 + |grad f|_c^2)

with cells the lattice intervals (n = 1) or the two triangles of every
lattice square (n = 2), ``grad f`` the forward difference on the cell and
``q_c`` the cell centroid.  Boundary nodes are Dirichlet data.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._validation import DOMAIN_EPS, check_array, check_int, check_interval, check_scalar
from .exceptions import DomainError, ValidationError
from .geometry import Direction, as_direction
from .residuals import ResidualReport, residual_from_jet


@dataclass
class Field:
    """Node values on a uniform rectangular lattice (n = 1 or 2).

    ``axes[i]`` holds the node coordinates along axis ``i``; ``fixed``
    marks Dirichlet nodes (default: the lattice boundary).
    """

    axes: tuple
    values: np.ndarray
    fixed: Optional[np.ndarray] = None

    def __post_init__(self):
        axes = tuple(check_array(a, f"axes[{i}]", ndim=1, min_size=3) for i, a in enumerate(self.axes))
        if len(axes) not in (1, 2):
            raise ValidationError(f"fields support n = 1 or 2, got n = {len(axes)}")
        for i, a in enumerate(axes):
            h = np.diff(a)
            if np.any(h <= 0) or np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
                raise ValidationError(f"axes[{i}] must be uniformly spaced and increasing")
        shape = tuple(a.size for a in axes)
        self.axes = axes
        self.values = check_array(self.values, "values", shape=shape).reshape(shape).copy()
        if self.values.ndim != len(axes):
            raise ValidationError(f"values must have shape {shape}")
        if self.fixed is None:
            fixed = np.ones(shape, dtype=bool)
            fixed[(slice(1, -1),) * len(axes)] = False
        else:
            fixed = np.asarray(self.fixed, dtype=bool)
            if fixed.shape != shape:
                raise ValidationError(f"fixed mask must have shape {shape}")
        self.fixed = fixed

    @classmethod
    def from_boundary(cls, domain, shape, boundary, init="harmonic"):
        """Lattice over ``domain`` with boundary values ``boundary(*coords)``.

        Interior nodes start from the harmonic extension of the boundary
        data (linear interpolation when n = 1), or from ``boundary`` itself
        when ``init="boundary"``.
        """
        domain = [check_interval(iv, f"domain[{i}]") for i, iv in enumerate(domain)]
        shape = [check_int(m, "shape", minimum=3) for m in np.atleast_1d(shape)]
        if len(shape) != len(domain):
            raise ValidationError("shape and domain disagree in dimension")
        axes = tuple(np.linspace(lo, hi, m) for (lo, hi), m in zip(domain, shape))
        grids = np.meshgrid(*axes, indexing="ij")
        values = np.broadcast_to(np.asarray(boundary(*grids), dtype=float), grids[0].shape).copy()
        fld = cls(axes, values)
        if init == "harmonic":
            fld.values = harmonic_extension(fld)
        elif init != "boundary":
            raise ValidationError(f"unknown init {init!r}")
        return fld

    @property
    def n(self):
        return len(self.axes)

    @property
    def shape(self):
        return self.values.shape

    @property
    def spacings(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def free(self):
        return ~self.fixed.ravel()

    def nodes(self):
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    def with_values(self, flat):
        return Field(self.axes, np.asarray(flat).reshape(self.shape), self.fixed.copy())

    def copy(self):
        return self.with_values(self.values.copy())


@dataclass(frozen=True)
class EnergyOpts:
    alpha: float
    u: object = "vertical"
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-9
    armijo: float = 1e-4
    backtrack: float = 0.5
    preconditioner: Optional[str] = "sobolev"

    def __post_init__(self):
        check_scalar(self.alpha, "alpha")
        check_int(self.max_iterations, "max_iterations", minimum=0)
        check_scalar(self.gradient_tolerance, "gradient_tolerance", positive=True)
        check_scalar(self.armijo, "armijo", bounds=(None, 0.5), positive=True)
        check_scalar(self.backtrack, "backtrack", bounds=(None, 1.0 - 1e-12), positive=True)
        if self.preconditioner not in (None, "sobolev"):
            raise ValidationError(f"unknown preconditioner {self.preconditioner!r}")
        if isinstance(self.u, str) and self.u not in ("vertical", "horizontal"):
            raise ValidationError(f"u must be 'vertical', 'horizontal' or a vector, got {self.u!r}")

    def direction(self, n):
        """Ambient unit vector; only ``e_{n+1}`` and ``e_1`` are supported."""
        if isinstance(self.u, str):
            return Direction.vertical(n + 1) if self.u == "vertical" else Direction.horizontal(n + 1, 0)
        d = as_direction(self.u, dim=n + 1)
        if not (np.allclose(d.u, Direction.vertical(n + 1).u) or np.allclose(d.u, Direction.horizontal(n + 1).u)):
            raise ValidationError("the minimizer supports u = e_{n+1} (vertical) or u = e_1 (horizontal) only")
        return d


# -- mesh ---------------------------------------------------------------------


@dataclass(frozen=True)
class _Mesh:
    elems: np.ndarray  # (E, k) flat node indices
    gp: np.ndarray  # (E, k) coefficients of d/dx_1
    gq: Optional[np.ndarray]  # (E, k) coefficients of d/dx_2 (n = 2)
    area: float
    centroid_x1: np.ndarray  # (E,)


def _mesh(fld):
    if fld.n == 1:
        (h,) = fld.spacings
        m = fld.shape[0]
        i = np.arange(m - 1)
        elems = np.column_stack([i, i + 1])
        gp = np.tile([-1.0 / h, 1.0 / h], (m - 1, 1))
        x = fld.axes[0]
        return _Mesh(elems, gp, None, h, 0.5 * (x[:-1] + x[1:]))
    hx, hy = fld.spacings
    mx, my = fld.shape
    idx = np.arange(mx * my).reshape(mx, my)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    ne = a.size
    # lower triangle (a, b, c); upper triangle (d, c, b)
    elems = np.vstack([np.column_stack([a, b, c]), np.column_stack([d, c, b])])
    gp = np.vstack([np.tile([-1 / hx, 1 / hx, 0.0], (ne, 1)), np.tile([1 / hx, -1 / hx, 0.0], (ne, 1))])
    gq = np.vstack([np.tile([-1 / hy, 0.0, 1 / hy], (ne, 1)), np.tile([1 / hy, 0.0, -1 / hy], (ne, 1))])
    x = np.repeat(fld.axes[0], my)
    cx = x[elems].mean(axis=1)
    return _Mesh(elems, gp, gq, 0.5 * hx * hy, cx)


def _check_feasible(fld, flat, u):
    heights = fld.nodes() @ u[:-1] + flat * u[-1]
    bad = np.flatnonzero(~(heights > DOMAIN_EPS))
    if bad.size:
        k = int(bad[0])
        node = np.unravel_index(k, fld.shape)
        raise DomainError(
            f"node {tuple(int(i) for i in node)} at {fld.nodes()[k].tolist()} has <q, u> = {heights[k]:.3e} <= {DOMAIN_EPS:g}",
            point=fld.nodes()[k],
        )


def _cell_terms(mesh, flat, u, alpha):
    fe = flat[mesh.elems]
    p = np.sum(mesh.gp * fe, axis=1)
    sq = 1.0 + p * p
    q = None
    if mesh.gq is not None:
        q = np.sum(mesh.gq * fe, axis=1)
        sq += q * q
    # u is e_1 or e_{n+1}, so <q_c, u> only needs x_1 and the mean height
    w = mesh.centroid_x1 * u[0] + fe.mean(axis=1) * u[-1]
    return fe, p, q, np.sqrt(sq), w


def _energy(mesh, flat, u, alpha):
    _, _, _, s, w = _cell_terms(mesh, flat, u, alpha)
    return mesh.area * math.fsum((w**alpha * s).tolist())


def _gradient(mesh, flat, u, alpha, size):
    fe, p, q, s, w = _cell_terms(mesh, flat, u, alpha)
    k = mesh.elems.shape[1]
    wa = w**alpha
    contrib = (alpha * w ** (alpha - 1.0) * (u[-1] / k) * s)[:, None] + (wa * p / s)[:, None] * mesh.gp
    if q is not None:
        contrib += (wa * q / s)[:, None] * mesh.gq
    return mesh.area * np.bincount(mesh.elems.ravel(), weights=contrib.ravel(), minlength=size)


def discrete_energy(field, opts):
    """Cell quadrature of ``g(q, u)^alpha dA``; exact for constant fields."""
    u = opts.direction(field.n).u
    flat = field.values.ravel()
    _check_feasible(field, flat, u)
    return _energy(_mesh(field), flat, u, opts.alpha)


def energy_gradient(field, opts):
    """Exact gradient of :func:`discrete_energy` w.r.t. the free nodes (C order)."""
    u = opts.direction(field.n).u
    flat = field.values.ravel()
    _check_feasible(field, flat, u)
    return _gradient(_mesh(field), flat, u, opts.alpha, flat.size)[field.free]


def _stiffness(fld, mesh):
    k = mesh.elems.shape[1]
    local = np.einsum("ei,ej->eij", mesh.gp, mesh.gp)
    if mesh.gq is not None:
        local += np.einsum("ei,ej->eij", mesh.gq, mesh.gq)
    rows = np.repeat(mesh.elems, k, axis=1).ravel()
    cols = np.tile(mesh.elems, (1, k)).ravel()
    size = fld.values.size
    return sp.csc_matrix((mesh.area * local.ravel(), (rows, cols)), shape=(size, size))


def harmonic_extension(fld):
    """Discrete harmonic interior values for the Dirichlet data of ``fld``."""
    mesh = _mesh(fld)
    K = _stiffness(fld, mesh)
    free = fld.free
    flat = fld.values.ravel().copy()
    rhs = -K[free][:, ~free] @ flat[~free]
    flat[free] = splu(K[free][:, free].tocsc()).solve(rhs)
    return flat.reshape(fld.shape)


@dataclass
class MinimizeResult:
    field: Field
    iterations: int
    final_gradient_norm: float
    converged: bool
    energies: list = field(default_factory=list)
    message: str = ""


def minimize_energy(field, opts):
    """Steepest descent with Armijo backtracking on the free nodes.

    With ``preconditioner="sobolev"`` the descent direction is the
    gradient's Riesz representative in the discrete H^1_0 inner product,
    which keeps the iteration count independent of the lattice spacing.
    Trial steps that leave the halfspace are rejected like Armijo failures.
    Stopping on ``max_iterations`` is reported through ``converged=False``.
    """
    u = opts.direction(field.n).u
    alpha = opts.alpha
    flat = field.values.ravel().copy()
    _check_feasible(field, flat, u)
    mesh = _mesh(field)
    free = field.free
    size = flat.size
    solve = None
    if opts.preconditioner == "sobolev" and free.any():
        K = _stiffness(field, mesh)
        solve = splu(K[free][:, free].tocsc()).solve
    nodes = field.nodes()

    def feasible(vals):
        return bool(np.all(nodes @ u[:-1] + vals * u[-1] > DOMAIN_EPS))

    energy = _energy(mesh, flat, u, alpha)
    energies = [energy]
    grad = _gradient(mesh, flat, u, alpha, size)[free]
    gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
    t_prev = 1.0
    it = 0
    message = "converged"
    while gnorm >= opts.gradient_tolerance:
        if it >= opts.max_iterations:
            message = "max_iterations reached"
            break
        direction = -solve(grad) if solve is not None else -grad
        slope = float(grad @ direction)
        t = min(1.0, 2.0 * t_prev) if solve is not None else 2.0 * t_prev
        while True:
            trial = flat.copy()
            trial[free] += t * direction
            if feasible(trial):
                e_trial = _energy(mesh, trial, u, alpha)
                if e_trial <= energy + opts.armijo * t * slope:
                    break
            t *= opts.backtrack
            if t < 1e-18:
                break
        if t < 1e-18:
            message = "line search failed"
            break
        if e_trial > energy:
            raise AssertionError("energy increased on an accepted step")
        flat, energy, t_prev = trial, e_trial, t
        energies.append(energy)
        grad = _gradient(mesh, flat, u, alpha, size)[free]
        gnorm = float(np.max(np.abs(grad)))
        it += 1
    converged = gnorm < opts.gradient_tolerance
    return MinimizeResult(field.with_values(flat), it, gnorm, converged, energies, message)


def el_residual_of_field(field, opts):
    """Singular-minimal residual of a field by central differences.

    Evaluated at every node with a full stencil; independent of the
    forward-difference discretization used by the energy.
    """
    u = opts.direction(field.n).u
    f = field.values
    if field.n == 1:
        (h,) = field.spacings
        x = field.axes[0][1:-1, None]
        vals = f[1:-1]
        grad = ((f[2:] - f[:-2]) / (2 * h))[:, None]
        hess = ((f[2:] - 2 * f[1:-1] + f[:-2]) / h**2)[:, None, None]
    else:
        hx, hy = field.spacings
        X, Y = np.meshgrid(field.axes[0][1:-1], field.axes[1][1:-1], indexing="ij")
        x = np.column_stack([X.ravel(), Y.ravel()])
        c = f[1:-1, 1:-1]
        vals = c.ravel()
        fx = (f[2:, 1:-1] - f[:-2, 1:-1]) / (2 * hx)
        fy = (f[1:-1, 2:] - f[1:-1, :-2]) / (2 * hy)
        fxx = (f[2:, 1:-1] - 2 * c + f[:-2, 1:-1]) / hx**2
        fyy = (f[1:-1, 2:] - 2 * c + f[1:-1, :-2]) / hy**2
        fxy = (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) / (4 * hx * hy)
        grad = np.column_stack([fx.ravel(), fy.ravel()])
        hess = np.stack([np.column_stack([fxx.ravel(), fxy.ravel()]), np.column_stack([fxy.ravel(), fyy.ravel()])], axis=1)
    return ResidualReport(x, residual_from_jet(x, vals, grad, hess, u, opts.alpha))


# -- CSV / JSON interchange ---------------------------------------------------


def field_header(fld, opts=None):
    header = {
        "n": fld.n,
        "shape": list(fld.shape),
        "lower": [float(a[0]) for a in fld.axes],
        "upper": [float(a[-1]) for a in fld.axes],
        "spacings": list(fld.spacings),
    }
    default = Field(fld.axes, fld.values).fixed
    header["boundary"] = "edges" if np.array_equal(default, fld.fixed) else np.flatnonzero(fld.fixed.ravel()).tolist()
    if opts is not None:
        header["alpha"] = opts.alpha
        header["u"] = opts.u if isinstance(opts.u, str) else list(map(float, opts.u))
    return header


def write_field(fld, csv_path, header_path=None, opts=None):
    """CSV node table ``x1[, x2], value`` at 17 significant digits, plus JSON header."""
    nodes = fld.nodes()
    cols = [f"x{i + 1}" for i in range(fld.n)] + ["value"]
    lines = [",".join(cols)]
    for row, v in zip(nodes, fld.values.ravel()):
        lines.append(",".join(format(c, ".17g") for c in (*row, v)))
    with open(csv_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    if header_path is not None:
        with open(header_path, "w") as fh:
            json.dump(field_header(fld, opts), fh, indent=2)
            fh.write("\n")


def read_field(csv_path, header_path):
    with open(header_path) as fh:
        header = json.load(fh)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    shape = tuple(header["shape"])
    axes = tuple(np.linspace(lo, hi, m) for lo, hi, m in zip(header["lower"], header["upper"], shape))
    fld = Field(axes, data[:, -1].reshape(shape))
    if header.get("boundary", "edges") != "edges":
        fixed = np.zeros(fld.values.size, dtype=bool)
        fixed[np.asarray(header["boundary"], dtype=int)] = True
        fld.fixed = fixed.reshape(shape)
    return fld
