"""Curvature of graph hypersurfaces ``x_{n+1} = f(x_1, ..., x_n)``.

Orientation convention: the unit normal is ``(-grad f, 1) / phi`` with
``phi = sqrt(1 + |grad f|^2)``, and the mean curvature is

    H = (1/n) sum_j d/dx_j (f_{x_j} / phi),

so a paraboloid opening upwards has H > 0 and the upper unit hemisphere
has H = -1.  Every residual in the package is built on this pairing.

The ``*_from_jet`` helpers work on precomputed gradients and Hessians and
broadcast over leading axes; the public functions take a :class:`GraphFn`
and a single point.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_array, check_int
from .exceptions import EvaluationError, ValidationError

_EPS = np.finfo(float).eps
MAX_DIM = 8


@dataclass(frozen=True)
class Direction:
    """Unit vector ``u`` of the ambient space; normalized on construction."""

    u: np.ndarray

    def __post_init__(self):
        vec = check_array(self.u, "direction", ndim=1)
        if vec.size < 2:
            raise ValidationError("direction: need at least 2 components")
        norm = np.linalg.norm(vec)
        if norm < 1e-300:
            raise ValidationError("direction: zero vector cannot be normalized")
        vec = vec / norm
        vec.setflags(write=False)
        object.__setattr__(self, "u", vec)

    @classmethod
    def vertical(cls, dim):
        """``e_dim``: normal to the hyperplane the graph sits over."""
        vec = np.zeros(dim)
        vec[-1] = 1.0
        return cls(vec)

    @classmethod
    def horizontal(cls, dim, axis=0):
        vec = np.zeros(dim)
        vec[axis] = 1.0
        return cls(vec)

    @property
    def dim(self):
        return self.u.size

    def is_vertical(self, atol=1e-12):
        return abs(abs(self.u[-1]) - 1.0) <= atol

    def is_horizontal(self, atol=1e-12):
        return abs(self.u[-1]) <= atol

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.u, dtype=dtype)


def as_direction(u, dim=None):
    d = u if isinstance(u, Direction) else Direction(np.asarray(u, dtype=float))
    if dim is not None and d.dim != dim:
        raise ValidationError(f"direction has dimension {d.dim}, expected {dim}")
    return d


def _fd_step(x, power):
    return np.maximum(1.0, np.abs(x)) * _EPS**power


def fd_gradient(func, x):
    """Central-difference gradient, step ``max(1, |x_i|) * eps**(1/3)``."""
    x = np.asarray(x, dtype=float)
    h = _fd_step(x, 1.0 / 3.0)
    grad = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        grad[i] = (func(xp) - func(xm)) / (xp[i] - xm[i])
    return grad


def fd_hessian(func, x, grad=None):
    """Central-difference Hessian.

    With an analytic ``grad`` the Hessian is the symmetrized Jacobian of
    the gradient (step ``eps**(1/3)``); otherwise second differences of
    ``func`` with step ``eps**(1/4)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    hess = np.empty((n, n))
    if grad is not None:
        h = _fd_step(x, 1.0 / 3.0)
        for i in range(n):
            xp, xm = x.copy(), x.copy()
            xp[i] += h[i]
            xm[i] -= h[i]
            hess[i] = (np.asarray(grad(xp)) - np.asarray(grad(xm))) / (xp[i] - xm[i])
        return 0.5 * (hess + hess.T)
    h = _fd_step(x, 0.25)
    f0 = func(x)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                xp, xm = x.copy(), x.copy()
                xp[i] += h[i]
                xm[i] -= h[i]
                hess[i, i] = (func(xp) - 2.0 * f0 + func(xm)) / h[i] ** 2
            else:
                vals = []
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    xq = x.copy()
                    xq[i] += si * h[i]
                    xq[j] += sj * h[j]
                    vals.append(func(xq))
                hess[i, j] = hess[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h[i] * h[j])
    return hess


@dataclass(frozen=True)
class GraphFn:
    """Scalar function of ``n`` variables whose graph is the hypersurface.

    ``grad`` and ``hess`` are optional; missing derivatives fall back to
    central finite differences and ``provenance`` reports which is which.
    """

    func: Callable[[np.ndarray], float]
    n: int
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = check_int(self.n, "n", minimum=1)
        if n > MAX_DIM:
            raise ValidationError(f"n = {n} exceeds the supported maximum {MAX_DIM}")

    @property
    def provenance(self):
        return "analytic" if self.grad is not None and self.hess is not None else "finite_difference"

    def _point(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.n:
            raise ValidationError(f"point has {x.size} coordinates, graph arity is {self.n}")
        return x

    def evaluate(self, x):
        value = float(self.func(self._point(x)))
        if not np.isfinite(value):
            raise EvaluationError(f"{self.name or 'f'} is not finite at {x}")
        return value

    def gradient(self, x):
        x = self._point(x)
        g = np.asarray(self.grad(x), dtype=float) if self.grad is not None else fd_gradient(self.func, x)
        g = g.reshape(self.n)
        if not np.all(np.isfinite(g)):
            raise EvaluationError(f"gradient of {self.name or 'f'} is not finite at {x}")
        return g

    def hessian(self, x):
        x = self._point(x)
        if self.hess is not None:
            h = np.asarray(self.hess(x), dtype=float).reshape(self.n, self.n)
            h = 0.5 * (h + h.T)
        else:
            h = fd_hessian(self.func, x, self.grad)
        if not np.all(np.isfinite(h)):
            raise EvaluationError(f"Hessian of {self.name or 'f'} is not finite at {x}")
        return h

    def check_derivatives(self, points, grad_rtol=1e-6, hess_rtol=1e-4):
        """Compare analytic derivatives to finite differences at ``points``.

        Returns ``(max_grad_err, max_hess_err)`` as relative errors; raises
        :class:`ValidationError` when a tolerance is exceeded.
        """
        if self.provenance != "analytic":
            raise ValidationError("check_derivatives needs analytic grad and hess")
        worst_g = worst_h = 0.0
        for x in np.atleast_2d(points):
            g = self.gradient(x)
            g_fd = fd_gradient(self.func, x)
            worst_g = max(worst_g, np.max(np.abs(g - g_fd)) / max(1.0, np.max(np.abs(g))))
            h = self.hessian(x)
            h_fd = fd_hessian(self.func, x)
            worst_h = max(worst_h, np.max(np.abs(h - h_fd)) / max(1.0, np.max(np.abs(h))))
        if worst_g > grad_rtol or worst_h > hess_rtol:
            raise ValidationError(
                f"derivative self-check failed: gradient err {worst_g:.2e}, Hessian err {worst_h:.2e}"
            )
        return worst_g, worst_h


# -- jet-level kernels (broadcast over leading axes) --------------------------


def phi_from_gradient(grad):
    grad = np.asarray(grad, dtype=float)
    return np.sqrt(1.0 + np.sum(grad * grad, axis=-1))


def normal_from_gradient(grad):
    grad = np.asarray(grad, dtype=float)
    phi = phi_from_gradient(grad)[..., None]
    return np.concatenate([-grad, np.ones(grad.shape[:-1] + (1,))], axis=-1) / phi


def shape_operator_from_jet(grad, hess):
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    phi = phi_from_gradient(grad)[..., None, None]
    hp = np.einsum("...il,...l->...i", hess, grad)
    return hess / phi - hp[..., :, None] * grad[..., None, :] / phi**3


def n_mean_curvature_from_jet(grad, hess):
    """``n * H`` from gradient and Hessian, without nested differencing."""
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    phi = phi_from_gradient(grad)
    trace = np.trace(hess, axis1=-2, axis2=-1)
    quad = np.einsum("...i,...ij,...j->...", grad, hess, grad)
    return trace / phi - quad / phi**3


# -- public operations --------------------------------------------------------


def unit_normal(f, x):
    """Upward unit normal ``(-f_x1, ..., -f_xn, 1) / phi`` at ``x``."""
    return normal_from_gradient(f.gradient(x))


def first_fundamental(f, x):
    """Induced metric ``g_ij = delta_ij + f_i f_j``."""
    g = f.gradient(x)
    return np.eye(f.n) + np.outer(g, g)


def second_fundamental(f, x):
    """``h_ij = f_ij / phi``."""
    return f.hessian(x) / phi_from_gradient(f.gradient(x))


def shape_operator(f, x):
    """Matrix ``a_ij = sum_l h_il g^lj`` of the shape operator (not symmetric)."""
    grad = f.gradient(x)
    a = shape_operator_from_jet(grad, f.hessian(x))
    if not np.all(np.isfinite(a)):
        raise EvaluationError("shape operator is not finite")
    return a


def mean_curvature(f, x):
    return float(n_mean_curvature_from_jet(f.gradient(x), f.hessian(x))) / f.n


def cross_product_n(vectors):
    """Generalized cross product of ``n`` vectors in R^{n+1}.

    Component ``i`` is ``det(e_i, v_1, ..., v_n)``: the standard cross
    product in R^3, orthogonal to every input, zero iff the inputs are
    linearly dependent.
    """
    vecs = check_array(vectors, "vectors", ndim=2)
    n, dim = vecs.shape
    if dim != n + 1:
        raise ValidationError(f"cross product needs n vectors in R^(n+1); got {n} vectors in R^{dim}")
    out = np.empty(dim)
    for i in range(dim):
        minor = np.delete(vecs, i, axis=1)
        out[i] = (-1) ** i * (np.linalg.det(minor) if n else 1.0)
    return out
