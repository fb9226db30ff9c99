"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .exceptions import ValidationError

DOMAIN_EPS = 1e-9


def check_array(value, name="array", ndim=None, shape=None, min_size=0):
    """Convert ``value`` to a finite float ndarray, checking its shape."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot convert to a float array ({exc})") from None
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if shape is not None:
        for axis, (got, want) in enumerate(zip(arr.shape, shape)):
            if want is not None and got != want:
                raise ValidationError(f"{name}: axis {axis} has length {got}, expected {want}")
    if arr.size < min_size:
        raise ValidationError(f"{name}: needs at least {min_size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: contains non-finite values")
    return arr


def check_scalar(value, name, *, positive=False, nonzero=False, bounds=None):
    """Return ``value`` as a finite float after range checks."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name}: expected a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ValidationError(f"{name}: must be finite, got {value}")
    if positive and value <= 0:
        raise ValidationError(f"{name}: must be > 0, got {value}")
    if nonzero and value == 0:
        raise ValidationError(f"{name}: must be nonzero")
    if bounds is not None:
        lo, hi = bounds
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            raise ValidationError(f"{name}: {value} outside [{lo}, {hi}]")
    return value


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name}: expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name}: must be >= {minimum}, got {value}")
    return value


def check_interval(value, name):
    lo, hi = check_array(value, name, ndim=1, shape=(2,))
    if not lo < hi:
        raise ValidationError(f"{name}: expected lo < hi, got [{lo}, {hi}]")
    return float(lo), float(hi)


def check_orthonormal(vectors, name="vectors", atol=1e-10):
    vectors = np.atleast_2d(vectors)
    gram = vectors @ vectors.T
    err = np.max(np.abs(gram - np.eye(len(vectors)))) if len(vectors) else 0.0
    if err > atol:
        raise ValidationError(f"{name}: not orthonormal (max Gram deviation {err:.3e})")
    return vectors
