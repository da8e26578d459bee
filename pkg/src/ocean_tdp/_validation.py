"""Input validation helpers shared by the estimators and the CLI."""

import numbers

import numpy as np


class ValidationError(ValueError):
    """Raised for malformed user input (bad p-values, alpha, files, sets)."""


def check_alpha(alpha):
    if isinstance(alpha, bool) or not isinstance(alpha, numbers.Real):
        raise ValidationError(f"alpha must be a real number, got {alpha!r}")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def check_pvalues(pvalues, ndim=None, name="pvalues"):
    """Return ``pvalues`` as a float64 array after range and NaN checks."""
    arr = np.asarray(pvalues, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    bad = ~np.isfinite(arr) | (arr < 0.0) | (arr > 1.0)
    if bad.any():
        where = np.argwhere(bad)[0]
        raise ValidationError(
            f"{name} must be finite and in [0, 1]; found {arr[tuple(where)]!r} at index {tuple(int(i) for i in where)}"
        )
    return arr


def check_positive_int(value, name, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < 0 or (value == 0 and not allow_zero):
        raise ValidationError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value


def check_index_set(indices, bound, name):
    """Validate a collection of distinct indices in ``[0, bound)``; keeps order."""
    arr = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices)
    if arr.size == 0:
        raise ValidationError(f"{name} selection is empty")
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError(f"{name} must be a 1-d collection of integer indices")
    if arr.min() < 0 or arr.max() >= bound:
        raise ValidationError(f"{name} indices must lie in [0, {bound})")
    if np.unique(arr).size != arr.size:
        raise ValidationError(f"{name} contains duplicate indices")
    return arr.astype(np.intp)
