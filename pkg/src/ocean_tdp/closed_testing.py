"""Simes-based closed-testing primitives.

Everything downstream works on integer p-categories rather than raw
p-values: with the global constant ``h`` fixed, a p-value ``p`` falls in
category ``min{r >= 1 : h * p <= r * alpha}``, and a set of hypotheses is
rejected by the local Simes test exactly when, for some ``u``, at least
``u`` of its categories are ``<= u``.

Validity of the resulting bounds assumes positive dependence among the
p-values (as for Benjamini-Hochberg). This cannot be checked from data
and is not enforced.
"""

import numpy as np

from ._validation import check_alpha, check_pvalues, ValidationError

#: Largest category cap that still fits a 32-bit unsigned entry.
MAX_CAP = 2**32 - 1


def category_cap(m):
    """Sentinel category for ``m`` hypotheses.

    Any category above ``m`` can never be counted (a set has at most ``m``
    members), so all of them collapse to ``min(m, 2**32 - 2) + 1``.
    """
    return min(int(m), MAX_CAP - 1) + 1


def category_dtype(cap):
    """Smallest unsigned integer dtype holding values up to ``cap``."""
    for dt in (np.uint8, np.uint16, np.uint32):
        if cap <= np.iinfo(dt).max:
            return np.dtype(dt)
    raise ValidationError(f"category cap {cap} does not fit in 32 bits")


def _h_valid(sorted_p, k, alpha):
    # r = m - k hypotheses kept: need r * p_(k + j) > j * alpha for j = 1..r
    r = sorted_p.size - k
    if r == 0:
        return True
    j = np.arange(1, r + 1, dtype=np.float64)
    return bool(np.all(r * sorted_p[k:] > j * alpha))


def compute_h(pvalues, alpha):
    """The calibration constant ``h`` for a collection of p-values.

    ``h`` is the largest ``r`` in ``0..m`` such that
    ``r * p_(m - r + j) > j * alpha`` for every ``j = 1..r``.

    If the condition holds for ``r`` it holds for every smaller ``r``
    (dropping the smallest kept p-value only lowers the threshold line),
    so the largest valid ``r`` is found by bisection over ``O(log m)``
    vectorised checks after one sort.
    """
    alpha = check_alpha(alpha)
    p = np.sort(check_pvalues(pvalues).ravel(), kind="stable")
    m = p.size
    # smallest k = m - r that is valid; k = m (r = 0) always is
    lo, hi = 0, m
    while lo < hi:
        mid = (lo + hi) // 2
        if _h_valid(p, mid, alpha):
            hi = mid
        else:
            lo = mid + 1
    return m - lo


def categorize(p, h, alpha, cap):
    """p-category of each entry of ``p``, clamped to ``cap``.

    Works on scalars and arrays alike. The returned categories satisfy
    ``h * p <= r * alpha`` and ``h * p > (r - 1) * alpha`` exactly in
    floating point, so they agree with a literal evaluation of the
    definition. With ``h = 0`` every category is 1.
    """
    alpha = check_alpha(alpha)
    if h < 0:
        raise ValidationError(f"h must be non-negative, got {h}")
    if cap < 1:
        raise ValidationError(f"cap must be positive, got {cap}")
    scalar = np.ndim(p) == 0
    p = check_pvalues(np.atleast_1d(p), name="p")
    hp = float(h) * p
    # clip before the integer cast: h * p / alpha can far exceed any cap
    r = np.ceil(np.minimum(hp / alpha, float(cap)))
    r = np.maximum(r, 1.0)
    # repair off-by-one from rounding in the division
    low = (r > 1.0) & (hp <= (r - 1.0) * alpha)
    r[low] -= 1.0
    high = (r < cap) & (hp > r * alpha)
    r[high] += 1.0
    out = np.minimum(r, cap).astype(category_dtype(cap))
    return out[0] if scalar else out


def _counts_upto(categories, limit):
    """``counts[u - 1] = |{g <= u}|`` for ``u = 1..limit``."""
    cats = np.asarray(categories).ravel()
    clipped = np.minimum(cats, limit + 1).astype(np.intp)
    return np.cumsum(np.bincount(clipped, minlength=limit + 2)[1 : limit + 1])


def simes_positive(categories):
    """True when the local Simes test rejects the set with these categories.

    That is, when some ``u >= 1`` has at least ``u`` categories ``<= u``.
    Only ``u <= min(|T|, max category)`` needs checking: counts never
    exceed ``|T|`` and stop growing past the largest category.
    """
    cats = np.asarray(categories).ravel()
    if cats.size == 0:
        raise ValidationError("simes_positive needs a non-empty set")
    limit = int(min(cats.size, cats.max()))
    counts = _counts_upto(cats, limit)
    return bool(np.any(counts >= np.arange(1, limit + 1)))


def pair_discoveries(categories):
    """Lower confidence bound on the number of true discoveries in a set.

    ``max over u in 1..|S| of 1 - u + |{g <= u}|``; the ``u = 1`` term is
    already non-negative so the result is never below zero.
    """
    cats = np.asarray(categories).ravel()
    if cats.size == 0:
        raise ValidationError("pair_discoveries needs a non-empty set")
    limit = int(min(cats.size, cats.max()))
    counts = _counts_upto(cats, limit)
    return int(np.max(1 - np.arange(1, limit + 1) + counts))
