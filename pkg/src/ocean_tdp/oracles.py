"""Brute-force reference implementations and simulation harness.

These evaluate each definition literally, with no shortcuts shared with
the fast paths, so that disagreements on small inputs point at a bug
rather than at a common mistake. They are quadratic or exponential and
guarded by size limits.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_alpha, check_pvalues

MAX_ORACLE_H = 5000
MAX_ORACLE_ROWS = 20


def oracle_h(pvalues, alpha):
    """Largest ``r`` with ``r * p_(m-r+j) > j * alpha`` for all ``j``, by scanning every ``r``."""
    alpha = check_alpha(alpha)
    p = np.sort(check_pvalues(pvalues).ravel())
    m = p.size
    if m > MAX_ORACLE_H:
        raise ValidationError(f"oracle_h is quadratic; m={m} exceeds {MAX_ORACLE_H}")
    for r in range(m, 0, -1):
        ok = True
        for j in range(1, r + 1):
            if not r * p[m - r + j - 1] > j * alpha:
                ok = False
                break
        if ok:
            return r
    return 0


def oracle_pair_discoveries(categories, set_size=None):
    """``max_u 1 - u + |{g <= u}|`` over ``u = 1..|S|``, counted directly."""
    cats = np.asarray(categories).ravel().astype(np.int64)
    size = cats.size if set_size is None else int(set_size)
    if size != cats.size:
        raise ValidationError(f"set_size {size} does not match {cats.size} categories")
    u = np.arange(1, size + 1)
    counts = (cats[None, :] <= u[:, None]).sum(axis=1)
    return int(max(0, np.max(1 - u + counts)))


def _subset_counts(per_row):
    """Row-sum of ``per_row`` for every subset, indexed by bitmask."""
    r, width = per_row.shape
    sums = np.zeros((1 << r, width), dtype=np.int64)
    for mask in range(1, 1 << r):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + per_row[low.bit_length() - 1]
    return sums


def oracle_row_discoveries_block(block):
    """``|S_A| - max{|I| : d(I x S_B) = 0}`` by enumerating every row subset ``I``."""
    block = np.asarray(block).astype(np.int64)
    r, c = block.shape
    if r > MAX_ORACLE_ROWS:
        raise ValidationError(f"oracle enumerates 2^|S_A| subsets; |S_A|={r} exceeds {MAX_ORACLE_ROWS}")
    u = np.arange(1, r * c + 1)
    # per_row[j, u-1] = number of categories <= u in row j
    per_row = (block[:, :, None] <= u[None, None, :]).sum(axis=1)
    sums = _subset_counts(per_row)
    sizes = np.array([bin(mask).count("1") for mask in range(1 << r)])
    # d(I x S_B) = max over u <= |I||S_B| of 1 - u + count; zero iff every term <= 0
    within = u[None, :] <= (sizes * c)[:, None]
    d_bar = np.where(within, 1 - u[None, :] + sums, 0).max(axis=1)
    largest_null = sizes[d_bar <= 0].max()
    return int(r - largest_null)


def oracle_row_discoveries(state, sel):
    return oracle_row_discoveries_block(state.categories[np.ix_(sel.rows, sel.cols)])


def oracle_col_discoveries(state, sel):
    return oracle_row_discoveries_block(state.categories[np.ix_(sel.rows, sel.cols)].T)


def random_block(rng, max_rows=10, max_cols=8, max_category=20):
    """Random category block with uniform shape and uniform categories."""
    r = int(rng.integers(1, max_rows + 1))
    c = int(rng.integers(1, max_cols + 1))
    return rng.integers(1, max_category + 1, size=(r, c))


def random_pvalues(rng, max_m=2000):
    """Uniform p-values with a random share of strong signals mixed in.

    About one draw in ten is all-signal (every p below ``0.01 / m``), which
    forces ``h = 0``.
    """
    m = int(rng.integers(1, max_m + 1))
    p = rng.uniform(size=m)
    if rng.uniform() < 0.1:
        return p * (0.01 / m)
    n_signal = int(rng.integers(0, m + 1)) if rng.uniform() < 0.5 else 0
    if n_signal:
        p[:n_signal] = rng.uniform(size=n_signal) ** rng.uniform(2.0, 12.0)
    return rng.permutation(p)


@dataclass(frozen=True)
class SimulationResult:
    reps: int
    alpha: float
    errors: int
    fwer: float
    std_error: float
    mean_pair_tdp: float
    mean_row_tdp: float
    mean_col_tdp: float
    detected: int = 0
    power: float = float("nan")


def _correlated_pair(rng, n, p, q, planted, rho):
    a = rng.standard_normal((n, p))
    b = rng.standard_normal((n, q))
    if planted:
        load = np.sqrt(rho)
        z = rng.standard_normal((n, 1))
        a[:, :planted] = load * z + np.sqrt(1.0 - rho) * a[:, :planted]
        b[:, :planted] = load * z + np.sqrt(1.0 - rho) * b[:, :planted]
    return a, b


def null_simulation(n=50, p=40, q=50, alpha=0.05, reps=500, seed=0, planted=0, rho=0.8, max_iter=1000):
    """Monte-Carlo check of simultaneous error control.

    Each replicate draws two independent standard-normal omics (so every
    pair is null), runs the full pipeline and records whether any of the
    pair/row/column lower bounds for the whole matrix is positive. With
    ``planted > 0`` the first ``planted`` features of each omic share a
    latent factor (pairwise correlation ``rho``); then ``errors`` counts
    positives on the null-only block ``rows >= planted x cols >= planted``
    and ``detected`` counts replicates whose planted block gets a positive
    row-TDP bound.

    Replicate ``i`` uses ``np.random.default_rng([seed, i])`` so results do
    not depend on execution order.
    """
    from .association import Dataset, build_pvalue_matrix
    from .state import prepare
    from .twoway import TwoWaySelection, query

    alpha = check_alpha(alpha)
    if planted and (planted >= p or planted >= q):
        raise ValidationError("planted block must leave null rows and columns")
    samples = tuple(f"s{i}" for i in range(n))
    a_ids = tuple(f"a{i}" for i in range(p))
    b_ids = tuple(f"b{i}" for i in range(q))
    errors = detected = 0
    pair_sum = row_sum = col_sum = 0.0
    for i in range(reps):
        rng = np.random.default_rng([seed, i])
        a, b = _correlated_pair(rng, n, p, q, planted, rho)
        assoc = build_pvalue_matrix(Dataset(samples, a_ids, a), Dataset(samples, b_ids, b))
        state = prepare(assoc, alpha)
        if planted:
            null_sel = TwoWaySelection(np.arange(planted, p), np.arange(planted, q))
        else:
            null_sel = TwoWaySelection.full(state)
        rep = query(state, null_sel, max_iter)
        if rep.pair_d > 0 or rep.row.lower > 0 or rep.col.lower > 0:
            errors += 1
        pair_sum += float(rep.pair_tdp)
        row_sum += float(rep.row_tdp_lower)
        col_sum += float(rep.col_tdp_lower)
        if planted:
            signal = TwoWaySelection(np.arange(planted), np.arange(planted))
            if query(state, signal, max_iter).row.lower > 0:
                detected += 1
    fwer = errors / reps
    return SimulationResult(
        reps=reps,
        alpha=alpha,
        errors=errors,
        fwer=fwer,
        std_error=float(np.sqrt(alpha * (1 - alpha) / reps)),
        mean_pair_tdp=pair_sum / reps,
        mean_row_tdp=row_sum / reps,
        mean_col_tdp=col_sum / reps,
        detected=detected,
        power=detected / reps if planted else float("nan"),
    )
