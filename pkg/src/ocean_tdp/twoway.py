"""Row- and column-TDP lower bounds for two-way selections.

The row-TDP numerator bound for ``S = S_A x S_B`` is ``|S_A|`` minus the
largest number of rows ``I`` whose block ``I x S_B`` the local Simes test
does not reject. Finding that maximum is a subset search; it is bracketed
cheaply from the per-row cumulative category counts (a certified lower
bound ``B`` from column-sorted prefix sums, a witness-based upper bound
``H`` from prefix sums in one concrete row order) and then tightened by
depth-first branch-and-bound over forced/removed rows.

Column-TDP is the same computation on the transposed block.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import ValidationError, check_index_set, check_positive_int
from .closed_testing import pair_discoveries

DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True, eq=False)
class TwoWaySelection:
    """Row indices ``S_A`` and column indices ``S_B`` of a sub-matrix."""

    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def of(cls, rows, cols, state=None):
        p = state.p if state is not None else np.iinfo(np.intp).max
        q = state.q if state is not None else np.iinfo(np.intp).max
        return cls(check_index_set(rows, p, "rows"), check_index_set(cols, q, "cols"))

    @classmethod
    def full(cls, state):
        return cls(np.arange(state.p), np.arange(state.q))

    def transposed(self):
        return TwoWaySelection(self.cols, self.rows)

    @property
    def shape(self):
        return (len(self.rows), len(self.cols))

    @property
    def size(self):
        return len(self.rows) * len(self.cols)

    def __eq__(self, other):
        return (
            isinstance(other, TwoWaySelection)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    __hash__ = None


@dataclass(frozen=True)
class TdpBracket:
    """``lower <= exact row (or column) discoveries bound <= upper``."""

    lower: int
    upper: int
    exact: bool
    iterations: int
    n: int

    @property
    def tdp_lower(self):
        return Fraction(self.lower, self.n)

    @property
    def tdp_upper(self):
        return Fraction(self.upper, self.n)


@dataclass(frozen=True)
class TdpReport:
    pair_d: int
    n_pairs: int
    row: TdpBracket
    col: TdpBracket

    @property
    def pair_tdp(self):
        return Fraction(self.pair_d, self.n_pairs)

    @property
    def row_tdp_lower(self):
        return self.row.tdp_lower

    @property
    def col_tdp_lower(self):
        return self.col.tdp_lower


@dataclass
class CumulativeCategoryTable:
    """Per-row counts ``c[j, k-1] = |{cols with category <= k}|``.

    Only the free rows of a subproblem are stored in ``counts``; forced
    rows are summed into ``forced_offset`` and ``n_forced``. ``n_total``
    is ``|S_A|`` of the original selection, so bounds come out on the
    row-discovery scale.
    """

    counts: np.ndarray
    n_cols: int
    n_total: int
    forced_offset: np.ndarray = None
    n_forced: int = 0
    rows: np.ndarray = None

    def __post_init__(self):
        if self.forced_offset is None:
            self.forced_offset = np.zeros(self.width, dtype=np.int64)
        if self.rows is None:
            self.rows = np.arange(self.counts.shape[0])

    @property
    def width(self):
        return self.counts.shape[1]

    @property
    def n_free(self):
        return self.counts.shape[0]


def table_width(categories):
    """Number of cumulative columns worth keeping for this block.

    Past ``min(|S|, max category)`` nothing changes. Tighter still: a
    column ``k`` can only ever trigger if the whole block has at least
    ``k`` categories ``<= k``, so the width stops at the last such ``k``
    (0 when no ``k`` qualifies, i.e. the block is Simes-negative).
    """
    cats = np.asarray(categories).ravel()
    limit = int(min(cats.size, cats.max()))
    counts = np.cumsum(np.bincount(np.minimum(cats, limit + 1).astype(np.intp), minlength=limit + 2)[1 : limit + 1])
    hits = np.flatnonzero(counts >= np.arange(1, limit + 1))
    return int(hits[-1]) + 1 if hits.size else 0


def cumulative_counts(block, width):
    """``(rows, width)`` matrix of per-row counts of categories ``<= k``."""
    block = np.asarray(block)
    r = block.shape[0]
    stride = width + 2
    clipped = np.minimum(block, width + 1).astype(np.intp)
    flat = clipped + (np.arange(r, dtype=np.intp) * stride)[:, None]
    hist = np.bincount(flat.ravel(), minlength=r * stride).reshape(r, stride)
    return np.cumsum(hist[:, 1 : width + 1], axis=1, dtype=np.int64)


def selection_block(state, sel):
    return state.categories[np.ix_(sel.rows, sel.cols)]


def build_cumulative_table(state, sel, width=None):
    """Cumulative category table of ``sel`` with every row free."""
    if sel.size == 0:
        raise ValidationError("empty selection")
    block = selection_block(state, sel)
    if width is None:
        width = table_width(block)
    return CumulativeCategoryTable(
        counts=cumulative_counts(block, width),
        n_cols=len(sel.cols),
        n_total=len(sel.rows),
        rows=np.asarray(sel.rows),
    )


def findj(table):
    """Largest ``j`` whose row ``j`` (1-based) has ``t[j, k] < k`` for all ``k``.

    Rows above it trigger nowhere only if the table is non-decreasing down
    each column, which holds for all prefix-sum tables used here. Returns
    0 when row 1 already triggers. Staircase walk from the bottom-left
    corner: up when the entry triggers, right otherwise; ``O(r + l)``.
    """
    t = np.asarray(table)
    r, l = t.shape
    j, k = r, 1
    while k <= l and j >= 1:
        if t[j - 1, k - 1] >= k:
            j -= 1
        else:
            k += 1
    return j


def findj_naive(table):
    t = np.asarray(table)
    r, l = t.shape
    ks = np.arange(1, l + 1)
    best = 0
    for j in range(1, r + 1):
        if np.all(t[j - 1] < ks):
            best = j
    return best


def sorted_prefix_table(table):
    """``w``: each column sorted ascending, then summed down, plus offset."""
    w = np.cumsum(np.sort(table.counts, axis=0), axis=0)
    return w + table.forced_offset


def ordered_prefix_table(table, ordering):
    """``v``: rows summed down in ``ordering`` (positions into the table)."""
    order = np.asarray(ordering, dtype=np.intp)
    if order.shape != (table.n_free,) or not np.array_equal(np.sort(order), np.arange(table.n_free)):
        raise ValidationError("ordering must be a permutation of the table's free rows")
    return np.cumsum(table.counts[order], axis=0) + table.forced_offset


def _bracket_from_prefix(prefix, offset, n_forced, n_total):
    # prepend the forced-only row so an already-rejected forced set is caught
    scan = np.vstack([offset[None, :], prefix])
    j = findj(scan)
    if j == 0:
        # no admissible subset in this subproblem
        return n_total
    return n_total - (n_forced + j - 1)


def shortcut_bound(table):
    """Certified lower bound ``B`` on the row-discovery bound.

    ``w[j, k]`` is the smallest possible count ``c_{J,k}`` over all row
    subsets of size ``j``, so once a ``w`` row triggers every subset that
    large is rejected.
    """
    return _bracket_from_prefix(
        sorted_prefix_table(table), table.forced_offset, table.n_forced, table.n_total
    )


def shortcut_heuristic(table, ordering=None, scores=None):
    """Upper bracket ``H`` from prefix sums in one row order.

    Every non-triggering prefix is a concrete unrejected row subset, so the
    result is valid for any ordering. Default order: weakest rows first,
    i.e. descending ``scores`` (ties by ascending position).
    """
    if ordering is None:
        if scores is None:
            raise ValidationError("shortcut_heuristic needs an ordering or row scores")
        ordering = weakest_first(scores)
    return _bracket_from_prefix(
        ordered_prefix_table(table, ordering), table.forced_offset, table.n_forced, table.n_total
    )


def row_scores(block):
    """Surrogate evidence score per row: ``min_k g_(k) / k`` over its sorted categories.

    Smaller means stronger evidence. This is a stand-in ordering key for an
    adjusted p-value of each row; it is only used to order and branch, never
    for validity.
    """
    block = np.asarray(block)
    ranked = np.sort(block, axis=1).astype(np.float64)
    return np.min(ranked / np.arange(1, block.shape[1] + 1), axis=1)


def row_score(state, row, cols):
    return float(row_scores(state.categories[row : row + 1, np.asarray(cols)])[0])


def weakest_first(scores):
    scores = np.asarray(scores)
    return np.lexsort((np.arange(scores.size), -scores))


def strongest_first(scores):
    scores = np.asarray(scores)
    return np.lexsort((np.arange(scores.size), scores))


def shortcut(table, scores, ordering=None):
    """(B, H) for one table."""
    return shortcut_bound(table), shortcut_heuristic(table, ordering=ordering, scores=scores)


@dataclass
class Subproblem:
    """Row subsets containing all of ``forced`` and none of ``removed``."""

    forced: frozenset
    removed: frozenset
    parent_bound: int
    free: np.ndarray = field(repr=False, default=None)
    offset: np.ndarray = field(repr=False, default=None)
    bound: int = None


class _Search:
    """Bookkeeping shared by all nodes of one branch-and-bound run.

    The root counts are column-sorted once; a node only differs from the
    root by which rows are still free and by the summed forced rows, so its
    ``w`` table is read off the root's sorted columns through a mask.
    """

    def __init__(self, block, ordering=None, width=None):
        self.block = np.asarray(block)
        self.n_total, self.n_cols = self.block.shape
        self.width = table_width(self.block) if width is None else width
        self.counts = cumulative_counts(self.block, self.width)
        self.col_order = np.argsort(self.counts, axis=0, kind="stable")
        self.sorted_counts = np.take_along_axis(self.counts, self.col_order, axis=0)
        self.scores = row_scores(self.block)
        if ordering is None:
            self.heuristic_order = weakest_first(self.scores)
        else:
            self.heuristic_order = np.asarray(ordering, dtype=np.intp)
            if not np.array_equal(np.sort(self.heuristic_order), np.arange(self.n_total)):
                raise ValidationError("ordering must be a permutation of the selection rows")
        self.branch_order = strongest_first(self.scores)

    def root(self):
        return Subproblem(
            forced=frozenset(),
            removed=frozenset(),
            parent_bound=0,
            free=np.ones(self.n_total, dtype=bool),
            offset=np.zeros(self.width, dtype=np.int64),
        )

    def table(self, node):
        return CumulativeCategoryTable(
            counts=self.counts[node.free],
            n_cols=self.n_cols,
            n_total=self.n_total,
            forced_offset=node.offset,
            n_forced=len(node.forced),
            rows=np.flatnonzero(node.free),
        )

    def bound(self, node):
        if node.bound is None:
            n_free = int(node.free.sum())
            mask = node.free[self.col_order]
            kept = self.sorted_counts.T[mask.T].reshape(self.width, n_free).T
            w = np.cumsum(kept, axis=0) + node.offset
            node.bound = _bracket_from_prefix(w, node.offset, len(node.forced), self.n_total)
        return node.bound

    def heuristic(self, node):
        order = self.heuristic_order[node.free[self.heuristic_order]]
        v = np.cumsum(self.counts[order], axis=0) + node.offset
        return _bracket_from_prefix(v, node.offset, len(node.forced), self.n_total)

    def split(self, node, parent_bound):
        candidates = self.branch_order[node.free[self.branch_order]]
        row = int(candidates[0])
        free = node.free.copy()
        free[row] = False
        forced = Subproblem(
            forced=node.forced | {row},
            removed=node.removed,
            parent_bound=parent_bound,
            free=free,
            offset=node.offset + self.counts[row],
        )
        removed = Subproblem(
            forced=node.forced,
            removed=node.removed | {row},
            parent_bound=parent_bound,
            free=free,
            offset=node.offset,
        )
        return forced, removed


def branch_and_bound_block(block, max_iter=DEFAULT_MAX_ITER, ordering=None, trace=None):
    """Branch-and-bound on a raw ``(|S_A|, |S_B|)`` category block.

    ``max_iter=None`` runs until the queue is empty (exact result).
    ``trace``, if a list, receives one dict per processed subproblem.
    """
    if max_iter is not None:
        max_iter = check_positive_int(max_iter, "max_iter", allow_zero=True)
    block = np.asarray(block)
    if block.ndim != 2 or block.size == 0:
        raise ValidationError("empty selection")
    search = _Search(block, ordering=ordering)
    root = search.root()
    best = search.heuristic(root)
    if search.bound(root) >= best:
        return TdpBracket(best, best, True, 0, search.n_total)

    queue = [root]
    it = 0
    while queue and (max_iter is None or it < max_iter):
        it += 1
        node = queue.pop()
        lower = max(search.bound(node), node.parent_bound)
        record = None
        if trace is not None:
            record = {
                "iteration": it,
                "forced": sorted(node.forced),
                "removed": sorted(node.removed),
                "bound": lower,
                "heuristic": None,
                "pruned": True,
            }
            trace.append(record)
        if best <= lower:
            continue
        h = search.heuristic(node)
        best = min(best, h)
        if record is not None:
            record["heuristic"] = h
            record["pruned"] = False
        if best <= lower or not node.free.any():
            continue
        queue.extend(search.split(node, lower))

    lower = best
    for node in queue:
        lower = min(lower, max(search.bound(node), node.parent_bound))
    return TdpBracket(lower, best, lower == best, it, search.n_total)


def branch_and_bound(state, sel, max_iter=DEFAULT_MAX_ITER, ordering=None, trace=None):
    return branch_and_bound_block(selection_block(state, sel), max_iter, ordering=ordering, trace=trace)


def row_tdp(state, sel, max_iter=DEFAULT_MAX_ITER):
    return branch_and_bound(state, sel, max_iter)


def col_tdp(state, sel, max_iter=DEFAULT_MAX_ITER):
    return branch_and_bound_block(selection_block(state, sel).T, max_iter)


def query(state, sel, max_iter=DEFAULT_MAX_ITER):
    """Pair-, row- and column-TDP bounds for one selection.

    All three hold simultaneously at level ``1 - alpha``; no further
    multiplicity correction is needed to report them together.
    """
    if sel.size == 0:
        raise ValidationError("empty selection")
    block = selection_block(state, sel)
    return TdpReport(
        pair_d=pair_discoveries(block),
        n_pairs=block.size,
        row=branch_and_bound_block(block, max_iter),
        col=branch_and_bound_block(block.T, max_iter),
    )
