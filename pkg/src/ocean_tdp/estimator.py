"""scikit-learn style front ends.

``PearsonAssociation`` turns two sample-aligned omics into a p-value
matrix; ``TwoWayTDP`` is fitted on a p-value matrix (the expensive,
once-per-omics-pair preparation) and then answers any number of TDP
queries for two-way feature sets.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ValidationError, check_alpha, check_positive_int, check_pvalues
from .association import AssociationMatrix, Dataset, build_pvalue_matrix, resolve_selection
from .results import scan
from .state import PreparedState, prepare
from .twoway import DEFAULT_MAX_ITER, TwoWaySelection, query


class PearsonAssociation(TransformerMixin, BaseEstimator):
    """Pairwise Pearson p-values against a reference omic.

    ``fit(A)`` stores omic A (samples x p). ``transform(B)`` returns the
    ``(p, q)`` matrix of two-sided p-values against omic B (samples x q),
    with samples in the same order.

    >>> import numpy as np
    >>> a = np.array([[1.0], [2.0], [3.0], [4.0]])
    >>> PearsonAssociation().fit(a).transform(2 * a + 1)
    array([[0.]])
    """

    def __init__(self, block_size=512):
        self.block_size = block_size

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=3)
        self.reference_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        X = check_array(X, dtype=np.float64, ensure_min_samples=3)
        if X.shape[0] != self.reference_.shape[0]:
            raise ValidationError(
                f"X has {X.shape[0]} samples, the fitted reference has {self.reference_.shape[0]}"
            )
        samples = tuple(range(X.shape[0]))
        a = Dataset(samples, tuple(range(self.reference_.shape[1])), self.reference_)
        b = Dataset(samples, tuple(range(X.shape[1])), X)
        return build_pvalue_matrix(a, b, block_size=self.block_size).pvalues


class TwoWayTDP(BaseEstimator):
    """Simultaneous pair-, row- and column-TDP lower bounds.

    Parameters
    ----------
    alpha : float
        Simultaneous error level; bounds hold jointly with probability
        at least ``1 - alpha`` over all selections.
    max_iter : int or None
        Branch-and-bound budget per row/column query (``0`` = shortcut
        bracket only, ``None`` = run to convergence).

    Attributes
    ----------
    state_ : PreparedState
    h_ : int
    """

    def __init__(self, alpha=0.05, max_iter=DEFAULT_MAX_ITER):
        self.alpha = alpha
        self.max_iter = max_iter

    def _check_params(self):
        check_alpha(self.alpha)
        if self.max_iter is not None:
            check_positive_int(self.max_iter, "max_iter", allow_zero=True)

    def fit(self, X, y=None, row_ids=None, col_ids=None):
        """Prepare from a ``(p, q)`` p-value matrix or an :class:`AssociationMatrix`."""
        self._check_params()
        if isinstance(X, AssociationMatrix):
            assoc = X
        else:
            pv = check_pvalues(check_array(X, dtype=np.float64, ensure_all_finite=False), ndim=2, name="X")
            assoc = AssociationMatrix(
                pv,
                row_ids if row_ids is not None else tuple(f"r{i}" for i in range(pv.shape[0])),
                col_ids if col_ids is not None else tuple(f"c{i}" for i in range(pv.shape[1])),
            )
        self._set_state(prepare(assoc, self.alpha))
        return self

    @classmethod
    def from_state(cls, state, max_iter=DEFAULT_MAX_ITER):
        """Wrap an already prepared (e.g. loaded) state; ``alpha`` comes from it."""
        est = cls(alpha=state.alpha, max_iter=max_iter)
        est._set_state(state)
        return est

    def _set_state(self, state):
        if not isinstance(state, PreparedState):
            raise ValidationError("expected a PreparedState")
        self.state_ = state
        self.h_ = state.h
        self.n_features_in_ = state.q

    def _selection(self, rows, cols):
        state = self.state_
        if isinstance(rows, TwoWaySelection):
            return rows
        if _is_id_list(rows) or _is_id_list(cols):
            return resolve_selection(state, list(rows) if _is_id_list(rows) else _ids(state.row_ids, rows),
                                     list(cols) if _is_id_list(cols) else _ids(state.col_ids, cols))
        return TwoWaySelection.of(rows, cols, state)

    def query(self, rows, cols=None):
        """:class:`TdpReport` for one selection (indices, ids, or a TwoWaySelection)."""
        check_is_fitted(self, "state_")
        return query(self.state_, self._selection(rows, cols), self.max_iter)

    def transform(self, selections):
        """Lower bounds ``[pair, row, col]`` (as floats) for each ``(rows, cols)`` pair."""
        check_is_fitted(self, "state_")
        out = np.empty((len(selections), 3), dtype=np.float64)
        for i, sel in enumerate(selections):
            rep = self.query(*sel) if isinstance(sel, tuple) else self.query(sel)
            out[i] = (float(rep.pair_tdp), float(rep.row_tdp_lower), float(rep.col_tdp_lower))
        return out

    def scan(self, row_sets, col_sets, row_names=None, col_names=None, threads=None):
        """Result rows for every pair of named sets, sorted by name."""
        check_is_fitted(self, "state_")
        return list(scan(self.state_, row_sets, col_sets, row_names, col_names, self.max_iter, threads))


def _is_id_list(x):
    return not isinstance(x, (str, np.ndarray)) and len(x) > 0 and all(isinstance(v, str) for v in x)


def _ids(table, indices):
    return [table[int(i)] for i in indices]
