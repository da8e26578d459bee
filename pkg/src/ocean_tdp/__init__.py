"""Simultaneous true-discovery-proportion bounds for two-way feature sets."""

from ._validation import ValidationError
from .association import (
    AssociationMatrix,
    Dataset,
    build_pvalue_matrix,
    parse_gmt,
    parse_matrix,
    pearson_pvalue,
    resolve_selection,
)
from .closed_testing import categorize, compute_h, pair_discoveries, simes_positive
from .estimator import PearsonAssociation, TwoWayTDP
from .state import PreparedState, load, prepare, save
from .twoway import (
    TdpBracket,
    TdpReport,
    TwoWaySelection,
    branch_and_bound,
    col_tdp,
    query,
    row_tdp,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationMatrix",
    "Dataset",
    "PearsonAssociation",
    "PreparedState",
    "TdpBracket",
    "TdpReport",
    "TwoWaySelection",
    "TwoWayTDP",
    "ValidationError",
    "branch_and_bound",
    "build_pvalue_matrix",
    "categorize",
    "col_tdp",
    "compute_h",
    "load",
    "pair_discoveries",
    "parse_gmt",
    "parse_matrix",
    "pearson_pvalue",
    "prepare",
    "query",
    "resolve_selection",
    "row_tdp",
    "save",
    "simes_positive",
]
