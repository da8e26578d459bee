"""A small worked example: a 6 x 7 block given directly as p-categories.

Used by ``selftest --quick`` and the test suite. Rows are 0-based here.
"""

import numpy as np

TOY_CATEGORIES = np.array(
    [
        [3, 948, 35, 5, 14, 1, 24],
        [11, 49, 7, 2, 27, 224, 18],
        [13, 160, 20, 12, 4, 2, 8],
        [78, 2, 75, 3, 5, 25, 2],
        [17, 4, 142, 80, 15, 451, 31],
        [82, 71, 23, 67, 762, 5, 20],
    ]
)

# first seven cumulative columns (u = 1..7)
TOY_CUMULATIVE = np.array(
    [
        [1, 1, 2, 2, 3, 3, 3],
        [0, 1, 1, 1, 1, 1, 2],
        [0, 1, 1, 2, 2, 2, 2],
        [0, 2, 3, 3, 4, 4, 4],
        [0, 0, 0, 1, 1, 1, 1],
        [0, 0, 0, 0, 1, 1, 1],
    ]
)

TOY_SORTED_PREFIX = np.array(
    [
        [0, 0, 0, 0, 1, 1, 1],
        [0, 0, 0, 1, 2, 2, 2],
        [0, 1, 1, 2, 3, 3, 4],
        [0, 2, 2, 4, 5, 5, 6],
        [0, 3, 4, 6, 8, 8, 9],
        [1, 5, 7, 9, 12, 12, 13],
    ]
)

# row order (weakest evidence first) that produces the heuristic table below
TOY_HEURISTIC_ORDER = [4, 0, 5, 3, 1, 2]

TOY_ORDERED_PREFIX = np.array(
    [
        [0, 0, 0, 1, 1, 1, 1],
        [1, 1, 2, 3, 4, 4, 4],
        [1, 1, 2, 3, 5, 5, 5],
        [1, 3, 5, 6, 9, 9, 9],
        [1, 4, 6, 7, 10, 10, 11],
        [1, 5, 7, 9, 12, 12, 13],
    ]
)

# subproblem with row 0 forced in: forced row on top, then the rest
TOY_FORCED0_SORTED_PREFIX = np.array(
    [
        [1, 1, 2, 2, 3, 3, 3],
        [1, 1, 2, 2, 4, 4, 4],
        [1, 1, 2, 3, 5, 5, 5],
        [1, 2, 3, 4, 6, 6, 7],
        [1, 3, 4, 6, 8, 8, 9],
        [1, 5, 7, 9, 12, 12, 13],
    ]
)

# subproblem with row 0 removed
TOY_REMOVED0_SORTED_PREFIX = np.array(
    [
        [0, 0, 0, 0, 1, 1, 1],
        [0, 0, 0, 1, 2, 2, 2],
        [0, 1, 1, 2, 3, 3, 4],
        [0, 2, 2, 4, 5, 5, 6],
        [0, 4, 5, 7, 9, 9, 10],
    ]
)

TOY_ROW_BOUND = 3
TOY_ROW_HEURISTIC = 5
TOY_FORCED0_BOUND = 6
TOY_REMOVED0_HEURISTIC = 3
