"""SVG heatmaps of TDP values over (row set, column set) pairs.

Rows and columns are ordered by average-linkage clustering on Euclidean
distances between their TDP vectors. This is a display choice only.
"""

from xml.sax.saxutils import escape, quoteattr

import numpy as np
from scipy.cluster.hierarchy import leaves_list, linkage
from scipy.spatial.distance import pdist

from ._validation import ValidationError
from .results import METRIC_COLUMN

CELL = 22
LABEL_PAD = 6
CHAR_W = 7
LOW = (255, 255, 255)
HIGH = (8, 48, 107)
MISSING = "#cccccc"


def color(value):
    """Linear white-to-blue ramp over [0, 1]."""
    t = min(max(float(value), 0.0), 1.0)
    rgb = [round(lo + (hi - lo) * t) for lo, hi in zip(LOW, HIGH)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def pivot(records, metric):
    if metric not in METRIC_COLUMN:
        raise ValidationError(f"unknown metric {metric!r} (choose from {', '.join(METRIC_COLUMN)})")
    if not records:
        raise ValidationError("no results to plot")
    column = METRIC_COLUMN[metric]
    row_names = sorted({r["row_set"] for r in records})
    col_names = sorted({r["col_set"] for r in records})
    ri = {n: i for i, n in enumerate(row_names)}
    ci = {n: i for i, n in enumerate(col_names)}
    grid = np.full((len(row_names), len(col_names)), np.nan)
    for rec in records:
        grid[ri[rec["row_set"]], ci[rec["col_set"]]] = rec[column]
    return row_names, col_names, grid


def cluster_order(matrix):
    """Leaf order of an average-linkage tree over the rows of ``matrix``.

    Inputs arrive sorted by name, so ties resolve by name.
    """
    if matrix.shape[0] < 3:
        return np.arange(matrix.shape[0])
    filled = np.nan_to_num(matrix, nan=0.0)
    return leaves_list(linkage(pdist(filled, metric="euclidean"), method="average"))


def render_svg(records, metric, title=None):
    row_names, col_names, grid = pivot(records, metric)
    rorder = cluster_order(grid)
    corder = cluster_order(grid.T)
    row_names = [row_names[i] for i in rorder]
    col_names = [col_names[i] for i in corder]
    grid = grid[np.ix_(rorder, corder)]

    left = LABEL_PAD * 2 + CHAR_W * max(len(n) for n in row_names)
    top = LABEL_PAD * 2 + CHAR_W * max(len(n) for n in col_names) + (20 if title else 0)
    width = left + CELL * len(col_names) + LABEL_PAD
    height = top + CELL * len(row_names) + LABEL_PAD

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" data-metric="{metric}">',
    ]
    if title:
        out.append(f'<text x="{LABEL_PAD}" y="16" font-family="sans-serif" font-size="13">{escape(title)}</text>')
    for j, name in enumerate(col_names):
        x = left + CELL * j + CELL // 2 + 4
        y = top - LABEL_PAD
        out.append(
            f'<text x="{x}" y="{y}" transform="rotate(-90 {x} {y})" font-family="sans-serif" '
            f'font-size="11">{escape(name)}</text>'
        )
    out.append('<g class="cells">')
    for i, rname in enumerate(row_names):
        y = top + CELL * i
        out.append(
            f'<text x="{left - LABEL_PAD}" y="{y + CELL // 2 + 4}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{escape(rname)}</text>'
        )
        for j, cname in enumerate(col_names):
            v = grid[i, j]
            fill = MISSING if np.isnan(v) else color(v)
            value = "NA" if np.isnan(v) else repr(float(v))
            out.append(
                f'<rect class="cell" x="{left + CELL * j}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="{fill}" data-row={quoteattr(rname)} data-col={quoteattr(cname)} data-value="{value}">'
                f"<title>{escape(rname)} x {escape(cname)}: {value}</title></rect>"
            )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
