"""Pairwise Pearson p-values between two omics and feature-set handling."""

import csv
from dataclasses import dataclass
import os
import warnings

import numpy as np
from scipy import special

from ._validation import ValidationError, check_pvalues
from .twoway import TwoWaySelection

DEFAULT_BLOCK = 512


class ConstantFeatureWarning(UserWarning):
    """A zero-variance feature was given p = 1 against every partner."""


class DuplicateMemberWarning(UserWarning):
    pass


class DroppedMembersWarning(UserWarning):
    """Some set members are not present in the matrix."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples by features, with identifiers on both axes."""

    sample_ids: tuple
    feature_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("dataset values must be 2-d (samples x features)")
        if values.shape != (len(self.sample_ids), len(self.feature_ids)):
            raise ValidationError(
                f"values shape {values.shape} does not match {len(self.sample_ids)} samples x "
                f"{len(self.feature_ids)} features"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("dataset contains missing or non-finite values")
        for what, ids in (("sample", self.sample_ids), ("feature", self.feature_ids)):
            seen = set()
            for name in ids:
                if name in seen:
                    raise ValidationError(f"duplicate {what} identifier {name!r}")
                seen.add(name)
        object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        object.__setattr__(self, "feature_ids", tuple(str(f) for f in self.feature_ids))
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]

    def equals(self, other):
        return (
            self.sample_ids == other.sample_ids
            and self.feature_ids == other.feature_ids
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    """``p x q`` matrix of pairwise p-values."""

    pvalues: np.ndarray
    row_ids: tuple
    col_ids: tuple
    n_constant: int = 0

    def __post_init__(self):
        pv = check_pvalues(self.pvalues, ndim=2)
        if pv.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValidationError("p-value matrix shape does not match its identifier tables")
        object.__setattr__(self, "pvalues", pv)
        object.__setattr__(self, "row_ids", tuple(str(i) for i in self.row_ids))
        object.__setattr__(self, "col_ids", tuple(str(i) for i in self.col_ids))

    @property
    def shape(self):
        return self.pvalues.shape


def pvalue_from_r(r, n):
    """Two-sided p-value of a sample Pearson correlation ``r`` over ``n`` samples.

    Equivalent to ``2 * P(T_{n-2} > |t|)`` with ``t = r sqrt((n-2)/(1-r^2))``,
    evaluated as the regularized incomplete beta ``I_{1-r^2}((n-2)/2, 1/2)``
    which stays accurate as ``|r| -> 1``.
    """
    if n < 3:
        raise ValidationError(f"need at least 3 samples, got {n}")
    r = np.clip(np.asarray(r, dtype=np.float64), -1.0, 1.0)
    x = (1.0 - r) * (1.0 + r)
    p = special.betainc(0.5 * (n - 2), 0.5, x)
    return np.clip(p, 0.0, 1.0)


def _standardize(values):
    centered = values - values.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    constant = norms <= np.finfo(np.float64).eps * np.sqrt(values.shape[0]) * np.abs(values).max(axis=0, initial=0.0)
    constant |= norms == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(constant, 0.0, centered / np.where(norms == 0.0, 1.0, norms))
    return z, constant


def _correlation(za, zb, n):
    """Dot product of standardized columns, with rounding noise at |r| = 1 removed.

    A perfectly linear pair lands a few ulps short of 1, which for small
    ``n`` still maps to a visibly non-zero p-value.
    """
    r = np.clip(za.T @ zb, -1.0, 1.0)
    tol = 4.0 * n * np.finfo(np.float64).eps
    return np.where(1.0 - np.abs(r) <= tol, np.sign(r), r)


def pearson_pvalue(x, y):
    """Two-sided Pearson correlation p-value for paired samples.

    A constant input has no defined correlation; it is reported as
    ``p = 1`` with a :class:`ConstantFeatureWarning`.
    """
    data = np.column_stack([np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)])
    if data.shape[0] < 3:
        raise ValidationError(f"need at least 3 samples, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        raise ValidationError("inputs must be finite")
    z, constant = _standardize(data)
    if constant.any():
        warnings.warn("constant input; correlation undefined, using p = 1", ConstantFeatureWarning, stacklevel=2)
        return 1.0
    n = data.shape[0]
    return float(pvalue_from_r(_correlation(z[:, :1], z[:, 1:], n)[0, 0], n))


def align_samples(a, b):
    """Reorder ``b``'s samples to ``a``'s order; both must hold the same ids."""
    if a.sample_ids == b.sample_ids:
        return b
    missing_b = [s for s in a.sample_ids if s not in set(b.sample_ids)]
    missing_a = [s for s in b.sample_ids if s not in set(a.sample_ids)]
    if missing_a or missing_b:
        parts = []
        if missing_b:
            parts.append(f"only in first dataset: {', '.join(missing_b)}")
        if missing_a:
            parts.append(f"only in second dataset: {', '.join(missing_a)}")
        raise ValidationError("sample identifiers differ; " + "; ".join(parts))
    pos = {s: i for i, s in enumerate(b.sample_ids)}
    order = [pos[s] for s in a.sample_ids]
    return Dataset(a.sample_ids, b.feature_ids, b.values[order])


def build_pvalue_matrix(a, b, block_size=DEFAULT_BLOCK):
    """Pearson p-values for every (feature of ``a``, feature of ``b``) pair.

    Rows of ``a`` are processed ``block_size`` at a time so the working set
    beyond the output is one block of correlations.
    """
    b = align_samples(a, b)
    n = a.n_samples
    if n < 3:
        raise ValidationError(f"need at least 3 samples, got {n}")
    za, const_a = _standardize(a.values)
    zb, const_b = _standardize(b.values)
    n_constant = int(const_a.sum() + const_b.sum())
    if n_constant:
        warnings.warn(
            f"{n_constant} constant feature(s); their correlations are undefined and set to p = 1",
            ConstantFeatureWarning,
            stacklevel=2,
        )
    out = np.empty((a.n_features, b.n_features), dtype=np.float64)
    for start in range(0, a.n_features, block_size):
        stop = min(start + block_size, a.n_features)
        out[start:stop] = pvalue_from_r(_correlation(za[:, start:stop], zb, n), n)
    out[const_a, :] = 1.0
    out[:, const_b] = 1.0
    return AssociationMatrix(out, a.feature_ids, b.feature_ids, n_constant=n_constant)


def _sniff_delimiter(path, fmt):
    if fmt is None:
        fmt = "csv" if os.fspath(path).lower().endswith(".csv") else "tsv"
    if fmt not in ("tsv", "csv"):
        raise ValidationError(f"unknown matrix format {fmt!r} (use tsv or csv)")
    return "," if fmt == "csv" else "\t"


def _read_grid(path, delimiter):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter) if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ValidationError(f"{path}: need a header row and at least one data row")
    width = len(rows[0])
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValidationError(f"{path}: line {lineno} has {len(row)} fields, header has {width}")
    return rows


def parse_matrix(path, fmt=None, features_as_rows=False):
    """Read a delimited numeric matrix.

    Default layout: header row of feature ids, first column of sample ids.
    With ``features_as_rows`` the file is the transpose (header row of
    sample ids, first column of feature ids).
    """
    rows = _read_grid(path, _sniff_delimiter(path, fmt))
    header = [h.strip() for h in rows[0][1:]]
    first = [row[0].strip() for row in rows[1:]]
    values = np.empty((len(first), len(header)), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        for j, cell in enumerate(row[1:]):
            try:
                v = float(cell)
            except ValueError:
                v = np.nan
            if not np.isfinite(v):
                raise ValidationError(
                    f"{path}: non-numeric value {cell!r} at line {i + 2}, column {header[j]!r}"
                )
            values[i, j] = v
    if features_as_rows:
        return Dataset(sample_ids=tuple(header), feature_ids=tuple(first), values=values.T)
    return Dataset(sample_ids=tuple(first), feature_ids=tuple(header), values=values)


def write_matrix(dataset, path, fmt=None, features_as_rows=False):
    delimiter = _sniff_delimiter(path, fmt)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if features_as_rows:
            writer.writerow(["feature", *dataset.sample_ids])
            for fid, col in zip(dataset.feature_ids, dataset.values.T):
                writer.writerow([fid, *(repr(float(v)) for v in col)])
        else:
            writer.writerow(["sample", *dataset.feature_ids])
            for sid, row in zip(dataset.sample_ids, dataset.values):
                writer.writerow([sid, *(repr(float(v)) for v in row)])


def parse_pvalue_matrix(path, fmt=None):
    """Read a precomputed p-value matrix (header = column ids, first column = row ids)."""
    rows = _read_grid(path, _sniff_delimiter(path, fmt))
    col_ids = tuple(h.strip() for h in rows[0][1:])
    row_ids = tuple(row[0].strip() for row in rows[1:])
    try:
        pv = np.array([[float(c) for c in row[1:]] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric p-value ({exc})") from None
    return AssociationMatrix(pv, row_ids, col_ids)


def parse_gmt(path):
    """Read a GMT file into ``{set name: [member ids]}``.

    Each line is ``name<TAB>description<TAB>member...``. Repeated members
    within a set are dropped (first occurrence kept) with a warning.
    """
    sets = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            name = fields[0].strip()
            members = [m.strip() for m in fields[2:] if m.strip()]
            if not name:
                raise ValidationError(f"{path}: line {lineno} has no set name")
            if not members:
                raise ValidationError(f"{path}: set {name!r} on line {lineno} has no members")
            if name in sets:
                raise ValidationError(f"{path}: duplicate set name {name!r} on line {lineno}")
            unique = list(dict.fromkeys(members))
            if len(unique) != len(members):
                warnings.warn(
                    f"set {name!r}: {len(members) - len(unique)} duplicate member(s) removed",
                    DuplicateMemberWarning,
                    stacklevel=2,
                )
            sets[name] = unique
    return sets


def write_gmt(sets, path):
    with open(path, "w", encoding="utf-8") as fh:
        for name, members in sets.items():
            fh.write("\t".join([name, "na", *members]) + "\n")


def _resolve_axis(spec, index, collection, axis):
    if isinstance(spec, str):
        if collection is None or spec not in collection:
            raise ValidationError(f"unknown {axis} set {spec!r}")
        label, members = spec, collection[spec]
    else:
        label, members = f"<{axis} ids>", list(spec)
    found = [index[m] for m in members if m in index]
    dropped = len(members) - len(found)
    if not found:
        raise ValidationError(f"{axis} set {label!r}: none of its {len(members)} members are in the matrix")
    if dropped:
        warnings.warn(
            f"{axis} set {label!r}: {dropped} of {len(members)} member(s) not in the matrix were dropped",
            DroppedMembersWarning,
            stacklevel=3,
        )
    return np.array(list(dict.fromkeys(found)), dtype=np.intp), dropped


def resolve_selection(state, row_set, col_set, row_sets=None, col_sets=None):
    """Map feature-set names (or explicit id lists) to a two-way selection."""
    rows, _ = _resolve_axis(row_set, state.row_index, row_sets, "row")
    cols, _ = _resolve_axis(col_set, state.col_index, col_sets, "column")
    return TwoWaySelection(rows, cols)
