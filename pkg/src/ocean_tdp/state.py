"""Prepared query context and its binary on-disk form.

Preparation computes ``h`` over the full p-value matrix and replaces every
p-value by its capped category. Raw p-values are not kept; every TDP
query only needs the categories.

File layout, all little-endian::

    b"OCN1"                      magic
    uint32                       format version
    float64                      alpha
    uint64 h, uint64 p, uint64 q
    uint32                       cap
    uint8                        entry width w (1, 2 or 4 bytes)
    uint64 count, then per id: uint32 byte length + UTF-8   (row ids)
    uint64 count, then per id: uint32 byte length + UTF-8   (column ids)
    p * q entries of w bytes, row-major
    uint64                       checksum (BLAKE2b, 8-byte digest) of all preceding bytes
"""

from dataclasses import dataclass, field
import hashlib
import io
import struct

import numpy as np

from ._validation import ValidationError, check_alpha, check_pvalues
from .closed_testing import categorize, category_cap, category_dtype, compute_h

MAGIC = b"OCN1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIdQQQIB")
_CHECKSUM = struct.Struct("<Q")


class StateFileError(Exception):
    """The state file is not a readable prepared state."""


class StateFormatError(StateFileError):
    """Wrong magic bytes or an unsupported format version."""


class StateChecksumError(StateFileError):
    """The file is truncated or its contents do not match the checksum."""


def _default_ids(prefix, n):
    return tuple(f"{prefix}{i}" for i in range(n))


@dataclass(frozen=True, eq=False)
class PreparedState:
    """Immutable, thread-shareable context for TDP queries.

    ``categories`` is a read-only ``(p, q)`` array of unsigned integers in
    ``[1, cap]``.
    """

    alpha: float
    h: int
    cap: int
    categories: np.ndarray
    row_ids: tuple
    col_ids: tuple
    version: int = FORMAT_VERSION
    _row_index: dict = field(init=False, repr=False, compare=False)
    _col_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cats = np.asarray(self.categories)
        if cats.ndim != 2:
            raise ValidationError("categories must be a 2-d array")
        if cats.size and (cats.min() < 1 or cats.max() > self.cap):
            raise ValidationError(f"categories must lie in [1, {self.cap}]")
        cats = cats.astype(category_dtype(self.cap), copy=False)
        if not 0 <= self.h <= cats.size:
            raise ValidationError(f"h={self.h} outside [0, {cats.size}]")
        if len(self.row_ids) != cats.shape[0] or len(self.col_ids) != cats.shape[1]:
            raise ValidationError("identifier tables do not match the category matrix")
        if not cats.flags.c_contiguous:
            cats = np.ascontiguousarray(cats)
        cats.flags.writeable = False
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "row_ids", tuple(str(i) for i in self.row_ids))
        object.__setattr__(self, "col_ids", tuple(str(i) for i in self.col_ids))
        object.__setattr__(self, "_row_index", _index(self.row_ids, "row"))
        object.__setattr__(self, "_col_index", _index(self.col_ids, "column"))

    @property
    def p(self):
        return self.categories.shape[0]

    @property
    def q(self):
        return self.categories.shape[1]

    @property
    def m(self):
        return self.categories.size

    @property
    def row_index(self):
        return self._row_index

    @property
    def col_index(self):
        return self._col_index

    @classmethod
    def from_categories(cls, categories, alpha=0.05, h=None, cap=None, row_ids=None, col_ids=None):
        """Build a state straight from a category matrix (toy data, tests).

        ``h`` defaults to ``m`` and ``cap`` to the usual sentinel, raised if
        needed so that every given category fits.
        """
        cats = np.asarray(categories)
        if cats.ndim != 2 or cats.size == 0:
            raise ValidationError("categories must be a non-empty 2-d array")
        if cats.min() < 1:
            raise ValidationError("categories must be >= 1")
        cap = int(cap) if cap is not None else max(category_cap(cats.size), int(cats.max()))
        return cls(
            alpha=check_alpha(alpha),
            h=int(cats.size if h is None else h),
            cap=cap,
            categories=cats.astype(category_dtype(cap)),
            row_ids=row_ids if row_ids is not None else _default_ids("r", cats.shape[0]),
            col_ids=col_ids if col_ids is not None else _default_ids("c", cats.shape[1]),
        )

    def transposed(self):
        """The same state with the roles of rows and columns swapped."""
        return PreparedState(
            alpha=self.alpha,
            h=self.h,
            cap=self.cap,
            categories=self.categories.T,
            row_ids=self.col_ids,
            col_ids=self.row_ids,
            version=self.version,
        )

    def equals(self, other):
        """Field-by-field identity, including identifier tables."""
        return (
            isinstance(other, PreparedState)
            and self.alpha == other.alpha
            and self.h == other.h
            and self.cap == other.cap
            and self.version == other.version
            and self.row_ids == other.row_ids
            and self.col_ids == other.col_ids
            and self.categories.dtype == other.categories.dtype
            and np.array_equal(self.categories, other.categories)
        )


def _index(ids, what):
    index = {}
    for i, name in enumerate(ids):
        if name in index:
            raise ValidationError(f"duplicate {what} identifier {name!r}")
        index[name] = i
    return index


def prepare(assoc, alpha=0.05, row_ids=None, col_ids=None):
    """Compute ``h`` and the category matrix for a p-value matrix.

    ``assoc`` is an :class:`~ocean_tdp.association.AssociationMatrix` or a
    plain 2-d array of p-values (then ids default to ``r0..``/``c0..``).
    """
    alpha = check_alpha(alpha)
    if hasattr(assoc, "pvalues"):
        pvalues = assoc.pvalues
        row_ids = assoc.row_ids if row_ids is None else row_ids
        col_ids = assoc.col_ids if col_ids is None else col_ids
    else:
        pvalues = assoc
    pvalues = check_pvalues(pvalues, ndim=2)
    p, q = pvalues.shape
    h = compute_h(pvalues, alpha)
    cap = category_cap(pvalues.size)
    return PreparedState(
        alpha=alpha,
        h=h,
        cap=cap,
        categories=categorize(pvalues, h, alpha, cap),
        row_ids=row_ids if row_ids is not None else _default_ids("r", p),
        col_ids=col_ids if col_ids is not None else _default_ids("c", q),
    )


def _checksum(data):
    return _CHECKSUM.unpack(hashlib.blake2b(data, digest_size=8).digest())[0]


def _pack_ids(buf, ids):
    buf.write(struct.pack("<Q", len(ids)))
    for name in ids:
        raw = name.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)


def dumps(state):
    """Serialise ``state`` to bytes."""
    width = category_dtype(state.cap).itemsize
    buf = io.BytesIO()
    buf.write(
        _HEADER.pack(MAGIC, state.version, state.alpha, state.h, state.p, state.q, state.cap, width)
    )
    _pack_ids(buf, state.row_ids)
    _pack_ids(buf, state.col_ids)
    buf.write(state.categories.astype(f"<u{width}", copy=False).tobytes(order="C"))
    body = buf.getvalue()
    return body + _CHECKSUM.pack(_checksum(body))


def save(state, path):
    data = dumps(state)
    with open(path, "wb") as fh:
        fh.write(data)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise StateChecksumError("state file is truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def ids(self):
        (count,) = struct.unpack("<Q", self.take(8))
        out = []
        for _ in range(count):
            (n,) = struct.unpack("<I", self.take(4))
            try:
                out.append(self.take(n).decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise StateChecksumError("identifier table is not valid UTF-8") from exc
        return tuple(out)


def loads(data):
    """Inverse of :func:`dumps`."""
    data = bytes(data)
    if len(data) < 4 or data[:4] != MAGIC:
        raise StateFormatError("not a prepared-state file (bad magic bytes)")
    if len(data) < _HEADER.size + _CHECKSUM.size:
        raise StateChecksumError("state file is truncated")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise StateFormatError(f"unsupported state format version {version} (expected {FORMAT_VERSION})")
    body, tail = data[:-_CHECKSUM.size], data[-_CHECKSUM.size:]
    if _checksum(body) != _CHECKSUM.unpack(tail)[0]:
        raise StateChecksumError("state file checksum mismatch (corrupt or truncated)")

    reader = _Reader(body)
    _, version, alpha, h, p, q, cap, width = _HEADER.unpack(reader.take(_HEADER.size))
    if width not in (1, 2, 4):
        raise StateFormatError(f"invalid category entry width {width}")
    row_ids = reader.ids()
    col_ids = reader.ids()
    raw = reader.take(p * q * width)
    if reader.pos != len(body):
        raise StateFormatError("trailing bytes after category matrix")
    cats = np.frombuffer(raw, dtype=f"<u{width}").reshape(p, q).astype(category_dtype(cap))
    return PreparedState(
        alpha=alpha, h=h, cap=cap, categories=cats, row_ids=row_ids, col_ids=col_ids, version=version
    )


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
