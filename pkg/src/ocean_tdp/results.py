"""Result rows for feature-set scans and their TSV/JSON encodings."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
import json
import os

from ._validation import ValidationError
from .association import resolve_selection
from .twoway import DEFAULT_MAX_ITER, query

COLUMNS = (
    "row_set",
    "col_set",
    "n_rows",
    "n_cols",
    "pair_tdp",
    "row_tdp_lower",
    "row_tdp_upper",
    "col_tdp_lower",
    "col_tdp_upper",
    "row_exact",
    "col_exact",
    "iterations",
)

METRIC_COLUMN = {"pair": "pair_tdp", "row": "row_tdp_lower", "col": "col_tdp_lower"}


@dataclass(frozen=True)
class ResultRow:
    row_set: str
    col_set: str
    n_rows: int
    n_cols: int
    pair_tdp: Fraction
    row_tdp_lower: Fraction
    row_tdp_upper: Fraction
    col_tdp_lower: Fraction
    col_tdp_upper: Fraction
    row_exact: bool
    col_exact: bool
    iterations: int

    @classmethod
    def from_report(cls, row_set, col_set, report):
        return cls(
            row_set=row_set,
            col_set=col_set,
            n_rows=report.row.n,
            n_cols=report.col.n,
            pair_tdp=report.pair_tdp,
            row_tdp_lower=report.row.tdp_lower,
            row_tdp_upper=report.row.tdp_upper,
            col_tdp_lower=report.col.tdp_lower,
            col_tdp_upper=report.col.tdp_upper,
            row_exact=report.row.exact,
            col_exact=report.col.exact,
            iterations=report.row.iterations + report.col.iterations,
        )

    def encoded(self):
        """Column name -> JSON-friendly value (TDPs as floats)."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = float(v) if isinstance(v, Fraction) else v
        return out


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def tsv_header():
    return "\t".join(COLUMNS) + "\n"


def tsv_line(row):
    enc = row.encoded()
    return "\t".join(_fmt(enc[c]) for c in COLUMNS) + "\n"


def json_line(row):
    return json.dumps(row.encoded(), sort_keys=False, separators=(", ", ": "))


def write_results(rows, out, fmt="tsv"):
    """Stream ``rows`` to the text handle ``out``; each row is flushed as written."""
    if fmt == "tsv":
        out.write(tsv_header())
        for row in rows:
            out.write(tsv_line(row))
            out.flush()
    elif fmt == "json":
        out.write("[")
        for i, row in enumerate(rows):
            out.write(("\n  " if i == 0 else ",\n  ") + json_line(row))
            out.flush()
        out.write("\n]\n")
    else:
        raise ValidationError(f"unknown output format {fmt!r}")


def _parse_bool(text):
    if text in ("true", "false"):
        return text == "true"
    raise ValidationError(f"expected true/false, got {text!r}")


def _from_mapping(rec):
    missing = [c for c in COLUMNS if c not in rec]
    if missing:
        raise ValidationError(f"results record lacks columns: {', '.join(missing)}")
    try:
        return {
            "row_set": str(rec["row_set"]),
            "col_set": str(rec["col_set"]),
            "n_rows": int(rec["n_rows"]),
            "n_cols": int(rec["n_cols"]),
            "pair_tdp": float(rec["pair_tdp"]),
            "row_tdp_lower": float(rec["row_tdp_lower"]),
            "row_tdp_upper": float(rec["row_tdp_upper"]),
            "col_tdp_lower": float(rec["col_tdp_lower"]),
            "col_tdp_upper": float(rec["col_tdp_upper"]),
            "row_exact": rec["row_exact"] if isinstance(rec["row_exact"], bool) else _parse_bool(rec["row_exact"]),
            "col_exact": rec["col_exact"] if isinstance(rec["col_exact"], bool) else _parse_bool(rec["col_exact"]),
            "iterations": int(rec["iterations"]),
        }
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed results record: {exc}") from None


def read_results(path):
    """Read a TSV or JSON results file into a list of plain dicts."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        try:
            records = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        return [_from_mapping(r) for r in records]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return []
    header = lines[0].split("\t")
    if tuple(header) != COLUMNS:
        raise ValidationError(f"{path}: unexpected results header")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(COLUMNS):
            raise ValidationError(f"{path}: line {lineno} has {len(cells)} fields, expected {len(COLUMNS)}")
        out.append(_from_mapping(dict(zip(COLUMNS, cells))))
    return out


def thread_count():
    """Worker threads for scans, capped by ``OCEAN_THREADS`` when set."""
    cpus = os.cpu_count() or 1
    env = os.environ.get("OCEAN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"OCEAN_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("OCEAN_THREADS must be at least 1")
        return min(n, cpus)
    return cpus


def scan(state, row_sets, col_sets, row_names=None, col_names=None, max_iter=DEFAULT_MAX_ITER, threads=None):
    """Yield one :class:`ResultRow` per (row set, column set) pair.

    Pairs come out sorted by (row set name, column set name) whatever the
    number of worker threads. Every selection is resolved before any query
    runs, so an unknown or empty set fails fast.
    """
    row_names = sorted(row_sets) if row_names is None else list(row_names)
    col_names = sorted(col_sets) if col_names is None else list(col_names)
    pairs = sorted((r, c) for r in row_names for c in col_names)
    selections = [resolve_selection(state, r, c, row_sets, col_sets) for r, c in pairs]
    threads = thread_count() if threads is None else threads

    def run(i):
        r, c = pairs[i]
        return ResultRow.from_report(r, c, query(state, selections[i], max_iter))

    if threads <= 1 or len(pairs) <= 1:
        for i in range(len(pairs)):
            yield run(i)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order
        yield from pool.map(run, range(len(pairs)))
