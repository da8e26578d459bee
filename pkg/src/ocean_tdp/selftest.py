"""Built-in self checks: worked-example fixtures and oracle equivalence."""

from dataclasses import dataclass
import time

import numpy as np

from . import fixtures as fx
from . import oracles
from .closed_testing import compute_h, pair_discoveries
from .state import PreparedState, dumps, loads
from .twoway import (
    CumulativeCategoryTable,
    TwoWaySelection,
    branch_and_bound,
    branch_and_bound_block,
    build_cumulative_table,
    shortcut_bound,
    shortcut_heuristic,
    sorted_prefix_table,
)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def _toy_checks():
    state = PreparedState.from_categories(fx.TOY_CATEGORIES)
    sel = TwoWaySelection.full(state)
    table = build_cumulative_table(state, sel)
    yield Check("toy cumulative table", np.array_equal(table.counts[:, :7], fx.TOY_CUMULATIVE))
    yield Check("toy sorted prefix table", np.array_equal(sorted_prefix_table(table)[:, :7], fx.TOY_SORTED_PREFIX))
    b = shortcut_bound(table)
    yield Check("toy shortcut bound", b == fx.TOY_ROW_BOUND, f"B={b}")
    h = shortcut_heuristic(table, ordering=fx.TOY_HEURISTIC_ORDER)
    yield Check("toy shortcut heuristic", h == fx.TOY_ROW_HEURISTIC, f"H={h}")

    forced = CumulativeCategoryTable(
        counts=table.counts[1:], n_cols=7, n_total=6, forced_offset=table.counts[0], n_forced=1
    )
    fb = shortcut_bound(forced)
    yield Check("toy forced-row bound", fb == fx.TOY_FORCED0_BOUND, f"B={fb}")

    trace = []
    t0 = time.perf_counter()
    res = branch_and_bound(state, sel, max_iter=5, ordering=fx.TOY_HEURISTIC_ORDER, trace=trace)
    elapsed = time.perf_counter() - t0
    pruned = [t for t in trace if t["forced"] == [0] and not t["removed"]]
    yield Check(
        "toy branch-and-bound",
        res.exact and res.lower == 3 and res.iterations <= 5 and elapsed < 1.0,
        f"bracket=({res.lower},{res.upper}) iterations={res.iterations}",
    )
    yield Check(
        "toy forced branch pruned",
        len(pruned) == 1 and pruned[0]["pruned"] and pruned[0]["bound"] == fx.TOY_FORCED0_BOUND,
    )
    yield Check("toy oracle", oracles.oracle_row_discoveries(state, sel) == 3)
    yield Check("toy state round trip", loads(dumps(state)).equals(state))


def _oracle_checks(seed, n_h, n_pair, n_row):
    rng = np.random.default_rng(seed)
    bad = 0
    for i in range(n_h):
        p = oracles.random_pvalues(rng, max_m=500)
        alpha = (0.01, 0.05, 0.1)[i % 3]
        bad += compute_h(p, alpha) != oracles.oracle_h(p, alpha)
    yield Check(f"h oracle ({n_h} instances)", bad == 0, f"{bad} mismatches")

    bad = 0
    for _ in range(n_pair):
        size = int(rng.integers(1, 501))
        cats = rng.integers(1, int(rng.integers(1, 2 * size + 2)) + 1, size=size)
        bad += pair_discoveries(cats) != oracles.oracle_pair_discoveries(cats, size)
    yield Check(f"pair oracle ({n_pair} instances)", bad == 0, f"{bad} mismatches")

    bad = 0
    for _ in range(n_row):
        block = oracles.random_block(rng)
        exact = oracles.oracle_row_discoveries_block(block)
        res = branch_and_bound_block(block, None)
        bad += not (res.exact and res.lower == exact)
        for budget in (0, 1, 2, 5, 10):
            part = branch_and_bound_block(block, budget)
            bad += not (part.lower <= exact <= part.upper)
    yield Check(f"row oracle ({n_row} instances)", bad == 0, f"{bad} violations")


def run(full=False, seed=0, reps=500):
    """Yield :class:`Check` results; ``full`` adds a null simulation."""
    yield from _toy_checks()
    if full:
        yield from _oracle_checks(seed, 200, 1000, 1000)
        sim = oracles.null_simulation(n=50, p=40, q=50, alpha=0.05, reps=reps, seed=seed)
        limit = sim.alpha + 3 * sim.std_error
        yield Check(
            f"null simulation FWER ({reps} reps)",
            sim.fwer <= limit,
            f"FWER={sim.fwer:.4f} limit={limit:.4f}",
        )
    else:
        yield from _oracle_checks(seed, 20, 100, 100)
