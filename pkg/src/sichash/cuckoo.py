"""Per-bucket cuckoo table construction by rattle kicking, a matching
oracle for feasibility checks, and the incremental overload experiment.

Rattle kicking keeps a counter per object counting how often it moved.
On each attempt the object probes the cell selected by
``counter mod degree``; an occupant is evicted only when its counter is
strictly lower than the inserting object's counter (on a tie the
inserter increments its counter and probes its next cell instead), and
an evicted object re-enters with its counter incremented by one.
Construction of a whole bucket is retried with seeds 0, 1, 2, ... until
all entries place within the displacement budget.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ConstructionError
from .hashing import (
    MASK64,
    _M1,
    _M2,
    _cell_key,
    class_thresholds,
    fold_hash_many,
    MasterHash,
    cell_of,
    fold_hash,
)

DEFAULT_MAX_BUCKET_SEEDS = 1 << 16
#: total displacements allowed per seed attempt, times the entry count
BUDGET_PER_ENTRY = 100


@dataclass
class BucketInput:
    """Entries of one bucket: hash halves, per-entry degrees, and the
    table size ``m`` (``m >= n`` by the load-factor rounding rule)."""

    hi: np.ndarray
    lo: np.ndarray
    degrees: np.ndarray  # 2, 4, or 8 per entry
    m: int

    def __post_init__(self) -> None:
        self.hi = np.asarray(self.hi, dtype=np.uint64)
        self.lo = np.asarray(self.lo, dtype=np.uint64)
        self.degrees = np.asarray(self.degrees, dtype=np.uint8)
        if not (len(self.hi) == len(self.lo) == len(self.degrees)):
            raise ValueError("hi, lo, degrees must have equal length")
        if self.m < len(self.hi):
            raise ValueError("table size m must be at least the entry count")

    def __len__(self) -> int:
        return len(self.hi)


@dataclass
class PlacementResult:
    """A collision-free assignment: per-entry hash-function index under
    the winning seed, plus the displacement count spent finding it."""

    seed: int
    assignments: np.ndarray  # fn_index per entry, < degree
    displacements: int


class RattleTable:
    """Mutable insertion state for one cuckoo table.

    After a failed insert the table is left mid-displacement; callers
    either discard it (seed retry) or stop the experiment.
    """

    def __init__(self, m: int, seed: int):
        self.m = m
        self.seed = seed
        self.cells = [-1] * m  # entry index occupying each cell
        self.folded: list[int] = []
        self.degrees: list[int] = []
        self.counters: list[int] = []
        self.displacements = 0
        self._keys = [_cell_key(seed, t) for t in range(8)]

    def __len__(self) -> int:
        return len(self.folded)

    def add_entry(self, folded: int, degree: int) -> int:
        self.folded.append(folded)
        self.degrees.append(degree)
        self.counters.append(0)
        return len(self.folded) - 1

    def insert(self, entry: int, budget: int) -> bool:
        """Place ``entry`` by rattle kicking.

        ``budget`` caps the table-wide displacement total; returns False
        once it is exceeded (counters keep their mid-flight values).
        """
        table = self.cells
        folded = self.folded
        degrees = self.degrees
        counters = self.counters
        keys = self._keys
        m = self.m
        steps = self.displacements
        cur = entry
        c = counters[cur]
        while True:
            z = folded[cur] ^ keys[c % degrees[cur]]
            z = ((z ^ (z >> 30)) * _M1) & MASK64
            z = ((z ^ (z >> 27)) * _M2) & MASK64
            z ^= z >> 31
            cell = (z * m) >> 64
            occ = table[cell]
            if occ < 0:
                table[cell] = cur
                counters[cur] = c
                self.displacements = steps
                return True
            oc = counters[occ]
            if oc < c:
                table[cell] = cur
                counters[cur] = c
                cur, c = occ, oc + 1
            else:
                c += 1
            steps += 1
            if steps > budget:
                counters[cur] = c
                self.displacements = steps
                return False


def rattle_insert(state: RattleTable, entry: int, budget: int) -> bool:
    """Insert a previously added entry; False when the budget runs out."""
    return state.insert(entry, budget)


def build_bucket(
    inp: BucketInput,
    budget: Optional[int] = None,
    max_seeds: int = DEFAULT_MAX_BUCKET_SEEDS,
) -> PlacementResult:
    """Find the smallest seed whose rattle-kicking insertion succeeds.

    ``budget`` is the displacement limit per seed attempt and defaults
    to 100 per entry.  Raises :class:`ConstructionError` once
    ``max_seeds`` seeds all fail, which signals a load factor beyond
    what this table size can absorb.
    """
    n = len(inp)
    if budget is None:
        budget = max(1, BUDGET_PER_ENTRY * n)
    if n == 0:
        return PlacementResult(0, np.empty(0, dtype=np.uint8), 0)
    folded = fold_hash_many(inp.hi, inp.lo).tolist()
    degrees = inp.degrees.tolist()
    for seed in range(max_seeds):
        table = RattleTable(inp.m, seed)
        for f, d in zip(folded, degrees):
            table.add_entry(f, d)
        ok = True
        for i in range(n):
            if not table.insert(i, budget):
                ok = False
                break
        if ok:
            assignments = np.array(
                [table.counters[i] % degrees[i] for i in range(n)], dtype=np.uint8
            )
            result = PlacementResult(seed, assignments, table.displacements)
            _check_placement(inp, result)
            return result
    raise ConstructionError(
        f"bucket unconstructible: no seed below {max_seeds} places "
        f"{n} entries into {inp.m} cells"
    )


def placement_cells(inp: BucketInput, result: PlacementResult) -> np.ndarray:
    """Cells selected by a placement, via the query-side derivation."""
    return np.array(
        [
            cell_of(MasterHash(int(h), int(l)), result.seed, int(t), inp.m)
            for h, l, t in zip(inp.hi, inp.lo, result.assignments)
        ],
        dtype=np.int64,
    )


def _check_placement(inp: BucketInput, result: PlacementResult) -> None:
    cells = placement_cells(inp, result)
    if len(np.unique(cells)) != len(inp):
        raise ConstructionError("internal error: placement is not injective")


def matching_oracle(
    inp: BucketInput, seed: int
) -> tuple[bool, Optional[np.ndarray]]:
    """Feasibility of a seed by maximum bipartite matching
    (Hopcroft-Karp), independent of the rattle-kicking path.

    Returns ``(feasible, assignments)``; assignments are one valid
    fn-index per entry when a perfect matching exists.  Intended for
    test-scale inputs.
    """
    n = len(inp)
    if n == 0:
        return True, np.empty(0, dtype=np.uint8)
    rows = []
    cols = []
    cand: list[dict[int, int]] = []
    for i in range(n):
        h = MasterHash(int(inp.hi[i]), int(inp.lo[i]))
        cells = {}
        for t in range(int(inp.degrees[i])):
            cell = cell_of(h, seed, t, inp.m)
            cells.setdefault(cell, t)
        cand.append(cells)
        for cell in cells:
            rows.append(i)
            cols.append(cell)
    graph = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, inp.m)
    )
    match = maximum_bipartite_matching(graph, perm_type="column")
    if int((match >= 0).sum()) < n:
        return False, None
    assignments = np.array(
        [cand[i][int(match[i])] for i in range(n)], dtype=np.uint8
    )
    return True, assignments


def incremental_load_experiment(
    m: int,
    fractions: tuple[float, float, float],
    trials: int,
    *,
    seed: int = 0,
    insert_budget: int = 1000,
) -> np.ndarray:
    """Insert random entries one at a time until the first failure.

    Per trial, entries draw a class from ``fractions`` (degrees 2/4/8)
    and random 128-bit hashes; insertion uses rattle kicking with a
    fixed per-insert displacement budget.  Returns the achieved load
    ``placed / m`` of every trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p1, p2, _ = fractions
    t1, t2 = class_thresholds(p1, p2)
    rng = random.Random(seed)
    loads = np.empty(trials, dtype=np.float64)
    for trial in range(trials):
        table = RattleTable(m, seed=0)
        placed = 0
        while placed < m:
            hi = rng.getrandbits(64)
            lo = rng.getrandbits(64)
            degree = 2 if lo < t1 else (4 if lo < t2 else 8)
            idx = table.add_entry(fold_hash(MasterHash(hi, lo)), degree)
            if not table.insert(idx, table.displacements + insert_budget):
                break
            placed += 1
        loads[trial] = placed / m
    return loads


def summarize_loads(loads: np.ndarray) -> dict[str, float]:
    """min/q1/median/q3/max of an achieved-load sample."""
    qs = np.quantile(loads, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "min": float(qs[0]),
        "q1": float(qs[1]),
        "median": float(qs[2]),
        "q3": float(qs[3]),
        "max": float(qs[4]),
    }
