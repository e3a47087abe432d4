"""Query-time greedy screening: cursors, frontiers, joint iteration, screens.

The screening pipeline visits entries (j, t) of the implicit matrix
Z = H*diag(w) in decreasing z order (a k-way merge over the per-dimension
sorted id arrays) and collects the first B distinct candidate ids. Two screen
variants are provided: `screen_basic` consumes a JointIterator entry by entry;
`screen_improved` skips frontier reinsertions for already-collected ids, which
drops the per-entry log k cost. Both admit a binary max-heap or a tournament
(selection) tree as the frontier and produce identical output.

Everything here is the plain-Python reference implementation; QueryContext
dispatches to the compiled kernel in `fast` for production screening
(engine="compiled"), which is cross-checked against this module for exact
output equality in the test suite.

Tie order everywhere: z descending, then dimension t ascending, then cursor
position ascending. Candidate and dimension indices are 0-based.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np

from .index import GreedyIndex
from .matrix import DataError, as_query

NEG_INF = float("-inf")
SENTINEL_T = -1  # selection-tree slot marker for "no cursor"


class ConditionalCursor:
    """Iterates candidate ids j for one dimension t in decreasing z[j,t].

    Walks the sorted id array forward when w_t > 0 and backward otherwise
    (h ascending times a nonpositive weight is z nonincreasing). Positions
    are 0-based; a fresh cursor sits at position 0.
    """

    __slots__ = ("t", "weight", "order", "n", "ptr", "forward")

    def __init__(self, index: GreedyIndex, t: int, w_t: float):
        if not 0 <= t < index.k:
            raise IndexError(f"dimension {t} out of range [0, {index.k})")
        self.t = t
        self.weight = float(w_t)
        self.order = index.sorted_idx[t]
        self.n = index.n
        self.ptr = 0
        self.forward = w_t > 0

    def current(self) -> int:
        if self.forward:
            return int(self.order[self.ptr])
        return int(self.order[self.n - 1 - self.ptr])

    def has_next(self) -> bool:
        return self.ptr < self.n - 1

    def get_next(self) -> int:
        assert self.has_next(), "advancing an exhausted cursor"
        self.ptr += 1
        return self.current()


def cursor_new(index: GreedyIndex, t: int, w_t: float) -> ConditionalCursor:
    return ConditionalCursor(index, t, w_t)


class MaxHeapFrontier:
    """Binary max-heap of (z, t) pairs; ties prefer smaller t."""

    __slots__ = ("_heap",)

    def __init__(self):
        self._heap: list[tuple[float, int]] = []

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, z: float, t: int) -> None:
        heapq.heappush(self._heap, (-z, t))

    def top(self) -> tuple[float, int]:
        neg_z, t = self._heap[0]
        return -neg_z, t

    def pop_max(self) -> tuple[float, int]:
        neg_z, t = heapq.heappop(self._heap)
        return -neg_z, t

    def reinsert(self, t: int, z: float) -> None:
        self.push(z, t)

    def retire(self, t: int) -> None:
        # popped entries are simply not reinserted
        pass

    def entries(self) -> list[tuple[float, int]]:
        return sorted(((-nz, t) for nz, t in self._heap), key=lambda e: (-e[0], e[1]))


class SelectionTreeFrontier:
    """Tournament tree over k streams: 2*Kbar slots, slot 1 holds the max.

    Kbar is the smallest power of two >= k; slot 0 is unused, internal nodes
    occupy 1..Kbar-1, and the leaf for dimension t sits at slot Kbar+t (unused
    leaves hold the sentinel (-inf, -1)). Build is O(k), a leaf update
    propagates winners along one root path in O(log k), and the max is read
    in O(1). Equal z resolves to the smaller t.
    """

    __slots__ = ("k", "kbar", "z", "t")

    def __init__(self, k: int):
        kbar = 1 if k <= 1 else 1 << (k - 1).bit_length()
        self.k = k
        self.kbar = kbar
        self.z = np.full(2 * kbar, NEG_INF, dtype=np.float64)
        self.t = np.full(2 * kbar, SENTINEL_T, dtype=np.int64)

    def __len__(self) -> int:
        return int(np.count_nonzero(self.z[self.kbar:self.kbar + self.k] > NEG_INF))

    def set_leaf(self, t: int, z: float) -> None:
        """Place a value without propagating; call build() afterwards."""
        self.z[self.kbar + t] = z
        self.t[self.kbar + t] = t

    def build(self) -> None:
        for i in range(self.kbar - 1, 0, -1):
            self._settle(i)

    def _settle(self, i: int) -> None:
        l, r = 2 * i, 2 * i + 1
        if self.z[l] > self.z[r] or (self.z[l] == self.z[r] and self.t[l] < self.t[r]):
            self.z[i], self.t[i] = self.z[l], self.t[l]
        else:
            self.z[i], self.t[i] = self.z[r], self.t[r]

    def top(self) -> tuple[float, int]:
        return float(self.z[1]), int(self.t[1])

    def pop_max(self) -> tuple[float, int]:
        # reading the max; the leaf stays until reinsert()/retire() replaces it
        return self.top()

    def update(self, t: int, z: float) -> None:
        i = self.kbar + t
        self.z[i] = z
        while i > 1:
            i >>= 1
            self._settle(i)

    def reinsert(self, t: int, z: float) -> None:
        self.update(t, z)

    def retire(self, t: int) -> None:
        self.update(t, NEG_INF)

    def entries(self) -> list[tuple[float, int]]:
        live = [(float(self.z[self.kbar + t]), t)
                for t in range(self.k) if self.z[self.kbar + t] > NEG_INF]
        return sorted(live, key=lambda e: (-e[0], e[1]))


FRONTIER_KINDS = ("heap", "tree")


def _make_frontier(kind: str, k: int):
    if kind == "heap":
        return MaxHeapFrontier()
    if kind == "tree":
        return SelectionTreeFrontier(k)
    raise DataError(f"unknown frontier kind {kind!r}, expected one of {FRONTIER_KINDS}")


@dataclass
class IterationRecord:
    """One outer iteration of the improved screen, for trace-level tests."""
    z: float
    t: int
    appended: int | None
    advances: int


class QueryContext:
    """Reusable per-query scratch bound to one GreedyIndex.

    Owns the visited array, the output buffer, cursor/frontier state, and
    per-query diagnostics (pop/emission counters, timing slots). A context
    must not be shared by concurrent queries; reuse across sequential queries
    is allocation-free on the compiled engine. `visited` is all-zero between
    queries (reset touches only the collected ids).
    """

    def __init__(self, index: GreedyIndex, frontier: str = "tree",
                 engine: str = "auto", trace: bool = False):
        if frontier not in FRONTIER_KINDS:
            raise DataError(f"unknown frontier kind {frontier!r}")
        if engine == "auto":
            engine = "compiled" if _compiled_available() and not trace else "python"
        if engine not in ("compiled", "python"):
            raise DataError(f"unknown engine {engine!r}, expected 'compiled' or 'python'")
        if engine == "compiled" and trace:
            raise DataError("trace recording needs engine='python'")
        self.index = index
        self.n = index.n
        self.k = index.k
        self.frontier_kind = frontier  # python engine; the kernel always runs the tree
        self.engine = engine
        self.trace_enabled = trace

        self.visited = np.zeros(self.n, dtype=np.uint8)
        self.out = np.empty(self.n, dtype=np.int64)
        self.out_len = 0
        kbar = 1 if self.k <= 1 else 1 << (self.k - 1).bit_length()
        self.ptrs = np.zeros(self.k, dtype=np.int64)
        self.fwd = np.zeros(self.k, dtype=np.uint8)
        self.tree_z = np.full(2 * kbar, NEG_INF, dtype=np.float64)
        self.tree_t = np.full(2 * kbar, SENTINEL_T, dtype=np.int64)

        # python-engine state, rebuilt by query_preprocess
        self.cursors: list[ConditionalCursor] | None = None
        self.frontier = None
        self._w: np.ndarray | None = None

        # diagnostics of the most recent screen call
        self.pop_count = 0
        self.advance_count = 0
        self.emission_count = 0
        self.trace: list[IterationRecord] = []
        self.screen_seconds = 0.0
        self.rank_seconds = 0.0

    def clamp_budget(self, B: int) -> int:
        if B < 1:
            raise DataError(f"budget must be >= 1, got {B}")
        if B > self.n:
            warnings.warn(f"budget {B} exceeds n={self.n}; clamped", stacklevel=3)
            return self.n
        return B

    def _take_output(self) -> np.ndarray:
        out = self.out[:self.out_len].copy()
        self.visited[out] = 0  # touched-list reset, O(|C|)
        return out


def _compiled_available() -> bool:
    try:
        from . import fast  # noqa: F401
    except Exception:
        return False
    return True


def query_preprocess(index: GreedyIndex, w, ctx: QueryContext) -> QueryContext:
    """Build the k cursors and the initial frontier {(max_j z[j,t], t)}.

    Heap realization costs O(k log k) pushes; the selection tree is built in
    O(k) with one constructor pass.
    """
    wq = as_query(w, index.k)
    ctx.cursors = [ConditionalCursor(index, t, wq[t]) for t in range(index.k)]
    frontier = _make_frontier(ctx.frontier_kind, index.k)
    values = index.matrix.values_f64
    if isinstance(frontier, SelectionTreeFrontier):
        for t, cur in enumerate(ctx.cursors):
            frontier.set_leaf(t, values[cur.current(), t] * wq[t])
        frontier.build()
    else:
        for t, cur in enumerate(ctx.cursors):
            frontier.push(values[cur.current(), t] * wq[t], t)
    ctx.frontier = frontier
    ctx._w = wq
    ctx.out_len = 0
    return ctx


class JointIterator:
    """Emits (j, t) entries of Z in joint order via the k-way merge.

    The full stream has exactly n*k entries; `current()` is the entry at the
    stream position, `get_next()` advances and returns the new current.
    """

    def __init__(self, index: GreedyIndex, w, frontier: str = "heap"):
        self.index = index
        self.w = as_query(w, index.k)
        self.values = index.matrix.values_f64
        self.cursors = [ConditionalCursor(index, t, self.w[t]) for t in range(index.k)]
        self.frontier = _make_frontier(frontier, index.k)
        if isinstance(self.frontier, SelectionTreeFrontier):
            for t, cur in enumerate(self.cursors):
                self.frontier.set_leaf(t, self.values[cur.current(), t] * self.w[t])
            self.frontier.build()
        else:
            for t, cur in enumerate(self.cursors):
                self.frontier.push(self.values[cur.current(), t] * self.w[t], t)
        self.pos = 0
        self.total = index.n * index.k

    def current(self) -> tuple[int, int]:
        z, t = self.frontier.top()
        return self.cursors[t].current(), t

    def has_next(self) -> bool:
        return self.pos < self.total - 1

    def get_next(self) -> tuple[int, int]:
        assert self.has_next(), "joint iterator exhausted"
        z, t = self.frontier.pop_max()
        cur = self.cursors[t]
        if cur.has_next():
            j = cur.get_next()
            self.frontier.reinsert(t, self.values[j, t] * self.w[t])
        else:
            self.frontier.retire(t)
        self.pos += 1
        return self.current()


def screen_basic(ctx: QueryContext, w, B: int) -> np.ndarray:
    """Collect the first B distinct ids from the joint stream (reference).

    Examines one joint emission per loop turn; pigeonholing over the k
    streams bounds the examined emissions by B*k (some stream must have
    produced B of the first B*k emissions, and within one stream ids never
    repeat). Runs on the python engine
    regardless of ctx.engine (this variant exists as the checkable reference
    for the improved screen, not as a production path).
    """
    B = ctx.clamp_budget(B)
    it = JointIterator(ctx.index, w, frontier=ctx.frontier_kind)
    visited, out = ctx.visited, ctx.out
    out_len = 0
    examined = 0
    j, t = it.current()
    while True:
        examined += 1
        if visited[j] == 0:
            visited[j] = 1
            out[out_len] = j
            out_len += 1
        if out_len >= B or not it.has_next():
            break
        j, t = it.get_next()
    ctx.out_len = out_len
    ctx.emission_count = examined
    ctx.pop_count = examined  # one frontier pop per examined emission
    ctx.advance_count = 0
    return ctx._take_output()


def screen_improved(ctx: QueryContext, w, B: int) -> np.ndarray:
    """Collect the first B distinct ids, skipping reinsertion of seen ids.

    Identical output to screen_basic under the shared tie order. Each outer
    iteration pops the frontier once; the inner advance walks the popped
    cursor past already-collected ids and reinserts its first fresh entry
    (or retires the cursor). Dispatches to the compiled kernel when
    ctx.engine == "compiled".
    """
    B = ctx.clamp_budget(B)
    if ctx.engine == "compiled":
        from . import fast
        return fast.screen_improved_compiled(ctx, w, B)
    return _screen_improved_py(ctx, w, B)


def _screen_improved_py(ctx: QueryContext, w, B: int) -> np.ndarray:
    wq = as_query(w, ctx.k)
    if ctx._w is None or not np.array_equal(ctx._w, wq):
        query_preprocess(ctx.index, wq, ctx)
    cursors, frontier = ctx.cursors, ctx.frontier
    values = ctx.index.matrix.values_f64
    visited, out = ctx.visited, ctx.out
    out_len = 0
    pops = 0
    advances = 0
    trace = ctx.trace if ctx.trace_enabled else None
    if trace is not None:
        trace.clear()
    while out_len < B:
        z, t = frontier.pop_max()
        assert t != SENTINEL_T, "frontier exhausted before budget met"
        pops += 1
        cur = cursors[t]
        j = cur.current()
        appended = None
        if visited[j] == 0:
            visited[j] = 1
            out[out_len] = j
            out_len += 1
            appended = j
        steps = 0
        reinserted = False
        while cur.has_next():
            j2 = cur.get_next()
            steps += 1
            if visited[j2] == 0:
                frontier.reinsert(t, values[j2, t] * wq[t])
                reinserted = True
                break
        if not reinserted:
            frontier.retire(t)
        advances += steps
        if trace is not None:
            trace.append(IterationRecord(z=z, t=t, appended=appended, advances=steps))
    ctx.out_len = out_len
    ctx.pop_count = pops
    ctx.advance_count = advances
    ctx.emission_count = pops + advances
    ctx._w = None  # cursors are consumed; force re-preprocess next time
    return ctx._take_output()


def greedy_rank_oracle(matrix, w) -> np.ndarray:
    """All n candidate ids ordered by descending max_t z[j,t] (test oracle).

    Built by a direct lexsort of all n*k implicit entries under the module
    tie order (z desc, t asc, cursor position asc) followed by first-
    appearance extraction — no cursor/frontier code is shared with the
    screens, so agreement is a two-route check.
    """
    wq = as_query(w, matrix.k)
    values = matrix.values_f64
    n, k = values.shape
    z = values * wq[None, :]
    pos = np.empty((n, k), dtype=np.int64)
    ids = np.arange(n)
    for t in range(k):
        col = values[:, t]
        if wq[t] > 0:
            order = np.lexsort((ids, -col))       # value desc, ties id asc
        else:
            order = np.lexsort((ids[::-1], col))  # value asc, ties id desc
        pos[order, t] = ids
    tt = np.broadcast_to(np.arange(k), (n, k))
    joint = np.lexsort((pos.ravel(), tt.ravel(), -z.ravel()))
    seq = joint // k
    _, first = np.unique(seq, return_index=True)
    return seq[np.sort(first)]
