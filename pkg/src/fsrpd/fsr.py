"""Feedback shift register permutations on the de Bruijn graph.

A width-n register is driven by an (n-1)-bit feedback function f through
x[t+n] = x[t] XOR f(x[t+1], ..., x[t+n-1]), which acts on n-bit windows as a
permutation of the 2^n edges of the de Bruijn graph.

Encoding conventions (fixed throughout the package):

* An edge is an integer in [0, 2^n) holding the window (x0, ..., x[n-1])
  with x0 as the most significant bit.
* A vertex is an integer in [0, 2^(n-1)) holding (x1, ..., x[n-1]) with x1
  most significant.  The head vertex of an edge e is ``e & (2^(n-1) - 1)``
  and its tail vertex is ``e >> 1``.
* One step is ``((e & vmask) << 1) | (top_bit ^ f(e & vmask))`` - a single
  shift plus a table lookup.

n = 1 is supported: the vertex space collapses to the single empty tuple and
f is a constant bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit

__all__ = [
    "FeedbackLogic",
    "Segment",
    "CycleDecomposition",
    "AgeOrderedLengths",
    "RelativizedPermutation",
    "CycleTables",
    "MemoryBudgetError",
    "step",
    "segment",
    "permutation_table",
    "decompose",
    "age_ordered_lengths",
    "relativize",
    "same_cycle_indicator",
]

Edge = int
Vertex = int

DEFAULT_MEMORY_BUDGET = 4 << 30  # bytes allowed for decompose scratch


class MemoryBudgetError(MemoryError):
    pass


class FeedbackLogic:
    """A feedback function f: {0,1}^(n-1) -> {0,1}, stored as a truth table.

    ``table[v]`` is the feedback bit of vertex v.  Two logics are equal iff
    their widths and all table bits are equal.
    """

    __slots__ = ("n", "table")

    def __init__(self, n: int, table):
        if n < 1:
            raise ValueError(f"width must be >= 1, got {n}")
        arr = np.ascontiguousarray(table, dtype=np.uint8)
        if arr.ndim != 1 or arr.shape[0] != 1 << (n - 1):
            raise ValueError(
                f"truth table for width {n} must have {1 << (n - 1)} bits, "
                f"got shape {arr.shape}"
            )
        if arr.max(initial=0) > 1:
            raise ValueError("truth table entries must be 0 or 1")
        arr.flags.writeable = False
        self.n = n
        self.table = arr

    @property
    def n_edges(self) -> int:
        return 1 << self.n

    @property
    def n_vertices(self) -> int:
        return 1 << (self.n - 1)

    def eval(self, v: Vertex) -> int:
        return int(self.table[v])

    def toggled(self, vertices: Iterable[Vertex]) -> "FeedbackLogic":
        """The logic with its value complemented at the given vertices."""
        table = self.table.copy()
        for v in vertices:
            if not 0 <= v < self.n_vertices:
                raise ValueError(f"vertex {v} out of range for width {self.n}")
            table[v] ^= 1
        return FeedbackLogic(self.n, table)

    @classmethod
    def constant(cls, n: int, bit: int = 0) -> "FeedbackLogic":
        return cls(n, np.full(1 << (n - 1), bit, dtype=np.uint8))

    @classmethod
    def from_int(cls, n: int, bits: int) -> "FeedbackLogic":
        """Table packed into an int, bit v of ``bits`` being table[v]."""
        nv = 1 << (n - 1)
        return cls(n, [(bits >> v) & 1 for v in range(nv)])

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "FeedbackLogic":
        return cls(n, rng.integers(0, 2, size=1 << (n - 1), dtype=np.uint8))

    def to_int(self) -> int:
        out = 0
        for v in range(self.n_vertices - 1, -1, -1):
            out = (out << 1) | int(self.table[v])
        return out

    def to_text(self) -> str:
        """Header line plus a hex dump, most significant vertex first."""
        digits = max(1, (self.n_vertices + 3) // 4)
        return f"fsr n={self.n}\n{self.to_int():0{digits}x}\n"

    @classmethod
    def from_text(cls, text: str) -> "FeedbackLogic":
        lines = text.strip().splitlines()
        if len(lines) != 2 or not lines[0].startswith("fsr n="):
            raise ValueError("expected 'fsr n=<n>' header plus one hex line")
        n = int(lines[0].split("=", 1)[1])
        return cls.from_int(n, int(lines[1], 16))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeedbackLogic):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.n, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"FeedbackLogic(n={self.n}, table=0x{self.to_int():x})"


def _check_edge(f: FeedbackLogic, e: Edge) -> None:
    if not 0 <= e < f.n_edges:
        raise ValueError(f"edge {e} out of range for width {f.n}")


def step(f: FeedbackLogic, e: Edge) -> Edge:
    """One register step: (x0,...,x[n-1]) -> (x1,...,x[n-1], x0 ^ f(...))."""
    _check_edge(f, e)
    v = e & (f.n_vertices - 1)
    return (v << 1) | ((e >> (f.n - 1)) ^ f.eval(v))


@dataclass(frozen=True)
class Segment:
    """A walk of t+1 consecutive edges, with vertex and bit views.

    The t+2 vertices are the tail vertices of the edges followed by the head
    vertex of the last edge; the t+n bits spell the same walk bitwise.
    """

    n: int
    edges: tuple[Edge, ...]

    @property
    def t(self) -> int:
        return len(self.edges) - 1

    def vertices(self) -> list[Vertex]:
        vmask = (1 << (self.n - 1)) - 1
        out = [e >> 1 for e in self.edges]
        out.append(self.edges[-1] & vmask)
        return out

    def bits(self) -> np.ndarray:
        first = self.edges[0]
        out = np.empty(self.t + self.n, dtype=np.uint8)
        for s in range(self.n):
            out[s] = (first >> (self.n - 1 - s)) & 1
        for i, e in enumerate(self.edges[1:]):
            out[self.n + i] = e & 1
        return out


def segment(f: FeedbackLogic, e: Edge, t: int) -> Segment:
    """Seg(f, e, t): the t+1 edges visited from e."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    _check_edge(f, e)
    vmask = f.n_vertices - 1
    shift = f.n - 1
    table = f.table
    edges = [e]
    cur = e
    for _ in range(t):
        v = cur & vmask
        cur = (v << 1) | ((cur >> shift) ^ int(table[v]))
        edges.append(cur)
    return Segment(f.n, tuple(edges))


def permutation_table(f: FeedbackLogic) -> np.ndarray:
    """The full permutation as an integer array indexed by edge.

    Edges share a successor pattern across the two halves of the edge space:
    for e = top*2^(n-1) + v the image is 2v + (top ^ f(v)), so the upper half
    is the lower half with the last bit flipped.
    """
    dtype = np.int32 if f.n <= 30 else np.int64
    v = np.arange(f.n_vertices, dtype=dtype)
    lower = (v << 1) | f.table
    return np.concatenate([lower, lower ^ 1])


@njit(cache=True)
def _walk_lengths(table, n):  # pragma: no cover - exercised via decompose
    """Visit every edge once (bit-packed visited map), stepping directly on
    the truth table; cycles start at their minimum edge."""
    n_edges = 1 << n
    vmask = (1 << (n - 1)) - 1
    shift = n - 1
    visited = np.zeros((n_edges + 7) >> 3, dtype=np.uint8)
    reps = np.empty(n_edges, dtype=np.int32)
    lengths = np.empty(n_edges, dtype=np.int32)
    n_cycles = 0
    for start in range(n_edges):
        if visited[start >> 3] & np.uint8(1 << (start & 7)):
            continue
        e = start
        length = 0
        while True:
            visited[e >> 3] |= np.uint8(1 << (e & 7))
            length += 1
            v = e & vmask
            e = (v << 1) | ((e >> shift) ^ table[v])
            if e == start:
                break
        reps[n_cycles] = start
        lengths[n_cycles] = length
        n_cycles += 1
    return lengths[:n_cycles].copy(), reps[:n_cycles].copy()


@njit(cache=True)
def _walk_tables(table, n):  # pragma: no cover - exercised via CycleTables
    """Like _walk_lengths, also recording each edge's cycle and position."""
    n_edges = 1 << n
    vmask = (1 << (n - 1)) - 1
    shift = n - 1
    visited = np.zeros((n_edges + 7) >> 3, dtype=np.uint8)
    cycle_id = np.empty(n_edges, dtype=np.int32)
    pos = np.empty(n_edges, dtype=np.int32)
    reps = np.empty(n_edges, dtype=np.int32)
    lengths = np.empty(n_edges, dtype=np.int32)
    n_cycles = 0
    for start in range(n_edges):
        if visited[start >> 3] & np.uint8(1 << (start & 7)):
            continue
        e = start
        length = 0
        while True:
            visited[e >> 3] |= np.uint8(1 << (e & 7))
            cycle_id[e] = n_cycles
            pos[e] = length
            length += 1
            v = e & vmask
            e = (v << 1) | ((e >> shift) ^ table[v])
            if e == start:
                break
        reps[n_cycles] = start
        lengths[n_cycles] = length
        n_cycles += 1
    return lengths[:n_cycles].copy(), reps[:n_cycles].copy(), cycle_id, pos


def _check_budget(f: FeedbackLogic, memory_budget: int) -> None:
    needed = f.n_edges * 17  # int32 id/pos/reps/lengths plus visited bits
    if needed > memory_budget:
        raise MemoryBudgetError(
            f"decomposing width n={f.n} needs about {needed} bytes of "
            f"scratch, over the memory budget of {memory_budget} bytes"
        )


@dataclass(frozen=True)
class CycleTables:
    """Per-edge cycle membership for one logic.

    ``cycle_id[e]`` indexes into ``lengths``/``reps``; ``pos[e]`` is the
    number of steps from the cycle representative (its minimum edge) to e.
    """

    n: int
    lengths: np.ndarray
    reps: np.ndarray
    cycle_id: np.ndarray
    pos: np.ndarray

    @classmethod
    def from_logic(
        cls, f: FeedbackLogic, memory_budget: int = DEFAULT_MEMORY_BUDGET
    ) -> "CycleTables":
        _check_budget(f, memory_budget)
        lengths, reps, cycle_id, pos = _walk_tables(f.table, f.n)
        return cls(f.n, lengths, reps, cycle_id, pos)

    def steps_between(self, x: Edge, y: Edge) -> int:
        """Steps to walk from x forward to y; x and y must share a cycle."""
        c = self.cycle_id[x]
        if self.cycle_id[y] != c:
            raise ValueError("edges lie on different cycles")
        length = self.lengths[c]
        return int((self.pos[y] - self.pos[x]) % length)


@dataclass(frozen=True)
class CycleDecomposition:
    """Cycle lengths in nonincreasing order with the minimum edge of each."""

    n: int
    lengths: tuple[int, ...]
    representatives: tuple[Edge, ...]

    @property
    def n_cycles(self) -> int:
        return len(self.lengths)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "lengths": list(self.lengths)})


def decompose(
    f: FeedbackLogic, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> CycleDecomposition:
    """Full cycle decomposition, visiting each edge once via a bit-packed
    visited map."""
    _check_budget(f, memory_budget)
    lengths, reps = _walk_lengths(f.table, f.n)
    order = sorted(
        range(len(lengths)), key=lambda c: (-int(lengths[c]), int(reps[c]))
    )
    return CycleDecomposition(
        f.n,
        tuple(int(lengths[c]) for c in order),
        tuple(int(reps[c]) for c in order),
    )


@dataclass(frozen=True)
class AgeOrderedLengths:
    lengths: tuple[int, ...]


def age_ordered_lengths(
    f: FeedbackLogic,
    rng: np.random.Generator,
    decomposition: CycleDecomposition | None = None,
) -> AgeOrderedLengths:
    """Cycle lengths in age order.

    The first cycle is the one containing a uniformly random edge, the next
    the one containing a uniform edge among those not yet seen, and so on;
    equivalently, cycles are removed by successive size-biased picks.
    """
    if decomposition is None:
        decomposition = decompose(f)
    remaining = [int(x) for x in decomposition.lengths]
    out = []
    total = sum(remaining)
    while remaining:
        u = rng.random() * total
        acc = 0.0
        idx = len(remaining) - 1
        for i, length in enumerate(remaining):
            acc += length
            if u < acc:
                idx = i
                break
        out.append(remaining.pop(idx))
        total -= out[-1]
    return AgeOrderedLengths(tuple(out))


@dataclass(frozen=True)
class RelativizedPermutation:
    """A permutation of {1..j} in one-line form: mapping[i-1] = sigma(i)."""

    j: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, self.j + 1)):
            raise ValueError(f"not a permutation of 1..{self.j}: {self.mapping}")

    @property
    def is_unicyclic(self) -> bool:
        seen = 1
        cur = self.mapping[0]
        while cur != 1:
            cur = self.mapping[cur - 1]
            seen += 1
        return seen == self.j


def _dedupe(edges: Sequence[Edge]) -> list[Edge]:
    out = []
    for e in edges:
        if e not in out:
            out.append(e)
    return out


def relativize(
    f: FeedbackLogic,
    edges: Sequence[Edge],
    tables: CycleTables | None = None,
) -> RelativizedPermutation:
    """The permutation induced on the sampled edges.

    Duplicates are removed left to right, leaving j distinct edges; sigma(i)
    is the label of the first sampled edge on the walk that starts one step
    after edge i.
    """
    if len(edges) < 1:
        raise ValueError("need at least one edge")
    for e in edges:
        _check_edge(f, e)
    distinct = _dedupe(edges)
    if tables is None:
        tables = CycleTables.from_logic(f)
    mapping = []
    for e in distinct:
        x = step(f, e)
        cx = tables.cycle_id[x]
        best_label = -1
        best_dist = None
        for label, target in enumerate(distinct, start=1):
            if tables.cycle_id[target] != cx:
                continue
            dist = tables.steps_between(x, target)
            if best_dist is None or dist < best_dist:
                best_dist = dist
                best_label = label
        mapping.append(best_label)
    return RelativizedPermutation(len(distinct), tuple(mapping))


def same_cycle_indicator(
    f: FeedbackLogic,
    edges: Sequence[Edge],
    tables: CycleTables | None = None,
) -> bool:
    """Whether all the given edges lie on one cycle of the permutation."""
    if len(edges) < 2:
        raise ValueError("need at least two edges")
    for e in edges:
        _check_edge(f, e)
    if tables is None:
        tables = CycleTables.from_logic(f)
    first = tables.cycle_id[edges[0]]
    return all(tables.cycle_id[e] == first for e in edges[1:])
