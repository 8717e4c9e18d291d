"""Editing coin-toss sequences into register walks.

A random bit sequence rarely has the de Bruijn property (equal (n-1)-windows
followed consistently), so two edits are defined:

* the sequential edit walks left to right, learning feedback bits on first
  vertex visits and forcing the output bit whenever the bit is already known;
* the shotgun edit just complements the final bit of the right copy of every
  leftmost n-long repeat of the raw coins.

On the good event G (six conditions on the repeat structure of the coins) the
two edits agree and leftmost (n-1)-repeats carry over unchanged; those facts
are checked, never assumed.  The (k,t)-variant suspends editing for n bits at
the start of each of k blocks, producing k walks under one shared logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fsr import Edge, FeedbackLogic, Segment, Vertex

__all__ = [
    "Repeat",
    "EditOutcome",
    "GoodEventReport",
    "ColoredRepeat",
    "WithinRepeat",
    "as_bits",
    "find_leftmost_repeats",
    "sequential_edit",
    "shotgun_edit",
    "has_de_bruijn_property",
    "good_event_check",
    "verify_detg",
    "kt_sequential_edit",
    "cut_segments",
    "segment_from_bits",
    "gkt_check",
    "colored_repeats",
]

_HASH_MOD = (1 << 61) - 1
_HASH_BASE = 1_000_003


def as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit sequence entries must be 0 or 1")
    return arr


def _packed_grams(bits: np.ndarray, m: int) -> np.ndarray:
    """Each m-window packed into an int64, first bit most significant."""
    windows = np.lib.stride_tricks.sliding_window_view(bits, m)
    powers = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return windows @ powers


def _gram_groups(bits: np.ndarray, m: int) -> dict[int, list[int]]:
    """Positions of each m-window keyed by its value (or 61-bit hash)."""
    groups: dict[int, list[int]] = {}
    if m <= 62:
        for i, g in enumerate(_packed_grams(bits, m)):
            groups.setdefault(int(g), []).append(i)
        return groups
    # windows too wide to pack exactly: rolling hash, verified on use
    if bits.size < m:
        return groups
    shift = pow(_HASH_BASE, m - 1, _HASH_MOD)
    h = 0
    for b in bits[:m]:
        h = (h * _HASH_BASE + int(b)) % _HASH_MOD
    groups.setdefault(h, []).append(0)
    for i in range(1, bits.size - m + 1):
        h = ((h - int(bits[i - 1]) * shift) * _HASH_BASE + int(bits[i + m - 1])) % _HASH_MOD
        groups.setdefault(h, []).append(i)
    return groups


@dataclass(frozen=True, order=True)
class Repeat:
    """A leftmost m-long repeat: equal windows at i < j, not extendable left."""

    i: int
    j: int
    m: int

    def to_json(self) -> str:
        import json

        return json.dumps({"i": self.i, "j": self.j, "m": self.m})


def find_leftmost_repeats(s, m: int) -> list[Repeat]:
    """All leftmost m-long repeats of s.

    Windows are grouped by packed value (64-bit hashed above width 62, with
    exact confirmation), then pairs are kept when either the left copy starts
    at 0 or the preceding bits differ.
    """
    bits = as_bits(s)
    if m < 1 or m > bits.size:
        raise ValueError(f"repeat length {m} out of range for {bits.size} bits")
    exact = m <= 62
    out = []
    for positions in _gram_groups(bits, m).values():
        if len(positions) < 2:
            continue
        # leftmost pairs: the i=0 copy against everything, else pairs whose
        # preceding bits differ
        by_pred: dict[int, list[int]] = {0: [], 1: []}
        for p in positions:
            if p > 0:
                by_pred[int(bits[p - 1])].append(p)
        for i in positions:
            if i == 0:
                for j in positions:
                    if j > 0:
                        out.append((i, j))
        for i in by_pred[0]:
            for j in by_pred[1]:
                out.append((min(i, j), max(i, j)))
    repeats = []
    for i, j in sorted(set(out)):
        if not exact and not np.array_equal(bits[i : i + m], bits[j : j + m]):
            continue  # hash collision
        repeats.append(Repeat(i, j, m))
    return repeats


@dataclass
class EditOutcome:
    """Sequential edit result.

    ``actual_edits`` and ``potential_edits`` carry the step index i of Rule 2
    (the changed output bit itself sits at position i + n).
    """

    output: np.ndarray
    learned: dict[Vertex, int]
    actual_edits: list[int]
    potential_edits: list[int]


def sequential_edit(coins, n: int) -> EditOutcome:
    """Edit coins into a sequence with the de Bruijn property.

    Rule 1 copies the first n bits.  Rule 2 then forces each next bit when
    the feedback bit of the current vertex is already learned (a potential
    edit, an actual edit when the forced bit disagrees with the coin);
    otherwise the feedback bit is learned so that the coin is kept.
    """
    c = as_bits(coins)
    if c.size < n:
        raise ValueError(f"need at least n={n} coins, got {c.size}")
    t = c.size - n
    b = [int(x) for x in c[:n]]
    learned: dict[int, int] = {}
    actual = []
    potential = []
    vmask = (1 << (n - 1)) - 1
    v = 0
    for s in range(1, n):
        v = ((v << 1) | b[s]) & vmask
    for i in range(t):
        # v is the vertex (b[i+1], ..., b[i+n-1])
        known = learned.get(v)
        if known is None:
            bit = int(c[i + n])
            learned[v] = bit ^ b[i]
        else:
            bit = b[i] ^ known
            potential.append(i)
            if bit != c[i + n]:
                actual.append(i)
        b.append(bit)
        v = ((v << 1) | bit) & vmask
    return EditOutcome(np.array(b, dtype=np.uint8), learned, actual, potential)


def shotgun_edit(coins, n: int) -> tuple[np.ndarray, list[Repeat]]:
    """Complement the bit at r(J) = j + n - 1 of every leftmost n-repeat."""
    c = as_bits(coins)
    if c.size < n:
        raise ValueError(f"need at least n={n} coins, got {c.size}")
    repeats = find_leftmost_repeats(c, n)
    out = c.copy()
    for r in repeats:
        out[r.j + n - 1] = c[r.j + n - 1] ^ 1
    return out, repeats


def has_de_bruijn_property(bits, n: int) -> bool:
    """Whether the successors of equal (n-1)-windows are consistent with some
    feedback logic."""
    b = as_bits(bits)
    constraints: dict[int, int] = {}
    vmask = (1 << (n - 1)) - 1
    v = 0
    for s in range(1, n):
        v = ((v << 1) | int(b[s])) & vmask
    for p in range(n, b.size):
        fv = int(b[p]) ^ int(b[p - n])
        if constraints.setdefault(v, fv) != fv:
            return False
        v = ((v << 1) | int(b[p])) & vmask
    return True


@dataclass(frozen=True)
class GoodEventReport:
    a: bool
    b: bool
    c: bool
    d: bool
    e: bool
    f: bool

    @property
    def overall(self) -> bool:
        return self.a and self.b and self.c and self.d and self.e and self.f

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "a": self.a,
                "b": self.b,
                "c": self.c,
                "d": self.d,
                "e": self.e,
                "f": self.f,
                "overall": self.overall,
            }
        )


def _intervals_overlap(lo1: int, hi1: int, lo2: int, hi2: int) -> bool:
    return lo1 <= hi2 and lo2 <= hi1


def _first_generation_words(
    bits: np.ndarray, edit_positions: Sequence[int], h: int
) -> list[tuple[int, int, int]]:
    """(value, start, flipped position) of every h-long first-generation word:
    a plain window with exactly the bit at one edit position complemented."""
    grams = _packed_grams(bits, h) if bits.size >= h else np.empty(0, np.int64)
    words = []
    for p in sorted(set(edit_positions)):
        for s in range(max(0, p - h + 1), min(p, bits.size - h) + 1):
            value = int(grams[s]) ^ (1 << (h - 1 - (p - s)))
            words.append((value, s, p))
    return words


def good_event_check(coins, n: int) -> GoodEventReport:
    """Evaluate the six good-event conditions on a coin sequence.

    (a) no later n-window is within Hamming distance 1 of the initial one;
    (b) no left copy of a leftmost n-repeat meets any right copy;
    (c) left copies are pairwise disjoint, likewise right copies;
    (d) no (n-1)-long first-generation word equals a plain (n-1)-window or
        another first-generation word;
    (e) no shotgun edit position touches a leftmost (n-1)-repeat or the bits
        just before its two copies;
    (f) there is no (2n-1)-repeat anywhere.
    """
    c = as_bits(coins)
    if c.size < n:
        raise ValueError(f"need at least n={n} coins, got {c.size}")
    rep_n = find_leftmost_repeats(c, n)
    edit_positions = sorted({r.j + n - 1 for r in rep_n})

    grams_n = _packed_grams(c, n)
    x = grams_n ^ grams_n[0]
    near = (x[1:] == 0) | ((x[1:] & (x[1:] - 1)) == 0)
    cond_a = not bool(near.any())

    cond_b = True
    for r1 in rep_n:
        for r2 in rep_n:
            if _intervals_overlap(r1.i, r1.i + n - 1, r2.j, r2.j + n - 1):
                cond_b = False
    cond_c = True
    for idx, r1 in enumerate(rep_n):
        for r2 in rep_n[idx + 1 :]:
            if _intervals_overlap(r1.i, r1.i + n - 1, r2.i, r2.i + n - 1):
                cond_c = False
            if _intervals_overlap(r1.j, r1.j + n - 1, r2.j, r2.j + n - 1):
                cond_c = False

    h = n - 1
    cond_d = True
    if h >= 1 and c.size >= h:
        zero_values = set(int(g) for g in _packed_grams(c, h))
        seen: dict[int, tuple[int, int]] = {}
        for value, s, p in _first_generation_words(c, edit_positions, h):
            if value in zero_values:
                cond_d = False
            prev = seen.get(value)
            if prev is not None and prev != (s, p):
                cond_d = False
            seen.setdefault(value, (s, p))

    cond_e = True
    if h >= 1 and c.size >= h:
        for r in find_leftmost_repeats(c, h):
            banned = set(range(r.i, r.i + h)) | set(range(r.j, r.j + h))
            banned |= {r.i - 1, r.j - 1}
            if any(p in banned for p in edit_positions):
                cond_e = False

    m_f = 2 * n - 1
    if c.size >= m_f:
        grams_f = _packed_grams(c, m_f)
        cond_f = np.unique(grams_f).size == grams_f.size
    else:
        cond_f = True

    return GoodEventReport(cond_a, cond_b, cond_c, cond_d, cond_e, cond_f)


def _leftmost_positions(bits: np.ndarray, m: int) -> list[tuple[int, int]]:
    return [(r.i, r.j) for r in find_leftmost_repeats(bits, m)]


def verify_detg(coins, n: int) -> bool:
    """Check the two good-event consequences; vacuously true off G.

    On G the sequential and shotgun outputs must be identical and the output
    must have its leftmost (n-1)-repeats exactly where the coins do.  Any
    counterexample is a bug, so the return value should always be True.
    """
    c = as_bits(coins)
    if not good_event_check(c, n).overall:
        return True
    seq = sequential_edit(c, n).output
    shot, _ = shotgun_edit(c, n)
    if not np.array_equal(seq, shot):
        return False
    if n >= 2:
        if _leftmost_positions(seq, n - 1) != _leftmost_positions(c, n - 1):
            return False
    return True


def kt_sequential_edit(
    coins, n: int, k: int, t: int
) -> tuple[list[Edge], list[Segment], dict[Vertex, int]]:
    """Sequentially edit k(n+t) coins into k walks under one shared logic.

    Editing is suspended for the first n coins of each block, which are
    copied verbatim as that walk's starting window; Rule 2 then runs for t
    steps, remembering feedback bits across blocks.
    """
    c = as_bits(coins)
    if c.size != k * (n + t):
        raise ValueError(f"need exactly k(n+t) = {k * (n + t)} coins, got {c.size}")
    learned: dict[int, int] = {}
    vmask = (1 << (n - 1)) - 1
    starts = []
    segments = []
    for a in range(k):
        off = a * (n + t)
        b = [int(x) for x in c[off : off + n]]
        e = 0
        for bit in b:
            e = (e << 1) | bit
        starts.append(e)
        edges = [e]
        v = e & vmask
        for i in range(t):
            known = learned.get(v)
            if known is None:
                bit = int(c[off + n + i])
                learned[v] = bit ^ b[i]
            else:
                bit = b[i] ^ known
            b.append(bit)
            v = ((v << 1) | bit) & vmask
            edges.append(((edges[-1] & vmask) << 1) | bit)
        segments.append(Segment(n, tuple(edges)))
    return starts, segments, learned


def segment_from_bits(bits, n: int) -> Segment:
    """Read a walk of overlapping n-windows off a bit string."""
    b = as_bits(bits)
    if b.size < n:
        raise ValueError(f"need at least n={n} bits, got {b.size}")
    e = 0
    for bit in b[:n]:
        e = (e << 1) | int(bit)
    edges = [e]
    mask = (1 << n) - 1
    for bit in b[n:]:
        e = ((e << 1) | int(bit)) & mask
        edges.append(e)
    return Segment(n, tuple(edges))


def cut_segments(bits, n: int, k: int, t: int) -> list[Segment]:
    """Cut one k(n+t)-bit walk into k walks of t steps."""
    b = as_bits(bits)
    if b.size != k * (n + t):
        raise ValueError(f"need exactly k(n+t) = {k * (n + t)} bits, got {b.size}")
    return [
        segment_from_bits(b[a * (n + t) : (a + 1) * (n + t)], n) for a in range(k)
    ]


def gkt_check(coins, n: int, k: int, t: int) -> bool:
    """The good event for (k,t)-editing: plain G on all k(n+t) coins, and no
    (n-1)-window overlapping a suspension matches any other window within
    Hamming distance 1."""
    c = as_bits(coins)
    if c.size != k * (n + t):
        raise ValueError(f"need exactly k(n+t) = {k * (n + t)} coins, got {c.size}")
    if not good_event_check(c, n).overall:
        return False
    h = n - 1
    grams_h = _packed_grams(c, h)
    for a in range(1, k):
        for j in range(a * (n + t) - n + 2, a * (n + t)):
            if j < 0 or j >= grams_h.size:
                continue
            x = grams_h ^ grams_h[j]
            near = (x == 0) | ((x & (x - 1)) == 0)
            near[j] = False
            if bool(near.any()):
                return False
    return True


@dataclass(frozen=True, order=True)
class ColoredRepeat:
    """Vertex i of segment a equals vertex j of segment b, colors a < b.

    ``leftmost`` records whether the match cannot be extended one step left.
    """

    a: int
    b: int
    i: int
    j: int
    leftmost: bool

    def __post_init__(self):
        if not 1 <= self.a < self.b:
            raise ValueError(f"need 1 <= a < b, got ({self.a}, {self.b})")


@dataclass(frozen=True, order=True)
class WithinRepeat:
    a: int
    i: int
    j: int
    leftmost: bool


def _vertex_lists(segments) -> list[list[int]]:
    out = []
    for seg in segments:
        out.append(seg.vertices() if hasattr(seg, "vertices") else list(seg))
    return out


def colored_repeats(segments) -> tuple[list[ColoredRepeat], list[WithinRepeat]]:
    """All vertex coincidences among k segments.

    Returns matches between two different segments (colored by the 1-based
    segment pair) and, separately, matches within a single segment.
    """
    verts = _vertex_lists(segments)
    occurrences: dict[int, list[tuple[int, int]]] = {}
    for a, vlist in enumerate(verts, start=1):
        for i, v in enumerate(vlist):
            occurrences.setdefault(v, []).append((a, i))
    cross = []
    within = []
    for occ in occurrences.values():
        if len(occ) < 2:
            continue
        for u in range(len(occ)):
            for w in range(u + 1, len(occ)):
                (a, i), (b, j) = occ[u], occ[w]
                if a == b:
                    lm = i == 0 or verts[a - 1][i - 1] != verts[b - 1][j - 1]
                    within.append(WithinRepeat(a, i, j, lm))
                else:
                    lm = (
                        i == 0
                        or j == 0
                        or verts[a - 1][i - 1] != verts[b - 1][j - 1]
                    )
                    cross.append(ColoredRepeat(a, b, i, j, lm))
    return sorted(cross), sorted(within)
