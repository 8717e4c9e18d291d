"""Toggle classes: controlled cross-join steps on families of walks.

Complementing a feedback bit at one vertex (a cross-join step) swaps the
successors of the two windows entering that vertex.  Given k walks, toggle
vertices are picked where two walks meet, inside m search regions laid out
along the time axis; when the same m vertices are picked under all 2^m
toggled variants (the happy event), the variants form a class whose induced
permutations on the k starting windows decompose as a fixed return matching
composed with a word of coin-flipped transpositions.

Search regions come either from the geometric schedule (thin rectangles
along the diagonal whose thinness relaxes while their time window shrinks,
keeping area constant) or from explicit raw-index boxes, which is how tests
exercise the machinery at small widths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from . import perms
from .defaults import THRESHOLDS
from .editing import _vertex_lists
from .fsr import (
    CycleTables,
    Edge,
    FeedbackLogic,
    Vertex,
    relativize,
    segment,
)

__all__ = [
    "RegionBox",
    "RegionParams",
    "ToggleClass",
    "toggle",
    "candidates",
    "choice",
    "happy_check",
    "schedule_of",
    "g_of",
    "return_matching",
    "verify_matching_claim",
    "validate_region_params",
]


def toggle(f: FeedbackLogic, vertices) -> FeedbackLogic:
    """The logic complemented on the given vertex set."""
    return f.toggled(set(vertices))


@dataclass(frozen=True)
class RegionBox:
    """An explicit search region: |i-j| <= dmax and lo <= i, j <= hi."""

    dmax: int
    lo: int
    hi: int


@dataclass(frozen=True)
class RegionParams:
    """Geometry of the m search regions for walks of length t at width n.

    Without overrides, region ell is the geometric-schedule rectangle:
    |i-j|/sqrt(N) strictly below r^(2*ell-2m-2) with both indices in
    [(ell-1)*t/m, (ell-1)*t/m + floor((t/m) * r^(-2(ell-1)))], where
    r^(2m+1) = N^0.1.
    """

    n: int
    m: int
    t: int
    boxes: tuple[RegionBox, ...] | None = None

    def __post_init__(self):
        if self.m < 1 or self.t < 1:
            raise ValueError("need m >= 1 and t >= 1")
        if self.boxes is not None and len(self.boxes) != self.m:
            raise ValueError(f"need {self.m} region boxes, got {len(self.boxes)}")
        if self.boxes is None and self.t % self.m:
            raise ValueError("geometric schedule needs m | t")

    @property
    def big_n(self) -> int:
        return 1 << self.n

    @property
    def ratio(self) -> float:
        return self.big_n ** (0.1 / (2 * self.m + 1))

    @classmethod
    def geometric(cls, n: int, m: int, t: int | None = None) -> "RegionParams":
        """The natural schedule, t defaulting to m * N^0.6 (rounded to a
        multiple of m)."""
        if t is None:
            t = m * round((1 << n) ** 0.6)
        return cls(n=n, m=m, t=t)

    def thinness(self, ell: int) -> float:
        """Natural-scale half-thickness of region ell."""
        return self.ratio ** (2 * ell - 2 * self.m - 2)

    def window(self, ell: int) -> tuple[int, int]:
        """Inclusive raw-index time window of region ell."""
        if self.boxes is not None:
            box = self.boxes[ell - 1]
            return box.lo, box.hi
        lo = (ell - 1) * (self.t // self.m)
        width = math.floor((self.t / self.m) * self.ratio ** (-2 * (ell - 1)))
        return lo, lo + width

    def displacement_bound(self, ell: int) -> float:
        """Raw-index bound on |i-j| inside region ell."""
        if self.boxes is not None:
            return float(self.boxes[ell - 1].dmax)
        return self.thinness(ell) * math.sqrt(self.big_n)

    def contains(self, ell: int, i: int, j: int) -> bool:
        lo, hi = self.window(ell)
        if not (lo <= min(i, j) and max(i, j) <= hi):
            return False
        if self.boxes is not None:
            return abs(i - j) <= self.boxes[ell - 1].dmax
        return abs(i - j) / math.sqrt(self.big_n) < self.thinness(ell)


def candidates(
    segments, ell: int, params: RegionParams
) -> list[tuple[int, int, int, int]]:
    """All cross-walk vertex matches (i, j, a, b) inside region ell, in
    choice order: lexicographic on (i+j, max(i,j), a, b).

    Positions are restricted to 1..t so that both windows entering the
    shared vertex lie on the walks themselves; a toggle there reroutes
    nothing outside the k walks.
    """
    verts = _vertex_lists(segments)
    if not 1 <= ell <= params.m:
        raise ValueError(f"region index {ell} out of range 1..{params.m}")
    lo, hi = params.window(ell)
    lo = max(lo, 1)
    found = []
    for a in range(1, len(verts) + 1):
        va = verts[a - 1]
        hi_a = min(hi, params.t, len(va) - 1)
        index_a: dict[int, list[int]] = {}
        for i in range(lo, hi_a + 1):
            index_a.setdefault(va[i], []).append(i)
        for b in range(a + 1, len(verts) + 1):
            vb = verts[b - 1]
            hi_b = min(hi, params.t, len(vb) - 1)
            for j in range(lo, hi_b + 1):
                for i in index_a.get(vb[j], ()):
                    if params.contains(ell, i, j):
                        found.append((i, j, a, b))
    found.sort(key=lambda c: (c[0] + c[1], max(c[0], c[1]), c[2], c[3]))
    return found


def _segments_for(f: FeedbackLogic, starts: Sequence[Edge], t: int):
    return [segment(f, e, t) for e in starts]


def choice(
    f: FeedbackLogic, starts: Sequence[Edge], ell: int, params: RegionParams
) -> Vertex | None:
    """The shared vertex of the first candidate in region ell, else None."""
    segs = _segments_for(f, starts, params.t)
    cands = candidates(segs, ell, params)
    if not cands:
        return None
    i, j, a, b = cands[0]
    return segs[a - 1].vertices()[i]


@dataclass(frozen=True)
class ToggleClass:
    """A happy family: base logic with zeroed toggle bits, the m toggle
    vertices, the color-pair schedule, and the k starting windows."""

    base: FeedbackLogic
    vertices: tuple[Vertex, ...]
    schedule: tuple[tuple[int, int], ...]
    starts: tuple[Edge, ...]
    params: RegionParams

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("toggle vertices must be distinct")
        for v in self.vertices:
            if self.base.eval(v) != 0:
                raise ValueError("class leader must be 0 at every toggle vertex")
        for a, b in self.schedule:
            if not 1 <= a < b <= len(self.starts):
                raise ValueError(f"schedule letter ({a},{b}) out of range")

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def k(self) -> int:
        return len(self.starts)

    def cousin(self, bits: Sequence[int]) -> FeedbackLogic:
        """The class member whose bit at vertices[i] is bits[i]."""
        return self.base.toggled([v for v, bit in zip(self.vertices, bits) if bit])

    def cousins(self) -> list[FeedbackLogic]:
        return [self.cousin(bits) for bits in product((0, 1), repeat=self.m)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.base.n,
                "vertices": list(self.vertices),
                "schedule": [list(ab) for ab in self.schedule],
                "starts": list(self.starts),
            }
        )


def happy_check(
    f: FeedbackLogic, starts: Sequence[Edge], params: RegionParams
) -> tuple[bool, ToggleClass | None]:
    """Test the happy event and build the toggle class on success.

    Happy means: every region yields a (distinct) choice vertex, the k walks
    of length t visit k(t+1) distinct windows under every one of the 2^m
    toggled variants, and every variant reproduces exactly the same m choice
    vertices.  (Requiring no cycling of the whole class, not just of f,
    excludes small-width false positives where a recolored walk would swallow
    another start.)
    """
    t = params.t
    segs = _segments_for(f, starts, t)
    winners = []
    for ell in range(1, params.m + 1):
        cands = candidates(segs, ell, params)
        if not cands:
            return False, None
        winners.append(cands[0])
    verts = [s.vertices() for s in segs]
    vsharp = tuple(verts[a - 1][i] for (i, j, a, b) in winners)
    if len(set(vsharp)) != params.m:
        return False, None

    f0_bits = tuple(f.eval(v) for v in vsharp)  # the subset turning f into f0
    schedule: tuple[tuple[int, int], ...] | None = None
    for bits in product((0, 1), repeat=params.m):
        cousin = f.toggled([v for v, bit in zip(vsharp, bits) if bit])
        segs_u = segs if not any(bits) else _segments_for(cousin, starts, t)
        all_edges = [e for s in segs_u for e in s.edges]
        if len(set(all_edges)) != len(starts) * (t + 1):
            return False, None
        pairs = []
        for ell in range(1, params.m + 1):
            cands = candidates(segs_u, ell, params)
            if not cands:
                return False, None
            i, j, a, b = cands[0]
            if segs_u[a - 1].vertices()[i] != vsharp[ell - 1]:
                return False, None
            pairs.append((a, b))
        if bits == f0_bits:
            schedule = tuple(pairs)  # this cousin is the class leader f0
    f0 = f.toggled([v for v in vsharp if f.eval(v) == 1])
    assert schedule is not None
    return True, ToggleClass(f0, vsharp, schedule, tuple(starts), params)


def schedule_of(cls: ToggleClass) -> tuple[tuple[int, int], ...]:
    """Recompute the schedule from the class leader: letter ell is the walk
    pair carrying the winning region-ell match under the base logic."""
    segs = _segments_for(cls.base, cls.starts, cls.params.t)
    out = []
    for ell in range(1, cls.m + 1):
        cands = candidates(segs, ell, cls.params)
        if not cands:
            raise ValueError("class leader has an empty region; not a happy class")
        i, j, a, b = cands[0]
        if segs[a - 1].vertices()[i] != cls.vertices[ell - 1]:
            raise ValueError("class leader choices disagree with stored vertices")
        out.append((a, b))
    return tuple(out)


def g_of(cls: ToggleClass, fstar: FeedbackLogic) -> perms.Perm:
    """The schedule word evaluated at a class member: the product of the
    letter transpositions where fstar is 1, first letter applied first."""
    if fstar.n != cls.base.n:
        raise ValueError("width mismatch")
    off = np.flatnonzero(fstar.table != cls.base.table)
    if not set(off.tolist()) <= set(cls.vertices):
        raise ValueError("logic is not a member of this toggle class")
    g = perms.identity(cls.k)
    for (a, b), v in zip(cls.schedule, cls.vertices):
        if fstar.eval(v):
            g = perms.compose(perms.transposition(cls.k, a, b), g)
    return g


def return_matching(
    cls: ToggleClass, tables: CycleTables | None = None
) -> perms.Perm:
    """Walk from each male end (last edge of each base-logic walk) to the
    first starting window reached; the result is a permutation of 1..k."""
    if tables is None:
        tables = CycleTables.from_logic(cls.base)
    male_ends = [
        segment(cls.base, e, cls.params.t).edges[-1] for e in cls.starts
    ]
    out = []
    for end in male_ends:
        cx = tables.cycle_id[end]
        best = None
        best_dist = None
        for label, target in enumerate(cls.starts, start=1):
            if tables.cycle_id[target] != cx:
                continue
            dist = tables.steps_between(end, target)
            dist = dist if dist > 0 else tables.lengths[cx]
            if best_dist is None or dist < best_dist:
                best, best_dist = label, dist
        if best is None:
            raise RuntimeError("male end shares no cycle with any start")
        out.append(best)
    g_hat = tuple(out)
    if sorted(g_hat) != list(range(1, cls.k + 1)):
        raise RuntimeError(f"return matching is not a permutation: {g_hat}")
    return g_hat


def verify_matching_claim(cls: ToggleClass) -> bool:
    """For every class member, the permutation induced on the starts must be
    the return matching composed after the schedule word.  A failure means a
    bug or a false-positive happy check."""
    g_hat = return_matching(cls)
    for bits in product((0, 1), repeat=cls.m):
        fstar = cls.cousin(bits)
        sigma = relativize(fstar, list(cls.starts))
        expected = perms.compose(g_hat, g_of(cls, fstar))
        if sigma.mapping != expected:
            return False
    return True


def validate_region_params(params: RegionParams, n: int) -> list[str]:
    """Sanity warnings for region geometry.

    Emits a warning when a region's expected match count (window * width / N)
    is too small to find anything, or when window * width^3 / N^2 is large
    enough that displaced matches are likely to collide with region
    boundaries.
    """
    big_n = 1 << n
    warnings = []
    area_min = THRESHOLDS["region.area_min"]
    collision_max = THRESHOLDS["region.collision_max"]
    for ell in range(1, params.m + 1):
        d = params.displacement_bound(ell)
        lo, hi = params.window(ell)
        window = float(hi - lo)
        area = window * d / big_n
        collision = window * d**3 / big_n**2
        if area < area_min:
            warnings.append(
                f"region {ell}: expected matches t*d/N = {area:.4g} below "
                f"{area_min:g}; region likely empty"
            )
        if collision > collision_max:
            warnings.append(
                f"region {ell}: collision figure t*d^3/N^2 = {collision:.4g} "
                f"above {collision_max:g}; displaced matches likely collide"
            )
    return warnings
