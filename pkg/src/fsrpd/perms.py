"""Small helpers for permutations of {1..k} in one-line tuple form.

``p[x-1]`` is the image of x.  Composition is right to left: compose(p, q)
applies q first.  The canonical index of a permutation is its lexicographic
rank (the Lehmer code read as a factorial-base number), so index 0 is the
identity.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial

Perm = tuple[int, ...]


def identity(k: int) -> Perm:
    return tuple(range(1, k + 1))


def transposition(k: int, a: int, b: int) -> Perm:
    if not (1 <= a <= k and 1 <= b <= k):
        raise ValueError(f"transposition ({a} {b}) out of range for k={k}")
    out = list(range(1, k + 1))
    out[a - 1], out[b - 1] = b, a
    return tuple(out)


def compose(p: Perm, q: Perm) -> Perm:
    """p after q: (compose(p, q))(x) = p(q(x))."""
    return tuple(p[q[x - 1] - 1] for x in range(1, len(p) + 1))


def all_perms(k: int) -> list[Perm]:
    """All of S_k in lexicographic (Lehmer index) order."""
    return [tuple(p) for p in permutations(range(1, k + 1))]


def perm_index(p: Perm) -> int:
    """Lexicographic rank of p among permutations of its size."""
    k = len(p)
    remaining = sorted(p)
    idx = 0
    for pos, value in enumerate(p):
        r = remaining.index(value)
        idx += r * factorial(k - pos - 1)
        remaining.pop(r)
    return idx


def perm_from_index(k: int, idx: int) -> Perm:
    if not 0 <= idx < factorial(k):
        raise ValueError(f"index {idx} out of range for S_{k}")
    remaining = list(range(1, k + 1))
    out = []
    for pos in range(k):
        f = factorial(k - pos - 1)
        r, idx = divmod(idx, f)
        out.append(remaining.pop(r))
    return tuple(out)


def cycle_count(p: Perm) -> int:
    seen = [False] * len(p)
    count = 0
    for start in range(len(p)):
        if seen[start]:
            continue
        count += 1
        cur = start
        while not seen[cur]:
            seen[cur] = True
            cur = p[cur] - 1
    return count
