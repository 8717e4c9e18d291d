"""Brute-force reference implementations used only by the tests.

Everything here favors directness over speed: windows are compared
elementwise, conditions are transcribed literally, and walks iterate the
step function one edge at a time.
"""

from __future__ import annotations

import numpy as np

from fsrpd.fsr import FeedbackLogic, step


def brute_leftmost_repeats(bits, m: int) -> list[tuple[int, int]]:
    """All leftmost m-repeats by comparing every window pair."""
    b = np.asarray(bits, dtype=np.uint8)
    windows = np.lib.stride_tricks.sliding_window_view(b, m)
    out = []
    for i in range(windows.shape[0]):
        for j in range(i + 1, windows.shape[0]):
            if not np.array_equal(windows[i], windows[j]):
                continue
            if i == 0 or b[i - 1] != b[j - 1]:
                out.append((i, j))
    return out


def brute_sequential_edit(bits, n: int) -> list[int]:
    """Rule 1 and Rule 2 transcribed with tuple-keyed feedback bits."""
    c = [int(x) for x in bits]
    out = c[:n]
    learned: dict[tuple[int, ...], int] = {}
    for i in range(len(c) - n):
        vertex = tuple(out[i + 1 : i + n])
        if vertex in learned:
            out.append(out[i] ^ learned[vertex])
        else:
            learned[vertex] = out[i] ^ c[i + n]
            out.append(c[i + n])
    return out


def _hamming(a, b) -> int:
    return int(np.sum(np.asarray(a) != np.asarray(b)))


def brute_good_event(bits, n: int) -> dict[str, bool]:
    """The six conditions, from scratch, quadratic everywhere."""
    b = np.asarray(bits, dtype=np.uint8)
    length = b.size
    windows_n = np.lib.stride_tricks.sliding_window_view(b, n)
    rep_n = brute_leftmost_repeats(b, n)
    edits = sorted({j + n - 1 for _, j in rep_n})

    cond_a = True
    for i in range(1, windows_n.shape[0]):
        if _hamming(windows_n[i], windows_n[0]) <= 1:
            cond_a = False

    def overlap(x, y, u, v):
        return x <= v and u <= y

    cond_b = True
    for i1, j1 in rep_n:
        for i2, j2 in rep_n:
            if overlap(i1, i1 + n - 1, j2, j2 + n - 1):
                cond_b = False
    cond_c = True
    for idx1 in range(len(rep_n)):
        for idx2 in range(idx1 + 1, len(rep_n)):
            (i1, j1), (i2, j2) = rep_n[idx1], rep_n[idx2]
            if overlap(i1, i1 + n - 1, i2, i2 + n - 1):
                cond_c = False
            if overlap(j1, j1 + n - 1, j2, j2 + n - 1):
                cond_c = False

    h = n - 1
    first_gen = []
    for p in edits:
        for s in range(max(0, p - h + 1), min(p, length - h) + 1):
            word = b[s : s + h].copy()
            word[p - s] ^= 1
            first_gen.append((tuple(word.tolist()), s, p))
    zero_gen = {
        tuple(b[s : s + h].tolist()) for s in range(length - h + 1)
    }
    cond_d = True
    for word, s, p in first_gen:
        if word in zero_gen:
            cond_d = False
        for word2, s2, p2 in first_gen:
            if (s, p) != (s2, p2) and word == word2:
                cond_d = False

    cond_e = True
    for i, j in brute_leftmost_repeats(b, h):
        banned = set(range(i, i + h)) | set(range(j, j + h)) | {i - 1, j - 1}
        for p in edits:
            if p in banned:
                cond_e = False

    cond_f = True
    m = 2 * n - 1
    if length >= m:
        seen = set()
        for s in range(length - m + 1):
            word = tuple(b[s : s + m].tolist())
            if word in seen:
                cond_f = False
            seen.add(word)

    return {
        "a": cond_a,
        "b": cond_b,
        "c": cond_c,
        "d": cond_d,
        "e": cond_e,
        "f": cond_f,
        "overall": cond_a and cond_b and cond_c and cond_d and cond_e and cond_f,
    }


def brute_bad_event(bits, n: int, k: int, t: int) -> bool:
    """The suspension bad event, transcribed literally."""
    b = np.asarray(bits, dtype=np.uint8)
    windows = np.lib.stride_tricks.sliding_window_view(b, n - 1)
    sus = []
    for a in range(1, k):
        sus.extend(range(a * (n + t) - n + 2, a * (n + t)))
    for j in sus:
        if not 0 <= j < windows.shape[0]:
            continue
        for i in range(windows.shape[0]):
            if i == j:
                continue
            if _hamming(windows[i], windows[j]) <= 1:
                return True
    return False


def brute_decompose(f: FeedbackLogic) -> list[int]:
    """Cycle lengths by walking with the public step function."""
    seen = set()
    lengths = []
    for start in range(f.n_edges):
        if start in seen:
            continue
        e = start
        length = 0
        while e not in seen:
            seen.add(e)
            length += 1
            e = step(f, e)
        lengths.append(length)
    return sorted(lengths, reverse=True)


def brute_relativize(f: FeedbackLogic, edges) -> tuple[int, ...]:
    """Walk-based relativization with a hard step cap."""
    distinct = []
    for e in edges:
        if e not in distinct:
            distinct.append(e)
    targets = set(distinct)
    mapping = []
    for e in distinct:
        cur = step(f, e)
        steps = 0
        while cur not in targets:
            cur = step(f, cur)
            steps += 1
            if steps > f.n_edges:
                raise RuntimeError("walk exceeded the number of edges")
        mapping.append(distinct.index(cur) + 1)
    return tuple(mapping)
