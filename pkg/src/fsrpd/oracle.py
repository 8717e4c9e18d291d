"""Exhaustive ground truth at tiny widths.

Every feedback function (and where needed every tuple of starting windows)
is enumerated with plain integer arithmetic, so the reported quantities are
exact rationals.  These anchors calibrate every Monte Carlo tolerance used
elsewhere; nothing here goes through the fast numpy/numba paths.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .editing import sequential_edit
from .perms import all_perms

__all__ = [
    "ExactReport",
    "exact_cycle_statistics",
    "exact_moment_identity",
    "exact_honest_t",
    "exact_relativized_distribution",
]

MAX_N_LOGIC_ENUM = 5
MAX_N_MOMENT = 4
MAX_K_MOMENT = 3
MAX_N_HONEST = 3
MAX_T_HONEST = 4


@dataclass
class ExactReport:
    n: int
    quantities: dict[str, Fraction] = field(default_factory=dict)
    distributions: dict[str, dict[str, Fraction]] = field(default_factory=dict)

    def to_json(self) -> str:
        def enc(q: Fraction) -> dict:
            return {"num": q.numerator, "den": q.denominator}

        return json.dumps(
            {
                "n": self.n,
                "quantities": {k: enc(v) for k, v in self.quantities.items()},
                "distributions": {
                    name: {k: enc(v) for k, v in dist.items()}
                    for name, dist in self.distributions.items()
                },
            },
            sort_keys=True,
        )


def _step_packed(table: int, n: int, e: int) -> int:
    v = e & ((1 << (n - 1)) - 1)
    return (v << 1) | ((e >> (n - 1)) ^ ((table >> v) & 1))


def _cycle_lengths(table: int, n: int) -> list[int]:
    n_edges = 1 << n
    seen = [False] * n_edges
    lengths = []
    for start in range(n_edges):
        if seen[start]:
            continue
        e = start
        length = 0
        while not seen[e]:
            seen[e] = True
            length += 1
            e = _step_packed(table, n, e)
        lengths.append(length)
    return lengths


def _cycle_ids(table: int, n: int) -> list[int]:
    n_edges = 1 << n
    ids = [-1] * n_edges
    next_id = 0
    for start in range(n_edges):
        if ids[start] >= 0:
            continue
        e = start
        while ids[e] < 0:
            ids[e] = next_id
            e = _step_packed(table, n, e)
        next_id += 1
    return ids


def exact_cycle_statistics(n: int) -> ExactReport:
    """Enumerate all feedback functions of width n.

    Reports the exact distribution of sorted cycle-length vectors, the
    probability that a random window sits on a length-1 or full cycle, and
    the exact mean of (first age-ordered cycle length)/2^n.
    """
    if n > MAX_N_LOGIC_ENUM:
        raise ValueError(f"logic enumeration capped at n={MAX_N_LOGIC_ENUM}")
    n_logics = 1 << (1 << (n - 1))
    n_edges = 1 << n
    vector_counts: Counter[tuple[int, ...]] = Counter()
    sum_len_sq = 0  # sum over (f, e) of the cycle length of e
    fixed_points = 0
    full_cycles = 0
    for table in range(n_logics):
        lengths = _cycle_lengths(table, n)
        vector_counts[tuple(sorted(lengths, reverse=True))] += 1
        sum_len_sq += sum(length * length for length in lengths)
        fixed_points += sum(1 for length in lengths if length == 1)
        if len(lengths) == 1:
            full_cycles += 1
    report = ExactReport(n)
    report.quantities["e_a1_over_n"] = Fraction(sum_len_sq, n_logics * n_edges * n_edges)
    report.quantities["p_a1_eq_1"] = Fraction(fixed_points, n_logics * n_edges)
    report.quantities["p_a1_eq_n"] = Fraction(full_cycles, n_logics)
    report.quantities["p_full_cycle"] = Fraction(full_cycles, n_logics)
    report.distributions["cycle_lengths"] = {
        ",".join(map(str, vec)): Fraction(count, n_logics)
        for vec, count in sorted(vector_counts.items())
    }
    total = sum(report.distributions["cycle_lengths"].values())
    report.quantities["total_probability"] = total
    return report


def exact_moment_identity(n: int, k: int) -> ExactReport:
    """Both sides of E[(A1/N)^(k-1)] = P(k random windows share a cycle).

    The left side sums cycle lengths over (f, e); the right side walks all
    N^k window tuples and tests co-cyclicity directly.  Their difference is
    reported and must be exactly zero.
    """
    if n > MAX_N_MOMENT or k > MAX_K_MOMENT or k < 2:
        raise ValueError(
            f"moment identity capped at n<={MAX_N_MOMENT}, 2<=k<={MAX_K_MOMENT}"
        )
    n_logics = 1 << (1 << (n - 1))
    n_edges = 1 << n
    lhs = Fraction(0)
    rhs_count = 0
    for table in range(n_logics):
        lengths = _cycle_lengths(table, n)
        ids = _cycle_ids(table, n)
        lhs += Fraction(
            sum(length * (length ** (k - 1)) for length in lengths),
            n_edges**k,
        )
        for tup in product(range(n_edges), repeat=k):
            first = ids[tup[0]]
            if all(ids[e] == first for e in tup[1:]):
                rhs_count += 1
    report = ExactReport(n)
    report.quantities["lhs_moment"] = lhs / n_logics
    report.quantities["rhs_cocyclic"] = Fraction(rhs_count, n_logics * n_edges**k)
    report.quantities["difference"] = (
        report.quantities["lhs_moment"] - report.quantities["rhs_cocyclic"]
    )
    return report


def _segment_bits(table: int, n: int, e: int, t: int) -> tuple[int, ...]:
    bits = [(e >> (n - 1 - s)) & 1 for s in range(n)]
    cur = e
    for _ in range(t):
        cur = _step_packed(table, n, cur)
        bits.append(cur & 1)
    return tuple(bits)


def exact_honest_t(n: int, t: int) -> bool:
    """Whether sequential editing of uniform coins induces exactly the same
    distribution on n+t long walks as a uniform (logic, start) pair."""
    if n > MAX_N_HONEST or t > MAX_T_HONEST:
        raise ValueError(f"capped at n<={MAX_N_HONEST}, t<={MAX_T_HONEST}")
    coin_counts: Counter[tuple[int, ...]] = Counter()
    for coins in product((0, 1), repeat=n + t):
        coin_counts[tuple(sequential_edit(coins, n).output.tolist())] += 1
    n_coins = 1 << (n + t)
    walk_counts: Counter[tuple[int, ...]] = Counter()
    n_logics = 1 << (1 << (n - 1))
    for table in range(n_logics):
        for e in range(1 << n):
            walk_counts[_segment_bits(table, n, e, t)] += 1
    n_walks = n_logics << n
    left = {key: Fraction(c, n_coins) for key, c in coin_counts.items()}
    right = {key: Fraction(c, n_walks) for key, c in walk_counts.items()}
    return left == right


def _relativized(table: int, n: int, edges: tuple[int, ...]) -> tuple[int, ...]:
    distinct: list[int] = []
    for e in edges:
        if e not in distinct:
            distinct.append(e)
    targets = set(distinct)
    mapping = []
    for e in distinct:
        cur = _step_packed(table, n, e)
        while cur not in targets:
            cur = _step_packed(table, n, cur)
        mapping.append(distinct.index(cur) + 1)
    return tuple(mapping)


def exact_relativized_distribution(n: int, k: int) -> ExactReport:
    """Exact law of the permutation induced on k sampled windows.

    The sample may contain duplicates, in which case the induced permutation
    lives on fewer than k symbols; that mass is reported separately.  The
    distance to uniform charges the full k-symbol shortfall.
    """
    if n > MAX_N_MOMENT or k > MAX_K_MOMENT:
        raise ValueError(f"capped at n<={MAX_N_MOMENT}, k<={MAX_K_MOMENT}")
    n_logics = 1 << (1 << (n - 1))
    n_edges = 1 << n
    counts: Counter[tuple[int, ...]] = Counter()
    for table in range(n_logics):
        for tup in product(range(n_edges), repeat=k):
            counts[_relativized(table, n, tup)] += 1
    denom = n_logics * n_edges**k
    dist = {perm: Fraction(c, denom) for perm, c in counts.items()}
    report = ExactReport(n)
    uniform = Fraction(1, len(all_perms(k)))
    tv = Fraction(0)
    for perm in all_perms(k):
        tv += abs(dist.get(perm, Fraction(0)) - uniform)
    degenerate = sum((p for perm, p in dist.items() if len(perm) < k), Fraction(0))
    report.quantities["tv_to_uniform"] = (tv + degenerate) / 2
    report.quantities["p_degenerate"] = degenerate
    report.distributions["sigma"] = {
        ",".join(map(str, perm)): p for perm, p in sorted(dist.items())
    }
    return report
