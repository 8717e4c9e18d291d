"""Batch experiment harness with seeded, shardable trials.

Each trial draws everything it needs from its own stream (seed, domain,
trial index), so results are byte-identical whether trials run in one
process or across a pool.  Summaries embed the config, the thresholds they
were judged against, and the library version; threshold breaches and
zero-tolerance property failures are collected as violations.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from math import factorial

import numpy as np

from . import __version__, perms
from .defaults import DEFAULTS_VERSION, merged_thresholds
from .editing import (
    cut_segments,
    good_event_check,
    find_leftmost_repeats,
    gkt_check,
    kt_sequential_edit,
    sequential_edit,
    shotgun_edit,
)
from .fsr import (
    CycleTables,
    FeedbackLogic,
    age_ordered_lengths,
    decompose,
    relativize,
    same_cycle_indicator,
)
from .oracle import (
    exact_cycle_statistics,
    exact_honest_t,
    exact_moment_identity,
    exact_relativized_distribution,
)
from .pdstats import ks_statistic, metric_d, pd_sample, schedule_distance
from .rng import DOMAIN_REFERENCE, DOMAIN_TRIAL, make_rng
from .toggling import (
    RegionBox,
    RegionParams,
    happy_check,
    validate_region_params,
    verify_matching_claim,
)

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "run_pd_experiment",
    "run_same_cycle",
    "run_edit_verify",
    "run_toggle_verify",
    "run_oracle",
    "write_output",
    "desk_region_params",
]

EXPERIMENTS = ("pd", "same-cycle", "edit-verify", "toggle-verify", "oracle")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 12
    k: int = 2
    m: int = 1
    t: int = 0  # 0 means the experiment default
    trials: int = 100
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    jobs: int = 1
    dmax: int = 0  # toggle-verify region half-width; 0 means preset
    check_g_freq: bool = False
    thresholds: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must fit in 64 bits")
        if self.experiment != "oracle":
            if not 1 <= self.n <= 26:
                raise ConfigError("n must be in 1..26 for sampled experiments")
        if self.experiment in ("same-cycle", "toggle-verify") and not 1 <= self.k <= 6:
            raise ConfigError("k must be in 1..6")
        if self.experiment == "toggle-verify" and not 1 <= self.m <= 8:
            raise ConfigError("m must be in 1..8")
        try:
            merged_thresholds(self.thresholds)
        except KeyError as err:
            raise ConfigError(str(err)) from None


# ---------------------------------------------------------------------------
# trial bodies (top level so they pickle for the worker pool)


def _pd_trial(cfg: ExperimentConfig, index: int) -> dict:
    rng = make_rng(cfg.seed, DOMAIN_TRIAL, index)
    f = FeedbackLogic.random(cfg.n, rng)
    decomposition = decompose(f)
    big_n = 1 << cfg.n
    lengths = decomposition.lengths
    ages = age_ordered_lengths(f, rng, decomposition).lengths
    scaled = [x / big_n for x in lengths]
    ref_rng = make_rng(cfg.seed, DOMAIN_REFERENCE, index)
    pd_ref = pd_sample(ref_rng)
    pd_ref2 = pd_sample(ref_rng)
    return {
        "trial": index,
        "a1_over_n": ages[0] / big_n,
        "l1_over_n": lengths[0] / big_n,
        "l1_le_half": int(2 * lengths[0] <= big_n),
        "n_cycles": len(lengths),
        "d_to_pd_ref": metric_d(scaled, pd_ref),
        "d_pd_baseline": metric_d(pd_ref, pd_ref2),
    }


def _same_cycle_trial(cfg: ExperimentConfig, index: int) -> dict:
    rng = make_rng(cfg.seed, DOMAIN_TRIAL, index)
    f = FeedbackLogic.random(cfg.n, rng)
    edges = [int(x) for x in rng.integers(0, 1 << cfg.n, size=cfg.k)]
    tables = CycleTables.from_logic(f)
    sigma = relativize(f, edges, tables)
    return {
        "trial": index,
        "cocyclic": int(same_cycle_indicator(f, edges, tables)),
        "j_distinct": sigma.j,
        "sigma": "-".join(map(str, sigma.mapping)),
    }


def _edit_trial(cfg: ExperimentConfig, index: int) -> dict:
    rng = make_rng(cfg.seed, DOMAIN_TRIAL, index)
    n, t, k = cfg.n, cfg.t, cfg.k
    coins = rng.integers(0, 2, size=n + t, dtype=np.uint8)
    g = good_event_check(coins, n).overall
    detg_ok = 1
    if g:
        seq = sequential_edit(coins, n).output
        shot, _ = shotgun_edit(coins, n)
        same_output = bool(np.array_equal(seq, shot))
        same_repeats = find_leftmost_repeats(seq, n - 1) == find_leftmost_repeats(
            coins, n - 1
        )
        detg_ok = int(same_output and same_repeats)
    row = {"trial": index, "g": int(g), "detg_ok": detg_ok, "gkt": 0, "cut_ok": 1}
    if k >= 2:
        kcoins = rng.integers(0, 2, size=k * (n + t), dtype=np.uint8)
        gkt = gkt_check(kcoins, n, k, t)
        row["gkt"] = int(gkt)
        if gkt:
            long_bits = sequential_edit(kcoins, n).output
            cut = cut_segments(long_bits, n, k, t)
            _, segs, _ = kt_sequential_edit(kcoins, n, k, t)
            row["cut_ok"] = int(
                all(c.edges == s.edges for c, s in zip(cut, segs))
            )
    return row


def _toggle_trial(cfg: ExperimentConfig, index: int) -> dict:
    rng = make_rng(cfg.seed, DOMAIN_TRIAL, index)
    params = desk_region_params(cfg.n, cfg.k, cfg.m, cfg.t, cfg.dmax)
    f = FeedbackLogic.random(cfg.n, rng)
    starts = [int(x) for x in rng.integers(0, 1 << cfg.n, size=cfg.k)]
    happy, cls = happy_check(f, starts, params)
    row = {
        "trial": index,
        "happy": int(happy),
        "matching_ok": 1,
        "delta_cycles_ok": 1,
        "schedule_distance": "",
    }
    if happy:
        row["matching_ok"] = int(verify_matching_claim(cls))
        row["schedule_distance"] = float(schedule_distance(cls.schedule, cfg.k))
    # single-toggle cross-join invariant on an independent vertex draw
    v = int(rng.integers(0, 1 << (cfg.n - 1)))
    before = decompose(f).n_cycles
    after = decompose(f.toggled([v])).n_cycles
    row["delta_cycles_ok"] = int(abs(before - after) == 1)
    return row


_TRIAL_BODIES = {
    "pd": _pd_trial,
    "same-cycle": _same_cycle_trial,
    "edit-verify": _edit_trial,
    "toggle-verify": _toggle_trial,
}


def _run_trials(cfg: ExperimentConfig) -> list[dict]:
    body = _TRIAL_BODIES[cfg.experiment]
    if cfg.jobs <= 1:
        return [body(cfg, i) for i in range(cfg.trials)]
    with multiprocessing.Pool(cfg.jobs) as pool:
        return pool.map(partial(body, cfg), range(cfg.trials), chunksize=16)


# ---------------------------------------------------------------------------
# toggle-verify region presets, tuned so the happy event fires often at
# small widths: m boxes of equal width along the diagonal, separated by gaps
# of three displacement bounds.

_TOGGLE_PRESETS: dict[tuple[int, int], tuple[int, int]] = {
    (2, 1): (768, 16),
    (2, 2): (1280, 24),
    (3, 1): (768, 16),
    (3, 2): (1024, 16),
}


def desk_region_params(
    n: int, k: int, m: int, t: int = 0, dmax: int = 0
) -> RegionParams:
    preset_t, preset_d = _TOGGLE_PRESETS.get((k, m), (768, 16))
    t = t or preset_t
    dmax = dmax or preset_d
    gap = 3 * dmax
    width = (t - (m - 1) * gap) // m
    if width <= dmax:
        raise ConfigError(f"t={t} too small for m={m} regions with dmax={dmax}")
    boxes = tuple(
        RegionBox(dmax, ell * (width + gap), ell * (width + gap) + width - 1)
        for ell in range(m)
    )
    return RegionParams(n=n, m=m, t=t, boxes=boxes)


# ---------------------------------------------------------------------------
# experiment drivers


def _base_summary(cfg: ExperimentConfig, thresholds: dict) -> dict:
    return {
        "experiment": cfg.experiment,
        "config": asdict(cfg),
        "thresholds": thresholds,
        "defaults_version": DEFAULTS_VERSION,
        "version": __version__,
        "violations": [],
    }


def _check_interval(summary, thresholds, name, value) -> None:
    target = thresholds[f"{name}.target"]
    tol = thresholds[f"{name}.tol"]
    if abs(value - target) > tol:
        summary["violations"].append(
            f"{name} = {value:.5f} outside {target} +/- {tol}"
        )


def _check_max(summary, thresholds, name, value) -> None:
    bound = thresholds[name]
    if value > bound:
        summary["violations"].append(f"{name}: {value:.5f} above {bound}")


def run_pd_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Scaled cycle-length statistics of random logics against their
    stick-breaking limits."""
    cfg.validate()
    thresholds = merged_thresholds(cfg.thresholds)
    rows = _run_trials(cfg)
    a1 = [r["a1_over_n"] for r in rows]
    summary = _base_summary(cfg, thresholds)
    summary["mean_a1_over_n"] = sum(a1) / len(a1)
    summary["ks_a1_uniform"] = ks_statistic(a1, lambda x: min(max(x, 0.0), 1.0))
    summary["mean_l1_over_n"] = sum(r["l1_over_n"] for r in rows) / len(rows)
    summary["p_l1_le_half"] = sum(r["l1_le_half"] for r in rows) / len(rows)
    summary["mean_d_to_pd_ref"] = sum(r["d_to_pd_ref"] for r in rows) / len(rows)
    summary["mean_d_pd_baseline"] = sum(r["d_pd_baseline"] for r in rows) / len(rows)
    summary["mean_n_cycles"] = sum(r["n_cycles"] for r in rows) / len(rows)
    _check_interval(summary, thresholds, "pd.mean_a1", summary["mean_a1_over_n"])
    _check_max(summary, thresholds, "pd.ks_a1_max", summary["ks_a1_uniform"])
    _check_interval(summary, thresholds, "pd.mean_l1", summary["mean_l1_over_n"])
    _check_interval(summary, thresholds, "pd.p_l1_half", summary["p_l1_le_half"])
    return rows, summary


def run_same_cycle(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Frequency of k random windows sharing a cycle, and the law of the
    induced permutation."""
    cfg.validate()
    thresholds = merged_thresholds(cfg.thresholds)
    rows = _run_trials(cfg)
    summary = _base_summary(cfg, thresholds)
    summary["p_cocyclic"] = sum(r["cocyclic"] for r in rows) / len(rows)
    counts: dict[str, int] = {}
    degenerate = 0
    for r in rows:
        if r["j_distinct"] == cfg.k:
            counts[r["sigma"]] = counts.get(r["sigma"], 0) + 1
        else:
            degenerate += 1
    uniform = 1 / factorial(cfg.k)
    tv = 0.0
    for p in perms.all_perms(cfg.k):
        key = "-".join(map(str, p))
        tv += abs(counts.get(key, 0) / len(rows) - uniform)
    summary["tv_sigma_uniform"] = (tv + degenerate / len(rows)) / 2
    summary["p_degenerate"] = degenerate / len(rows)
    if cfg.k == 2:
        _check_interval(summary, thresholds, "same_cycle.p2", summary["p_cocyclic"])
    if cfg.k == 3:
        _check_interval(summary, thresholds, "same_cycle.p3", summary["p_cocyclic"])
        _check_max(summary, thresholds, "same_cycle.tv3_max", summary["tv_sigma_uniform"])
    return rows, summary


def run_edit_verify(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Good-event frequency and the zero-tolerance edit equivalences."""
    cfg.validate()
    if cfg.t == 0:
        cfg.t = 2048
    thresholds = merged_thresholds(cfg.thresholds)
    rows = _run_trials(cfg)
    summary = _base_summary(cfg, thresholds)
    n_g = sum(r["g"] for r in rows)
    summary["g_freq"] = n_g / len(rows)
    summary["g_count"] = n_g
    summary["detg_failures"] = sum(1 for r in rows if r["g"] and not r["detg_ok"])
    summary["gkt_count"] = sum(r["gkt"] for r in rows)
    summary["gkt_freq"] = summary["gkt_count"] / len(rows)
    summary["cut_failures"] = sum(1 for r in rows if r["gkt"] and not r["cut_ok"])
    if summary["detg_failures"]:
        summary["violations"].append(
            f"sequential/shotgun disagreement on {summary['detg_failures']} good trials"
        )
    if summary["cut_failures"]:
        summary["violations"].append(
            f"cut vs suspended-edit disagreement on {summary['cut_failures']} trials"
        )
    if cfg.check_g_freq and summary["g_freq"] < thresholds["edit.g_freq_min"]:
        summary["violations"].append(
            f"good event frequency {summary['g_freq']:.4f} below "
            f"{thresholds['edit.g_freq_min']}"
        )
    return rows, summary


def run_toggle_verify(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Happy-event campaigns: matching claim and cross-join invariants."""
    cfg.validate()
    thresholds = merged_thresholds(cfg.thresholds)
    params = desk_region_params(cfg.n, cfg.k, cfg.m, cfg.t, cfg.dmax)
    rows = _run_trials(cfg)
    summary = _base_summary(cfg, thresholds)
    summary["region_warnings"] = validate_region_params(params, cfg.n)
    n_happy = sum(r["happy"] for r in rows)
    summary["happy_count"] = n_happy
    summary["happy_rate"] = n_happy / len(rows)
    summary["matching_failures"] = sum(
        1 for r in rows if r["happy"] and not r["matching_ok"]
    )
    summary["delta_cycle_failures"] = sum(
        1 for r in rows if not r["delta_cycles_ok"]
    )
    dists = [r["schedule_distance"] for r in rows if r["schedule_distance"] != ""]
    summary["mean_schedule_distance"] = sum(dists) / len(dists) if dists else None
    if summary["matching_failures"]:
        summary["violations"].append(
            f"matching claim failed on {summary['matching_failures']} happy trials"
        )
    if summary["delta_cycle_failures"]:
        summary["violations"].append(
            f"single toggle changed cycle count by != 1 on "
            f"{summary['delta_cycle_failures']} trials"
        )
    return rows, summary


def run_oracle(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """All exact small-width identities; any mismatch is a violation."""
    cfg.validate()
    thresholds = merged_thresholds(cfg.thresholds)
    rows: list[dict] = []

    def add(name: str, ok: bool, detail: str) -> None:
        rows.append({"check": name, "ok": int(ok), "detail": detail})

    for n in (1, 2, 3):
        rep = exact_cycle_statistics(n)
        one_over_n = Fraction(1, 1 << n)
        add(
            f"cycle_statistics_n{n}",
            rep.quantities["total_probability"] == 1,
            f"E[A1/N]={rep.quantities['e_a1_over_n']}",
        )
        if n in (2, 3):
            add(
                f"p_a1_eq_1_n{n}",
                rep.quantities["p_a1_eq_1"] == one_over_n,
                str(rep.quantities["p_a1_eq_1"]),
            )
            add(
                f"p_a1_eq_n_n{n}",
                rep.quantities["p_a1_eq_n"] == one_over_n,
                str(rep.quantities["p_a1_eq_n"]),
            )
    for n, k in ((1, 2), (2, 2), (3, 2), (3, 3)):
        rep = exact_moment_identity(n, k)
        add(
            f"moment_identity_n{n}_k{k}",
            rep.quantities["difference"] == 0,
            f"both sides {rep.quantities['lhs_moment']}",
        )
    for n, t in ((2, 2), (3, 3)):
        add(f"honest_t_n{n}_t{t}", exact_honest_t(n, t), "distribution equality")
    for n, k in ((3, 2), (4, 2)):
        rep = exact_relativized_distribution(n, k)
        add(
            f"relativized_n{n}_k{k}",
            sum(rep.distributions["sigma"].values()) == 1,
            f"tv={rep.quantities['tv_to_uniform']}",
        )

    summary = _base_summary(cfg, thresholds)
    summary["checks"] = len(rows)
    summary["failed"] = sum(1 for r in rows if not r["ok"])
    if summary["failed"]:
        summary["violations"].append(f"{summary['failed']} exact identities failed")
    return rows, summary


RUNNERS = {
    "pd": run_pd_experiment,
    "same-cycle": run_same_cycle,
    "edit-verify": run_edit_verify,
    "toggle-verify": run_toggle_verify,
    "oracle": run_oracle,
}


# ---------------------------------------------------------------------------
# output


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_output(rows: list[dict], summary: dict, cfg: ExperimentConfig) -> None:
    """Write rows (and summary) to cfg.out; both are byte-deterministic."""
    if cfg.out is None:
        return
    if cfg.fmt == "csv":
        with open(cfg.out, "w") as fh:
            fh.write(_csv_text(rows))
        with open(cfg.out + ".summary.json", "w") as fh:
            fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    else:
        payload = {"summary": summary, "rows": rows}
        with open(cfg.out, "w") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
