"""Versioned default thresholds for experiment verdicts and region warnings.

These are calibration data, not code: every experiment summary records the
thresholds it was judged against, and the command line can override any entry
with ``--threshold name=value``.
"""

DEFAULTS_VERSION = 1

THRESHOLDS: dict[str, float] = {
    # pd experiment (limit reproduction at moderate width)
    "pd.mean_a1.target": 0.50,
    "pd.mean_a1.tol": 0.02,
    "pd.ks_a1_max": 0.04,
    "pd.mean_l1.target": 0.624,
    "pd.mean_l1.tol": 0.02,
    "pd.p_l1_half.target": 0.307,
    "pd.p_l1_half.tol": 0.03,
    # same-cycle experiment
    "same_cycle.p2.target": 0.50,
    "same_cycle.p2.tol": 0.03,
    "same_cycle.p3.target": 0.333,
    "same_cycle.p3.tol": 0.035,
    "same_cycle.tv3_max": 0.06,
    # edit-verify experiment
    "edit.g_freq_min": 0.95,
    # search-region diagnostics
    "region.area_min": 1.0,
    "region.collision_max": 0.5,
}


def merged_thresholds(overrides: dict[str, float] | None = None) -> dict[str, float]:
    out = dict(THRESHOLDS)
    if overrides:
        unknown = set(overrides) - set(out)
        if unknown:
            raise KeyError(f"unknown thresholds: {sorted(unknown)}")
        out.update(overrides)
    return out
