"""Tests for group deviation, band pooling, and reviewer radicalness.

Frozen numbers come from the brute-force oracles in tests/oracles.py.
"""

from __future__ import annotations

import random

import pytest

from peerflow.consensus import (
    DetectorConfig,
    ReviewerRadicalness,
    build_radicalness_report,
    estimation_bands,
    flag_arbitration,
    group_sd,
    pooled_group_sd,
    rank_groups,
    rank_radicalness,
    reviewer_radicalness,
)
from peerflow.errors import ValidationError
from peerflow.scoring import ReviewGroup

from oracles import oracle_group_sd, oracle_pooled_sd, oracle_radicalness


def make_group(scores, author_id="author", task_id="t1"):
    entries = tuple((f"{author_id}.r{i}", s) for i, s in enumerate(scores))
    return ReviewGroup(task_id=task_id, author_id=author_id, entries=entries)


# ---------------------------------------------------------------------------
# group deviation
# ---------------------------------------------------------------------------


def test_group_sd_population_form():
    dev = group_sd(make_group([80, 90, 100]))
    assert dev.z == pytest.approx(8.16496580927726, abs=1e-9)
    assert dev.raw_z == dev.z
    assert dev.group_size == 3
    assert not dev.pooled


def test_group_sd_singleton_is_zero():
    assert group_sd(make_group([42])).z == 0.0


def test_group_sd_divergent_group():
    assert group_sd(make_group([95, 60, 58, 62, 61])).z == pytest.approx(
        13.96280774056565, abs=1e-9
    )


def test_pooled_small_groups_share_a_band():
    """Means 86 and 90 both land in the (85, 90] band and pool together."""
    groups = [make_group([84, 86, 88], "a1"), make_group([86, 90, 94], "a2")]
    devs = pooled_group_sd(groups)
    assert [d.z for d in devs] == pytest.approx(
        [2.581988897471611, 2.581988897471611], abs=1e-9
    )
    assert [d.raw_z for d in devs] == pytest.approx(
        [1.632993161855452, 3.265986323710904], abs=1e-9
    )
    assert all(d.pooled for d in devs)


def test_pooled_spec_pair():
    groups = [make_group([84, 86, 88], "a1"), make_group([88, 90, 92], "a2")]
    devs = pooled_group_sd(groups)
    assert [d.z for d in devs] == pytest.approx([1.633, 1.633], abs=1e-3)


def test_large_group_keeps_own_deviation():
    groups = [make_group([84, 86, 88], "a1"), make_group([90, 70, 50, 30, 10], "a2")]
    devs = pooled_group_sd(groups)
    assert not devs[1].pooled
    assert devs[1].z == pytest.approx(28.284271247461902, abs=1e-9)


def test_degenerate_band_equals_own_deviation():
    """A band holding a single small group just returns that group's S.D."""
    (dev,) = pooled_group_sd([make_group([70, 80])])
    assert dev.pooled
    assert dev.z == pytest.approx(5.0, abs=1e-12)
    assert dev.z == pytest.approx(dev.raw_z, abs=1e-12)


def test_band_bounds_are_upper_inclusive():
    groups = [
        make_group([84, 86, 88], "a1"),  # mean 86
        make_group([88, 90, 92], "a2"),  # mean 90, still in (85, 90]
        make_group([89, 91, 93], "a3"),  # mean 91, next band
    ]
    bands = estimation_bands(groups)
    assert [(b.lower, b.upper, b.author_ids) for b in bands] == [
        (85.0, 90.0, ("a1", "a2")),
        (90.0, 95.0, ("a3",)),
    ]


def test_band_partition_includes_zero_mean():
    bands = estimation_bands([make_group([0], "a0")])
    assert [(b.lower, b.upper) for b in bands] == [(0.0, 5.0)]


def test_pooled_matches_oracle_on_random_collections():
    rng = random.Random(20260814)
    for _ in range(300):
        n = rng.randint(1, 12)
        raw = [
            [rng.randint(0, 100) for _ in range(rng.randint(1, 8))] for _ in range(n)
        ]
        groups = [make_group(scores, f"a{i}") for i, scores in enumerate(raw)]
        expected = oracle_pooled_sd(raw)
        got = [d.z for d in pooled_group_sd(groups)]
        assert got == pytest.approx(expected, abs=1e-9)


# ---------------------------------------------------------------------------
# consensus report
# ---------------------------------------------------------------------------


def test_rank_groups_orders_descending_with_stable_ties():
    groups = [
        make_group([50, 50, 50, 50, 50], "calm"),
        make_group([90, 70, 50, 30, 10], "wild"),
        make_group([95, 60, 58, 62, 61], "split"),
        make_group([10, 30, 50, 70, 90], "wild2"),
    ]
    report = rank_groups("t1", groups)
    assert [e.author_id for e in report.entries] == ["wild", "wild2", "split", "calm"]


def test_rank_groups_rejects_foreign_tasks():
    with pytest.raises(ValidationError):
        rank_groups("t1", [make_group([50, 60], task_id="t2")])


def test_flag_arbitration_threshold_inclusive():
    groups = [make_group([90, 70, 50, 30, 10], "wild"), make_group([60, 62], "calm")]
    report = rank_groups("t1", groups)
    flagged = flag_arbitration(report, threshold=30.0)
    assert [e.author_id for e in flagged.flagged] == []  # 28.28 stays below 30
    flagged = flag_arbitration(report, threshold=28.0)
    assert [e.author_id for e in flagged.flagged] == ["wild"]
    exact = flag_arbitration(report, threshold=report.entries[0].z)
    assert [e.author_id for e in exact.flagged] == ["wild"]


def test_flag_arbitration_uses_pooled_value():
    # Two tight size-2 groups whose own S.D. is small, pooled with a wild
    # size-2 group in the same band: pooling lifts everyone's z above the
    # threshold, and flagging follows the pooled value.
    groups = [
        make_group([58, 60], "tight1"),
        make_group([59, 61], "tight2"),
        make_group([20, 98], "wild"),
    ]
    report = flag_arbitration(rank_groups("t1", groups), threshold=20.0)
    assert {e.author_id for e in report.flagged} == {"tight1", "tight2", "wild"}
    assert all(e.pooled for e in report.entries)


# ---------------------------------------------------------------------------
# reviewer radicalness
# ---------------------------------------------------------------------------


def test_radicalness_accumulates_across_tasks():
    entry = reviewer_radicalness("r9", {"t1": [80, 90], "t2": [70, 90, 80]})
    assert entry.z_r == pytest.approx(50.0, abs=1e-9)
    assert entry.review_count == 5
    assert dict(entry.per_task_means) == {"t1": 85.0, "t2": 80.0}


def test_radicalness_keeps_square():
    """The statistic is the mean squared deviation, deliberately un-rooted."""
    entry = reviewer_radicalness("r1", {"t1": [40, 60]})
    assert entry.z_r == pytest.approx(100.0, abs=1e-12)  # not 10.0


def test_radicalness_constant_scorer_is_zero():
    entry = reviewer_radicalness("flat", {"t1": [70, 70, 70], "t2": [70, 70]})
    assert entry.z_r == 0.0


def test_radicalness_empty_history_rejected():
    with pytest.raises(ValidationError):
        reviewer_radicalness("r1", {})
    with pytest.raises(ValidationError):
        reviewer_radicalness("r1", {"t1": []})


def test_radicalness_matches_oracle_on_random_histories():
    rng = random.Random(1999)
    for _ in range(300):
        history = {
            f"t{t}": [rng.randint(0, 100) for _ in range(rng.randint(1, 6))]
            for t in range(rng.randint(1, 6))
        }
        entry = reviewer_radicalness("r", history)
        assert entry.z_r == pytest.approx(oracle_radicalness(history), abs=1e-9)


def test_rank_radicalness_sorts_ascending_and_picks_warn_candidates():
    histories = {
        "steady": {"t1": [70, 72], "t2": [68, 70, 71]},
        "flat": {"t1": [95, 95], "t2": [95, 96, 95]},
        "varied": {"t1": [30, 90], "t2": [10, 95, 60]},
    }
    report = rank_radicalness(histories, warn_threshold=50.0, min_reviews=5)
    assert [e.reviewer_id for e in report.entries] == ["flat", "steady", "varied"]
    assert [e.reviewer_id for e in report.warn_candidates] == ["flat", "steady"]

    # Raising the review minimum empties the candidate list.
    report = rank_radicalness(histories, warn_threshold=50.0, min_reviews=10)
    assert report.warn_candidates == ()


def test_rank_radicalness_skips_reviewers_without_reviews():
    report = rank_radicalness({"quiet": {"t1": []}, "active": {"t1": [50, 60]}})
    assert [e.reviewer_id for e in report.entries] == ["active"]


def test_build_report_tie_breaks_by_reviewer_id():
    entries = [
        ReviewerRadicalness("zed", 10.0, 12),
        ReviewerRadicalness("abe", 10.0, 12),
    ]
    report = build_radicalness_report(entries)
    assert [e.reviewer_id for e in report.entries] == ["abe", "zed"]


def test_report_payload_rounds_to_two_decimals():
    report = rank_groups("t1", [make_group([80, 90, 100], "a1")])
    payload = report.to_payload()
    assert payload["entries"][0]["z"] == 8.16

    entry = reviewer_radicalness("r1", {"t1": [80, 90, 100]})
    assert entry.to_payload()["z_r"] == 66.67


def test_detector_config_validation():
    DetectorConfig()
    with pytest.raises(ValidationError):
        DetectorConfig(band_width=0)
    with pytest.raises(ValidationError):
        DetectorConfig(pooling_size=0)
    with pytest.raises(ValidationError):
        DetectorConfig(arbitration_threshold=-1)
