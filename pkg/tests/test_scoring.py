"""Tests for the score arithmetic.

Every frozen number in this file was produced by the independent oracles in
tests/oracles.py, not by the implementation under test.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peerflow.errors import ValidationError
from peerflow.scoring import (
    DEFAULT_RUBRIC,
    BonusDelta,
    CodeReview,
    MotivationParams,
    ReverseReview,
    ReviewGroup,
    Rubric,
    ScoreSheet,
    WeightConfig,
    compute_bonus,
    overall_score,
    score_code_review,
    score_reverse_review,
)

from oracles import oracle_bonus, oracle_overall


def make_group(scores, task_id="t1", author_id="author"):
    entries = tuple((f"r{i}", s) for i, s in enumerate(scores))
    return ReviewGroup(task_id=task_id, author_id=author_id, entries=entries)


def deltas_of(scores, params=None):
    return [b.delta for b in compute_bonus(make_group(scores), params)]


# ---------------------------------------------------------------------------
# bonus deltas
# ---------------------------------------------------------------------------


def test_bonus_tight_group_guard_off():
    """Spread 4 with the guard disabled: center rewarded, edges penalized."""
    params = MotivationParams(max_diff_min=0)
    assert deltas_of([100, 99, 98, 97, 96], params) == [-4.0, 0.0, 2.0, 0.0, -4.0]


def test_bonus_tight_group_default_guard():
    """Spread 4 under the default guard of 10: consensus, nothing moves."""
    assert deltas_of([100, 99, 98, 97, 96]) == [0.0, 0.0, 0.0, 0.0, 0.0]


def test_bonus_wide_group():
    assert deltas_of([90, 70, 50, 30, 10]) == [-4.0, 0.0, 2.0, 0.0, -4.0]


def test_bonus_guard_boundary_is_strict():
    """Spread equal to max_diff_min activates the deltas (strict <)."""
    assert deltas_of([100, 90]) == [-4.0, -4.0]
    assert deltas_of([99, 90]) == [0.0, 0.0]


def test_bonus_singleton_group():
    assert deltas_of([70]) == [0.0]


def test_bonus_boundary_tie_takes_favorable_segment():
    """A distance exactly on a segment bound earns the better outcome.

    With dyadic fractions the tie is exact: scores {80, 60} give D = 10 for
    both, equal to t2 * maxDiff = 0.5 * 20, so both reviewers stay at +a2
    instead of dropping to -p1.
    """
    params = MotivationParams(
        t1_frac=0.25, t2_frac=0.5, t3_frac=0.75, max_diff_min=0
    )
    assert deltas_of([80, 60], params) == [0.0, 0.0]


def test_bonus_preserves_reviewer_ids():
    group = ReviewGroup("t1", "a", (("ria", 90), ("rob", 70), ("eve", 50)))
    result = compute_bonus(group, MotivationParams(max_diff_min=0))
    assert [b.reviewer_id for b in result] == ["ria", "rob", "eve"]
    assert result == [
        BonusDelta("ria", -4.0),
        BonusDelta("rob", 2.0),
        BonusDelta("eve", -4.0),
    ]


def test_bonus_rejects_bad_groups():
    with pytest.raises(ValidationError):
        ReviewGroup("t1", "a", ())
    with pytest.raises(ValidationError):
        ReviewGroup("t1", "a", (("r1", 50), ("r1", 60)))
    with pytest.raises(ValidationError):
        ReviewGroup("t1", "a", (("a", 50),))
    with pytest.raises(ValidationError):
        ReviewGroup("t1", "a", (("r1", 101),))
    with pytest.raises(ValidationError):
        ReviewGroup("t1", "a", (("r1", 55.0),))


def test_bonus_agrees_with_oracle_on_random_groups():
    rng = random.Random(4711)
    for _ in range(2000):
        size = rng.randint(1, 8)
        scores = [rng.randint(0, 100) for _ in range(size)]
        guard = rng.choice([0, 10, 15])
        params = MotivationParams(max_diff_min=guard)
        assert deltas_of(scores, params) == oracle_bonus(scores, max_diff_min=guard)


small_groups = st.lists(st.integers(0, 100), min_size=1, max_size=8)


@given(small_groups)
def test_bonus_deltas_come_from_parameter_set(scores):
    params = MotivationParams()
    allowed = {params.a1, params.a2, -params.p1, -params.p2, 0.0}
    assert set(deltas_of(scores, params)) <= allowed


@given(small_groups)
def test_bonus_monotone_in_distance_from_mean(scores):
    """Closer to the mean never earns less than farther from it."""
    group = make_group(scores)
    deltas = compute_bonus(group, MotivationParams(max_diff_min=0))
    m = len(scores)
    total = sum(scores)
    pairs = sorted(
        (abs(total - m * s), b.delta) for s, b in zip(scores, deltas)
    )
    for (d_a, delta_a), (d_b, delta_b) in zip(pairs, pairs[1:]):
        if d_a <= d_b:
            assert delta_a >= delta_b


@given(small_groups, st.permutations(range(8)))
def test_bonus_permutation_equivariant(scores, perm):
    order = [i for i in perm if i < len(scores)]
    base = {b.reviewer_id: b.delta for b in compute_bonus(make_group(scores))}
    shuffled = ReviewGroup(
        "t1", "author", tuple((f"r{i}", scores[i]) for i in order)
    )
    for b in compute_bonus(shuffled):
        assert b.delta == base[b.reviewer_id]


@given(small_groups, st.integers(-50, 50))
def test_bonus_translation_invariant(scores, shift):
    shifted = [s + shift for s in scores]
    if not all(0 <= s <= 100 for s in shifted):
        return
    assert deltas_of(shifted) == deltas_of(scores)


@given(st.lists(st.integers(0, 25), min_size=1, max_size=8), st.integers(2, 4))
def test_bonus_scale_invariant_without_guard(scores, factor):
    params = MotivationParams(max_diff_min=0)
    scaled = [s * factor for s in scores]
    assert deltas_of(scaled, params) == deltas_of(scores, params)


# ---------------------------------------------------------------------------
# rubric scoring
# ---------------------------------------------------------------------------


def test_code_review_score_simple():
    assert score_code_review([("header_comment", 2), ("line_comment", 3)]) == 95


def test_code_review_score_floors_at_zero():
    deductions = [
        ("header_comment", 10),
        ("naming", 20),
        ("layout", 20),
        ("proven_nonworking", 40),
        ("block_comment", 10),
        ("line_comment", 10),
    ]
    assert sum(p for _, p in deductions) == 110
    assert score_code_review(deductions) == 0


def test_code_review_score_empty_is_perfect():
    assert score_code_review([]) == 100


def test_code_review_allows_repeated_items():
    assert score_code_review([("line_comment", 2), ("line_comment", 2)]) == 96


def test_code_review_rejects_out_of_range_deductions():
    with pytest.raises(ValidationError):
        score_code_review([("header_comment", 1)])  # below item minimum
    with pytest.raises(ValidationError):
        score_code_review([("naming", 21)])
    with pytest.raises(ValidationError):
        score_code_review([("gotofail", 5)])
    with pytest.raises(ValidationError):
        score_code_review([("naming", 2.5)])


def test_default_rubric_ranges():
    by_id = {i.item_id: (i.min_deduction, i.max_deduction) for i in DEFAULT_RUBRIC.items}
    assert by_id == {
        "header_comment": (2, 10),
        "block_comment": (2, 10),
        "line_comment": (2, 10),
        "naming": (1, 20),
        "layout": (1, 20),
        "suspected_nonworking": (15, 25),
        "proven_nonworking": (20, 40),
    }
    assert [c.max_points for c in DEFAULT_RUBRIC.reverse_criteria] == [25, 25, 25, 25]


def test_rubric_round_trips_through_dict():
    assert Rubric.from_dict(DEFAULT_RUBRIC.to_dict()) == DEFAULT_RUBRIC


def test_reverse_review_score_sums_criteria():
    scores = {"completeness": 20, "constructiveness": 15, "fairness": 25, "clarity": 10}
    assert score_reverse_review(scores) == 70


def test_reverse_review_requires_all_criteria():
    with pytest.raises(ValidationError):
        score_reverse_review({"completeness": 20})
    with pytest.raises(ValidationError):
        score_reverse_review(
            {"completeness": 20, "constructiveness": 15, "fairness": 25, "clarity": 26}
        )
    with pytest.raises(ValidationError):
        score_reverse_review(
            {"completeness": 20, "constructiveness": 15, "fairness": 25, "bonus": 5}
        )


def test_code_review_record_enforces_score_consistency():
    CodeReview("t1", "r1", "a1", (("naming", 5),), "tidy up names", 95)
    with pytest.raises(ValidationError):
        CodeReview("t1", "r1", "a1", (("naming", 5),), "tidy up names", 96)


def test_reverse_review_record_enforces_total():
    scores = (("completeness", 20), ("constructiveness", 15), ("fairness", 25), ("clarity", 10))
    ReverseReview("t1", "a1", "r1", scores, 70)
    with pytest.raises(ValidationError):
        ReverseReview("t1", "a1", "r1", scores, 71)


# ---------------------------------------------------------------------------
# overall aggregation
# ---------------------------------------------------------------------------


def full_sheet(**overrides):
    fields = dict(
        student_id="s1",
        task_id="t1",
        source_done=True,
        revision_done=True,
        review_done=[True] * 5,
        reverse_done=[True] * 5,
        code_scores_received=[80] * 5,
        review_scores_received=[90] * 5,
        review_bonuses=[BonusDelta("s1", 2.0)],
    )
    fields.update(overrides)
    return ScoreSheet(**fields)


def test_overall_weighted_example():
    """15 + 24 + 27 + 12.5 + 12.5 + 2 = 93, exactly."""
    assert overall_score(full_sheet()) == 93.0


def test_overall_late_revision_drops_its_weight():
    assert overall_score(full_sheet(revision_done=False)) == 78.0


def test_overall_perfect_is_exactly_100():
    sheet = full_sheet(
        code_scores_received=[100] * 5,
        review_scores_received=[100] * 5,
        review_bonuses=[],
    )
    assert overall_score(sheet) == 100.0


def test_overall_not_capped_above_100():
    sheet = full_sheet(
        code_scores_received=[100] * 5,
        review_scores_received=[100] * 5,
        review_bonuses=[BonusDelta("s1", 2.0), BonusDelta("s1", 2.0)],
    )
    assert overall_score(sheet) == 104.0


def test_overall_floored_at_zero():
    sheet = full_sheet(
        revision_done=False,
        review_done=[False] * 5,
        reverse_done=[False] * 5,
        code_scores_received=[0] * 5,
        review_scores_received=[0] * 5,
        review_bonuses=[BonusDelta("s1", -8.0)] * 3,
    )
    assert overall_score(sheet) == 0.0


def test_overall_partial_process_fractions():
    sheet = full_sheet(review_done=[True, True, False, False, False], review_bonuses=[])
    # 15 + 24 + 27 + 12.5 * 2/5 + 12.5 = 83.5
    assert overall_score(sheet) == pytest.approx(83.5, abs=1e-12)


def test_overall_rejects_empty_received_lists_when_strict():
    with pytest.raises(ValidationError):
        overall_score(full_sheet(code_scores_received=[]))
    with pytest.raises(ValidationError):
        overall_score(full_sheet(review_scores_received=[]))


def test_overall_lenient_mode_skips_missing_means():
    sheet = full_sheet(code_scores_received=[], review_bonuses=[])
    # 93 - 24 (code mean) - 2 (bonus) = 67
    assert overall_score(sheet, strict=False) == 67.0


def test_overall_agrees_with_oracle_on_random_sheets():
    rng = random.Random(90125)
    for _ in range(500):
        k = rng.randint(1, 6)
        sheet = ScoreSheet(
            student_id="s",
            task_id="t",
            source_done=True,
            revision_done=rng.random() < 0.8,
            review_done=[rng.random() < 0.9 for _ in range(k)],
            reverse_done=[rng.random() < 0.9 for _ in range(k)],
            code_scores_received=[rng.randint(0, 100) for _ in range(k)],
            review_scores_received=[rng.randint(0, 100) for _ in range(k)],
            review_bonuses=[
                BonusDelta("s", rng.choice([2.0, 0.0, -4.0, -8.0]))
                for _ in range(rng.randint(0, k))
            ],
        )
        expected = oracle_overall(
            sheet.revision_done,
            sheet.code_scores_received,
            sheet.review_scores_received,
            sheet.review_done,
            sheet.reverse_done,
            [b.delta for b in sheet.review_bonuses],
        )
        assert overall_score(sheet) == pytest.approx(expected, abs=1e-9)


def test_weight_config_must_sum_to_100():
    with pytest.raises(ValidationError):
        WeightConfig(w_revision=20.0)
    with pytest.raises(ValidationError):
        WeightConfig(w_revision=-15.0, w_code=60.0)
    # Rebalanced weights are fine as long as they still sum to 100.
    WeightConfig(w_revision=10.0, w_code=35.0)


def test_motivation_params_validation():
    with pytest.raises(ValidationError):
        MotivationParams(a1=0.0, a2=0.0)
    with pytest.raises(ValidationError):
        MotivationParams(p1=8.0, p2=8.0)
    with pytest.raises(ValidationError):
        MotivationParams(t1_frac=0.3, t2_frac=0.3)
    with pytest.raises(ValidationError):
        MotivationParams(t3_frac=1.2)
    with pytest.raises(ValidationError):
        MotivationParams(max_diff_min=-1)
