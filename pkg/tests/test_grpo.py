import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mori.errors import (
    EmptyBatchError,
    GroupTooSmallError,
    LengthMismatchError,
    NonfiniteInputError,
)
from mori.grpo import (
    AdvantageSet,
    RatioSequence,
    RolloutGroup,
    clipped_objective,
    group_advantages,
    importance_ratios,
)
from mori.providers import LogProbSequence


def test_advantages_hand_computation():
    result = group_advantages([1.0, 2.0, 3.0])
    assert result.advantages[0] == pytest.approx(-1.224745, abs=1e-6)
    assert result.advantages[1] == 0.0
    assert result.advantages[2] == pytest.approx(1.224745, abs=1e-6)
    assert result.mean == 2.0
    assert result.std == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)


def test_advantages_degenerate_group():
    assert group_advantages([2.0, 2.0, 2.0]).advantages == (0.0, 0.0, 0.0)


def test_advantages_group_too_small():
    with pytest.raises(GroupTooSmallError):
        group_advantages([5.0])


def test_advantages_nonfinite_rejected():
    with pytest.raises(NonfiniteInputError):
        group_advantages([1.0, float("nan")])


@given(
    rewards=st.lists(st.floats(-100, 100), min_size=2, max_size=16),
    a=st.floats(min_value=0.01, max_value=10.0),
    b=st.floats(min_value=-50, max_value=50),
)
def test_advantages_affine_invariance(rewards, a, b):
    base = group_advantages(rewards)
    transformed = group_advantages([a * r + b for r in rewards])
    for x, y in zip(base.advantages, transformed.advantages):
        assert x == pytest.approx(y, abs=1e-9)


@given(rewards=st.lists(st.floats(-100, 100), min_size=2, max_size=16))
def test_advantages_zero_mean_unit_variance(rewards):
    result = group_advantages(rewards)
    n = len(result.advantages)
    assert abs(sum(result.advantages)) < 1e-9
    if result.std >= 1e-8:
        var = sum(a * a for a in result.advantages) / n
        assert var == pytest.approx(1.0, abs=1e-9)
    else:
        assert result.advantages == tuple(0.0 for _ in range(n))


def lp(values, tokens=None):
    tokens = tokens if tokens is not None else tuple("x" * len(values))
    return LogProbSequence(tuple(tokens), tuple(values))


def test_ratios_identity():
    seq = lp((-0.5, -1.0))
    assert importance_ratios(seq, seq).ratios == (1.0, 1.0)


def test_ratios_exponentiation():
    result = importance_ratios(lp((-0.1,)), lp((-0.1 - math.log(2),)))
    assert result.ratios[0] == pytest.approx(2.0, abs=1e-12)


def test_ratios_length_mismatch():
    with pytest.raises(LengthMismatchError):
        importance_ratios(lp((-1.0, -1.0, -1.0)), lp((-1.0, -1.0)))


def test_ratio_sequence_positive_finite():
    with pytest.raises(NonfiniteInputError):
        RatioSequence((0.0,))
    with pytest.raises(NonfiniteInputError):
        RatioSequence((float("inf"),))


def test_rollout_group_validation():
    with pytest.raises(GroupTooSmallError):
        RolloutGroup("g", (1.0,))
    group = RolloutGroup("g", (1.0, 2.0))
    assert group.group_id == "g"


def one_token_objective(ratio, advantage, lo=0.2, hi=0.28):
    groups = [([RatioSequence((ratio,)), RatioSequence((1.0,))],
               AdvantageSet((advantage, 0.0), 0.0, 1.0))]
    return clipped_objective(groups, lo, hi) * 2  # second rollout contributes 0


def test_objective_unclipped_unit_case():
    assert one_token_objective(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_objective_clips_high_ratio():
    assert one_token_objective(2.0, 1.0) == pytest.approx(1.28, abs=1e-12)


def test_objective_clips_low_ratio_negative_advantage():
    assert one_token_objective(0.5, -1.0) == pytest.approx(-0.8, abs=1e-12)


def test_objective_empty_batch():
    with pytest.raises(EmptyBatchError):
        clipped_objective([], 0.2, 0.28)


def reference_objective(groups, lo, hi, per_group=False):
    # naive double-loop evaluation, independent of the implementation
    def clip(r):
        return min(max(r, 1.0 - lo), 1.0 + hi)

    totals = []
    grand_sum, grand_count = 0.0, 0
    for ratio_seqs, advantage_set in groups:
        s, c = 0.0, 0
        for i, seq in enumerate(ratio_seqs):
            a = advantage_set.advantages[i]
            for r in seq.ratios:
                s += min(r * a, clip(r) * a)
                c += 1
        totals.append(s / c)
        grand_sum += s
        grand_count += c
    if per_group:
        return sum(totals) / len(totals)
    return grand_sum / grand_count


def random_instance(rng):
    groups = []
    for _ in range(rng.randint(1, 3)):
        g = rng.randint(2, 4)
        rewards = [rng.uniform(-2, 2) for _ in range(g)]
        advantages = group_advantages(rewards)
        ratio_seqs = [
            RatioSequence(tuple(math.exp(rng.uniform(-1, 1)) for _ in range(rng.randint(1, 8))))
            for _ in range(g)
        ]
        groups.append((ratio_seqs, advantages))
    return groups


def test_objective_matches_reference_on_random_instances():
    rng = random.Random(7)
    for _ in range(100):
        groups = random_instance(rng)
        lo, hi = rng.choice([(0.2, 0.28), (0.2, 0.2), (0.1, 0.3)])
        assert clipped_objective(groups, lo, hi) == pytest.approx(
            reference_objective(groups, lo, hi), abs=1e-12
        )
        assert clipped_objective(groups, lo, hi, per_group=True) == pytest.approx(
            reference_objective(groups, lo, hi, per_group=True), abs=1e-12
        )


def test_symmetric_clip_reduces_to_standard_clipping():
    rng = random.Random(11)
    for _ in range(20):
        groups = random_instance(rng)
        eps = rng.uniform(0.05, 0.4)
        value = clipped_objective(groups, eps, eps)
        # standard symmetric-clip evaluation written out directly
        total, count = 0.0, 0
        for ratio_seqs, advantage_set in groups:
            for seq, a in zip(ratio_seqs, advantage_set.advantages):
                for r in seq.ratios:
                    total += min(r * a, min(max(r, 1 - eps), 1 + eps) * a)
                    count += 1
        assert value == pytest.approx(total / count, abs=1e-12)


def test_objective_rollout_advantage_alignment_checked():
    groups = [([RatioSequence((1.0,))], AdvantageSet((1.0, -1.0), 0.0, 1.0))]
    with pytest.raises(LengthMismatchError):
        clipped_objective(groups, 0.2, 0.28)
