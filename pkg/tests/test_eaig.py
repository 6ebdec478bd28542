import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mori.eaig import EntropyMask, eaig, entropy_mask, mask_size, pointwise_gain
from mori.errors import (
    EmptyMaskError,
    EmptySequenceError,
    LengthMismatchError,
    TokenizationMismatchError,
)
from mori.providers import BuiltinProvider, EntropySequence, LogProbSequence


def flags_of(values, quantile):
    return entropy_mask(EntropySequence(tuple(values)), quantile).flags


def test_mask_selects_single_top_position():
    mask = entropy_mask(EntropySequence((0.1, 2.0, 0.5, 3.0)), 0.25)
    assert mask.selected_count == 1
    assert mask.flags == (False, False, False, True)


def test_mask_tie_break_earlier_index():
    mask = entropy_mask(EntropySequence((1.0, 1.0, 1.0, 1.0)), 0.5)
    assert mask.selected_count == 2
    assert mask.flags == (True, True, False, False)


def test_mask_full_quantile_selects_all():
    assert flags_of((0.3, 0.1, 0.9), 1.0) == (True, True, True)


def test_mask_empty_sequence():
    with pytest.raises(EmptySequenceError):
        entropy_mask(EntropySequence(()), 0.25)


@given(
    values=st.lists(st.floats(min_value=0, max_value=50), min_size=1, max_size=64),
    quantile=st.floats(min_value=0.01, max_value=1.0),
)
def test_mask_matches_sort_and_select_oracle(values, quantile):
    mask = entropy_mask(EntropySequence(tuple(values)), quantile)
    k = max(1, math.ceil(quantile * len(values)))
    assert mask.selected_count == k
    assert sum(mask.flags) == k
    expected = set(sorted(range(len(values)), key=lambda i: (-values[i], i))[:k])
    assert {i for i, f in enumerate(mask.flags) if f} == expected
    selected = [values[i] for i, f in enumerate(mask.flags) if f]
    unselected = [values[i] for i, f in enumerate(mask.flags) if not f]
    if unselected:
        assert min(selected) >= max(unselected)


def lp(values, tokens=None):
    tokens = tokens if tokens is not None else tuple("x" * len(values))
    return LogProbSequence(tuple(tokens), tuple(values))


def test_pointwise_gain_elementwise():
    gains = pointwise_gain(lp((-1.0, -2.0)), lp((-1.5, -2.0)))
    assert gains.gains == (0.5, 0.0)


def test_pointwise_gain_identity():
    seq = lp((-0.2, -1.1, -3.0))
    assert pointwise_gain(seq, seq).gains == (0.0, 0.0, 0.0)


def test_pointwise_gain_length_mismatch():
    with pytest.raises(LengthMismatchError):
        pointwise_gain(lp((-1.0, -1.0, -1.0)), lp((-1.0, -1.0)))


def test_pointwise_gain_tokenization_mismatch():
    with pytest.raises(TokenizationMismatchError):
        pointwise_gain(lp((-1.0,), ("a",)), lp((-1.0,), ("b",)))


def test_eaig_single_selected_position():
    gains = pointwise_gain(lp((-1.0, -2.0, -0.5)), lp((-1.5, -2.0, -2.5)))
    mask = EntropyMask((False, False, True), 1)
    assert eaig(gains, mask) == 2.0


def test_eaig_full_mask_hand_average():
    gains = pointwise_gain(lp((-0.5, -2.0, -1.0)), lp((-1.0, -2.0, -3.0)))
    assert gains.gains == (0.5, 0.0, 2.0)
    mask = EntropyMask((True, True, True), 3)
    assert eaig(gains, mask) == pytest.approx(2.5 / 3, abs=1e-12)


def test_eaig_zero_for_identical_policies():
    seq = lp((-0.4, -1.2, -2.2, -0.9))
    gains = pointwise_gain(seq, seq)
    for quantile in (0.25, 0.5, 1.0):
        mask = entropy_mask(EntropySequence((0.1, 0.9, 0.4, 0.2)), quantile)
        assert eaig(gains, mask) == 0.0


def test_eaig_invariant_to_unselected_positions():
    mask = EntropyMask((False, True, False), 1)
    base = eaig(pointwise_gain(lp((-1.0, -2.0, -3.0)), lp((-4.0, -5.0, -6.0))), mask)
    perturbed = eaig(pointwise_gain(lp((-0.1, -2.0, -9.0)), lp((-8.0, -5.0, -0.2))), mask)
    assert base == perturbed


def test_eaig_full_mask_equals_mean_oracle():
    values_with = (-0.25, -1.5, -0.75, -2.0, -0.05)
    values_base = (-1.0, -1.0, -1.0, -1.0, -1.0)
    gains = pointwise_gain(lp(values_with), lp(values_base))
    mask = EntropyMask((True,) * 5, 5)
    mean = sum(gains.gains) / len(gains.gains)
    assert eaig(gains, mask) == pytest.approx(mean, abs=1e-12)


def test_eaig_errors():
    gains = pointwise_gain(lp((-1.0,)), lp((-1.0,)))
    with pytest.raises(LengthMismatchError):
        eaig(gains, EntropyMask((True, False), 1))
    with pytest.raises(EmptyMaskError):
        eaig(gains, EntropyMask((False,), 0))


@given(st.integers(min_value=1, max_value=64))
def test_mask_size_quarter_quantile(length):
    assert mask_size(length, 0.25) == max(1, math.ceil(0.25 * length))


def test_gain_on_reference_tokens_zero_when_reasoning_ignored():
    # same conditioning on both sides: the gain must vanish identically
    provider = BuiltinProvider.fit(["the policy improves the bound", "a tighter bound"])
    conditioning = "the policy\nimproves"
    target = "a tighter bound"
    lp_a = provider.token_logprobs(conditioning, target)
    lp_b = provider.token_logprobs(conditioning, target)
    entropies = provider.token_entropy(conditioning, target)
    mask = entropy_mask(entropies, 0.25)
    assert eaig(pointwise_gain(lp_a, lp_b), mask) == 0.0
