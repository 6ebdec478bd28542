import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mori.core import (
    RewardConfig,
    RolloutRecord,
    ScoreReport,
    config_with,
    parse_rollout_record,
    validate_config,
)
from mori.errors import InvalidConfigError, MalformedLineError, MissingFieldError

FULL_LINE = json.dumps(
    {
        "id": "a",
        "context": "c",
        "motivation": "m",
        "reasoning": "r",
        "generated_method": "g",
        "ground_truth_method": "t",
    }
)


def test_parse_identity_roundtrip():
    record = parse_rollout_record(FULL_LINE)
    assert record.id == "a"
    assert record.context == "c"
    assert record.motivation == "m"
    assert record.reasoning == "r"
    assert record.generated_method == "g"
    assert record.ground_truth_method == "t"
    assert record.group_id is None


def test_parse_empty_required_field():
    with pytest.raises(MissingFieldError):
        parse_rollout_record('{"id":"a","context":""}')


def test_parse_not_json():
    with pytest.raises(MalformedLineError):
        parse_rollout_record("not json")


def test_parse_missing_field():
    with pytest.raises(MissingFieldError):
        parse_rollout_record('{"id":"a","context":"c"}')


def test_parse_ignores_unknown_fields():
    obj = json.loads(FULL_LINE)
    obj["extra"] = [1, 2, 3]
    record = parse_rollout_record(json.dumps(obj))
    assert record.id == "a"
    assert not hasattr(record, "extra")


def test_parse_non_object_line():
    with pytest.raises(MalformedLineError):
        parse_rollout_record("[1, 2]")


def test_query_joins_with_single_newline():
    record = parse_rollout_record(FULL_LINE)
    assert record.query == "c\nm"


text = st.text(min_size=1).filter(lambda s: s != "")
maybe_empty = st.text()


@given(
    rid=text,
    context=text,
    motivation=maybe_empty,
    reasoning=maybe_empty,
    generated=maybe_empty,
    truth=text,
    group_id=st.none() | st.text(min_size=1),
)
def test_record_roundtrip_property(rid, context, motivation, reasoning, generated, truth, group_id):
    record = RolloutRecord(
        id=rid,
        context=context,
        motivation=motivation,
        reasoning=reasoning,
        generated_method=generated,
        ground_truth_method=truth,
        group_id=group_id,
    )
    parsed = parse_rollout_record(record.to_jsonl())
    assert parsed == record


def test_default_config_matches_reference_values():
    config = validate_config({})
    assert config.w_sem == 0.7
    assert config.w_ig == 0.3
    assert config.entropy_quantile == 0.25
    assert config.ig_thresholds == (1.0, 1.5, 2.0)
    assert config.sem_thresholds == (0.01, 0.05, 0.1)
    assert config.shaping_levels == (0.0, 0.5, 0.8, 1.0)
    assert config.anchor_strength == 0.5
    assert config.min_reasoning_chars == 1000
    assert config.forbidden_header_patterns == ("##", "###")
    assert config.clip_low == 0.2
    assert config.clip_high == 0.28
    assert config.group_size == 16
    assert config.kl_coefficient == 0.001


def test_config_rejects_non_increasing_thresholds():
    with pytest.raises(InvalidConfigError):
        validate_config({"ig_thresholds": [2.0, 1.5, 1.0]})


def test_config_rejects_weights_not_summing_to_one():
    with pytest.raises(InvalidConfigError):
        validate_config({"w_ig": 0.5, "w_sem": 0.4})


def test_config_names_every_violation():
    with pytest.raises(InvalidConfigError) as err:
        validate_config({"w_ig": 0.5, "w_sem": 0.4, "entropy_quantile": 0.0, "clip_low": -1})
    message = str(err.value)
    assert "w_ig + w_sem" in message
    assert "entropy_quantile" in message
    assert "clip_low" in message


def test_config_rejects_unknown_key():
    with pytest.raises(InvalidConfigError):
        validate_config({"w_total": 1.0})


def test_config_rejects_wrong_element_types():
    with pytest.raises(InvalidConfigError):
        validate_config({"ig_thresholds": ["low", "mid", "high"]})
    with pytest.raises(InvalidConfigError):
        validate_config({"forbidden_header_patterns": [1, 2]})
    with pytest.raises(InvalidConfigError):
        validate_config({"anchor_length": 2.5})


def test_config_accepts_explicit_valid_values():
    config = validate_config({"w_ig": 0.5, "w_sem": 0.5, "anchor_length": 1234})
    assert config.w_ig == 0.5
    assert config.anchor_length == 1234


def test_config_with_revalidates():
    config = validate_config({})
    with pytest.raises(InvalidConfigError):
        config_with(config, w_ig=0.9)
    updated = config_with(config, w_ig=0.5, w_sem=0.5)
    assert updated.w_ig == 0.5


def _report(**overrides) -> ScoreReport:
    base = dict(
        id="x",
        delta_ig=1.2345678901,
        delta_sem=0.05,
        s_gen=0.9,
        s_base=0.85,
        shaped_ig=0.5,
        shaped_sem=0.8,
        alpha=0.75,
        valid=True,
        invalid_reasons=(),
        r_total=0.5325,
        reasoning_length=1500,
        length_unit="tokens",
    )
    base.update(overrides)
    return ScoreReport(**base)


def test_report_serialization_precision():
    report = _report()
    rounded = report.to_json_dict(precision=6)
    assert rounded["delta_ig"] == 1.23457
    full = report.to_json_dict(precision=None)
    assert full["delta_ig"] == 1.2345678901


def test_report_serializes_group_id_only_when_present():
    assert "group_id" not in _report().to_json_dict()
    assert _report(group_id="g1").to_json_dict()["group_id"] == "g1"
