"""End-to-end scoring of rollout records.

For each record the pipeline computes, against one provider:

1. next-token entropies of the reference method conditioned on the joined
   input, and the top-quantile entropy mask;
2. teacher-forced log-probabilities of the reference method with and
   without the reasoning trace in the conditioning, and their masked
   average gain;
3. embedding similarities of the generation and of the raw input to the
   reference, and their difference;
4. the format verdict, length modulation, and gated composite total.

The built-in provider is refitted per record on that record's own texts,
which keeps scoring deterministic, streaming-friendly, and free of any
shared model state. A remote provider is used as given.
"""

from __future__ import annotations

from .core import RewardConfig, RolloutRecord, ScoreReport
from .csg import SectionMode, contrastive_semantic_gain
from .eaig import eaig, entropy_mask, pointwise_gain
from .providers import BuiltinProvider
from .shaping import composite_reward, format_valid

LENGTH_UNITS = ("tokens", "chars")


def builtin_provider_for(record: RolloutRecord, order: int = 3, smoothing: float = 1.0) -> BuiltinProvider:
    """Fit the offline provider on the record's own texts."""
    corpus = [
        text
        for text in (
            record.context,
            record.motivation,
            record.reasoning,
            record.generated_method,
            record.ground_truth_method,
        )
        if text
    ]
    return BuiltinProvider.fit(corpus, order=order, smoothing=smoothing)


def reasoning_length_of(record: RolloutRecord, provider, unit: str) -> int:
    if unit not in LENGTH_UNITS:
        raise ValueError(f"length unit must be one of {LENGTH_UNITS}, got {unit!r}")
    if unit == "chars":
        return len(record.reasoning)
    return provider.count_tokens(record.reasoning)


def score_record(
    record: RolloutRecord,
    provider,
    config: RewardConfig,
    section_mode: SectionMode = SectionMode.OVERVIEW,
    length_unit: str = "tokens",
) -> ScoreReport:
    """Produce the full reward breakdown for one record."""
    query = record.query
    with_reasoning = query + "\n" + record.reasoning

    entropies = provider.token_entropy(query, record.ground_truth_method)
    mask = entropy_mask(entropies, config.entropy_quantile)
    lp_with = provider.token_logprobs(with_reasoning, record.ground_truth_method)
    lp_base = provider.token_logprobs(query, record.ground_truth_method)
    delta_ig = eaig(pointwise_gain(lp_with, lp_base), mask)

    semantic = contrastive_semantic_gain(
        record, provider, section_mode, config.forbidden_header_patterns
    )

    verdict = format_valid(record.reasoning, config)
    length = reasoning_length_of(record, provider, length_unit)
    composite = composite_reward(delta_ig, semantic.delta_sem, length, verdict, config)

    return ScoreReport(
        id=record.id,
        delta_ig=delta_ig,
        delta_sem=semantic.delta_sem,
        s_gen=semantic.s_gen,
        s_base=semantic.s_base,
        shaped_ig=composite.shaped_ig,
        shaped_sem=composite.shaped_sem,
        alpha=composite.alpha,
        valid=composite.valid,
        invalid_reasons=composite.invalid_reasons,
        r_total=composite.r_total,
        reasoning_length=length,
        length_unit=length_unit,
        group_id=record.group_id,
    )


def score_record_builtin(
    record: RolloutRecord,
    config: RewardConfig,
    section_mode: SectionMode = SectionMode.OVERVIEW,
    length_unit: str = "tokens",
) -> ScoreReport:
    """Score with a per-record built-in provider."""
    provider = builtin_provider_for(record)
    return score_record(record, provider, config, section_mode, length_unit)
