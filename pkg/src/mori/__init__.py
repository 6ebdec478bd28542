"""Composite RL reward engine and rollout-scoring toolkit.

Combines an entropy-aware information gain, a contrastive semantic gain,
piecewise step shaping, length anchoring, and a format gate into one
reward; normalizes rewards into group-relative advantages; evaluates the
clipped surrogate objective; and simulates length-bias selection dynamics
under seeded, reproducible randomness.
"""

from .core import (
    RewardConfig,
    RolloutRecord,
    ScoreReport,
    config_with,
    parse_rollout_record,
    validate_config,
)
from .csg import SectionMode, SemanticScores, contrastive_semantic_gain, cosine_similarity, overview_slice
from .dynamics import (
    SimulationTrace,
    StrategyProfile,
    Topic,
    TopicModel,
    sharpe,
    simulate_grpo_selection,
    topic_reward_moments,
)
from .eaig import EntropyMask, GainSequence, eaig, entropy_mask, pointwise_gain
from .errors import MoriError
from .grpo import (
    AdvantageSet,
    RatioSequence,
    RolloutGroup,
    clipped_objective,
    group_advantages,
    importance_ratios,
)
from .providers import (
    BuiltinProvider,
    CharNGramModel,
    EmbeddingVector,
    EntropySequence,
    LogProbSequence,
    RemoteProvider,
    fit_char_ngram,
    hashed_embedding,
)
from .scoring import builtin_provider_for, score_record, score_record_builtin
from .shaping import (
    CompositeResult,
    FormatVerdict,
    StepShape,
    composite_reward,
    format_valid,
    length_anchor,
    step_shape,
    suggest_anchor_length,
)

__version__ = "0.1.0"

__all__ = [
    "AdvantageSet",
    "BuiltinProvider",
    "CharNGramModel",
    "CompositeResult",
    "EmbeddingVector",
    "EntropyMask",
    "EntropySequence",
    "FormatVerdict",
    "GainSequence",
    "LogProbSequence",
    "MoriError",
    "RatioSequence",
    "RemoteProvider",
    "RewardConfig",
    "RolloutGroup",
    "RolloutRecord",
    "ScoreReport",
    "SectionMode",
    "SemanticScores",
    "SimulationTrace",
    "StepShape",
    "StrategyProfile",
    "Topic",
    "TopicModel",
    "builtin_provider_for",
    "clipped_objective",
    "composite_reward",
    "config_with",
    "contrastive_semantic_gain",
    "cosine_similarity",
    "eaig",
    "entropy_mask",
    "fit_char_ngram",
    "format_valid",
    "group_advantages",
    "hashed_embedding",
    "importance_ratios",
    "length_anchor",
    "overview_slice",
    "parse_rollout_record",
    "pointwise_gain",
    "score_record",
    "score_record_builtin",
    "sharpe",
    "simulate_grpo_selection",
    "step_shape",
    "suggest_anchor_length",
    "topic_reward_moments",
    "validate_config",
]
