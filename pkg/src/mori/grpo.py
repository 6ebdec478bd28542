"""Group-relative advantages and the clipped surrogate objective.

Advantages are z-scores within a sampling group using the population
standard deviation; degenerate groups (std below 1e-8) get all-zero
advantages. The objective is evaluated, never differentiated; it serves as
a verification oracle for external trainers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    EmptyBatchError,
    GroupTooSmallError,
    LengthMismatchError,
    NonfiniteInputError,
    TokenizationMismatchError,
)
from .providers import LogProbSequence

DEGENERACY_THRESHOLD = 1e-8


@dataclass(frozen=True)
class AdvantageSet:
    """Group-normalized advantages with the group statistics they came from."""

    advantages: tuple[float, ...]
    mean: float
    std: float

    def __len__(self) -> int:
        return len(self.advantages)


@dataclass(frozen=True)
class RatioSequence:
    """Per-token importance sampling ratios for one rollout; all positive
    and finite."""

    ratios: tuple[float, ...]

    def __post_init__(self):
        for r in self.ratios:
            if not math.isfinite(r) or r <= 0.0:
                raise NonfiniteInputError(f"importance ratio must be positive and finite, got {r}")
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))

    def __len__(self) -> int:
        return len(self.ratios)


@dataclass(frozen=True)
class RolloutGroup:
    """Rewards of one sampling group, optionally with per-rollout token
    ratios for objective evaluation."""

    group_id: str
    rewards: tuple[float, ...]
    ratios: tuple[RatioSequence, ...] | None = None

    def __post_init__(self):
        if len(self.rewards) < 2:
            raise GroupTooSmallError(
                f"group {self.group_id!r} has {len(self.rewards)} rollouts, need at least 2"
            )
        if self.ratios is not None and len(self.ratios) != len(self.rewards):
            raise LengthMismatchError("one ratio sequence per rollout required")


def group_advantages(rewards: list[float]) -> AdvantageSet:
    """z-score rewards within their group: (r - mean) / population std."""
    if len(rewards) < 2:
        raise GroupTooSmallError(f"need at least 2 rewards, got {len(rewards)}")
    if not all(math.isfinite(r) for r in rewards):
        raise NonfiniteInputError("rewards must be finite")
    n = len(rewards)
    mean = sum(rewards) / n
    var = sum((r - mean) ** 2 for r in rewards) / n
    std = math.sqrt(var)
    if std < DEGENERACY_THRESHOLD:
        return AdvantageSet(tuple(0.0 for _ in rewards), mean, std)
    return AdvantageSet(tuple((r - mean) / std for r in rewards), mean, std)


def importance_ratios(lp_new: LogProbSequence, lp_old: LogProbSequence) -> RatioSequence:
    """exp(new - old) per token."""
    if len(lp_new) != len(lp_old):
        raise LengthMismatchError(f"{len(lp_new)} vs {len(lp_old)} positions")
    if lp_new.token_texts != lp_old.token_texts:
        raise TokenizationMismatchError("sequences tokenize the target differently")
    return RatioSequence(tuple(math.exp(a - b) for a, b in zip(lp_new.logprobs, lp_old.logprobs)))


def clipped_objective(
    groups: list[tuple[list[RatioSequence], AdvantageSet]],
    clip_low: float,
    clip_high: float,
    per_group: bool = False,
) -> float:
    """Token-mean clipped surrogate value over a batch of groups.

    Each group pairs one RatioSequence per rollout with that group's
    advantages. Per token the contribution is
    min(ratio * A, clip(ratio, 1 - clip_low, 1 + clip_high) * A); the
    default normalizes by the total token count of the whole batch, while
    ``per_group`` normalizes within each group and averages the group
    values.
    """
    if clip_low <= 0.0 or clip_high <= 0.0:
        raise ValueError("clip ranges must be positive")
    if not groups:
        raise EmptyBatchError("no groups to evaluate")
    lo, hi = 1.0 - clip_low, 1.0 + clip_high
    group_values = []
    batch_sum = 0.0
    batch_tokens = 0
    for ratio_seqs, advantage_set in groups:
        if len(ratio_seqs) != len(advantage_set):
            raise LengthMismatchError(
                f"{len(ratio_seqs)} rollouts vs {len(advantage_set)} advantages"
            )
        group_sum = 0.0
        group_tokens = 0
        for seq, adv in zip(ratio_seqs, advantage_set.advantages):
            for r in seq.ratios:
                clipped = min(max(r, lo), hi)
                group_sum += min(r * adv, clipped * adv)
            group_tokens += len(seq)
        if per_group:
            if group_tokens == 0:
                raise EmptyBatchError("group contains no tokens")
            group_values.append(group_sum / group_tokens)
        batch_sum += group_sum
        batch_tokens += group_tokens
    if per_group:
        return sum(group_values) / len(group_values)
    if batch_tokens == 0:
        raise EmptyBatchError("batch contains no tokens")
    return batch_sum / batch_tokens
