"""Step shaping, length anchoring, format gating, and reward assembly.

The composite reward multiplies a length-modulation factor and a format
validity gate into the weighted sum of the two step-shaped gains:

    r_total = alpha(length) * [valid] * (w_ig * f(delta_ig) + w_sem * f(delta_sem))

All functions here are pure and parallel-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import RewardConfig
from .errors import NonfiniteInputError


@dataclass(frozen=True)
class StepShape:
    """Three strictly increasing thresholds mapping a raw gain onto four
    non-decreasing reward levels."""

    thresholds: tuple[float, float, float]
    levels: tuple[float, float, float, float]

    def __post_init__(self):
        t, r = self.thresholds, self.levels
        if not (t[0] < t[1] < t[2]):
            raise ValueError(f"thresholds must be strictly increasing, got {t}")
        if not (r[0] <= r[1] <= r[2] <= r[3]):
            raise ValueError(f"levels must be non-decreasing, got {r}")


@dataclass(frozen=True)
class FormatVerdict:
    valid: bool
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class CompositeResult:
    """Intermediate values of one reward assembly."""

    shaped_ig: float
    shaped_sem: float
    alpha: float
    valid: bool
    invalid_reasons: tuple[str, ...]
    r_total: float


def step_shape(x: float, shape: StepShape) -> float:
    """Discretize a raw gain: level i applies on [threshold_i, threshold_{i+1}),
    with the lowest level below the first threshold and the highest level at
    or above the last."""
    if math.isnan(x):
        raise NonfiniteInputError("cannot shape NaN")
    t1, t2, t3 = shape.thresholds
    r0, r1, r2, r3 = shape.levels
    if x < t1:
        return r0
    if x < t2:
        return r1
    if x < t3:
        return r2
    return r3


def length_anchor(length: int, anchor_length: int, strength: float) -> float:
    """Multiplicative reward modulation, linear in length below the anchor
    and clamped to 1 at or above it: min(1, 1 - strength * (anchor - length) / anchor).
    Ranges over [1 - strength, 1] for lengths in [0, anchor]."""
    if anchor_length < 1:
        raise ValueError(f"anchor_length must be positive, got {anchor_length}")
    if not (0.0 <= strength <= 1.0):
        raise ValueError(f"strength must lie in [0, 1], got {strength}")
    return min(1.0, 1.0 - strength * (anchor_length - length) / anchor_length)


def format_valid(reasoning: str, config: RewardConfig) -> FormatVerdict:
    """Gate a reasoning trace on three hacking patterns.

    EMPTY: no non-whitespace characters (subsumes the length check).
    TOO_SHORT: fewer characters than the configured minimum.
    HEADER_LEAK: any line, after leading whitespace, starts with a
    forbidden header prefix, i.e. output structure leaked into reasoning.
    """
    reasons = []
    if reasoning.strip() == "":
        reasons.append("EMPTY")
    elif len(reasoning) < config.min_reasoning_chars:
        reasons.append("TOO_SHORT")
    for line in reasoning.splitlines():
        if any(line.lstrip().startswith(p) for p in config.forbidden_header_patterns):
            reasons.append("HEADER_LEAK")
            break
    return FormatVerdict(valid=not reasons, reasons=tuple(reasons))


def composite_reward(
    delta_ig: float,
    delta_sem: float,
    reasoning_length: int,
    verdict: FormatVerdict,
    config: RewardConfig,
) -> CompositeResult:
    """Assemble the gated, anchored, weighted reward from both raw gains.

    Intermediate values (shaped gains, alpha) are recorded even for
    invalid records, whose total is exactly zero.
    """
    shaped_ig = step_shape(delta_ig, StepShape(config.ig_thresholds, config.shaping_levels))
    shaped_sem = step_shape(delta_sem, StepShape(config.sem_thresholds, config.shaping_levels))
    alpha = length_anchor(reasoning_length, config.anchor_length, config.anchor_strength)
    if verdict.valid:
        r_total = alpha * (config.w_ig * shaped_ig + config.w_sem * shaped_sem)
    else:
        r_total = 0.0
    return CompositeResult(
        shaped_ig=shaped_ig,
        shaped_sem=shaped_sem,
        alpha=alpha,
        valid=verdict.valid,
        invalid_reasons=verdict.reasons,
        r_total=r_total,
    )


def suggest_anchor_length(lengths: list[int]) -> int:
    """Anchor calibration helper: the mean reasoning length over a corpus,
    rounded to the nearest positive integer."""
    if not lengths:
        raise ValueError("cannot calibrate an anchor on an empty corpus")
    return max(1, round(sum(lengths) / len(lengths)))
