"""Entropy-aware information gain.

Selects the highest-entropy reference-token positions and averages the
reasoning-attributable log-likelihood gain strictly over them. All
functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyMaskError, EmptySequenceError, LengthMismatchError, TokenizationMismatchError
from .providers import EntropySequence, LogProbSequence


@dataclass(frozen=True)
class EntropyMask:
    """Boolean selection over token positions; exactly ``selected_count``
    flags are true."""

    flags: tuple[bool, ...]
    selected_count: int

    def __len__(self) -> int:
        return len(self.flags)


@dataclass(frozen=True)
class GainSequence:
    """Per-token log-likelihood gains (nats) attributable to reasoning."""

    gains: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.gains)


def mask_size(length: int, quantile: float) -> int:
    """Number of positions a quantile selects: ceil(quantile * length),
    floored at one so the masked average is always defined."""
    return max(1, math.ceil(quantile * length))


def entropy_mask(entropies: EntropySequence, quantile: float) -> EntropyMask:
    """Select the top-quantile positions by entropy.

    Ties break toward the earlier position. Raises EMPTY_SEQUENCE on a
    zero-length input.
    """
    if not (0.0 < quantile <= 1.0):
        raise ValueError(f"quantile must lie in (0, 1], got {quantile}")
    values = entropies.entropies
    if len(values) == 0:
        raise EmptySequenceError("cannot mask an empty entropy sequence")
    k = mask_size(len(values), quantile)
    ranked = sorted(range(len(values)), key=lambda i: (-values[i], i))
    flags = [False] * len(values)
    for i in ranked[:k]:
        flags[i] = True
    return EntropyMask(tuple(flags), k)


def pointwise_gain(lp_with: LogProbSequence, lp_base: LogProbSequence) -> GainSequence:
    """Elementwise log-likelihood difference between the reasoning-
    conditioned evaluation and the base evaluation of the same target."""
    if len(lp_with) != len(lp_base):
        raise LengthMismatchError(f"{len(lp_with)} vs {len(lp_base)} positions")
    if lp_with.token_texts != lp_base.token_texts:
        raise TokenizationMismatchError("sequences tokenize the target differently")
    return GainSequence(tuple(a - b for a, b in zip(lp_with.logprobs, lp_base.logprobs)))


def eaig(gains: GainSequence, mask: EntropyMask) -> float:
    """Average gain strictly over the masked positions."""
    if len(gains) != len(mask):
        raise LengthMismatchError(f"{len(gains)} gains vs {len(mask)} mask flags")
    if mask.selected_count < 1 or not any(mask.flags):
        raise EmptyMaskError("mask selects no positions")
    total = sum(g for g, keep in zip(gains.gains, mask.flags) if keep)
    return total / mask.selected_count
