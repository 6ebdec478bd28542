"""Seeded Monte-Carlo simulator of length-bias selection dynamics.

Models competition between reasoning-length strategies under group-
normalized advantages. Each step samples a strategy per rollout slot from
a softmax over preference weights (Gumbel-max), draws rewards from the
strategy's Normal profile (optionally modulated by the length anchor), and
nudges each sampled strategy's weight by its risk-adjusted mean advantage:

    w_s += lr * (mean advantage of s's slots
                 - variance_aversion * effective_var_s / group_var)

The variance-aversion term models the gradient cancellation suffered by
high-variance strategies under group normalization: a plain mean-advantage
update always favors the higher-mean strategy, while the observed training
behavior is Sharpe-like risk aversion. ``effective_var_s`` is the
strategy's reward variance after anchoring, normalized by the realized
group variance so the penalty shares the advantages' z-score units.

Randomness comes from a Philox 4x64 counter-based generator keyed on
(seed, stream salt); normals use the inverse-CDF transform. Traces are
therefore bit-reproducible across platforms. One simulation runs single-
threaded; independent seeds may run in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .core import RewardConfig
from .errors import CoverageExceedsTopicsError, GroupTooSmallError, InvalidConfigError
from .grpo import DEGENERACY_THRESHOLD
from .shaping import length_anchor

STREAM_SALT = 0x6D6F7269
_MASK64 = (1 << 64) - 1
_CHUNK_STEPS = 2048

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_VARIANCE_AVERSION = 0.3


@dataclass(frozen=True)
class StrategyProfile:
    """A reasoning strategy summarized by its reward distribution and
    chain-of-thought length."""

    name: str
    reward_mean: float
    reward_std: float
    cot_length: int

    def __post_init__(self):
        if self.reward_std < 0:
            raise ValueError(f"reward_std must be non-negative, got {self.reward_std}")
        if self.cot_length < 1:
            raise ValueError(f"cot_length must be positive, got {self.cot_length}")


@dataclass(frozen=True)
class Topic:
    """One technical topic a reasoning chain can cover."""

    token_count: int
    gain_mean: float
    gain_std: float

    def __post_init__(self):
        if self.token_count < 1:
            raise ValueError(f"token_count must be positive, got {self.token_count}")
        if self.gain_std < 0:
            raise ValueError(f"gain_std must be non-negative, got {self.gain_std}")


@dataclass(frozen=True)
class TopicModel:
    """Topics with a non-decreasing coverage map from chain length to the
    number of topics covered."""

    topics: tuple[Topic, ...]
    coverage: Callable[[int], int]
    total_tokens: int

    def __post_init__(self):
        if self.total_tokens < 1:
            raise ValueError(f"total_tokens must be positive, got {self.total_tokens}")


@dataclass(frozen=True)
class SimulationTrace:
    """Evolution of one simulation run.

    Per-step series are aligned with ``strategy_names`` (input order);
    ``winner`` is the strategy with the highest final preference weight,
    ties broken by name.
    """

    seed: int
    strategy_names: tuple[str, ...]
    mean_length_per_step: tuple[float, ...]
    weights_per_step: tuple[tuple[float, ...], ...]
    final_weights: tuple[float, ...]
    winner: str

    @property
    def steps(self) -> int:
        return len(self.mean_length_per_step)

    def iter_jsonl(self) -> Iterator[str]:
        """One JSON line per step, then a final summary object. Floats keep
        full precision so traces diff byte-identically."""
        for i, (mean_len, weights) in enumerate(
            zip(self.mean_length_per_step, self.weights_per_step)
        ):
            yield json.dumps(
                {
                    "step": i,
                    "mean_length": mean_len,
                    "weights": {n: w for n, w in zip(self.strategy_names, weights)},
                },
                ensure_ascii=False,
            )
        yield json.dumps(
            {
                "summary": True,
                "seed": self.seed,
                "steps": self.steps,
                "winner": self.winner,
                "final_weights": {
                    n: w for n, w in zip(self.strategy_names, self.final_weights)
                },
            },
            ensure_ascii=False,
        )


def sharpe(mean: float, std: float) -> float:
    """Reward-to-volatility ratio; signed infinity for a noiseless nonzero
    reward, zero for the fully degenerate case."""
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    if std == 0.0:
        if mean == 0.0:
            return 0.0
        return math.inf if mean > 0 else -math.inf
    return mean / std


def topic_reward_moments(model: TopicModel, length: int) -> tuple[float, float]:
    """Mean and variance of the masked-gain reward when a chain of the
    given length covers its first k(length) topics: the token-weighted
    topic means over total tokens, and the squared-token-weighted topic
    variances over total tokens squared."""
    if length < 1:
        raise ValueError(f"length must be positive, got {length}")
    k = model.coverage(length)
    if k < 0:
        raise ValueError(f"coverage must be non-negative, got {k}")
    if k > len(model.topics):
        raise CoverageExceedsTopicsError(
            f"coverage {k} exceeds the {len(model.topics)} available topics"
        )
    covered = model.topics[:k]
    if sum(t.token_count for t in covered) > model.total_tokens:
        raise ValueError("covered topics carry more tokens than the model total")
    n = model.total_tokens
    mean = sum(t.token_count * t.gain_mean for t in covered) / n
    var = sum(t.token_count**2 * t.gain_std**2 for t in covered) / (n * n)
    return mean, var


def simulate_grpo_selection(
    strategies: list[StrategyProfile],
    steps: int,
    group_size: int,
    anchoring: bool,
    config: RewardConfig,
    seed: int,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    variance_aversion: float = DEFAULT_VARIANCE_AVERSION,
) -> SimulationTrace:
    """Run the selection dynamic for a fixed number of steps.

    Deterministic given (strategies, parameters, seed). Gumbel keys are
    assigned per rollout slot in name-sorted strategy order, so permuting
    the input list permutes the outputs identically.
    """
    if len(strategies) < 2:
        raise GroupTooSmallError(f"need at least 2 strategies, got {len(strategies)}")
    if group_size < 2:
        raise GroupTooSmallError(f"group_size must be at least 2, got {group_size}")
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    names = [s.name for s in strategies]
    if len(set(names)) != len(names):
        raise InvalidConfigError("strategy names must be unique")

    k = len(strategies)
    canonical = sorted(range(k), key=lambda i: names[i])
    mus = np.array([s.reward_mean for s in strategies])
    sigmas = np.array([s.reward_std for s in strategies])
    lengths = np.array([float(s.cot_length) for s in strategies])
    if anchoring:
        alphas = np.array(
            [
                length_anchor(s.cot_length, config.anchor_length, config.anchor_strength)
                for s in strategies
            ]
        )
    else:
        alphas = np.ones(k)
    effective_var = (alphas * sigmas) ** 2

    weights = np.zeros(k)
    mean_length = np.empty(steps)
    weight_history = np.empty((steps, k))
    gen = Generator(Philox(key=np.array([seed & _MASK64, STREAM_SALT], dtype=np.uint64)))

    done = 0
    while done < steps:
        n = min(_CHUNK_STEPS, steps - done)
        u = gen.random((n, group_size, k + 1))
        np.clip(u, 5e-324, 1.0 - 1e-16, out=u)
        gumbel_canonical = -np.log(-np.log(u[:, :, :k]))
        normals = ndtri(u[:, :, k])
        gumbels = np.empty_like(gumbel_canonical)
        for rank, idx in enumerate(canonical):
            gumbels[:, :, idx] = gumbel_canonical[:, :, rank]

        for i in range(n):
            choice = np.argmax(weights[None, :] + gumbels[i], axis=1)
            rewards = (mus[choice] + sigmas[choice] * normals[i]) * alphas[choice]
            std = rewards.std()
            if std >= DEGENERACY_THRESHOLD:
                advantages = (rewards - rewards.mean()) / std
                group_var = std * std
                for s in range(k):
                    slots = choice == s
                    if slots.any():
                        penalty = variance_aversion * effective_var[s] / group_var
                        weights[s] += learning_rate * (advantages[slots].mean() - penalty)
            mean_length[done + i] = lengths[choice].mean()
            weight_history[done + i] = weights
        done += n

    final = tuple(float(w) for w in weights)
    best = max(final)
    winner = min(name for name, w in zip(names, final) if w == best)
    return SimulationTrace(
        seed=seed,
        strategy_names=tuple(names),
        mean_length_per_step=tuple(float(x) for x in mean_length),
        weights_per_step=tuple(tuple(float(x) for x in row) for row in weight_history),
        final_weights=final,
        winner=winner,
    )
