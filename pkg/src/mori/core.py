"""Domain types: rollout records, reward configuration, score reports.

All types are frozen dataclasses, immutable after construction and safe to
share across threads. Parsing and validation are stateless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

from .errors import InvalidConfigError, MalformedLineError, MissingFieldError

RECORD_FIELDS = (
    "id",
    "context",
    "motivation",
    "reasoning",
    "generated_method",
    "ground_truth_method",
)
NON_EMPTY_FIELDS = ("id", "context", "ground_truth_method")

FORMAT_REASONS = ("EMPTY", "TOO_SHORT", "HEADER_LEAK")


@dataclass(frozen=True)
class RolloutRecord:
    """One ideation sample: input context and motivation, the sampled
    reasoning trace and method, and the reference method it is scored
    against. ``group_id`` ties records into an advantage group."""

    id: str
    context: str
    motivation: str
    reasoning: str
    generated_method: str
    ground_truth_method: str
    group_id: str | None = None

    @property
    def query(self) -> str:
        """The joint conditioning input: context and motivation joined by a
        single newline."""
        return self.context + "\n" + self.motivation

    def to_json_dict(self) -> dict:
        out = {name: getattr(self, name) for name in RECORD_FIELDS}
        if self.group_id is not None:
            out["group_id"] = self.group_id
        return out

    def to_jsonl(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, sort_keys=False)


def parse_rollout_record(line: str) -> RolloutRecord:
    """Parse one JSONL line into a RolloutRecord.

    Unknown keys are ignored. Raises MALFORMED_LINE when the line is not a
    JSON object, MISSING_FIELD when a schema field is absent or an
    id/context/ground_truth_method is empty.
    """
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedLineError(f"not parseable as JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedLineError("line is not a JSON object")

    kwargs = {}
    for name in RECORD_FIELDS:
        if name not in obj:
            raise MissingFieldError(f"missing required field {name!r}")
        value = obj[name]
        if not isinstance(value, str):
            raise MalformedLineError(f"field {name!r} is not a string")
        if name in NON_EMPTY_FIELDS and value == "":
            raise MissingFieldError(f"field {name!r} must be non-empty")
        kwargs[name] = value

    group_id = obj.get("group_id")
    if group_id is not None and not isinstance(group_id, str):
        raise MalformedLineError("field 'group_id' is not a string")
    return RolloutRecord(group_id=group_id, **kwargs)


@dataclass(frozen=True)
class RewardConfig:
    """All weights, thresholds, anchors and gates of the composite reward.

    Defaults match the reference training configuration: semantic weight
    0.7 and information-gain weight 0.3, a top-25% entropy mask,
    information-gain thresholds (1.0, 1.5, 2.0) and semantic thresholds
    (0.01, 0.05, 0.1) sharing levels (0, 0.5, 0.8, 1.0), anchoring strength
    0.5, a 1000-character minimum reasoning length, and asymmetric clip
    ratios 0.2/0.28 with 16 rollouts per group. ``kl_coefficient`` is
    recorded for completeness but never applied by this package.
    """

    w_ig: float = 0.3
    w_sem: float = 0.7
    entropy_quantile: float = 0.25
    ig_thresholds: tuple[float, float, float] = (1.0, 1.5, 2.0)
    sem_thresholds: tuple[float, float, float] = (0.01, 0.05, 0.1)
    shaping_levels: tuple[float, float, float, float] = (0.0, 0.5, 0.8, 1.0)
    anchor_length: int = 2000
    anchor_strength: float = 0.5
    min_reasoning_chars: int = 1000
    forbidden_header_patterns: tuple[str, ...] = ("##", "###")
    clip_low: float = 0.2
    clip_high: float = 0.28
    group_size: int = 16
    kl_coefficient: float = 0.001

    def violations(self) -> list[str]:
        """Return human-readable descriptions of every violated invariant."""
        out = []
        for name in ("w_ig", "w_sem"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                out.append(f"{name} must lie in [0, 1], got {v}")
        if abs(self.w_ig + self.w_sem - 1.0) > 1e-9:
            out.append(f"w_ig + w_sem must equal 1, got {self.w_ig + self.w_sem}")
        if not (0.0 < self.entropy_quantile <= 1.0):
            out.append(f"entropy_quantile must lie in (0, 1], got {self.entropy_quantile}")
        for name in ("ig_thresholds", "sem_thresholds"):
            t = getattr(self, name)
            if len(t) != 3 or not all(math.isfinite(x) for x in t):
                out.append(f"{name} must be a finite triple, got {t}")
            elif not (t[0] < t[1] < t[2]):
                out.append(f"{name} must be strictly increasing, got {t}")
        levels = self.shaping_levels
        if len(levels) != 4 or not all(math.isfinite(x) for x in levels):
            out.append(f"shaping_levels must be a finite quadruple, got {levels}")
        elif not all(levels[i] <= levels[i + 1] for i in range(3)):
            out.append(f"shaping_levels must be non-decreasing, got {levels}")
        if self.anchor_length < 1:
            out.append(f"anchor_length must be a positive integer, got {self.anchor_length}")
        if not (0.0 <= self.anchor_strength <= 1.0):
            out.append(f"anchor_strength must lie in [0, 1], got {self.anchor_strength}")
        if self.min_reasoning_chars < 1:
            out.append(f"min_reasoning_chars must be positive, got {self.min_reasoning_chars}")
        if not self.forbidden_header_patterns or any(p == "" for p in self.forbidden_header_patterns):
            out.append("forbidden_header_patterns must be non-empty prefixes")
        if not (self.clip_low > 0.0):
            out.append(f"clip_low must be > 0, got {self.clip_low}")
        if not (self.clip_high > 0.0):
            out.append(f"clip_high must be > 0, got {self.clip_high}")
        if self.group_size < 2:
            out.append(f"group_size must be at least 2, got {self.group_size}")
        return out


_CONFIG_FIELDS = {f.name for f in fields(RewardConfig)}
_TUPLE_FIELDS = {"ig_thresholds", "sem_thresholds", "shaping_levels", "forbidden_header_patterns"}
_INT_FIELDS = {"anchor_length", "min_reasoning_chars", "group_size"}


def validate_config(raw: dict | None = None) -> RewardConfig:
    """Build a RewardConfig from a key-value document.

    Missing keys take the defaults above; unknown keys and any violated
    invariant raise INVALID_CONFIG naming every problem at once.
    """
    raw = dict(raw or {})
    problems = []
    kwargs = {}
    for key, value in raw.items():
        if key not in _CONFIG_FIELDS:
            problems.append(f"unknown config key {key!r}")
            continue
        if key in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)):
                problems.append(f"{key} must be a list, got {value!r}")
                continue
            if key == "forbidden_header_patterns":
                if not all(isinstance(v, str) for v in value):
                    problems.append(f"{key} entries must be strings, got {value!r}")
                    continue
                value = tuple(value)
            else:
                if not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
                ):
                    problems.append(f"{key} entries must be numbers, got {value!r}")
                    continue
                value = tuple(float(v) for v in value)
        elif key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{key} must be an integer, got {value!r}")
                continue
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                problems.append(f"{key} must be a number, got {value!r}")
                continue
            value = float(value)
        kwargs[key] = value
    if problems:
        raise InvalidConfigError("; ".join(problems))

    config = RewardConfig(**kwargs)
    problems = config.violations()
    if problems:
        raise InvalidConfigError("; ".join(problems))
    return config


def config_with(config: RewardConfig, **overrides) -> RewardConfig:
    """Copy a config with overrides, re-validating invariants."""
    updated = replace(config, **overrides)
    problems = updated.violations()
    if problems:
        raise InvalidConfigError("; ".join(problems))
    return updated


@dataclass(frozen=True)
class ScoreReport:
    """Per-rollout reward breakdown.

    ``r_total`` is zero whenever ``valid`` is false; otherwise it equals
    ``alpha * (w_ig * shaped_ig + w_sem * shaped_sem)``. ``reasoning_length``
    is measured in ``length_unit`` ("chars" or "tokens").
    """

    id: str
    delta_ig: float
    delta_sem: float
    s_gen: float
    s_base: float
    shaped_ig: float
    shaped_sem: float
    alpha: float
    valid: bool
    invalid_reasons: tuple[str, ...]
    r_total: float
    reasoning_length: int
    length_unit: str
    group_id: str | None = field(default=None)

    _FLOAT_FIELDS = (
        "delta_ig",
        "delta_sem",
        "s_gen",
        "s_base",
        "shaped_ig",
        "shaped_sem",
        "alpha",
        "r_total",
    )

    def to_json_dict(self, precision: int | None = 6) -> dict:
        """Serialize for JSONL output.

        ``precision`` is the number of significant digits for floats; None
        keeps full (round-trip) precision.
        """
        out: dict = {"id": self.id}
        for name in self._FLOAT_FIELDS:
            value = getattr(self, name)
            out[name] = value if precision is None else float(f"{value:.{precision}g}")
        out["valid"] = self.valid
        out["invalid_reasons"] = list(self.invalid_reasons)
        out["reasoning_length"] = self.reasoning_length
        out["length_unit"] = self.length_unit
        if self.group_id is not None:
            out["group_id"] = self.group_id
        return out

    def to_jsonl(self, precision: int | None = 6) -> str:
        return json.dumps(self.to_json_dict(precision), ensure_ascii=False)
