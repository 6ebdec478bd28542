"""Deterministic synthetic corpus and golden score fixtures.

The corpus is 20 records with controlled properties: plain valid records,
copy-the-input generations (whose semantic gain is exactly zero),
perfect-match generations, and one of each format-gate failure. Texts are
assembled from a fixed word bank with a Philox-seeded generator, so
regeneration from the documented seed reproduces the committed files
byte-for-byte on a given platform.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numpy.random import Generator, Philox

from .core import RewardConfig, RolloutRecord
from .errors import FixtureDriftError
from .scoring import score_record_builtin

FIXTURE_SEED = 1729
CORPUS_NAME = "corpus.jsonl"
GOLDEN_NAME = "golden_scores.jsonl"

_CORPUS_SALT = 0x66697874
_MASK64 = (1 << 64) - 1

_WORDS = (
    "gradient", "policy", "reward", "sampling", "estimator", "bound",
    "latent", "sparse", "masking", "entropy", "anchor", "trajectory",
    "signal", "update", "batch", "token", "margin", "kernel", "operator",
    "residual", "pruning", "encoder", "decoder", "retrieval", "alignment",
    "contrast", "baseline", "variance", "momentum", "schedule", "penalty",
    "routing", "mixture", "expert", "cache", "planner", "search", "budget",
    "stability", "collapse", "regularizer", "objective", "advantage",
    "rollout", "group", "quantile", "threshold", "metric", "probe",
    "curriculum", "distill", "transfer", "adapter", "projection", "fusion",
)


def _sentence(gen: Generator, words: int) -> str:
    picks = [_WORDS[int(i)] for i in gen.integers(0, len(_WORDS), size=words)]
    return " ".join(picks).capitalize() + "."


def _paragraph(gen: Generator, sentences: int) -> str:
    return " ".join(_sentence(gen, int(gen.integers(6, 12))) for _ in range(sentences))


def _prose(gen: Generator, min_chars: int) -> str:
    out = _sentence(gen, int(gen.integers(8, 14)))
    while len(out) < min_chars:
        out += " " + _sentence(gen, int(gen.integers(8, 14)))
    return out


def _method_text(gen: Generator) -> str:
    return (
        "## Overview\n"
        + _paragraph(gen, 2)
        + "\n## Details\n"
        + _paragraph(gen, 3)
        + "\n## Procedure\n"
        + _paragraph(gen, 2)
    )


def _partial_match(gen: Generator, reference: str, keep: float) -> str:
    """A method whose overview shares roughly ``keep`` of the reference's
    overview words, for mid-range semantic gains."""
    head, _, tail = reference.partition("\n## Details\n")
    words = head.removeprefix("## Overview\n").split()
    mixed = [
        w if gen.random() < keep else _WORDS[int(gen.integers(0, len(_WORDS)))]
        for w in words
    ]
    return "## Overview\n" + " ".join(mixed) + "\n## Details\n" + _paragraph(gen, 3)


def generate_corpus(seed: int = FIXTURE_SEED) -> list[RolloutRecord]:
    """Build the 20-record synthetic corpus for the given seed."""
    gen = Generator(Philox(key=np.array([seed & _MASK64, _CORPUS_SALT], dtype=np.uint64)))
    records = []
    for i in range(20):
        rid = f"r{i:02d}"
        group_id = f"g{i // 4}"
        context = _paragraph(gen, 3)
        motivation = _paragraph(gen, 2)
        ground_truth = _method_text(gen)
        reasoning = _prose(gen, 1100)
        generated = _method_text(gen)

        if 8 <= i <= 11:
            generated = _partial_match(gen, ground_truth, keep=0.2 + 0.2 * (i - 8))
        elif i == 12:
            # copy policy: generation restates the joined input verbatim
            generated = context + "\n" + motivation
        elif i in (13, 14):
            generated = ground_truth
        elif i == 15:
            reasoning = ""
        elif i == 16:
            reasoning = (" " * 10 + "\n") * 100
        elif i == 17:
            reasoning = _prose(gen, 300)[:400]
        elif i == 18:
            reasoning = _prose(gen, 700) + "\n## Plan\n" + _prose(gen, 700)
        elif i == 19:
            reasoning = "## Intro"

        records.append(
            RolloutRecord(
                id=rid,
                context=context,
                motivation=motivation,
                reasoning=reasoning,
                generated_method=generated,
                ground_truth_method=ground_truth,
                group_id=group_id,
            )
        )
    return records


def render_fixture_files(seed: int = FIXTURE_SEED) -> dict[str, str]:
    """Corpus and full-precision golden reports as file contents."""
    records = generate_corpus(seed)
    config = RewardConfig()
    corpus_lines = [r.to_jsonl() for r in records]
    golden_lines = [score_record_builtin(r, config).to_jsonl(precision=None) for r in records]
    return {
        CORPUS_NAME: "\n".join(corpus_lines) + "\n",
        GOLDEN_NAME: "\n".join(golden_lines) + "\n",
    }


def regenerate_fixtures(dest: Path | str, seed: int = FIXTURE_SEED) -> list[Path]:
    """Write fixture files under ``dest``; returns the written paths."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in render_fixture_files(seed).items():
        path = dest / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    return written


def verify_fixtures(committed: Path | str, seed: int = FIXTURE_SEED) -> None:
    """Raise FIXTURE_DRIFT unless regeneration reproduces the committed
    files byte-identically."""
    committed = Path(committed)
    for name, content in render_fixture_files(seed).items():
        path = committed / name
        if not path.exists():
            raise FixtureDriftError(f"missing fixture file {path}")
        if path.read_text(encoding="utf-8") != content:
            raise FixtureDriftError(f"{path} differs from regeneration with seed {seed}")
