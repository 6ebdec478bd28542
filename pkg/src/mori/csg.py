"""Contrastive semantic gain.

Embedding similarity of the generated method to the reference method,
minus the similarity a copy-the-input policy would achieve. The gain is
positive only when generation moves from the problem statement toward the
solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import RolloutRecord
from .errors import DimMismatchError, EmptyTextError, ZeroVectorError
from .providers import EmbeddingVector

DEFAULT_HEADER_PATTERNS = ("##", "###")


class SectionMode(Enum):
    FULL = "full"
    OVERVIEW = "overview"


@dataclass(frozen=True)
class SemanticScores:
    s_gen: float
    s_base: float
    delta_sem: float


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| * |b|), in [-1, 1] up to rounding."""
    if a.dim != b.dim:
        raise DimMismatchError(f"{a.dim}-dim vs {b.dim}-dim")
    na = a.norm()
    nb = b.norm()
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for a zero vector")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return dot / (na * nb)


def overview_slice(text: str, header_patterns: tuple[str, ...] = DEFAULT_HEADER_PATTERNS) -> str:
    """Text up to, but excluding, the second markdown header line.

    A header line starts (after leading whitespace) with one of the
    forbidden prefixes. Texts with fewer than two header lines pass
    through unchanged.
    """
    headers_seen = 0
    offset = 0
    for line in text.splitlines(keepends=True):
        if any(line.lstrip().startswith(p) for p in header_patterns):
            headers_seen += 1
            if headers_seen == 2:
                return text[:offset]
        offset += len(line)
    return text


def contrastive_semantic_gain(
    record: RolloutRecord,
    embedder,
    section_mode: SectionMode = SectionMode.OVERVIEW,
    header_patterns: tuple[str, ...] = DEFAULT_HEADER_PATTERNS,
) -> SemanticScores:
    """Score a record's generation against its reference method.

    Under OVERVIEW the generated and reference methods are sliced to their
    overview section before embedding; the copy baseline always embeds the
    raw joined input, since that is the text a copy policy would emit.
    """
    if record.generated_method == "" or record.ground_truth_method == "":
        raise EmptyTextError("generated and reference methods must be non-empty")
    generated = record.generated_method
    reference = record.ground_truth_method
    if section_mode is SectionMode.OVERVIEW:
        generated = overview_slice(generated, header_patterns)
        reference = overview_slice(reference, header_patterns)
    target = embedder.embed(reference)
    s_gen = cosine_similarity(embedder.embed(generated), target)
    s_base = cosine_similarity(embedder.embed(record.query), target)
    return SemanticScores(s_gen=s_gen, s_base=s_base, delta_sem=s_gen - s_base)
