"""Log-probability, entropy, and embedding providers.

Two implementations share one duck-typed surface:

* ``BuiltinProvider`` — a character n-gram model with add-k smoothing plus a
  hashed character-trigram embedder. Fully deterministic, dependency-free,
  and cheap enough to refit per record. Tokens are single characters.
* ``RemoteProvider`` — a thin HTTP client (see docs/wire-protocol.md) for
  backing the same surface with a real language/embedding model.

Both are pure: identical inputs always yield identical outputs. Built-in
models are immutable after fitting and safe to share across threads; the
remote client builds an independent request per call.
"""

from __future__ import annotations

import json
import math
import urllib.error
import urllib.request
from dataclasses import dataclass

from .errors import (
    EmptyCorpusError,
    EmptyTextError,
    LengthMismatchError,
    NonfiniteInputError,
    NonfiniteLogprobError,
    ProviderUnavailableError,
    ZeroVectorError,
)

EMBED_DIM = 256
EMBED_GRAM_LEN = 3

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class LogProbSequence:
    """Per-token conditional log-probabilities (nats), teacher-forced.

    Invariants enforced at construction: token and value lists have equal
    length, every value is finite and at most 0. Values within 1e-9 above
    zero (float fuzz from remote replies) are clamped to 0.
    """

    token_texts: tuple[str, ...]
    logprobs: tuple[float, ...]

    def __post_init__(self):
        if len(self.token_texts) != len(self.logprobs):
            raise LengthMismatchError(
                f"{len(self.token_texts)} tokens vs {len(self.logprobs)} logprobs"
            )
        cleaned = []
        for lp in self.logprobs:
            if not math.isfinite(lp):
                raise NonfiniteLogprobError(f"non-finite logprob {lp}")
            if lp > 1e-9:
                raise NonfiniteLogprobError(f"logprob {lp} > 0 implies probability > 1")
            cleaned.append(0.0 if lp > 0.0 else float(lp))
        object.__setattr__(self, "logprobs", tuple(cleaned))
        object.__setattr__(self, "token_texts", tuple(self.token_texts))

    def __len__(self) -> int:
        return len(self.logprobs)


@dataclass(frozen=True)
class EntropySequence:
    """Per-position next-token Shannon entropies (nats), all non-negative."""

    entropies: tuple[float, ...]

    def __post_init__(self):
        cleaned = []
        for h in self.entropies:
            if not math.isfinite(h):
                raise NonfiniteInputError(f"non-finite entropy {h}")
            if h < -1e-12:
                raise NonfiniteInputError(f"negative entropy {h}")
            cleaned.append(0.0 if h < 0.0 else float(h))
        object.__setattr__(self, "entropies", tuple(cleaned))

    def __len__(self) -> int:
        return len(self.entropies)


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension real vector representing a text."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise NonfiniteInputError("embedding contains non-finite entries")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def dim(self) -> int:
        return len(self.values)

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))


class CharNGramModel:
    """Character n-gram model with add-k smoothing.

    The conditional probability of character ``c`` after history ``h`` is
    ``(count(h, c) + k) / (count(h, .) + k * V)`` where V counts the corpus
    alphabet plus one out-of-alphabet bucket. Histories are the up-to-(n-1)
    preceding characters; positions near a text start use the shorter
    history actually available, so the model scores position 0 as well.
    Immutable after fitting.
    """

    def __init__(self, order: int, smoothing: float, counts: dict, totals: dict, alphabet: frozenset):
        self.order = order
        self.smoothing = smoothing
        self._counts = counts
        self._totals = totals
        self.alphabet = alphabet

    @property
    def vocab_size(self) -> int:
        """Alphabet size including the out-of-alphabet bucket."""
        return len(self.alphabet) + 1

    def _history_key(self, prefix: str) -> str:
        if self.order == 1:
            return ""
        return prefix[-(self.order - 1):]

    def prob(self, history: str, char: str) -> float:
        """P(char | history), smoothed. Raises NONFINITE_LOGPROB when the
        distribution is undefined (k = 0 and history never observed)."""
        key = self._history_key(history)
        total = self._totals.get(key, 0)
        denom = total + self.smoothing * self.vocab_size
        if denom <= 0.0:
            raise NonfiniteLogprobError(
                f"distribution undefined for history {key!r} with smoothing 0"
            )
        count = 0
        if char in self.alphabet:
            count = self._counts.get(key, {}).get(char, 0)
        return (count + self.smoothing) / denom

    def distribution(self, history: str) -> dict[str | None, float]:
        """Full smoothed next-character distribution after ``history``.

        Keys are alphabet characters plus ``None`` for the out-of-alphabet
        bucket; values sum to 1.
        """
        key = self._history_key(history)
        total = self._totals.get(key, 0)
        denom = total + self.smoothing * self.vocab_size
        if denom <= 0.0:
            raise NonfiniteLogprobError(
                f"distribution undefined for history {key!r} with smoothing 0"
            )
        seen = self._counts.get(key, {})
        dist: dict[str | None, float] = {}
        for ch in self.alphabet:
            dist[ch] = (seen.get(ch, 0) + self.smoothing) / denom
        dist[None] = self.smoothing / denom
        return dist


def fit_char_ngram(corpus: list[str], order: int = 3, smoothing: float = 1.0) -> CharNGramModel:
    """Count n-gram transitions over a corpus of texts.

    Raises EMPTY_CORPUS when the corpus has no text (empty list or zero
    characters total).
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if smoothing < 0:
        raise ValueError(f"smoothing must be non-negative, got {smoothing}")
    if not corpus or all(len(t) == 0 for t in corpus):
        raise EmptyCorpusError("corpus contains no characters")

    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    alphabet: set[str] = set()
    ctx = order - 1
    for text in corpus:
        for i, char in enumerate(text):
            history = text[max(0, i - ctx):i]
            bucket = counts.setdefault(history, {})
            bucket[char] = bucket.get(char, 0) + 1
            totals[history] = totals.get(history, 0) + 1
            alphabet.add(char)
    return CharNGramModel(order, float(smoothing), counts, totals, frozenset(alphabet))


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hashed_embedding(text: str) -> EmbeddingVector:
    """Counts of character trigrams hashed into 256 buckets, L2-normalized.

    Texts shorter than three characters fall back to their single longest
    gram so every non-empty text embeds to a unit vector.
    """
    if text == "":
        raise EmptyTextError("cannot embed an empty text")
    gram_len = min(EMBED_GRAM_LEN, len(text))
    buckets = [0.0] * EMBED_DIM
    for i in range(len(text) - gram_len + 1):
        gram = text[i:i + gram_len]
        buckets[fnv1a64(gram.encode("utf-8")) % EMBED_DIM] += 1.0
    norm = math.sqrt(sum(v * v for v in buckets))
    return EmbeddingVector(tuple(v / norm for v in buckets))


class BuiltinProvider:
    """Deterministic offline provider built on a character n-gram model.

    Tokens are single characters, so ``count_tokens`` equals character
    count and the vocabulary is the fitted alphabet plus one
    out-of-alphabet bucket.
    """

    def __init__(self, model: CharNGramModel):
        self.model = model

    @classmethod
    def fit(cls, corpus: list[str], order: int = 3, smoothing: float = 1.0) -> "BuiltinProvider":
        return cls(fit_char_ngram(corpus, order, smoothing))

    def token_logprobs(self, conditioning: str, target: str) -> LogProbSequence:
        """Teacher-forced log P(target[t] | conditioning + target[:t])."""
        if target == "":
            raise EmptyTextError("target must be non-empty")
        logprobs = []
        for t, char in enumerate(target):
            p = self.model.prob(conditioning + target[:t], char)
            if p <= 0.0:
                raise NonfiniteLogprobError(
                    f"zero probability for {char!r} at position {t} under smoothing 0"
                )
            logprobs.append(math.log(p))
        return LogProbSequence(tuple(target), tuple(logprobs))

    def token_entropy(self, conditioning: str, target: str) -> EntropySequence:
        """Shannon entropy of the next-character distribution at each
        target position, conditioned on everything to its left."""
        if target == "":
            raise EmptyTextError("target must be non-empty")
        entropies = []
        for t in range(len(target)):
            dist = self.model.distribution(conditioning + target[:t])
            h = -sum(p * math.log(p) for p in dist.values() if p > 0.0)
            entropies.append(h)
        return EntropySequence(tuple(entropies))

    def embed(self, text: str) -> EmbeddingVector:
        return hashed_embedding(text)

    def count_tokens(self, text: str) -> int:
        return len(text)


class RemoteProvider:
    """HTTP client for a remote logprob/entropy/embedding service.

    POST bodies and replies are JSON; any non-200 status, transport
    failure, or malformed reply raises PROVIDER_UNAVAILABLE. Requests are
    independent, so concurrent in-flight calls are safe.
    """

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _post(self, path: str, payload: dict) -> dict:
        req = urllib.request.Request(
            self.base_url + path,
            data=json.dumps(payload).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                if resp.status != 200:
                    raise ProviderUnavailableError(f"{path} returned status {resp.status}")
                body = resp.read()
        except ProviderUnavailableError:
            raise
        except urllib.error.HTTPError as exc:
            raise ProviderUnavailableError(f"{path} returned status {exc.code}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise ProviderUnavailableError(f"{path} unreachable: {exc}") from exc
        try:
            reply = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ProviderUnavailableError(f"{path} returned malformed JSON") from exc
        if not isinstance(reply, dict):
            raise ProviderUnavailableError(f"{path} returned a non-object reply")
        return reply

    def token_logprobs(self, conditioning: str, target: str) -> LogProbSequence:
        if target == "":
            raise EmptyTextError("target must be non-empty")
        reply = self._post("/v1/logprobs", {"conditioning": conditioning, "target": target})
        tokens = reply.get("tokens")
        logprobs = reply.get("logprobs")
        if not isinstance(tokens, list) or not isinstance(logprobs, list):
            raise ProviderUnavailableError("/v1/logprobs reply missing tokens/logprobs")
        if len(tokens) != len(logprobs):
            raise LengthMismatchError(
                f"reply carries {len(tokens)} tokens but {len(logprobs)} logprobs"
            )
        return LogProbSequence(tuple(tokens), tuple(float(x) for x in logprobs))

    def token_entropy(self, conditioning: str, target: str) -> EntropySequence:
        if target == "":
            raise EmptyTextError("target must be non-empty")
        reply = self._post("/v1/entropy", {"conditioning": conditioning, "target": target})
        entropies = reply.get("entropies")
        if not isinstance(entropies, list):
            raise ProviderUnavailableError("/v1/entropy reply missing entropies")
        return EntropySequence(tuple(float(x) for x in entropies))

    def embed(self, text: str) -> EmbeddingVector:
        if text == "":
            raise EmptyTextError("cannot embed an empty text")
        reply = self._post("/v1/embed", {"text": text})
        vector = reply.get("vector")
        if not isinstance(vector, list) or not vector:
            raise ProviderUnavailableError("/v1/embed reply missing vector")
        raw = EmbeddingVector(tuple(float(x) for x in vector))
        norm = raw.norm()
        if norm == 0.0:
            raise ZeroVectorError("/v1/embed returned a zero vector")
        return EmbeddingVector(tuple(v / norm for v in raw.values))

    def count_tokens(self, text: str) -> int:
        if text == "":
            return 0
        reply = self._post("/v1/entropy", {"conditioning": "", "target": text})
        tokens = reply.get("tokens")
        if not isinstance(tokens, list):
            raise ProviderUnavailableError("/v1/entropy reply missing tokens")
        return len(tokens)
