"""Question-answering providers behind one small interface.

Three implementations: a deterministic lexical baseline, a record/replay
fixture store keyed by content hashes, and an HTTP client for an external
service. Extraction asks ``answer`` (span from a passage, empty string when
nothing matches) and decision asks ``score_choices`` (one real score per
choice).
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass

import requests

from .stopwords import STOPWORDS

OVERLAP_THRESHOLD = 0.15

NEGATIVE_CUES = frozenset(
    ["avoid", "lose", "enemy", "enemies", "penalty", "death", "dies", "wrapped", "crash"]
)
POSITIVE_CUES = frozenset(
    ["score", "points", "eat", "gobble", "win", "bonus", "collect"]
)

OBJECT_QUESTION_MARK = "What happens when the player hit"


class ProviderError(Exception):
    pass


class AbstainError(ProviderError):
    """The provider has no signal either way and declines to answer."""


class FixtureMissError(ProviderError, KeyError):
    pass


class TransportError(ProviderError):
    pass


@dataclass(frozen=True)
class ExtractiveQuery:
    passage: str
    question: str


@dataclass(frozen=True)
class ChoiceQuery:
    prompt: str
    choices: tuple[str, ...]


@dataclass(frozen=True)
class ChoiceScores:
    choices: tuple[str, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.choices) != len(self.scores):
            raise ValueError("one score per choice required")

    def best(self) -> str:
        # ties go to the earlier choice
        top = max(self.scores)
        return self.choices[self.scores.index(top)]


class QAProvider(ABC):
    @abstractmethod
    def answer(self, query: ExtractiveQuery) -> str:
        """Extract an answer span, or return '' when nothing qualifies."""

    @abstractmethod
    def score_choices(self, query: ChoiceQuery) -> ChoiceScores:
        """Score each choice; may raise AbstainError."""


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _tokens(text: str) -> list[str]:
    return re.findall(r"[a-z]+", text.lower())


def content_words(text: str) -> set[str]:
    return {t for t in _tokens(text) if t not in STOPWORDS}


def split_sentences(text: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", text)
    return [p.strip() for p in parts if p.strip()]


class LexicalProvider(QAProvider):
    """Stateless sentence-overlap QA. No model, fully deterministic.

    answer: the passage sentence with the highest content-word overlap with
    the question, if the overlap fraction reaches 0.15; earlier sentence wins
    ties. score_choices: counts fixed positive and negative cue words in the
    answer segments of the prompt, weighting the object-specific pair double.
    """

    def answer(self, query: ExtractiveQuery) -> str:
        question_words = content_words(query.question)
        if not question_words:
            return ""
        best_score = 0.0
        best_sentence = ""
        for sentence in split_sentences(query.passage):
            overlap = len(content_words(sentence) & question_words) / len(question_words)
            if overlap > best_score:
                best_score = overlap
                best_sentence = sentence
        if best_score >= OVERLAP_THRESHOLD:
            # a sentence can span a heading break, keep answers single-line
            return re.sub(r"\s+", " ", best_sentence)
        return ""

    def score_choices(self, query: ChoiceQuery) -> ChoiceScores:
        if tuple(query.choices) != ("Yes", "No"):
            raise ValueError("lexical scoring only supports Yes/No choices")
        yes = 0.0
        no = 0.0
        for line in query.prompt.splitlines():
            if "Answer:" not in line or "Question:" not in line:
                continue
            question_part, _, answer_part = line.partition("Answer:")
            weight = 2.0 if OBJECT_QUESTION_MARK in question_part else 1.0
            for token in _tokens(answer_part):
                if token in POSITIVE_CUES:
                    yes += weight
                elif token in NEGATIVE_CUES:
                    no += weight
        if yes == 0.0 and no == 0.0:
            raise AbstainError("no scoring cues in prompt answers")
        return ChoiceScores(("Yes", "No"), (yes, no))


class FixtureProvider(QAProvider):
    """Replays recorded provider calls from a JSON file, keyed by hashes."""

    def __init__(self, entries: list[dict]):
        self._answers: dict[tuple[str, str], str] = {}
        self._scores: dict[str, tuple[float, ...]] = {}
        for entry in entries:
            if entry["kind"] == "answer":
                key = (entry["passage_sha256"], entry["question_sha256"])
                self._answers[key] = entry["result"]
            elif entry["kind"] == "score":
                self._scores[entry["prompt_sha256"]] = tuple(float(s) for s in entry["result"])
            else:
                raise ValueError(f"unknown fixture kind {entry['kind']!r}")

    @classmethod
    def from_path(cls, path: str) -> "FixtureProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def answer(self, query: ExtractiveQuery) -> str:
        key = (sha256_text(query.passage), sha256_text(query.question))
        try:
            return self._answers[key]
        except KeyError:
            raise FixtureMissError(
                f"no recorded answer for question {query.question!r} on this passage"
            ) from None

    def score_choices(self, query: ChoiceQuery) -> ChoiceScores:
        key = sha256_text(query.prompt)
        try:
            scores = self._scores[key]
        except KeyError:
            raise FixtureMissError("no recorded scores for this prompt") from None
        return ChoiceScores(tuple(query.choices), scores)


class RecordingProvider(QAProvider):
    """Wraps another provider and logs every call as a fixture entry."""

    def __init__(self, inner: QAProvider):
        self.inner = inner
        self._entries: dict[tuple, dict] = {}

    def answer(self, query: ExtractiveQuery) -> str:
        result = self.inner.answer(query)
        key = ("answer", sha256_text(query.passage), sha256_text(query.question))
        self._entries[key] = {
            "kind": "answer",
            "passage_sha256": key[1],
            "question_sha256": key[2],
            "result": result,
        }
        return result

    def score_choices(self, query: ChoiceQuery) -> ChoiceScores:
        scored = self.inner.score_choices(query)
        key = ("score", sha256_text(query.prompt))
        self._entries[key] = {
            "kind": "score",
            "prompt_sha256": key[1],
            "result": list(scored.scores),
        }
        return scored

    @property
    def entries(self) -> list[dict]:
        return list(self._entries.values())

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.entries, fh, indent=2)
            fh.write("\n")


class HTTPProvider(QAProvider):
    """Client for a QA service exposing POST /answer and POST /score.

    Each request gets up to ``retries`` retries with exponential backoff.
    A semaphore caps in-flight requests per provider instance.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        retries: int = 2,
        max_inflight: int = 8,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._session = requests.Session()
        self._gate = threading.BoundedSemaphore(max_inflight)

    def _post(self, route: str, payload: dict) -> dict:
        url = f"{self.base_url}{route}"
        last_error = None
        with self._gate:
            for attempt in range(self.retries + 1):
                if attempt:
                    time.sleep(0.5 * 2 ** (attempt - 1))
                try:
                    response = self._session.post(url, json=payload, timeout=self.timeout)
                except requests.RequestException as exc:
                    last_error = exc
                    continue
                if response.status_code != 200:
                    last_error = TransportError(f"{url} returned {response.status_code}")
                    continue
                try:
                    return response.json()
                except ValueError as exc:
                    last_error = exc
                    continue
        raise TransportError(f"{url} failed after {self.retries + 1} attempts: {last_error}")

    def answer(self, query: ExtractiveQuery) -> str:
        body = self._post("/answer", {"passage": query.passage, "question": query.question})
        try:
            return str(body["answer"])
        except (TypeError, KeyError):
            raise TransportError(f"malformed /answer response: {body!r}") from None

    def score_choices(self, query: ChoiceQuery) -> ChoiceScores:
        body = self._post("/score", {"prompt": query.prompt, "choices": list(query.choices)})
        try:
            scores = tuple(float(s) for s in body["scores"])
        except (TypeError, KeyError, ValueError):
            raise TransportError(f"malformed /score response: {body!r}") from None
        if len(scores) != len(query.choices):
            raise TransportError("score count does not match choice count")
        return ChoiceScores(tuple(query.choices), scores)


def provider_from_spec(spec: str, env: dict | None = None) -> QAProvider:
    """Build a provider from a short spec string.

    "lexical", "fixture:<path>", "http:<url>" or a bare http(s) URL.
    READWARD_QA_URL in the environment overrides any HTTP URL.
    """
    import os

    env = os.environ if env is None else env
    override = env.get("READWARD_QA_URL")
    if spec == "lexical":
        return LexicalProvider()
    if spec.startswith("fixture:"):
        return FixtureProvider.from_path(spec[len("fixture:"):])
    if spec.startswith(("http://", "https://")):
        return HTTPProvider(override or spec)
    if spec.startswith("http:"):
        return HTTPProvider(override or spec[len("http:"):])
    if spec == "http":
        if not override:
            raise ValueError("http provider needs a URL or READWARD_QA_URL")
        return HTTPProvider(override)
    raise ValueError(f"unknown provider spec {spec!r}")
