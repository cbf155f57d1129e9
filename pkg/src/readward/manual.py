"""Read a game manual into ranked keywords and per-object QA context bundles.

Pipeline: normalize raw text (plain or HTML) into paragraphs, chunk the
paragraphs under a token budget, rank candidate object keywords by TFIDF over
paragraphs, then ask a QA provider a fixed battery of questions per keyword
and render the non-empty answers into a context bundle.
"""

from __future__ import annotations

import html as html_lib
import math
import re
from collections import Counter
from dataclasses import dataclass

from .providers import ProviderError, ExtractiveQuery, QAProvider
from .stopwords import STOPWORDS

SOURCE_TAGS = ("official", "wiki", "custom")

GENERIC_QUESTIONS = (
    "What is the objective of the game?",
    "How to succeed in the game?",
    "How to score at the game?",
    "Who are your enemies?",
)

OBJECT_QUESTION = "What happens when the player hit a {obj}?"

MIN_TERM_LENGTH = 3

_TAG_RE = re.compile(r"<[^>]+>")
_BLOCK_TAG_RE = re.compile(
    r"</?(?:p|div|br|li|ul|ol|tr|td|th|table|h[1-6]|section|article|blockquote)\b[^>]*>",
    re.IGNORECASE,
)


class EmptyManualError(ValueError):
    pass


class EmptyContextError(ValueError):
    pass


class ExtractionError(ProviderError):
    """Provider failure during extraction, annotated with the chunk index."""

    def __init__(self, chunk_index: int, original: Exception):
        super().__init__(f"provider failed on chunk {chunk_index}: {original}")
        self.chunk_index = chunk_index
        self.original = original


@dataclass(frozen=True)
class ManualDoc:
    source_tag: str
    text: str
    paragraphs: tuple[str, ...]


def normalize(raw: str, source_tag: str = "custom") -> ManualDoc:
    """Strip markup, collapse whitespace, split into paragraphs."""
    if source_tag not in SOURCE_TAGS:
        raise ValueError(f"source_tag must be one of {SOURCE_TAGS}")
    text = raw
    if re.search(r"<[a-zA-Z/!][^>]*>", text):
        text = _BLOCK_TAG_RE.sub("\n\n", text)
        text = _TAG_RE.sub(" ", text)
        text = html_lib.unescape(text)
    paragraphs = tuple(
        re.sub(r"\s+", " ", para).strip()
        for para in re.split(r"\n\s*\n", text)
        if para.strip()
    )
    if not paragraphs:
        raise EmptyManualError("manual is empty after normalization")
    return ManualDoc(source_tag=source_tag, text="\n\n".join(paragraphs), paragraphs=paragraphs)


@dataclass(frozen=True)
class Chunk:
    index: int
    text: str
    token_count: int


def chunk(doc: ManualDoc, max_tokens: int = 256) -> list[Chunk]:
    """Greedy paragraph packing; oversized paragraphs split on word windows.

    Every word of the document lands in exactly one chunk and no chunk
    exceeds max_tokens whitespace tokens.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be positive")
    pieces: list[list[str]] = []
    current: list[str] = []
    current_count = 0

    def flush():
        nonlocal current, current_count
        if current:
            pieces.append(current)
            current = []
            current_count = 0

    for para in doc.paragraphs:
        words = para.split()
        if len(words) > max_tokens:
            flush()
            for start in range(0, len(words), max_tokens):
                pieces.append([" ".join(words[start : start + max_tokens])])
            continue
        if current_count + len(words) > max_tokens:
            flush()
        current.append(para)
        current_count += len(words)
    flush()
    chunks = []
    for i, paras in enumerate(pieces):
        text = "\n\n".join(paras)
        chunks.append(Chunk(index=i, text=text, token_count=len(text.split())))
    return chunks


def candidate_terms(text: str) -> list[str]:
    """Lowercase alphabetic tokens of length >= 3 that are not stopwords."""
    return [
        t
        for t in re.findall(r"[a-z]+", text.lower())
        if len(t) >= MIN_TERM_LENGTH and t not in STOPWORDS
    ]


@dataclass(frozen=True)
class KeywordRanking:
    entries: tuple[tuple[str, float], ...]
    short: bool  # fewer candidates than requested

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(term for term, _ in self.entries)


def tfidf_rank(doc: ManualDoc, k: int = 10) -> KeywordRanking:
    """Top-k candidate terms by max-over-paragraph TFIDF.

    Documents are paragraphs. tf is count over paragraph candidate length,
    idf is ln((1+N)/(1+df)) + 1. A term's score is its best paragraph score.
    Ties break lexicographically.
    """
    if k < 1:
        raise ValueError("k must be positive")
    para_terms = [candidate_terms(p) for p in doc.paragraphs]
    n_docs = len(doc.paragraphs)
    df: Counter[str] = Counter()
    for terms in para_terms:
        df.update(set(terms))
    scores: dict[str, float] = {}
    for terms in para_terms:
        if not terms:
            continue
        length = len(terms)
        counts = Counter(terms)
        for term, count in counts.items():
            idf = math.log((1 + n_docs) / (1 + df[term])) + 1.0
            score = (count / length) * idf
            if score > scores.get(term, 0.0):
                scores[term] = score
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return KeywordRanking(entries=tuple(ranked[:k]), short=len(ranked) < k)


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str


def generic_questions() -> tuple[str, ...]:
    return GENERIC_QUESTIONS


def object_question(object_class: str) -> str:
    return OBJECT_QUESTION.format(obj=object_class)


def extract(
    provider: QAProvider,
    doc: ManualDoc,
    question: str,
    max_tokens: int = 256,
    chunks: list[Chunk] | None = None,
) -> QAPair:
    """Ask the question of every chunk and join the non-empty answers."""
    if chunks is None:
        chunks = chunk(doc, max_tokens)
    parts = []
    for ch in chunks:
        try:
            answer = provider.answer(ExtractiveQuery(ch.text, question))
        except ProviderError as exc:
            raise ExtractionError(ch.index, exc) from exc
        if answer.strip():
            parts.append(answer.strip())
    # join with ". "; earlier parts drop their own trailing period so spans
    # that already end a sentence do not double up
    head = [p[:-1] if p.endswith(".") else p for p in parts[:-1]]
    return QAPair(question=question, answer=". ".join(head + parts[-1:]))


def render_pair(pair: QAPair) -> str:
    answer = re.sub(r"\s+", " ", pair.answer).strip()
    if answer and answer[-1] not in ".!?":
        answer += "."
    return f"Question: {pair.question} Answer: {answer}"


@dataclass(frozen=True)
class ContextBundle:
    object_class: str
    pairs: tuple[QAPair, ...]
    rendered: str


def build_context(
    provider: QAProvider,
    doc: ManualDoc,
    object_class: str,
    max_tokens: int = 256,
    generic_pairs: tuple[QAPair, ...] | None = None,
) -> ContextBundle:
    """Generic pairs plus the object question, rendered one pair per line.

    Pairs with empty answers are dropped; consecutive generic pairs with the
    same answer collapse to the first. Raises EmptyContextError when nothing
    survives.
    """
    chunks = chunk(doc, max_tokens)
    if generic_pairs is None:
        generic_pairs = extract_generic(provider, doc, max_tokens, chunks)
    pairs: list[QAPair] = []
    for pair in generic_pairs:
        if not pair.answer:
            continue
        if pairs and pairs[-1].answer == pair.answer:
            continue
        pairs.append(pair)
    object_pair = extract(provider, doc, object_question(object_class), chunks=chunks)
    if object_pair.answer:
        pairs.append(object_pair)
    if not pairs:
        raise EmptyContextError(f"no answers at all for {object_class!r}")
    rendered = "\n".join(render_pair(p) for p in pairs)
    return ContextBundle(object_class=object_class, pairs=tuple(pairs), rendered=rendered)


def extract_generic(
    provider: QAProvider,
    doc: ManualDoc,
    max_tokens: int = 256,
    chunks: list[Chunk] | None = None,
) -> tuple[QAPair, ...]:
    if chunks is None:
        chunks = chunk(doc, max_tokens)
    return tuple(extract(provider, doc, q, chunks=chunks) for q in GENERIC_QUESTIONS)


def read_contexts(
    provider: QAProvider,
    doc: ManualDoc,
    k: int = 10,
    max_tokens: int = 256,
) -> tuple[KeywordRanking, list[ContextBundle]]:
    """Rank keywords, then build a context per keyword, skipping empty ones."""
    ranking = tfidf_rank(doc, k)
    chunks = chunk(doc, max_tokens)
    generic_pairs = extract_generic(provider, doc, max_tokens, chunks)
    contexts = []
    for term in ranking.terms:
        try:
            contexts.append(
                build_context(provider, doc, term, max_tokens, generic_pairs=generic_pairs)
            )
        except EmptyContextError:
            continue
    return ranking, contexts
