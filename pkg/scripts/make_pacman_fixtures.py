#!/usr/bin/env python3
"""Regenerate the recorded QA fixtures for the Pacman oracle tests.

The fixture JSON files under tests/fixtures/ hold hashed (passage, question)
lookups the FixtureProvider replays. Answers mirror what a hosted extractive
QA model returned for the two bundled Pacman manuals; verdict scores encode
ghost -> No and pellet -> Yes. Run from the repo root after editing either
manual text; commit the regenerated JSON alongside it.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from readward.manual import (
    GENERIC_QUESTIONS,
    chunk,
    normalize,
    object_question,
    read_contexts,
    tfidf_rank,
)
from readward.providers import FixtureProvider, sha256_text
from readward.reason import compose_prompt

OBJECTIVE, SUCCEED, SCORE_AT, ENEMIES = GENERIC_QUESTIONS

# Official-manual spans, keyed by (question, chunk index). The enemies answer
# deliberately splits across both chunks so extraction joins the spans.
OFFICIAL_SPANS = {
    (OBJECTIVE, 0): (
        "To score as many points as you can practice clearing the maze of dots "
        "before trying to gobble up the ghosts."
    ),
    (SUCCEED, 0): "Score as many points as you can.",
    (ENEMIES, 0): "Ghosts",
    (ENEMIES, 1): "stay close to an energy pill before eating it, and tease the ghosts.",
}

OFFICIAL_OBJECT_SPANS = {
    ("ghost", 1): (
        "Avoid a hungry ghost in the open: touch one and you lose a life when "
        "Pac-Man dies."
    ),
    ("ghosts", 1): (
        "Avoid a hungry ghost in the open: touch one and you lose a life when "
        "Pac-Man dies."
    ),
    ("pellet", 1): "Eat every pellet to score points and win the round.",
}

# Yes/No scores for the decision prompts; only objects with a recorded
# polarity get a score entry, everything else would be a fixture miss.
OFFICIAL_VERDICT_SCORES = {
    "ghost": (0.03, 0.97),
    "ghosts": (0.04, 0.96),
    "pellet": (0.95, 0.05),
}

WIKI_ANSWER = "The player earns points by eating pellets and avoiding ghosts."

MAX_TOKENS = 64
TOP_K = 10


def answer_entry(passage: str, question: str, result: str) -> dict:
    return {
        "kind": "answer",
        "passage_sha256": sha256_text(passage),
        "question_sha256": sha256_text(question),
        "result": result,
    }


def build_official(path: Path) -> list[dict]:
    doc = normalize(path.read_text(), source_tag="official")
    chunks = chunk(doc, max_tokens=MAX_TOKENS)
    if len(chunks) < 2:
        raise SystemExit(f"expected >= 2 chunks from {path}, got {len(chunks)}")
    terms = tfidf_rank(doc, k=TOP_K).terms
    for needed in ("ghost", "pellet"):
        if needed not in terms:
            raise SystemExit(f"term {needed!r} fell out of the top-{TOP_K}: {terms}")

    entries = []
    for question in GENERIC_QUESTIONS:
        for ch in chunks:
            span = OFFICIAL_SPANS.get((question, ch.index), "")
            entries.append(answer_entry(ch.text, question, span))
    for term in terms:
        question = object_question(term)
        for ch in chunks:
            span = OFFICIAL_OBJECT_SPANS.get((term, ch.index), "")
            entries.append(answer_entry(ch.text, question, span))

    # Replay the read stage against the answer entries to derive the exact
    # decision prompts, then attach the verdict scores.
    provider = FixtureProvider(entries)
    _, contexts = read_contexts(provider, doc, k=TOP_K, max_tokens=MAX_TOKENS)
    by_object = {ctx.object_class: ctx for ctx in contexts}
    for term, scores in OFFICIAL_VERDICT_SCORES.items():
        if term not in by_object:
            continue
        entries.append(
            {
                "kind": "score",
                "prompt_sha256": sha256_text(compose_prompt(by_object[term])),
                "result": list(scores),
            }
        )
    return entries


def build_wiki(path: Path) -> list[dict]:
    doc = normalize(path.read_text(), source_tag="wiki")
    chunks = chunk(doc, max_tokens=MAX_TOKENS)
    terms = tfidf_rank(doc, k=TOP_K).terms

    entries = []
    for question in (OBJECTIVE, SUCCEED, SCORE_AT):
        for ch in chunks:
            entries.append(answer_entry(ch.text, question, WIKI_ANSWER if ch.index == 0 else ""))
    for ch in chunks:
        entries.append(answer_entry(ch.text, ENEMIES, ""))
    for term in terms:
        question = object_question(term)
        for ch in chunks:
            entries.append(answer_entry(ch.text, question, ""))
    return entries


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--fixtures-dir",
        default=Path(__file__).resolve().parent.parent / "tests" / "fixtures",
        type=Path,
    )
    args = parser.parse_args()
    fixtures = args.fixtures_dir

    for stem, builder in (("pacman_official", build_official), ("pacman_wiki", build_wiki)):
        entries = builder(fixtures / f"{stem}.txt")
        out = fixtures / f"{stem}.json"
        out.write_text(json.dumps(entries, indent=2) + "\n")
        print(f"wrote {out} ({len(entries)} entries)")


if __name__ == "__main__":
    main()
