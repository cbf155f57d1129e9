"""Turn per-object context bundles into hit/avoid verdicts and rewards.

Each object context is posed a fixed Yes/No question; the provider scores the
two choices and the winning verdict maps to a positive or negative auxiliary
reward. A provider that cannot commit either way abstains, which maps to a
zero reward instead of failing the run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass

from .interact import InteractionEvent
from .manual import ContextBundle
from .providers import AbstainError, ChoiceQuery, QAProvider

log = logging.getLogger(__name__)

YES = "Yes"
NO = "No"
ABSTAIN = "Abstain"

REWARD_MIN = 2.0
REWARD_MAX = 50.0

DECISION_QUESTION = "Should you hit a {obj} if you want to win? Answer: "


def compose_prompt(context: ContextBundle) -> str:
    """Rendered bundle followed by the decision question for its object."""
    question = DECISION_QUESTION.format(obj=context.object_class)
    return f"{context.rendered}\nQuestion: {question}"


@dataclass(frozen=True)
class RewardRule:
    object_class: str
    verdict: str
    reward: float

    def __post_init__(self):
        if self.verdict not in (YES, NO, ABSTAIN):
            raise ValueError(f"verdict must be Yes, No or Abstain, got {self.verdict!r}")


class RewardTable:
    """Maps object classes to shaped rewards derived from verdicts.

    Yes pays +positive_reward, No pays -negative_reward, Abstain pays 0.
    Both magnitudes must lie in [2, 50]; outside that band the shaped signal
    is either drowned out or dominates the clipped native reward.
    """

    def __init__(self, rules, positive_reward: float = 5.0, negative_reward: float = 5.0):
        if not REWARD_MIN <= positive_reward <= REWARD_MAX:
            raise ValueError(f"positive_reward must be in [{REWARD_MIN}, {REWARD_MAX}]")
        if not REWARD_MIN <= negative_reward <= REWARD_MAX:
            raise ValueError(f"negative_reward must be in [{REWARD_MIN}, {REWARD_MAX}]")
        self.positive_reward = float(positive_reward)
        self.negative_reward = float(negative_reward)
        self.rules: dict[str, RewardRule] = {}
        for rule in rules:
            if rule.object_class in self.rules:
                raise ValueError(f"duplicate rule for {rule.object_class!r}")
            self.rules[rule.object_class] = rule

    def reward_for(self, object_class: str) -> float:
        rule = self.rules.get(object_class)
        if rule is None:
            return 0.0
        return rule.reward

    def to_json(self) -> dict:
        return {
            "r_p": self.positive_reward,
            "r_n": self.negative_reward,
            "rules": [
                {"object": r.object_class, "verdict": r.verdict, "reward": r.reward}
                for r in sorted(self.rules.values(), key=lambda r: r.object_class)
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RewardTable":
        rules = [
            RewardRule(item["object"], item["verdict"], float(item["reward"]))
            for item in payload["rules"]
        ]
        return cls(rules, float(payload["r_p"]), float(payload["r_n"]))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "RewardTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def decide(provider: QAProvider, context: ContextBundle) -> str:
    """Yes/No verdict for one object context; ties go conservatively to No."""
    prompt = compose_prompt(context)
    try:
        scored = provider.score_choices(ChoiceQuery(prompt, (YES, NO)))
    except AbstainError:
        return ABSTAIN
    yes, no = scored.scores
    return YES if yes > no else NO


def build_table(
    provider: QAProvider,
    contexts,
    positive_reward: float = 5.0,
    negative_reward: float = 5.0,
    cache_dir: str | None = None,
) -> RewardTable:
    """Run decide() over the contexts and assemble the reward table.

    cache_dir, if given, memoizes verdicts keyed by the prompt hash so reruns
    over the same bundles skip the provider.
    """
    rules = []
    for context in contexts:
        verdict = None
        cache_path = None
        if cache_dir is not None:
            os.makedirs(cache_dir, exist_ok=True)
            digest = hashlib.sha256(compose_prompt(context).encode("utf-8")).hexdigest()
            cache_path = os.path.join(cache_dir, f"verdict_{digest}.json")
            if os.path.exists(cache_path):
                with open(cache_path, encoding="utf-8") as fh:
                    verdict = json.load(fh)["verdict"]
        if verdict is None:
            verdict = decide(provider, context)
            if cache_path is not None:
                with open(cache_path, "w", encoding="utf-8") as fh:
                    json.dump({"object": context.object_class, "verdict": verdict}, fh)
        if verdict == YES:
            reward = positive_reward
        elif verdict == NO:
            reward = -negative_reward
        else:
            reward = 0.0
            log.warning("provider abstained on %r, reward 0", context.object_class)
        rules.append(RewardRule(context.object_class, verdict, reward))
    return RewardTable(rules, positive_reward, negative_reward)


def event_rewards(events: list[InteractionEvent], table: RewardTable) -> list[float]:
    return [table.reward_for(e.object_class) for e in events]


def shape(events: list[InteractionEvent], table: RewardTable) -> float:
    """Total auxiliary reward for one step's interaction events."""
    return sum(event_rewards(events, table))
