"""readward: read a game manual, reason about its objects, shape RL rewards.

The pipeline turns a manual into per-object hit/avoid verdicts, converts
verdicts into signed auxiliary rewards, and pays those rewards whenever the
agent's bounding box starts intersecting an object of that class. Under a
delayed native reward schedule the shaped signal restores learning for
tabular Q and actor-critic agents on three small arcade games.
"""

__version__ = "0.1.0"

from .envs import EnvConfig, make_env
from .interact import (
    ContactDetector,
    Detection,
    InteractionEvent,
    NoiseModel,
    Tracker,
    corrupt,
    detect_events,
)
from .manual import (
    ContextBundle,
    KeywordRanking,
    ManualDoc,
    QAPair,
    build_context,
    chunk,
    extract,
    normalize,
    read_contexts,
    tfidf_rank,
)
from .providers import (
    ChoiceQuery,
    ChoiceScores,
    ExtractiveQuery,
    FixtureProvider,
    HTTPProvider,
    LexicalProvider,
    ProviderError,
    QAProvider,
    RecordingProvider,
    provider_from_spec,
)
from .reason import RewardRule, RewardTable, build_table, compose_prompt, decide, shape
from .trace import EpisodeTrace, game_score
from .training import build_agent, train
from .harness import RunConfig, compare_reports, correlation, run

__all__ = [
    "ChoiceQuery",
    "ChoiceScores",
    "ContactDetector",
    "ContextBundle",
    "Detection",
    "EnvConfig",
    "EpisodeTrace",
    "ExtractiveQuery",
    "FixtureProvider",
    "HTTPProvider",
    "InteractionEvent",
    "KeywordRanking",
    "LexicalProvider",
    "ManualDoc",
    "NoiseModel",
    "ProviderError",
    "QAPair",
    "QAProvider",
    "RecordingProvider",
    "RewardRule",
    "RewardTable",
    "RunConfig",
    "Tracker",
    "build_agent",
    "build_context",
    "build_table",
    "chunk",
    "compare_reports",
    "compose_prompt",
    "correlation",
    "corrupt",
    "decide",
    "detect_events",
    "extract",
    "game_score",
    "make_env",
    "normalize",
    "provider_from_spec",
    "read_contexts",
    "run",
    "shape",
    "tfidf_rank",
    "train",
    "__version__",
]
