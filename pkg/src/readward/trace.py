"""Per-episode records produced by the training loop."""

from __future__ import annotations

from dataclasses import dataclass, field

from .interact import InteractionEvent


class IncompleteEpisodeError(RuntimeError):
    pass


@dataclass
class EpisodeTrace:
    game: str
    seed: int
    actions: list[int] = field(default_factory=list)
    env_rewards: list[float] = field(default_factory=list)
    aux_rewards: list[float] = field(default_factory=list)
    events: list[InteractionEvent] = field(default_factory=list)
    terminal: bool = False
    start_step: int = 0  # global step index of the first action

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def end_step(self) -> int:
        return self.start_step + len(self.actions)

    @property
    def aux_sum(self) -> float:
        return sum(self.aux_rewards)


def game_score(trace: EpisodeTrace) -> float:
    """Native episode score. Under the delayed schedule the terminal payout
    equals the native sum, so the total is schedule-independent."""
    if not trace.terminal:
        raise IncompleteEpisodeError("episode did not reach a terminal step")
    return sum(trace.env_rewards)
