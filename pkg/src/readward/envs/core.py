"""Shared geometry, config and base class for the grid arcade environments.

All environments run on a coarse cell grid but report object positions as
inclusive pixel boxes at a fixed scale of 4x4 logical pixels per cell, so the
default 40x52 grid maps onto a 160x208 logical screen.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

CELL = 4  # logical pixels per grid cell

GAMES = ("ski_run", "dot_maze", "brick_wall")

# frame value for empty space is 0, walls are 1, agent and object classes
# are assigned from 2 upward by each environment
WALL_INDEX = 1


class UnknownGameError(ValueError):
    pass


class InvalidActionError(ValueError):
    pass


class EpisodeOverError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class BBox:
    """Inclusive integer pixel box. Touching edges count as intersection."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate box {(self.x_min, self.y_min, self.x_max, self.y_max)}")

    def intersects(self, other: "BBox") -> bool:
        return (
            self.x_min <= other.x_max
            and other.x_min <= self.x_max
            and self.y_min <= other.y_max
            and other.y_min <= self.y_max
        )

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)


def boxes_intersect(a: BBox, b: BBox) -> bool:
    return a.intersects(b)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union on inclusive pixel boxes."""
    ix_min = max(a.x_min, b.x_min)
    iy_min = max(a.y_min, b.y_min)
    ix_max = min(a.x_max, b.x_max)
    iy_max = min(a.y_max, b.y_max)
    if ix_min > ix_max or iy_min > iy_max:
        return 0.0
    inter = (ix_max - ix_min + 1) * (iy_max - iy_min + 1)
    return inter / float(a.area + b.area - inter)


def cell_box(x: int, y: int, w: int = 1, h: int = 1) -> BBox:
    """Pixel box covering a w x h block of cells whose top-left cell is (x, y)."""
    return BBox(x * CELL, y * CELL, (x + w) * CELL - 1, (y + h) * CELL - 1)


@dataclass(frozen=True, slots=True)
class GameObject:
    id: int
    class_name: str
    box: BBox
    is_agent: bool = False


@dataclass(slots=True)
class StepResult:
    frame: np.ndarray
    objects: list[GameObject]
    reward: float
    terminal: bool
    step: int


@dataclass(frozen=True)
class EnvConfig:
    game: str
    seed: int = 0
    episode_cap: int = 1000
    delayed: bool = False
    grid_width: int = 40
    grid_height: int = 52
    rewards: dict[str, float] = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.game not in GAMES:
            raise UnknownGameError(f"unknown game {self.game!r}, expected one of {GAMES}")
        if self.episode_cap <= 0:
            raise ValueError("episode_cap must be positive")
        if self.grid_width < 5 or self.grid_height < 5:
            raise ValueError("grid must be at least 5x5 cells")


class ArcadeEnv:
    """Base class. Subclasses define layout, dynamics and native rewards.

    A subclass sets ``game``, ``agent_class``, ``classes`` (non-agent object
    classes in fixed order), ``n_actions`` and ``default_rewards``, and
    implements ``_reset_state`` and ``_step_state``.
    """

    game = ""
    agent_class = ""
    classes: tuple[str, ...] = ()
    n_actions = 0
    default_rewards: dict[str, float] = {}
    is_delayed = False

    def __init__(self, config: EnvConfig):
        if config.game != self.game:
            raise UnknownGameError(f"config is for {config.game!r}, not {self.game!r}")
        self.config = config
        self.grid_width = config.grid_width
        self.grid_height = config.grid_height
        self.reward_values = dict(self.default_rewards)
        unknown = set(config.rewards) - set(self.default_rewards)
        if unknown:
            raise ValueError(f"unknown reward keys {sorted(unknown)}")
        self.reward_values.update(config.rewards)
        # frame indices: 0 empty, 1 wall, 2 agent, 3.. object classes
        self.class_indices = {"wall": WALL_INDEX, self.agent_class: 2}
        for i, name in enumerate(self.classes):
            self.class_indices[name] = 3 + i
        self._rng = random.Random()
        self._step_count = 0
        self._terminal = True

    # -- public api ---------------------------------------------------

    def reset(self) -> StepResult:
        """Restore the seeded initial state. Two calls give identical results."""
        self._rng.seed(self.config.seed)
        self._step_count = 0
        self._terminal = False
        self._reset_state()
        return self._result(0.0)

    def step(self, action: int) -> StepResult:
        if self._terminal:
            raise EpisodeOverError("episode is over, call reset()")
        if not isinstance(action, (int, np.integer)) or not 0 <= action < self.n_actions:
            raise InvalidActionError(f"action {action!r} not in [0, {self.n_actions})")
        reward = self._step_state(int(action))
        self._step_count += 1
        if self._step_count >= self.config.episode_cap:
            self._terminal = True
        return self._result(reward)

    # -- subclass hooks -----------------------------------------------

    def _reset_state(self) -> None:
        raise NotImplementedError

    def _step_state(self, action: int) -> float:
        raise NotImplementedError

    def _objects(self) -> list[GameObject]:
        raise NotImplementedError

    def _render(self) -> np.ndarray:
        raise NotImplementedError

    # -- helpers ------------------------------------------------------

    def _result(self, reward: float) -> StepResult:
        return StepResult(
            frame=self._render(),
            objects=self._objects(),
            reward=reward,
            terminal=self._terminal,
            step=self._step_count,
        )

    def _paint(self, frame: np.ndarray, obj: GameObject) -> None:
        b = obj.box
        frame[b.y_min // CELL : b.y_max // CELL + 1, b.x_min // CELL : b.x_max // CELL + 1] = (
            self.class_indices[obj.class_name]
        )


class DelayedRewardEnv:
    """Holds rewards back until the terminal step, which pays the episode sum.

    The sum of delivered rewards over a finished episode equals the sum the
    wrapped environment would have delivered natively.
    """

    is_delayed = True

    def __init__(self, env):
        if getattr(env, "is_delayed", False):
            raise ValueError("environment is already delayed")
        self._env = env
        self._pending = 0.0

    def reset(self) -> StepResult:
        self._pending = 0.0
        return self._env.reset()

    def step(self, action: int) -> StepResult:
        result = self._env.step(action)
        self._pending += result.reward
        if result.terminal:
            result.reward = self._pending
            self._pending = 0.0
        else:
            result.reward = 0.0
        return result

    def __getattr__(self, name):
        return getattr(self._env, name)
