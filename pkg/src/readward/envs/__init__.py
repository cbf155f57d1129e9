"""Grid arcade environments with ground-truth object annotations."""

from .core import (
    CELL,
    GAMES,
    ArcadeEnv,
    BBox,
    DelayedRewardEnv,
    EnvConfig,
    EpisodeOverError,
    GameObject,
    InvalidActionError,
    StepResult,
    UnknownGameError,
    boxes_intersect,
    cell_box,
    iou,
)
from .brick_wall import BrickWallEnv
from .dot_maze import DotMazeEnv
from .pgm import FrameDumper, frame_to_pgm, read_pgm, write_pgm
from .ski_run import SkiRunEnv

ENV_CLASSES = {
    "dot_maze": DotMazeEnv,
    "ski_run": SkiRunEnv,
    "brick_wall": BrickWallEnv,
}


def make_env(config: EnvConfig):
    """Build the configured environment, wrapped if the schedule is delayed."""
    try:
        cls = ENV_CLASSES[config.game]
    except KeyError:
        raise UnknownGameError(f"unknown game {config.game!r}") from None
    env = cls(config)
    if config.delayed:
        return DelayedRewardEnv(env)
    return env


__all__ = [
    "CELL",
    "GAMES",
    "ENV_CLASSES",
    "ArcadeEnv",
    "BBox",
    "BrickWallEnv",
    "DelayedRewardEnv",
    "DotMazeEnv",
    "EnvConfig",
    "EpisodeOverError",
    "FrameDumper",
    "GameObject",
    "InvalidActionError",
    "SkiRunEnv",
    "StepResult",
    "UnknownGameError",
    "boxes_intersect",
    "cell_box",
    "frame_to_pgm",
    "iou",
    "make_env",
    "read_pgm",
    "write_pgm",
]
