"""Step-budgeted training loop joining environment, agent and shaped rewards.

Each step: the agent acts, the environment answers with its native (possibly
delayed) reward, interaction events against the reward table add the
auxiliary reward, and the summed signal is clipped to [-1, 1] before the
agent learns from it. Episode traces keep the unclipped components separate
so scores and shaping stay auditable.
"""

from __future__ import annotations

import json
import os

from .envs.pgm import FrameDumper
from .interact import ContactDetector, NoiseModel
from .reason import RewardTable, event_rewards
from .trace import EpisodeTrace
from .agents.features import FeatureEncoder


def clip_reward(value: float, low: float = -1.0, high: float = 1.0) -> float:
    return low if value < low else high if value > high else value


class EventLogWriter:
    """JSONL log, one line per interaction event with its applied reward."""

    def __init__(self, path: str):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self._fh = open(path, "w", encoding="utf-8")

    def write(self, event, reward: float) -> None:
        self._fh.write(
            json.dumps(
                {
                    "step": event.step,
                    "object_class": event.object_class,
                    "track_id": event.track_id,
                    "reward": reward,
                },
                separators=(",", ":"),
            )
        )
        self._fh.write("\n")

    def close(self) -> None:
        self._fh.close()


def train(
    env,
    agent,
    steps: int,
    table: RewardTable | None = None,
    noise: NoiseModel | None = None,
    clip: bool = True,
    event_log: str | None = None,
    frame_dir: str | None = None,
) -> list[EpisodeTrace]:
    """Run the agent for a fixed step budget, returning one trace per episode.

    With table=None no detector runs and training is the unshaped baseline.
    The trailing unfinished episode, if any, is returned with terminal=False.
    """
    result = env.reset()
    encoder = agent.encoder
    obs = encoder.encode(result.objects)
    detector = None
    if table is not None:
        detector = ContactDetector(env.agent_class, noise)
    log_writer = EventLogWriter(event_log) if event_log else None
    dumper = FrameDumper(frame_dir) if frame_dir else None
    seed = env.config.seed
    game = env.config.game
    traces = []
    trace = EpisodeTrace(game=game, seed=seed, start_step=0)
    try:
        for global_step in range(steps):
            action = agent.act(obs)
            result = env.step(action)
            aux = 0.0
            if detector is not None:
                events = detector.step(result.objects, result.step)
                if events:
                    rewards = event_rewards(events, table)
                    aux = sum(rewards)
                    trace.events.extend(events)
                    if log_writer is not None:
                        for event, reward in zip(events, rewards):
                            log_writer.write(event, reward)
            total = result.reward + aux
            if clip:
                total = clip_reward(total)
            next_obs = encoder.encode(result.objects)
            agent.observe(obs, action, total, next_obs, result.terminal)
            trace.actions.append(action)
            trace.env_rewards.append(result.reward)
            trace.aux_rewards.append(aux)
            if dumper is not None:
                dumper.dump(result.frame, global_step)
            if result.terminal:
                trace.terminal = True
                traces.append(trace)
                trace = EpisodeTrace(game=game, seed=seed, start_step=global_step + 1)
                result = env.reset()
                obs = encoder.encode(result.objects)
                if detector is not None:
                    detector.reset()
            else:
                obs = next_obs
    finally:
        if log_writer is not None:
            log_writer.close()
    if len(trace):
        traces.append(trace)
    return traces


def build_agent(env, kind: str, seed: int, q_config=None, a2c_config=None):
    """Agent factory used by the harness and the command line."""
    from .agents.a2c import A2CAgent
    from .agents.qlearn import QLearningAgent

    reset = env.reset()
    encoder = FeatureEncoder(env, reset.objects)
    if kind == "q":
        return QLearningAgent(env, encoder, q_config, seed=seed)
    if kind == "a2c":
        return A2CAgent(env, encoder, a2c_config, seed=seed)
    raise ValueError(f"unknown agent kind {kind!r}, expected 'q' or 'a2c'")
