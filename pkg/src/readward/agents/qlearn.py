"""Tabular Q-learning over the coarse quantized state key."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .features import FeatureEncoder, q_projection


@dataclass(frozen=True)
class QConfig:
    alpha: float = 0.2
    gamma: float = 0.99
    eps_start: float = 1.0
    eps_final: float = 0.05
    eps_decay_steps: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if self.eps_decay_steps < 1:
            raise ValueError("eps_decay_steps must be positive")


def q_update(q, state, action, reward, next_state, alpha, gamma, terminal=False):
    """One-step update on the (state, action) entry; other entries untouched.

    Entries are lists of action values keyed by state. The bootstrap term is
    dropped on terminal transitions.
    """
    values = q[state]
    bootstrap = 0.0 if terminal else max(q[next_state])
    values[action] += alpha * (reward + gamma * bootstrap - values[action])
    return q


class QLearningAgent:
    """Epsilon-greedy tabular learner; greedy ties break uniformly at random,
    so an empty table acts like a uniform random policy."""

    kind = "q"

    def __init__(self, env, encoder: FeatureEncoder, config: QConfig | None = None, seed: int = 0):
        self.config = config or QConfig()
        self.n_actions = env.n_actions
        self.encoder = encoder
        self.dims = q_projection(encoder, env.game)
        self.q: dict[tuple, list[float]] = {}
        self.rng = random.Random(seed)
        self.steps = 0

    def state_key(self, features) -> tuple:
        return self.encoder.quantize(features, self.dims)

    @property
    def epsilon(self) -> float:
        c = self.config
        frac = min(1.0, self.steps / c.eps_decay_steps)
        return c.eps_start + frac * (c.eps_final - c.eps_start)

    def _values(self, key) -> list[float]:
        values = self.q.get(key)
        if values is None:
            values = [0.0] * self.n_actions
            self.q[key] = values
        return values

    def act(self, features) -> int:
        if self.rng.random() < self.epsilon:
            return self.rng.randrange(self.n_actions)
        values = self._values(self.state_key(features))
        top = max(values)
        best = [a for a, v in enumerate(values) if v == top]
        return best[self.rng.randrange(len(best))]

    def observe(self, features, action, reward, next_features, terminal) -> None:
        key = self.state_key(features)
        next_key = self.state_key(next_features)
        self._values(key)
        self._values(next_key)
        q_update(self.q, key, action, reward, next_key, self.config.alpha, self.config.gamma, terminal)
        self.steps += 1

    # -- checkpointing ------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "steps": self.steps,
            "table": {",".join(map(str, k)): v for k, v in self.q.items()},
        }

    def load_state_dict(self, payload: dict) -> None:
        self.steps = int(payload["steps"])
        self.q = {
            tuple(int(p) for p in key.split(",")): [float(v) for v in values]
            for key, values in payload["table"].items()
        }
