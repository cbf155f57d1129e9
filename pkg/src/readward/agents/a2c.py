"""Advantage actor-critic on two small tanh MLPs, trained with RMSProp.

The backward pass is derived by hand; a finite-difference check over the same
loss function lives in the test suite. Policy-gradient advantages are fixed
inputs to the loss (they do not backpropagate into the critic), the critic
learns from the squared return error, and an entropy bonus keeps the policy
from collapsing early.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np


class TrainingDivergenceError(RuntimeError):
    """Raised when a loss or gradient stops being finite."""


@dataclass(frozen=True)
class A2CConfig:
    lr: float = 7e-4
    gamma: float = 0.99
    n_step: int = 5
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    hidden: int = 64
    rmsprop_decay: float = 0.99
    rmsprop_eps: float = 1e-5

    def __post_init__(self):
        if self.lr <= 0 or self.n_step < 1 or self.hidden < 1:
            raise ValueError("bad A2C hyperparameters")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")


PARAM_NAMES = ("W1", "b1", "W2", "b2", "V1", "c1", "V2", "c2")


def init_params(obs_dim: int, n_actions: int, hidden: int, seed: int) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)

    def layer(fan_in, fan_out):
        return rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))

    return {
        "W1": layer(obs_dim, hidden),
        "b1": np.zeros(hidden),
        "W2": layer(hidden, n_actions) * 0.01,
        "b2": np.zeros(n_actions),
        "V1": layer(obs_dim, hidden),
        "c1": np.zeros(hidden),
        "V2": layer(hidden, 1),
        "c2": np.zeros(1),
    }


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def policy_probs(params, obs: np.ndarray) -> np.ndarray:
    h = np.tanh(obs @ params["W1"] + params["b1"])
    return softmax(h @ params["W2"] + params["b2"])


def state_value(params, obs: np.ndarray) -> np.ndarray:
    g = np.tanh(obs @ params["V1"] + params["c1"])
    return (g @ params["V2"] + params["c2"])[..., 0]


def n_step_returns(rewards, bootstrap: float, gamma: float) -> np.ndarray:
    """Discounted returns over a segment, seeded with the bootstrap value."""
    out = np.empty(len(rewards))
    acc = bootstrap
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def a2c_loss(params, obs, actions, returns, advantages, value_coef, entropy_coef):
    """Segment loss and analytic gradients.

    loss = -sum(A * log pi(a)) + value_coef * sum((R - V)^2)
           - entropy_coef * sum(policy entropy)
    """
    T = obs.shape[0]
    h = np.tanh(obs @ params["W1"] + params["b1"])
    logits = h @ params["W2"] + params["b2"]
    probs = softmax(logits)
    logp = np.log(probs + 1e-12)
    g = np.tanh(obs @ params["V1"] + params["c1"])
    values = (g @ params["V2"] + params["c2"])[:, 0]

    rows = np.arange(T)
    entropy = -(probs * logp).sum(axis=1)
    pg_loss = -(advantages * logp[rows, actions]).sum()
    value_loss = value_coef * ((returns - values) ** 2).sum()
    loss = pg_loss + value_loss - entropy_coef * entropy.sum()

    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    dlogits = advantages[:, None] * (probs - onehot)
    dlogits += entropy_coef * probs * (logp + entropy[:, None])
    grads = {
        "W2": h.T @ dlogits,
        "b2": dlogits.sum(axis=0),
    }
    dh = (dlogits @ params["W2"].T) * (1.0 - h * h)
    grads["W1"] = obs.T @ dh
    grads["b1"] = dh.sum(axis=0)

    dvalues = -2.0 * value_coef * (returns - values)
    grads["V2"] = g.T @ dvalues[:, None]
    grads["c2"] = np.array([dvalues.sum()])
    dg = dvalues[:, None] @ params["V2"].T * (1.0 - g * g)
    grads["V1"] = obs.T @ dg
    grads["c1"] = dg.sum(axis=0)
    return loss, grads


class A2CAgent:
    """Actor-critic learner updated every n_step transitions or at episode end."""

    kind = "a2c"

    def __init__(self, env, encoder, config: A2CConfig | None = None, seed: int = 0):
        self.config = config or A2CConfig()
        self.n_actions = env.n_actions
        self.encoder = encoder
        self.params = init_params(encoder.dim, env.n_actions, self.config.hidden, seed)
        self.rng = random.Random(seed ^ 0x5EED)
        self._rms = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._segment: list[tuple[np.ndarray, int, float]] = []
        self.updates = 0
        self.steps = 0

    def act(self, features) -> int:
        probs = policy_probs(self.params, features)
        u = self.rng.random()
        acc = 0.0
        for action in range(self.n_actions - 1):
            acc += probs[action]
            if u < acc:
                return action
        return self.n_actions - 1

    def observe(self, features, action, reward, next_features, terminal) -> None:
        self._segment.append((features, action, reward))
        self.steps += 1
        if terminal or len(self._segment) >= self.config.n_step:
            bootstrap = 0.0 if terminal else float(state_value(self.params, next_features))
            self._update(bootstrap)

    def _update(self, bootstrap: float) -> None:
        cfg = self.config
        obs = np.stack([s[0] for s in self._segment])
        actions = np.array([s[1] for s in self._segment], dtype=int)
        rewards = [s[2] for s in self._segment]
        self._segment = []
        returns = n_step_returns(rewards, bootstrap, cfg.gamma)
        advantages = returns - state_value(self.params, obs)
        loss, grads = a2c_loss(
            self.params, obs, actions, returns, advantages, cfg.value_coef, cfg.entropy_coef
        )
        if not np.isfinite(loss):
            raise TrainingDivergenceError(
                f"non-finite loss at update {self.updates} (step {self.steps})"
            )
        for name in PARAM_NAMES:
            grad = grads[name]
            if not np.all(np.isfinite(grad)):
                raise TrainingDivergenceError(
                    f"non-finite gradient in {name} at update {self.updates}"
                )
            cache = self._rms[name]
            cache *= cfg.rmsprop_decay
            cache += (1.0 - cfg.rmsprop_decay) * grad * grad
            self.params[name] -= cfg.lr * grad / (np.sqrt(cache) + cfg.rmsprop_eps)
        self.updates += 1

    # -- checkpointing ------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "steps": self.steps,
            "updates": self.updates,
            "params": {k: v.tolist() for k, v in self.params.items()},
            "rms": {k: v.tolist() for k, v in self._rms.items()},
        }

    def load_state_dict(self, payload: dict) -> None:
        self.steps = int(payload["steps"])
        self.updates = int(payload["updates"])
        self.params = {k: np.array(v) for k, v in payload["params"].items()}
        self._rms = {k: np.array(v) for k, v in payload["rms"].items()}
