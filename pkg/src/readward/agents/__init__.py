"""Learning agents: tabular Q and a small actor-critic."""

from .a2c import (
    A2CAgent,
    A2CConfig,
    TrainingDivergenceError,
    a2c_loss,
    init_params,
    n_step_returns,
    policy_probs,
    softmax,
    state_value,
)
from .features import NEAR_RADIUS, FeatureEncoder, Q_PROJECTIONS, q_projection
from .qlearn import QConfig, QLearningAgent, q_update

__all__ = [
    "A2CAgent",
    "A2CConfig",
    "FeatureEncoder",
    "NEAR_RADIUS",
    "QConfig",
    "QLearningAgent",
    "Q_PROJECTIONS",
    "TrainingDivergenceError",
    "a2c_loss",
    "init_params",
    "n_step_returns",
    "policy_probs",
    "q_projection",
    "q_update",
    "softmax",
    "state_value",
]
