"""Downhill run: steer through gate openings, miss the flags, dodge trees.

The skier stays on a fixed row while terrain scrolls upward one row per step.
A gate is a pair of flags plus a first-class "gate" object spanning the
opening between them; passing through the opening scores, being outside it
when the gate row reaches the skier counts as a miss. Hitting a tree stuns
the skier for a few steps but costs no points. The episode ends once the
last gate has been resolved.
"""

from __future__ import annotations

import numpy as np

from .core import ArcadeEnv, GameObject, cell_box

LEFT, RIGHT, NOOP = range(3)


class SkiRunEnv(ArcadeEnv):
    game = "ski_run"
    agent_class = "skier"
    classes = ("tree", "flag", "gate")
    n_actions = 3
    default_rewards = {"gate_pass": 10.0, "gate_miss": -5.0}

    def __init__(self, config):
        super().__init__(config)
        p = config.params
        self.n_gates = int(p.get("gates", 12))
        self.gate_every = int(p.get("gate_every", 8))
        self.gate_gap = int(p.get("gate_gap", 2))
        self.tree_prob = float(p.get("tree_prob", 0.35))
        self.stun_steps = int(p.get("stun_steps", 3))
        if self.gate_gap < 1 or self.gate_gap > self.grid_width - 4:
            raise ValueError("gate_gap does not fit the slope")
        if self.gate_every < 2:
            raise ValueError("gate_every must be at least 2")

    def _reset_state(self):
        self._agent_row = min(4, self.grid_height - 2)
        self._agent_x = self.grid_width // 2
        self._stun = 0
        self._next_id = 1
        self._world_row = 0
        self._gates_spawned = 0
        self._gates_scored = 0
        # entities: (id, class_name, x, width) keyed into row lists
        self._rows = {r: [] for r in range(self.grid_height)}
        for r in range(self._agent_row + 1, self.grid_height):
            self._rows[r] = self._spawn_row()

    def _spawn_row(self):
        self._world_row += 1
        entities = []
        if self._world_row % self.gate_every == 0 and self._gates_spawned < self.n_gates:
            self._gates_spawned += 1
            gx = self._rng.randrange(1, self.grid_width - self.gate_gap - 2)
            entities.append((self._take_id(), "flag", gx, 1))
            entities.append((self._take_id(), "gate", gx + 1, self.gate_gap))
            entities.append((self._take_id(), "flag", gx + self.gate_gap + 1, 1))
        elif self._rng.random() < self.tree_prob:
            tx = self._rng.randrange(1, self.grid_width - 1)
            entities.append((self._take_id(), "tree", tx, 1))
        return entities

    def _take_id(self):
        i = self._next_id
        self._next_id += 1
        return i

    def _step_state(self, action: int) -> float:
        if self._stun > 0:
            self._stun -= 1
        elif action == LEFT and self._agent_x > 0:
            self._agent_x -= 1
        elif action == RIGHT and self._agent_x < self.grid_width - 1:
            self._agent_x += 1
        # scroll one row up, spawn a fresh bottom row
        for r in range(self.grid_height - 1):
            self._rows[r] = self._rows[r + 1]
        self._rows[self.grid_height - 1] = self._spawn_row()
        reward = 0.0
        for _, cls, x, width in self._rows[self._agent_row]:
            inside = x <= self._agent_x < x + width
            if cls == "gate":
                self._gates_scored += 1
                key = "gate_pass" if inside else "gate_miss"
                reward += self.reward_values[key]
                if self._gates_scored >= self.n_gates:
                    self._terminal = True
            elif cls == "tree" and inside:
                self._stun = self.stun_steps
        return reward

    def _objects(self):
        objs = [GameObject(0, "skier", cell_box(self._agent_x, self._agent_row), is_agent=True)]
        for r in range(self.grid_height):
            for oid, cls, x, width in self._rows[r]:
                objs.append(GameObject(oid, cls, cell_box(x, r, w=width)))
        return objs

    def _render(self):
        frame = np.zeros((self.grid_height, self.grid_width), dtype=np.uint8)
        for r in range(self.grid_height):
            for _, cls, x, width in self._rows[r]:
                frame[r, x : x + width] = self.class_indices[cls]
        frame[self._agent_row, self._agent_x] = 2
        return frame
