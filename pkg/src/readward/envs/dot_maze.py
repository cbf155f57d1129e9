"""Maze game: eat every pellet, avoid the roaming ghosts.

Layout is a bordered grid with a lattice of pillar walls on even-even cells.
Pellets are a seeded sample of the free cells. Ghosts take a step toward the
player with probability ``chase_bias`` and otherwise wander uniformly.
A pellet the player steps onto stays in that step's object list (it is
removed the step after), so the contact is observable as a box intersection.
"""

from __future__ import annotations

import numpy as np

from .core import CELL, ArcadeEnv, GameObject, cell_box

UP, DOWN, LEFT, RIGHT = range(4)
DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0))


class DotMazeEnv(ArcadeEnv):
    game = "dot_maze"
    agent_class = "player"
    classes = ("ghost", "pellet")
    n_actions = 4
    default_rewards = {"pellet": 1.0, "ghost": -10.0}

    def __init__(self, config):
        super().__init__(config)
        p = config.params
        self.n_ghosts = int(p.get("ghosts", 2))
        self.pellet_count = p.get("pellets")  # None means ~1/3 of free cells
        self.chase_bias = float(p.get("chase_bias", 0.3))
        if not 0.0 <= self.chase_bias <= 1.0:
            raise ValueError("chase_bias must be in [0, 1]")
        self._walls = self._build_walls()
        self._free = sorted(
            (x, y)
            for x in range(self.grid_width)
            for y in range(self.grid_height)
            if not self._walls[y, x]
        )
        self._wall_frame = np.where(self._walls, np.uint8(1), np.uint8(0))

    def _build_walls(self) -> np.ndarray:
        w, h = self.grid_width, self.grid_height
        walls = np.zeros((h, w), dtype=bool)
        walls[0, :] = walls[-1, :] = True
        walls[:, 0] = walls[:, -1] = True
        for y in range(2, h - 1, 2):
            for x in range(2, w - 1, 2):
                walls[y, x] = True
        return walls

    def _reset_state(self):
        w, h = self.grid_width, self.grid_height
        cx, cy = w / 2 - 0.5, h / 2 - 0.5
        self._agent = min(self._free, key=lambda c: ((c[0] - cx) ** 2 + (c[1] - cy) ** 2, c[1], c[0]))
        corners = [(w - 2, h - 2), (1, h - 2), (w - 2, 1), (1, 1)]
        self._ghosts = {}
        taken = {self._agent}
        for gid in range(1, self.n_ghosts + 1):
            tx, ty = corners[(gid - 1) % 4]
            cell = min(
                (c for c in self._free if c not in taken),
                key=lambda c: (abs(c[0] - tx) + abs(c[1] - ty), c[1], c[0]),
            )
            self._ghosts[gid] = cell
            taken.add(cell)
        eligible = [c for c in self._free if c not in taken]
        count = self.pellet_count if self.pellet_count is not None else max(1, len(eligible) // 3)
        count = min(int(count), len(eligible))
        # pellet objects are immutable while alive, build them once
        self._pellets = {}
        for i, cell in enumerate(self._rng.sample(eligible, count)):
            pid = self.n_ghosts + 1 + i
            self._pellets[cell] = GameObject(pid, "pellet", cell_box(*cell))
        self._carry = []  # pellets eaten this step, shown one last time
        self._caught = False
        # pellets are painted into the cached frame and cleared as eaten
        self._base_frame = self._wall_frame.copy()
        pellet_idx = np.uint8(self.class_indices["pellet"])
        for (x, y) in self._pellets:
            self._base_frame[y, x] = pellet_idx

    def _step_state(self, action: int) -> float:
        if self._carry:
            for obj in self._carry:
                b = obj.box
                self._base_frame[b.y_min // CELL, b.x_min // CELL] = 0
            self._carry = []
        dx, dy = DELTAS[action]
        nx, ny = self._agent[0] + dx, self._agent[1] + dy
        if not self._walls[ny, nx]:
            self._agent = (nx, ny)
        reward = 0.0
        eaten = self._pellets.pop(self._agent, None)
        if eaten is not None:
            reward += self.reward_values["pellet"]
            self._carry.append(eaten)
        if self._agent in self._ghosts.values():
            self._caught = True
        else:
            self._move_ghosts()
            if self._agent in self._ghosts.values():
                self._caught = True
        if self._caught:
            reward += self.reward_values["ghost"]
            self._terminal = True
        elif not self._pellets:
            self._terminal = True
        return reward

    def _move_ghosts(self):
        ax, ay = self._agent
        rng = self._rng
        walls = self._walls
        for gid in self._ghosts:
            gx, gy = self._ghosts[gid]
            options = [
                (gx + dx, gy + dy)
                for dx, dy in DELTAS
                if not walls[gy + dy, gx + dx]
            ]
            if not options:
                continue
            chosen = None
            if rng.random() < self.chase_bias:
                dist = abs(gx - ax) + abs(gy - ay)
                closer = [c for c in options if abs(c[0] - ax) + abs(c[1] - ay) < dist]
                if closer:
                    chosen = closer[rng.randrange(len(closer))]
            if chosen is None:
                chosen = options[rng.randrange(len(options))]
            self._ghosts[gid] = chosen

    def _objects(self):
        objs = [GameObject(0, "player", cell_box(*self._agent), is_agent=True)]
        for gid in self._ghosts:
            objs.append(GameObject(gid, "ghost", cell_box(*self._ghosts[gid])))
        objs.extend(self._pellets.values())
        objs.extend(self._carry)
        return objs

    def _render(self):
        frame = self._base_frame.copy()
        ghost_idx = self.class_indices["ghost"]
        for cell in self._ghosts.values():
            frame[cell[1], cell[0]] = ghost_idx
        frame[self._agent[1], self._agent[0]] = 2
        return frame
