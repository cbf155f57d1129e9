"""Paddle-and-ball game: break the brick rows, do not drop the ball.

The ball moves one cell diagonally per step and reflects off the side and
top walls, off bricks (removing them) and off the paddle. On a paddle bounce
the ball sits on the paddle row for that step, so paddle-ball contact shows
up in the frame and object list. A ball that falls past the paddle costs a
point penalty and one of the spare balls.
"""

from __future__ import annotations

import numpy as np

from .core import ArcadeEnv, GameObject, cell_box

LEFT, RIGHT, NOOP = range(3)


class BrickWallEnv(ArcadeEnv):
    game = "brick_wall"
    agent_class = "paddle"
    classes = ("ball", "brick")
    n_actions = 3
    default_rewards = {"brick": 1.0, "ball_drop": -5.0}

    def __init__(self, config):
        super().__init__(config)
        p = config.params
        self.paddle_width = int(p.get("paddle_width", 3))
        self.brick_rows = int(p.get("brick_rows", 3))
        self.brick_top = int(p.get("brick_top", 2))
        self.n_balls = int(p.get("balls", 3))
        if self.paddle_width >= self.grid_width - 2:
            raise ValueError("paddle does not fit the grid")
        if self.brick_top + self.brick_rows >= self.grid_height - 3:
            raise ValueError("brick rows leave no room for play")

    def _reset_state(self):
        w = self.grid_width
        self._paddle_row = self.grid_height - 2
        self._paddle_x = (w - self.paddle_width) // 2
        self._bricks = {}
        oid = 2  # 0 is the paddle, 1 is the ball
        for row in range(self.brick_top, self.brick_top + self.brick_rows):
            for x in range(1, w - 1):
                self._bricks[(x, row)] = GameObject(oid, "brick", cell_box(x, row))
                oid += 1
        self._balls_left = self.n_balls
        self._serve()
        # walls and live bricks stay in a cached frame, cleared as bricks break
        self._base_frame = np.zeros((self.grid_height, self.grid_width), dtype=np.uint8)
        self._base_frame[0, :] = 1
        self._base_frame[:, 0] = 1
        self._base_frame[:, -1] = 1
        brick_idx = np.uint8(self.class_indices["brick"])
        for (x, y) in self._bricks:
            self._base_frame[y, x] = brick_idx

    def _serve(self):
        cx = self._paddle_x + self.paddle_width // 2
        self._ball = (cx, self._paddle_row - 3)
        self._vel = (self._rng.choice((-1, 1)), -1)

    def _step_state(self, action: int) -> float:
        if action == LEFT:
            self._paddle_x = max(1, self._paddle_x - 1)
        elif action == RIGHT:
            self._paddle_x = min(self.grid_width - 1 - self.paddle_width, self._paddle_x + 1)
        reward = 0.0
        x, y = self._ball
        vx, vy = self._vel
        nx, ny = x + vx, y + vy
        if nx <= 0 or nx >= self.grid_width - 1:
            vx = -vx
            nx = x + vx
        if ny <= 0:
            vy = -vy
            ny = y + vy
        if (nx, ny) in self._bricks:
            del self._bricks[(nx, ny)]
            self._base_frame[ny, nx] = 0
            reward += self.reward_values["brick"]
            vy = -vy
        elif ny == self._paddle_row and self._paddle_x <= nx < self._paddle_x + self.paddle_width:
            vy = -1
            slot = nx - self._paddle_x
            if slot == 0:
                vx = -1
            elif slot == self.paddle_width - 1:
                vx = 1
        elif ny > self._paddle_row:
            reward += self.reward_values["ball_drop"]
            self._balls_left -= 1
            if self._balls_left <= 0:
                self._terminal = True
                self._ball = (nx, min(ny, self.grid_height - 1))
                self._vel = (vx, vy)
                return reward
            self._serve()
            return reward
        self._ball = (nx, ny)
        self._vel = (vx, vy)
        if not self._bricks:
            self._terminal = True
        return reward

    def _objects(self):
        ax = self._paddle_x
        objs = [
            GameObject(0, "paddle", cell_box(ax, self._paddle_row, w=self.paddle_width), is_agent=True),
            GameObject(1, "ball", cell_box(*self._ball)),
        ]
        objs.extend(self._bricks.values())
        return objs

    def _render(self):
        frame = self._base_frame.copy()
        frame[self._paddle_row, self._paddle_x : self._paddle_x + self.paddle_width] = 2
        bx, by = self._ball
        frame[by, bx] = self.class_indices["ball"]
        return frame
