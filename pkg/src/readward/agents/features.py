"""Fixed-length feature observations and the coarse state key for tabular Q.

Layout: [agent_x, agent_y] then per object class [dx, dy, count]. Positions
are normalized to [-1, 1] over the screen. Offsets are measured in cells from
the agent to the nearest object of the class, divided by a saturation radius
and clipped, so nearby geometry stays resolvable after binning; count is the
class population over its reset population. Missing classes read as the
saturated offset (1, 1) and count 0.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

from ..envs.core import CELL, GameObject

NEAR_RADIUS = 8.0  # cells; offsets saturate beyond this
N_BINS = 8

# bin edges for offsets, in cells: one bin is exactly "aligned", the first
# bin to each side covers 1-2 cells, so adjacent objects keep their sign
_OFFSET_EDGES = [-4.5, -2.5, -0.5, 0.5, 2.5, 4.5, 6.5]
_UNIFORM_EDGES = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75]


class FeatureEncoder:
    def __init__(self, env, reset_objects: list[GameObject]):
        self.classes = tuple(env.classes)
        self.width_px = env.grid_width * CELL
        self.height_px = env.grid_height * CELL
        self.initial_counts = {
            cls: max(1, sum(1 for o in reset_objects if o.class_name == cls))
            for cls in self.classes
        }
        self.dim = 2 + 3 * len(self.classes)
        # feature kinds drive quantization: offsets use the cell-edge bins
        self._is_offset = np.zeros(self.dim, dtype=bool)
        for i in range(len(self.classes)):
            self._is_offset[2 + 3 * i] = True
            self._is_offset[3 + 3 * i] = True

    def index_of(self, name: str) -> int:
        """Feature index by name: 'agent.x', 'agent.y', '<class>.dx|dy|count'."""
        if name == "agent.x":
            return 0
        if name == "agent.y":
            return 1
        cls, _, part = name.partition(".")
        offset = {"dx": 0, "dy": 1, "count": 2}[part]
        return 2 + 3 * self.classes.index(cls) + offset

    def encode(self, objects: list[GameObject]) -> np.ndarray:
        agent = None
        nearest: dict[str, tuple[float, float, float]] = {}
        counts = {cls: 0 for cls in self.classes}
        for obj in objects:
            if obj.is_agent:
                agent = obj
        if agent is None:
            raise ValueError("no agent object in frame")
        ax, ay = agent.box.center
        for obj in objects:
            if obj.is_agent:
                continue
            counts[obj.class_name] += 1
            cx, cy = obj.box.center
            dx = (cx - ax) / CELL
            dy = (cy - ay) / CELL
            dist = dx * dx + dy * dy
            best = nearest.get(obj.class_name)
            if best is None or dist < best[0]:
                nearest[obj.class_name] = (dist, dx, dy)
        feats = np.empty(self.dim)
        feats[0] = 2.0 * (ax / self.width_px) - 1.0
        feats[1] = 2.0 * (ay / self.height_px) - 1.0
        for i, cls in enumerate(self.classes):
            base = 2 + 3 * i
            hit = nearest.get(cls)
            if hit is None:
                feats[base] = 1.0
                feats[base + 1] = 1.0
            else:
                feats[base] = min(1.0, max(-1.0, hit[1] / NEAR_RADIUS))
                feats[base + 1] = min(1.0, max(-1.0, hit[2] / NEAR_RADIUS))
            feats[base + 2] = min(1.0, counts[cls] / self.initial_counts[cls])
        return feats

    def quantize(self, features, dims: tuple[int, ...]) -> tuple[int, ...]:
        """Coarse 8-bin state key over the selected feature dimensions."""
        is_offset = self._is_offset
        return tuple(
            bisect_left(_OFFSET_EDGES, features[d] * NEAR_RADIUS)
            if is_offset[d]
            else bisect_left(_UNIFORM_EDGES, features[d])
            for d in dims
        )


# per-game feature subset driving the tabular state key
Q_PROJECTIONS = {
    "dot_maze": ("agent.x", "agent.y", "pellet.dx", "pellet.dy"),
    "ski_run": ("gate.dx", "gate.dy", "tree.dx", "tree.dy"),
    "brick_wall": ("ball.dx", "ball.dy", "agent.x", "brick.count"),
}


def q_projection(encoder: FeatureEncoder, game: str) -> tuple[int, ...]:
    names = Q_PROJECTIONS[game]
    return tuple(encoder.index_of(n) for n in names)
