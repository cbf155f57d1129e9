"""Agent-object interaction detection with an optional detection noise model.

An interaction fires on the step where the agent's box starts intersecting an
object's box (rising edge); continued contact does not re-fire. Detection can
run straight off ground-truth object annotations, or through a noise model
plus a small IoU tracker whose per-track class votes absorb label flips.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .envs.core import BBox, GameObject, boxes_intersect, iou


@dataclass(frozen=True, slots=True)
class Detection:
    box: BBox
    class_name: str
    confidence: float = 1.0


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    step: int
    object_class: str
    track_id: int
    rising: bool = True


@dataclass(frozen=True)
class NoiseModel:
    miss_prob: float = 0.0
    flip_prob: float = 0.0
    merge_dist: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.miss_prob <= 1.0:
            raise ValueError("miss_prob must be in [0, 1]")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must be in [0, 1]")
        if self.merge_dist < 0:
            raise ValueError("merge_dist must be >= 0")


def ground_truth_detections(objects: list[GameObject]) -> list[Detection]:
    return [Detection(o.box, o.class_name, 1.0) for o in objects]


def corrupt(objects: list[GameObject], noise: NoiseModel, step: int) -> list[Detection]:
    """Apply miss, label-flip and box-merge noise to one frame's objects.

    Deterministic per (noise.seed, step) regardless of call history. The
    agent's detection is never dropped or flipped but can be merged away.
    Merging is off when merge_dist is 0, so NoiseModel(0, 0, 0) is identity.
    """
    rng = random.Random(noise.seed * 1000003 + step)
    classes = sorted({o.class_name for o in objects if not o.is_agent})
    dets = []
    for obj in objects:
        if obj.is_agent:
            dets.append(Detection(obj.box, obj.class_name, 1.0))
            continue
        if rng.random() < noise.miss_prob:
            continue
        cls = obj.class_name
        confidence = 1.0
        if rng.random() < noise.flip_prob:
            others = [c for c in classes if c != cls]
            if others:
                cls = others[rng.randrange(len(others))]
                confidence = round(rng.uniform(0.5, 0.9), 3)
        dets.append(Detection(obj.box, cls, confidence))
    if noise.merge_dist <= 0 or len(dets) < 2:
        return dets
    return _merge_close(dets, noise.merge_dist, rng)


def _merge_close(dets: list[Detection], merge_dist: int, rng: random.Random) -> list[Detection]:
    # union-find over detections whose centers are within merge_dist pixels
    parent = list(range(len(dets)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    centers = [d.box.center for d in dets]
    for i in range(len(dets)):
        for j in range(i + 1, len(dets)):
            dx = centers[i][0] - centers[j][0]
            dy = centers[i][1] - centers[j][1]
            if dx * dx + dy * dy <= merge_dist * merge_dist:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(dets)):
        groups.setdefault(find(i), []).append(i)
    merged = []
    for members in sorted(groups.values(), key=lambda m: m[0]):
        if len(members) == 1:
            merged.append(dets[members[0]])
            continue
        box = dets[members[0]].box
        for i in members[1:]:
            box = box.union(dets[i].box)
        labels = sorted({dets[i].class_name for i in members})
        cls = labels[rng.randrange(len(labels))]
        confidence = max(dets[i].confidence for i in members)
        merged.append(Detection(box, cls, confidence))
    return merged


class Track:
    """One tracked object: last box, class vote tally, miss counter."""

    __slots__ = ("track_id", "box", "votes", "first_seen", "_vote_order", "age", "misses")

    def __init__(self, track_id: int, detection: Detection, step_age: int = 0):
        self.track_id = track_id
        self.box = detection.box
        self.votes = {detection.class_name: 1}
        self._vote_order = {detection.class_name: 0}
        self.age = step_age
        self.misses = 0

    def record(self, detection: Detection) -> None:
        self.box = detection.box
        cls = detection.class_name
        self.votes[cls] = self.votes.get(cls, 0) + 1
        if cls not in self._vote_order:
            self._vote_order[cls] = len(self._vote_order)
        self.misses = 0

    @property
    def dominant_class(self) -> str:
        # most votes; tie broken toward the class voted for first
        return min(self.votes, key=lambda c: (-self.votes[c], self._vote_order[c]))


class Tracker:
    """Greedy IoU association with class voting, in the spirit of SORT.

    Detections and tracks are matched highest-IoU first at or above the
    threshold. A track unmatched for more than max_misses updates is dropped.
    """

    def __init__(self, iou_threshold: float = 0.3, max_misses: int = 5):
        self.iou_threshold = iou_threshold
        self.max_misses = max_misses
        self.tracks: list[Track] = []
        self._next_id = 1

    def reset(self) -> None:
        self.tracks = []
        self._next_id = 1

    def update(self, detections: list[Detection]) -> list[Track]:
        scored = []
        for ti, track in enumerate(self.tracks):
            for di, det in enumerate(detections):
                value = iou(track.box, det.box)
                if value >= self.iou_threshold:
                    scored.append((-value, ti, di))
        scored.sort()
        matched_tracks: set[int] = set()
        matched_dets: set[int] = set()
        for neg_value, ti, di in scored:
            if ti in matched_tracks or di in matched_dets:
                continue
            matched_tracks.add(ti)
            matched_dets.add(di)
            self.tracks[ti].record(detections[di])
        survivors = []
        for ti, track in enumerate(self.tracks):
            track.age += 1
            if ti not in matched_tracks:
                track.misses += 1
                if track.misses > self.max_misses:
                    continue
            survivors.append(track)
        self.tracks = survivors
        for di, det in enumerate(detections):
            if di not in matched_dets:
                track = Track(self._next_id, det)
                self._next_id += 1
                self.tracks.append(track)
        return list(self.tracks)


def detect_events(
    agent_box: BBox,
    tracks,
    contact_state: dict[int, bool],
    step: int,
) -> tuple[list[InteractionEvent], dict[int, bool]]:
    """Rising-edge contact events between the agent box and each track.

    ``tracks`` may be Tracker output or any objects with track_id, box and
    dominant_class attributes. Returns the events plus the new contact state.
    """
    events = []
    new_state: dict[int, bool] = {}
    for track in tracks:
        contact = boxes_intersect(agent_box, track.box)
        if contact and not contact_state.get(track.track_id, False):
            events.append(InteractionEvent(step, track.dominant_class, track.track_id))
        new_state[track.track_id] = contact
    return events, new_state


@dataclass(frozen=True, slots=True)
class TrackView:
    """Minimal track-like view used on the ground-truth path."""

    track_id: int
    box: BBox
    dominant_class: str


class ContactDetector:
    """Per-episode detector: ground truth by default, tracked when noisy."""

    def __init__(self, agent_class: str, noise: NoiseModel | None = None):
        self.agent_class = agent_class
        self.noise = noise
        self.tracker = Tracker() if noise is not None else None
        self.contact_state: dict[int, bool] = {}

    def reset(self) -> None:
        if self.tracker is not None:
            self.tracker.reset()
        self.contact_state = {}

    def step(self, objects: list[GameObject], step: int) -> list[InteractionEvent]:
        agent_box = None
        for obj in objects:
            if obj.is_agent:
                agent_box = obj.box
                break
        if agent_box is None:
            raise ValueError("frame has no agent object")
        if self.tracker is None:
            tracks = [
                TrackView(o.id, o.box, o.class_name) for o in objects if not o.is_agent
            ]
        else:
            dets = corrupt(objects, self.noise, step)
            tracks = [
                t
                for t in self.tracker.update(dets)
                if t.dominant_class != self.agent_class
            ]
        events, self.contact_state = detect_events(agent_box, tracks, self.contact_state, step)
        return events
