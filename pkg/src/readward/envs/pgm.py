"""Binary PGM (P5) export of environment frames, one byte per cell."""

from __future__ import annotations

import os

import numpy as np


def frame_to_pgm(frame: np.ndarray, maxval: int = 255) -> bytes:
    if frame.ndim != 2:
        raise ValueError("frame must be 2-d")
    h, w = frame.shape
    header = f"P5 {w} {h} {maxval}\n".encode("ascii")
    return header + frame.astype(np.uint8).tobytes()


def write_pgm(frame: np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(frame_to_pgm(frame))


def read_pgm(path: str) -> np.ndarray:
    """Read back a P5 file written by write_pgm (single whitespace tokens)."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields = data.split(None, 4)
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval > 255:
        raise ValueError("two-byte PGM samples not supported")
    pixels = np.frombuffer(fields[4][: w * h], dtype=np.uint8)
    return pixels.reshape(h, w).copy()


class FrameDumper:
    """Writes frame_{step:06d}.pgm files into a directory."""

    def __init__(self, directory: str):
        os.makedirs(directory, exist_ok=True)
        self.directory = directory
        self.count = 0

    def dump(self, frame: np.ndarray, step: int) -> str:
        path = os.path.join(self.directory, f"frame_{step:06d}.pgm")
        write_pgm(frame, path)
        self.count += 1
        return path
