"""Splittable seeding: every replica gets a seed derived from (master, stream, index)."""

from __future__ import annotations

import zlib

import numpy as np


def stream_id(name: str | int) -> int:
    if isinstance(name, int):
        return name
    return zlib.crc32(name.encode("utf-8"))


def replica_seed(master: int, stream: str | int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=(stream_id(stream), int(index)))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def replica_seeds(master: int, stream: str | int, n: int, start: int = 0) -> np.ndarray:
    """Seeds for replicas ``start .. start+n-1``; independent of how replicas are batched."""
    return np.array([replica_seed(master, stream, i) for i in range(start, start + n)], dtype=np.int64)


def generator(master: int, stream: str | int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(master), spawn_key=(stream_id(stream), int(index))))
