"""Seeded random streams and chunked Monte Carlo accumulation.

Every stochastic estimate draws its points in fixed-size chunks. Chunk ``k`` of
stream ``s`` is generated from ``SeedSequence(seed, spawn_key=(s, k))``, so the
points do not depend on how chunks are distributed over workers, and partial
statistics are merged in chunk order. The result is bit-identical for any
worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

DEFAULT_CHUNK = 1 << 16


class Estimate(NamedTuple):
    value: float
    std_error: float


@dataclass
class RunningStats:
    """Mean and sum of squared deviations, mergeable in a fixed order (Chan et al.)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> RunningStats:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: RunningStats) -> RunningStats:
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else 0.0


class SeededSampler:
    """Deterministic source of independent sample streams.

    Each call to :meth:`next_stream` hands out a fresh stream id, so consecutive
    estimates made with one sampler are independent yet reproducible.
    """

    def __init__(self, seed: int, counter: int = 0, *, chunk_size: int = DEFAULT_CHUNK, workers: int = 1):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if chunk_size < 1 or workers < 1:
            raise ValueError("chunk_size and workers must be positive")
        self.seed = int(seed)
        self.counter = int(counter)
        self.chunk_size = int(chunk_size)
        self.workers = int(workers)

    def __repr__(self) -> str:
        return f"SeededSampler(seed={self.seed}, counter={self.counter})"

    def next_stream(self) -> int:
        stream = self.counter
        self.counter += 1
        return stream

    def generator(self, stream: int, chunk: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(stream, chunk))
        return np.random.Generator(np.random.PCG64(seq))

    def rng(self) -> np.random.Generator:
        """A generator on a fresh stream, for small non-chunked draws."""
        return self.generator(self.next_stream())

    def chunk_sizes(self, n: int) -> list[int]:
        full, rest = divmod(int(n), self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])

    def map_chunks(self, n: int, work: Callable[[np.random.Generator, int], object]) -> list:
        """Run ``work(rng, size)`` for every chunk of a fresh stream; results in chunk order."""
        stream = self.next_stream()
        sizes = self.chunk_sizes(n)

        def job(k: int):
            return work(self.generator(stream, k), sizes[k])

        if self.workers == 1 or len(sizes) == 1:
            return [job(k) for k in range(len(sizes))]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(job, range(len(sizes))))

    def mean(self, n: int, draw: Callable[[np.random.Generator, int], np.ndarray]) -> RunningStats:
        """Mean and spread of the values ``draw`` produces over ``n`` total samples."""
        stats = RunningStats()
        for part in self.map_chunks(n, lambda rng, size: RunningStats.of(draw(rng, size))):
            stats = stats.merge(part)
        return stats

    def uniform(self, lower, upper, n: int) -> np.ndarray:
        """``n`` points uniform in the box ``[lower, upper]``, drawn chunk-wise."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        parts = self.map_chunks(n, lambda rng, size: lower + rng.random((size, lower.size)) * (upper - lower))
        return np.concatenate(parts) if parts else np.empty((0, lower.size))


def box_mean(sampler: SeededSampler, lower, upper, n: int, func: Callable[[np.ndarray], np.ndarray]) -> RunningStats:
    """Statistics of ``func`` at ``n`` uniform points of the box ``[lower, upper]``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def draw(rng, size):
        return func(lower + rng.random((size, lower.size)) * (upper - lower))

    return sampler.mean(n, draw)
