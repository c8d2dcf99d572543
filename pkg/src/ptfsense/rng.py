"""Seeded, splittable random streams and chunked Monte Carlo accumulation.

Every randomized operation draws from Philox (a counter-based generator)
streams keyed by ``(root seed, operation tag, chunk index)``.  Work is cut
into fixed-size chunks independent of the worker count and the per-chunk
moments are merged in chunk order, so a fixed seed yields bit-identical
results at any thread count.
"""

import hashlib
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Sequence, TypeVar, Union

import numpy as np

CHUNK = 1 << 16

T = TypeVar("T")
Tag = Union[str, int, float]

_state = threading.local()
_default_threads = 1


def get_threads() -> int:
    return getattr(_state, "threads", _default_threads)


def set_threads(threads: int) -> int:
    """Set the process-wide default worker count; returns the previous one."""
    global _default_threads
    if threads < 1:
        raise ValueError("threads must be >= 1")
    previous, _default_threads = _default_threads, int(threads)
    return previous


@contextmanager
def threads(count: int) -> Iterator[None]:
    """Temporarily run chunked work on ``count`` workers in this thread."""
    if count < 1:
        raise ValueError("threads must be >= 1")
    previous = getattr(_state, "threads", None)
    _state.threads = int(count)
    try:
        yield
    finally:
        if previous is None:
            del _state.threads
        else:
            _state.threads = previous


def _tag_word(tag: Tag) -> int:
    if isinstance(tag, int):
        if tag < 0:
            raise ValueError("integer stream tags must be nonnegative")
        return tag
    if isinstance(tag, float):
        tag = repr(tag)
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, *tags: Tag) -> np.random.Generator:
    """Independent generator for ``seed`` and a path of tags."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(_tag_word(t) for t in tags))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo result: mean, standard error, sample count and root seed."""

    mean: float
    stderr: float
    samples: int
    seed: int

    def within(self, value: float, k: float = 3.0) -> bool:
        """``|mean - value| <= k * stderr``, with rounding slack for exact cases."""
        slack = 1e-12 * max(1.0, abs(value))
        return abs(self.mean - value) <= k * self.stderr + slack

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.mean * factor, self.stderr * abs(factor), self.samples, self.seed)


@dataclass(frozen=True)
class Moments:
    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return cls(0, 0.0, 0.0)
        mu = float(values.mean())
        return cls(int(values.size), mu, float(np.square(values - mu).sum()))

    def merge(self, other: "Moments") -> "Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    def estimate(self, seed: int) -> Estimate:
        if self.count < 2:
            raise ValueError("an estimate needs at least two samples")
        var = max(self.m2, 0.0) / (self.count - 1)
        return Estimate(self.mean, math.sqrt(var / self.count), self.count, seed)


def merge_all(parts: Sequence[Moments]) -> Moments:
    total = Moments(0, 0.0, 0.0)
    for part in parts:
        total = total.merge(part)
    return total


def chunk_sizes(samples: int, chunk: int = CHUNK) -> List[int]:
    full, rest = divmod(int(samples), chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(fn: Callable[[int, int], T], samples: int, chunk: int = CHUNK) -> List[T]:
    """Call ``fn(chunk_index, chunk_size)`` for every chunk; results in chunk order."""
    sizes = chunk_sizes(samples, chunk)
    workers = min(get_threads(), len(sizes))
    if workers <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, i, s) for i, s in enumerate(sizes)]
        return [f.result() for f in futures]


def parallel_map(fn: Callable[[T], object], items: Sequence[T]) -> list:
    """Order-preserving map over the current worker count."""
    workers = min(get_threads(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
