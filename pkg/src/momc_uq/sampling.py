"""Counter-based random sampling and nested sample hierarchies.

Sample k is a pure function of (seed, k, dimension), so sample sets are
reproducible regardless of evaluation order or worker count, and the first
M samples are identical for every level of a hierarchy (prefix nesting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# splitmix64 constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _uniform01(seed: int, stream_index: np.ndarray) -> np.ndarray:
    """Map (seed, counter) -> uniform double in [0, 1)."""
    with np.errstate(over="ignore"):
        state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (
            stream_index.astype(np.uint64) + np.uint64(1)
        ) * _GOLDEN
        bits = _mix64(state)
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


@dataclass(frozen=True)
class DistributionSpec:
    """Independent uniform marginals; bounds[i] = (a_i, b_i)."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for a, b in self.bounds:
            if not a < b:
                raise ValueError(f"uniform bounds need a < b, got ({a}, {b})")

    @property
    def d_z(self) -> int:
        return len(self.bounds)


def uniform(a: float, b: float, d_z: int = 1) -> DistributionSpec:
    return DistributionSpec(tuple((a, b) for _ in range(d_z)))


@dataclass(frozen=True)
class SampleHierarchy:
    """Seeded nested sample sets; counts are per-level sample numbers."""

    seed: int
    dist: DistributionSpec
    counts: tuple[int, ...] = ()

    def max_count(self) -> int:
        return max(self.counts) if self.counts else 0

    def sample(self, k: int) -> np.ndarray:
        if self.counts and k >= self.max_count():
            raise IndexError(f"sample index {k} out of range (max {self.max_count()})")
        return self.block(k, k + 1)[0]

    def block(self, start: int, stop: int) -> np.ndarray:
        """Samples start..stop-1 as an array of shape (stop-start, d_z)."""
        d = self.dist.d_z
        k = np.arange(start, stop, dtype=np.uint64)
        out = np.empty((stop - start, d))
        for dim, (a, b) in enumerate(self.dist.bounds):
            u = _uniform01(self.seed, k * np.uint64(d) + np.uint64(dim))
            out[:, dim] = a + (b - a) * u
        return out


def sample(h: SampleHierarchy, k: int) -> np.ndarray:
    return h.sample(k)


def derive_seed(seed: int, tag: int) -> int:
    """Independent child seed for replications and reference runs."""
    with np.errstate(over="ignore"):
        mixed = _mix64(
            np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
            + (np.uint64(tag) + np.uint64(1)) * _MIX1
        )
    return int(mixed)


def _ceil_ratio(hi: float, lo: float) -> int:
    if float(hi).is_integer() and float(lo).is_integer():
        a, b = int(hi), int(lo)
        return -(-a // b)
    return math.ceil(hi / lo)


def allocate_samples(m_top: int, costs) -> list[int]:
    """Per-level sample counts from the top-level count and per-run costs.

    `costs` is ordered cheapest level first. Between adjacent levels the
    extra-sample factor is r = max(1, ceil(C_hi / C_lo) - 1) and the cheaper
    level receives M_lo = M_hi * (1 + r). Costs must be non-decreasing.
    """
    if m_top < 2:
        raise ValueError("top-level sample count must be at least 2")
    costs = list(costs)
    if any(c <= 0 for c in costs):
        raise ValueError("costs must be positive")
    for lo, hi in zip(costs, costs[1:]):
        if hi < lo:
            raise ValueError(f"costs must be non-decreasing, got {costs}")
    counts = [m_top]
    for lo, hi in reversed(list(zip(costs, costs[1:]))):
        r = max(1, _ceil_ratio(hi, lo) - 1)
        counts.append(counts[-1] * (1 + r))
    counts.reverse()
    return counts
