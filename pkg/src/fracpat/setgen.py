"""Benchmark set generators: self-similar Cantor sets and seeded percolation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicSet
from .errors import ParameterError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class CantorSpec:
    """Keep-pattern over the ``2**branching`` children, iterated ``depth`` times."""

    pattern: tuple[int, ...]
    branching: int = 2
    depth: int = 1

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(sorted(set(int(k) for k in self.pattern))))
        if not self.pattern:
            raise ParameterError("keep-pattern must be nonempty")
        if self.branching < 1:
            raise ParameterError("branching level must be positive")
        if self.depth < 0:
            raise ParameterError("depth must be nonnegative")
        if self.pattern[0] < 0 or self.pattern[-1] >= 1 << self.branching:
            raise ParameterError(f"pattern entries must lie in [0, {1 << self.branching})")

    @property
    def resolution(self) -> int:
        return self.branching * self.depth

    @property
    def dimension(self) -> float:
        """Similarity dimension ``log2(#pattern) / b``."""
        return float(np.log2(len(self.pattern)) / self.branching)


QUARTER_CANTOR = (0, 3)


def cantor(spec: CantorSpec) -> DyadicSet:
    """Iterated keep-pattern set at resolution ``b * n``."""
    keep = np.zeros(1 << spec.branching, dtype=bool)
    keep[list(spec.pattern)] = True
    mask = np.ones(1, dtype=bool)
    for _ in range(spec.depth):
        mask = np.kron(mask, keep).astype(bool)
    return DyadicSet(spec.resolution, mask)


def quarter_cantor(depth: int) -> DyadicSet:
    return cantor(CantorSpec(QUARTER_CANTOR, 2, depth))


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of SplitMix64 started at ``seed``.

    Output ``i`` is the SplitMix64 finalizer applied to
    ``seed + (i + 1) * 0x9E3779B97F4A7C15`` (mod 2**64), which is exactly the
    sequential generator evaluated counter-style.
    """
    with np.errstate(over="ignore"):
        z = np.uint64(seed % (1 << 64)) + (np.arange(1, count + 1, dtype=np.uint64) * _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of :func:`splitmix64`."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def percolation(p: float, depth: int, seed: int) -> DyadicSet:
    """Keep each level-``depth`` cell independently with probability ``p``.

    Cell ``i`` is kept iff ``u_i < p`` where ``u_i`` is the ``i``-th output of
    :func:`uniforms`; bit-for-bit reproducible from ``(p, depth, seed)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if depth < 0:
        raise ParameterError("depth must be nonnegative")
    u = uniforms(seed, 1 << depth)
    return DyadicSet(depth, u < p)
