"""Dyadic intervals, discretized sets and dyadic Hausdorff content.

A :class:`DyadicSet` at resolution ``m`` is a union of closed level-``m``
dyadic cells of [0, 1].  Covers are restricted to dyadic intervals inside
[0, 1], which makes the content infimum computable exactly by a bottom-up
tree recursion: a node costs nothing if it misses the set and otherwise
``min(l(node)**beta, cost(left) + cost(right))``.  Covers finer than the
resolution never help since splitting a full cell multiplies its cost by
``2**(1 - beta) >= 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NotFoundError, ParameterError

#: Slack for floating point comparisons of content values.
CONTENT_SLACK = 1e-12


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The closed interval ``[index * 2**-level, (index + 1) * 2**-level]``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < (1 << self.level):
            raise ParameterError(f"invalid dyadic interval level={self.level} index={self.index}")

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    @property
    def left(self) -> float:
        return self.index * self.length

    @property
    def right(self) -> float:
        return (self.index + 1) * self.length

    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        return (DyadicInterval(self.level + 1, 2 * self.index),
                DyadicInterval(self.level + 1, 2 * self.index + 1))

    def parent(self) -> DyadicInterval:
        if self.level == 0:
            raise ParameterError("the unit interval has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    def contains(self, other: DyadicInterval) -> bool:
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def cell_range(self, resolution: int) -> tuple[int, int]:
        """Half-open range of level-``resolution`` cell indices inside this interval."""
        if resolution < self.level:
            raise ParameterError("resolution is coarser than the interval")
        shift = resolution - self.level
        return self.index << shift, (self.index + 1) << shift

    def rescale_point(self, y):
        """The map ``T_Q(y) = 2**level * (y - left)`` sending this interval onto [0, 1]."""
        return (np.asarray(y, dtype=float) - self.left) * (1 << self.level)

    def unscale_point(self, y):
        return np.asarray(y, dtype=float) / (1 << self.level) + self.left

    def __str__(self):
        return f"[{self.index}/2^{self.level}, {self.index + 1}/2^{self.level}]"


UNIT = DyadicInterval(0, 0)


class DyadicSet:
    """Union of closed level-``resolution`` dyadic cells; immutable.

    Parameters
    ----------
    resolution : int
        The level ``m`` of the cells.
    mask : array_like of bool, length ``2**m``
        Cell membership.
    """

    __slots__ = ("_resolution", "_mask")

    def __init__(self, resolution: int, mask):
        resolution = int(resolution)
        if resolution < 0:
            raise ParameterError("resolution must be nonnegative")
        mask = np.array(mask, dtype=bool).ravel()
        if mask.shape[0] != 1 << resolution:
            raise ParameterError(f"mask has {mask.shape[0]} cells, expected {1 << resolution}")
        mask.setflags(write=False)
        self._resolution = resolution
        self._mask = mask

    @classmethod
    def full(cls, resolution: int) -> DyadicSet:
        return cls(resolution, np.ones(1 << resolution, dtype=bool))

    @classmethod
    def empty(cls, resolution: int) -> DyadicSet:
        return cls(resolution, np.zeros(1 << resolution, dtype=bool))

    @classmethod
    def from_interval(cls, interval: DyadicInterval, resolution: int) -> DyadicSet:
        mask = np.zeros(1 << resolution, dtype=bool)
        a, b = interval.cell_range(resolution)
        mask[a:b] = True
        return cls(resolution, mask)

    @property
    def resolution(self) -> int:
        return self._resolution

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def cell_length(self) -> float:
        return 2.0 ** -self._resolution

    @property
    def count(self) -> int:
        return int(self._mask.sum())

    def measure(self) -> float:
        return self.count * self.cell_length

    def is_empty(self) -> bool:
        return not self._mask.any()

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._mask)

    def intervals(self) -> list[tuple[float, float]]:
        """Maximal closed intervals making up the set, in increasing order."""
        m = np.concatenate(([False], self._mask, [False])).astype(np.int8)
        d = np.diff(m)
        starts = np.flatnonzero(d == 1)
        stops = np.flatnonzero(d == -1)
        h = self.cell_length
        return [(a * h, b * h) for a, b in zip(starts, stops)]

    def contains_point(self, y, tol: float = 1e-12):
        """Closed-cell membership of the points ``y``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        n = self._mask.shape[0]
        u = y / self.cell_length
        r = np.floor(u + 0.5).astype(np.int64)
        on_edge = np.abs(u - r) <= tol
        c = np.floor(u).astype(np.int64)
        res = np.zeros(y.shape, dtype=bool)
        ok = (c >= 0) & (c < n)
        res[ok] = self._mask[c[ok]]
        left = on_edge & (r - 1 >= 0) & (r - 1 < n)
        res[left] |= self._mask[r[left] - 1]
        right = on_edge & (r >= 0) & (r < n)
        res[right] |= self._mask[r[right]]
        return res & (u >= -tol) & (u <= n + tol)

    def refined(self, resolution: int) -> DyadicSet:
        if resolution < self._resolution:
            raise ParameterError("cannot refine to a coarser resolution")
        return DyadicSet(resolution, np.repeat(self._mask, 1 << (resolution - self._resolution)))

    def _align(self, other: DyadicSet) -> tuple[np.ndarray, np.ndarray, int]:
        m = max(self._resolution, other._resolution)
        return self.refined(m)._mask, other.refined(m)._mask, m

    def __or__(self, other: DyadicSet) -> DyadicSet:
        a, b, m = self._align(other)
        return DyadicSet(m, a | b)

    def __and__(self, other: DyadicSet) -> DyadicSet:
        a, b, m = self._align(other)
        return DyadicSet(m, a & b)

    def complement(self) -> DyadicSet:
        return DyadicSet(self._resolution, ~self._mask)

    def restrict(self, interval: DyadicInterval) -> DyadicSet:
        """``self`` intersected with the cells of ``interval`` (same resolution)."""
        if interval.level > self._resolution:
            raise ParameterError("interval is finer than the set resolution")
        mask = np.zeros_like(self._mask)
        a, b = interval.cell_range(self._resolution)
        mask[a:b] = self._mask[a:b]
        return DyadicSet(self._resolution, mask)

    def __eq__(self, other):
        if not isinstance(other, DyadicSet):
            return NotImplemented
        return self._resolution == other._resolution and np.array_equal(self._mask, other._mask)

    def __hash__(self):
        return hash((self._resolution, self._mask.tobytes()))

    def __repr__(self):
        return f"DyadicSet(resolution={self._resolution}, cells={self.count})"

    # serialization -----------------------------------------------------

    def to_hex(self) -> str:
        return np.packbits(self._mask.astype(np.uint8)).tobytes().hex()

    @classmethod
    def from_hex(cls, resolution: int, text: str) -> DyadicSet:
        bits = np.unpackbits(np.frombuffer(bytes.fromhex(text), dtype=np.uint8))
        return cls(resolution, bits[: 1 << resolution].astype(bool))

    def to_dict(self) -> dict:
        return {"resolution": self._resolution, "mask": self.to_hex()}

    @classmethod
    def from_dict(cls, data: dict) -> DyadicSet:
        return cls.from_hex(int(data["resolution"]), data["mask"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> DyadicSet:
        return cls.from_dict(json.loads(text))

    def to_rle(self) -> str:
        """Run-length text form, e.g. ``"m=2 1x1 0x2 1x1"``."""
        runs = []
        mask = self._mask
        start = 0
        for i in range(1, mask.shape[0] + 1):
            if i == mask.shape[0] or mask[i] != mask[start]:
                runs.append(f"{int(mask[start])}x{i - start}")
                start = i
        return f"m={self._resolution} " + " ".join(runs)

    @classmethod
    def from_rle(cls, text: str) -> DyadicSet:
        head, *runs = text.split()
        if not head.startswith("m="):
            raise ParameterError("run-length text must start with 'm=<resolution>'")
        parts = []
        for run in runs:
            bit, length = run.split("x")
            parts.append(np.full(int(length), bit == "1"))
        mask = np.concatenate(parts) if parts else np.zeros(0, dtype=bool)
        return cls(int(head[2:]), mask)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    return beta


def content_tree(dset: DyadicSet, beta: float, stop_level: int = 0) -> list[np.ndarray]:
    """Optimal dyadic cover cost of ``dset`` inside every dyadic node.

    Returns ``values`` with ``values[j][k]`` the content of ``dset`` intersected
    with ``DyadicInterval(j, k)``, for levels ``stop_level <= j <= m``
    (entries below ``stop_level`` are ``None``).
    """
    beta = _check_beta(beta)
    m = dset.resolution
    values: list = [None] * (m + 1)
    occupied = dset.mask.copy()
    cur = np.where(occupied, 2.0 ** (-m * beta), 0.0)
    values[m] = cur
    for j in range(m - 1, stop_level - 1, -1):
        split = cur[0::2] + cur[1::2]
        occupied = occupied[0::2] | occupied[1::2]
        cur = np.where(occupied, np.minimum(2.0 ** (-j * beta), split), 0.0)
        values[j] = cur
    return values


def content_upper(dset: DyadicSet, beta: float) -> float:
    """Dyadic Hausdorff content ``H^beta_inf`` of ``dset``, exact over dyadic covers."""
    return float(content_tree(dset, beta)[0][0])


def find_dense_cube(dset: DyadicSet, beta: float, delta: float) -> DyadicInterval:
    """Coarsest, then leftmost, dyadic ``Q`` with ``H(E & Q) >= (1 - delta) l(Q)**beta``.

    Level ``m`` always succeeds on any occupied cell, so the scan terminates
    whenever the set is nonempty.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    if dset.is_empty():
        raise NotFoundError("the empty set has no dense cube")
    values = content_tree(dset, beta)
    for j, vals in enumerate(values):
        target = (1.0 - delta) * 2.0 ** (-j * beta)
        hits = np.flatnonzero((vals > 0) & (vals >= target - CONTENT_SLACK))
        if hits.size:
            return DyadicInterval(j, int(hits[0]))
    raise AssertionError("dense cube scan exhausted every level of a nonempty set")


def rescale(dset: DyadicSet, interval: DyadicInterval) -> DyadicSet:
    """Image of ``dset & interval`` under ``T_Q``, at resolution ``m - level``."""
    if interval.level > dset.resolution:
        raise ParameterError("interval level exceeds the set resolution")
    a, b = interval.cell_range(dset.resolution)
    return DyadicSet(dset.resolution - interval.level, dset.mask[a:b])
