"""Brute-force pattern search, configuration sets and translation defects.

A pattern is a triple ``{x, x + t, x + P(t)}`` inside a set, with ``t`` in
the window of a :class:`~fracpat.integral.QuadraticPattern`.  Membership is
closed-cell membership at the set's resolution.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .dyadic import DyadicSet
from .errors import ParameterError
from .integral import QuadraticPattern

MEMBER_TOL = 1e-9
DEDUP_TOL = 1e-12
#: The cell scan refines the grid to at least ``2**-(l + SCAN_MARGIN)`` so the
#: window ``[2**-l, 2**(1-l)]`` holds ``2**SCAN_MARGIN`` grid values of ``t``.
SCAN_MARGIN = 3


@dataclass(frozen=True)
class PatternWitness:
    """Three points ``(x, x + t, x + P(t))`` of a set.

    ``cell`` and ``k`` locate the witness on the scan grid (``x`` is the
    centre of cell ``cell``, ``t = k * 2**-resolution``); both are ``None``
    for point-set witnesses.
    """

    x: float
    t: float
    points: tuple
    distinct: bool
    cell: int | None = None
    k: int | None = None
    resolution: int | None = None

    def coefficient(self, q: float) -> float:
        """Value ``((z - x) - q (y - x)) / (y - x)**2`` realized by the witness."""
        x, y, z = self.points
        return ((z - x) - q * (y - x)) / (y - x) ** 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = list(self.points)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _distinct(points, scale: float) -> bool:
    x, y, z = points
    tol = MEMBER_TOL * scale
    return bool(abs(y - x) > tol and abs(z - x) > tol and abs(z - y) > tol)


def t_range(pat: QuadraticPattern, cell: float) -> tuple[int, int]:
    """Integer ``k`` range with ``k * cell`` in the closed window."""
    lo, hi = pat.window
    return math.ceil(lo / cell - MEMBER_TOL), math.floor(hi / cell + MEMBER_TOL)


def scan_resolution(dset: DyadicSet, pat: QuadraticPattern) -> int:
    return max(dset.resolution, pat.l + SCAN_MARGIN)


def _search_cells(dset: DyadicSet, pat: QuadraticPattern, require_distinct: bool):
    dset = dset.refined(scan_resolution(dset, pat))
    h = dset.cell_length
    kmin, kmax = t_range(pat, h)
    kept = np.ascontiguousarray(dset.indices(), dtype=np.int64)
    mask = np.ascontiguousarray(dset.mask, dtype=np.uint8)
    i, k = kernels.pattern_scan(mask, kept, kmin, kmax, float(pat.p), float(pat.q), h,
                                bool(require_distinct), MEMBER_TOL)
    if i < 0:
        return None
    x = (i + 0.5) * h
    t = k * h
    pts = (x, x + t, x + float(pat(t)))
    if not dset.contains_point(np.array(pts), MEMBER_TOL).all():
        raise AssertionError(f"scan returned a non-witness {pts}")
    return PatternWitness(x, t, pts, _distinct(pts, h), int(i), int(k), dset.resolution)


def _search_points(points: np.ndarray, pat: QuadraticPattern, require_distinct: bool):
    pts = np.unique(np.asarray(points, dtype=float))
    lo, hi = pat.window
    for x in pts:
        for y in pts:
            t = y - x
            if not lo - MEMBER_TOL <= t <= hi + MEMBER_TOL:
                continue
            z = x + float(pat(t))
            if not np.any(np.abs(pts - z) <= MEMBER_TOL):
                continue
            triple = (float(x), float(y), z)
            d = _distinct(triple, 1.0)
            if require_distinct and not d:
                continue
            return PatternWitness(float(x), float(t), triple, d)
    return None


def search_pattern(target, pat: QuadraticPattern, require_distinct: bool = False):
    """First witness of the pattern in deterministic scan order, or ``None``.

    Parameters
    ----------
    target : DyadicSet or array_like
        A dyadic set is scanned over cell centres ``x`` and ``t`` on the grid
        of :func:`scan_resolution` inside the window; a ``None`` result then
        only means no witness at grid scale.  A finite point array is scanned over
        all pairs ``(x, x + t)``.
    pat : QuadraticPattern
    require_distinct : bool
        Skip degenerate triples with coinciding points.
    """
    if isinstance(target, DyadicSet):
        return _search_cells(target, pat, require_distinct)
    return _search_points(np.atleast_1d(target), pat, require_distinct)


def dedup_sorted(values, tol: float = DEDUP_TOL) -> np.ndarray:
    """Sorted values with runs closer than ``tol`` collapsed to their first member."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return v
    keep = np.concatenate(([True], np.diff(v) > tol))
    return v[keep]


def configuration_set(points, q: float, allow_equal_yz: bool = True) -> np.ndarray:
    """``{((z - x) - q (y - x)) / (y - x)**2 : x != y, x != z}`` over a finite set.

    With ``allow_equal_yz=False`` triples with ``z == y`` are excluded too.
    Returns sorted values, deduplicated within ``1e-12``.
    """
    e = np.unique(np.asarray(points, dtype=float))
    if e.size < 2:
        raise ParameterError("configuration sets need at least two points")
    x = e[:, None, None]
    y = e[None, :, None]
    z = e[None, None, :]
    ok = (x != y) & (x != z)
    if not allow_equal_yz:
        ok = ok & (y != z)
    d = y - x
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = ((z - x) - q * d) / (d * d)
    return dedup_sorted(vals[ok])


def configuration_csv(values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a"])
    for v in values:
        w.writerow([repr(float(v))])
    return buf.getvalue()


def _intersect(a: list, b: list) -> list:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def translation_defect(dset: DyadicSet, t: float, shifts) -> float:
    """``|E minus the intersection of (E - f_j(t))|`` computed on the runs of ``E``.

    ``shifts`` are callables with ``f_j(0) = 0``.  ``E - s`` is the union
    of the runs of ``E`` moved left by ``s``, so the intersection is an exact
    interval computation.
    """
    runs = dset.intervals()
    if not runs:
        return 0.0
    common = runs
    for f in shifts:
        s = float(f(t))
        common = _intersect(common, [(a - s, b - s) for a, b in runs])
    kept = sum(b - a for a, b in common)
    return max(0.0, dset.measure() - kept)


def dyadic_t_sequence(start_level: int, stop_level: int) -> list[float]:
    return [2.0 ** -j for j in range(start_level, stop_level + 1)]
