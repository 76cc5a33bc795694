"""Grid measures: Frostman and spectral-gap constructions, mollification, ball masses.

A :class:`GridMeasure` spreads mass ``weights[j]`` uniformly over level-``m``
cell ``j``.  All constructions here keep that piecewise-constant form, so
ball masses and Fourier transforms stay exact.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import oaconvolve

from .dyadic import CONTENT_SLACK, DyadicSet, content_tree
from .errors import ParameterError, PreconditionError, ResolutionError
from .profiles import mollifier, weight
from .sampled import SampledFunction


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Nonnegative mass per level-``resolution`` cell, uniformly spread in the cell."""

    resolution: int
    weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != 1 << self.resolution:
            raise ParameterError(f"expected {1 << self.resolution} weights, got shape {w.shape}")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ParameterError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def lebesgue(cls, resolution: int) -> GridMeasure:
        return cls(resolution, np.full(1 << resolution, 2.0 ** -resolution))

    @classmethod
    def uniform_on(cls, dset: DyadicSet) -> GridMeasure:
        """Normalized Lebesgue measure restricted to ``dset``."""
        if dset.is_empty():
            raise PreconditionError("cannot normalize a measure on the empty set")
        return cls(dset.resolution, dset.mask / dset.count)

    @classmethod
    def zero(cls, resolution: int) -> GridMeasure:
        return cls(resolution, np.zeros(1 << resolution))

    @property
    def cell_length(self) -> float:
        return 2.0 ** -self.resolution

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.weights.shape[0]) + 0.5) * self.cell_length

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def support(self) -> DyadicSet:
        return DyadicSet(self.resolution, self.weights > 0)

    def support_radius(self) -> tuple[float, float]:
        """Midpoint ``c`` and radius ``R`` of the smallest interval holding the support."""
        idx = np.flatnonzero(self.weights > 0)
        if idx.size == 0:
            return 0.5, 0.0
        lo, hi = idx[0] * self.cell_length, (idx[-1] + 1) * self.cell_length
        return 0.5 * (lo + hi), 0.5 * (hi - lo)

    def normalized(self) -> GridMeasure:
        total = self.total_mass
        if total <= 0:
            raise PreconditionError("cannot normalize a zero measure")
        return GridMeasure(self.resolution, self.weights / total)

    def scaled(self, c: float) -> GridMeasure:
        return GridMeasure(self.resolution, c * self.weights)

    def coarsened(self, resolution: int) -> GridMeasure:
        if resolution > self.resolution:
            raise ParameterError("cannot coarsen to a finer resolution")
        k = 1 << (self.resolution - resolution)
        return GridMeasure(resolution, self.weights.reshape(-1, k).sum(axis=1))

    def refined(self, resolution: int) -> GridMeasure:
        if resolution < self.resolution:
            raise ParameterError("cannot refine to a coarser resolution")
        k = 1 << (resolution - self.resolution)
        return GridMeasure(resolution, np.repeat(self.weights / k, k))

    def shifted(self, cells: int) -> GridMeasure:
        """Translate by ``cells`` cells; mass leaving [0, 1] is dropped."""
        w = np.zeros_like(self.weights)
        n = w.shape[0]
        if cells >= 0:
            w[cells:] = self.weights[: n - cells]
        else:
            w[: n + cells] = self.weights[-cells:]
        return GridMeasure(self.resolution, w)

    def cdf(self, y):
        """``mu([0, y])`` for the piecewise-constant density."""
        if "cum" not in self._cache:
            self._cache["cum"] = np.concatenate(([0.0], np.cumsum(self.weights)))
        cum = self._cache["cum"]
        n = self.weights.shape[0]
        u = np.clip(np.asarray(y, dtype=float) / self.cell_length, 0.0, n)
        i = np.minimum(np.floor(u).astype(np.int64), n - 1)
        return cum[i] + (u - i) * self.weights[i]

    def to_dict(self) -> dict:
        return {"resolution": self.resolution, "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> GridMeasure:
        return cls(int(data["resolution"]), np.asarray(data["weights"], dtype=float))

    def __repr__(self):
        return f"GridMeasure(resolution={self.resolution}, mass={self.total_mass:.6g})"


def ball_mass(mu: GridMeasure, x, r):
    """Exact ``mu([x - r, x + r])``; partial cells are prorated."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ParameterError("radius must be positive")
    return mu.cdf(x + r) - mu.cdf(x - r)


def _split_down(values: list, top_level: int, top_mass: np.ndarray) -> np.ndarray:
    """Push node masses at ``top_level`` to the leaves in proportion to the capped tree."""
    cur = top_mass
    for j in range(top_level, len(values) - 1):
        child = values[j + 1]
        left, right = child[0::2], child[1::2]
        denom = left + right
        scale = np.divide(cur, denom, out=np.zeros_like(cur), where=denom > 0)
        nxt = np.empty(child.shape[0])
        nxt[0::2] = left * scale
        nxt[1::2] = right * scale
        cur = nxt
    return cur


def frostman(dset: DyadicSet, beta: float) -> GridMeasure:
    """Capped-tree Frostman measure on ``dset``.

    Each kept leaf starts with mass ``l**beta``; sweeping up, any subtree
    whose mass exceeds ``l(node)**beta`` is scaled down to that cap.  Node
    masses then equal the dyadic content of ``dset`` inside the node, so the
    total mass equals ``content_upper(dset, beta)`` and every dyadic node
    ``Q`` carries at most ``l(Q)**beta``.  Any interval of length ``2r`` with
    ``r = 2**-k`` meets at most two level ``k - 1`` nodes, which gives
    ``nu(B(x, r)) <= 2**(1 + beta) r**beta <= 4 r**beta`` at dyadic radii.
    """
    if dset.is_empty():
        raise PreconditionError("Frostman measure of the empty set is undefined")
    values = content_tree(dset, beta)
    leaves = _split_down(values, 0, values[0])
    return GridMeasure(dset.resolution, leaves)


#: Suite-wide Frostman constant at dyadic radii, ``2**(1 + beta) <= 4``.
FROSTMAN_C = 4.0


#: Zero samples added beyond the support; spline end effects decay by ~0.27 per sample.
MOLLIFY_PAD = 16


def mollify(mu: GridMeasure, eps: float, out_resolution: int,
            extent: tuple[float, float] | None = None) -> SampledFunction:
    """Density of ``mu * phi_eps`` sampled at spacing ``2**-out_resolution``.

    Samples are exact up to the tabulated mollifier CDF: with fine spacing
    ``g = min(cell, out step)`` the density at ``i g`` is the discrete
    convolution of the cellwise densities with taps
    ``Phi(d g / eps) - Phi((d - 1) g / eps)``.

    Parameters
    ----------
    extent : (lo, hi), optional
        Output interval; defaults to ``[-eps, 1 + eps]`` widened by
        ``MOLLIFY_PAD`` samples on each side, so that the spline end
        conditions sit in the zero region.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    h = 2.0 ** -out_resolution
    if extent is None:
        extent = (-eps - MOLLIFY_PAD * h, 1.0 + eps + MOLLIFY_PAD * h)
    i_lo = math.floor(extent[0] / h + 1e-9)
    i_hi = math.ceil(extent[1] / h - 1e-9)
    if i_hi - i_lo < 1:
        raise ParameterError("empty output extent")
    fine = max(mu.resolution, out_resolution)
    g = 2.0 ** -fine
    ratio = 1 << (fine - out_resolution)
    dens = np.repeat(mu.weights / mu.cell_length, 1 << (fine - mu.resolution))
    reach = int(math.ceil(eps / g)) + 1
    d = np.arange(-reach, reach + 2)
    phi = mollifier()
    taps = phi.cdf(d * g / eps) - phi.cdf((d - 1) * g / eps)
    if dens.size * taps.size <= 1 << 22:
        conv = np.convolve(dens, taps)
    else:
        conv = oaconvolve(dens, taps)
    # conv[n] is the density at (n - reach) * g
    nodes = np.arange(i_lo, i_hi + 1) * ratio + reach
    vals = np.zeros(nodes.shape)
    ok = (nodes >= 0) & (nodes < conv.size)
    vals[ok] = conv[nodes[ok]]
    return SampledFunction(i_lo * h, h, np.maximum(vals, 0.0))


def regular_core(mu: GridMeasure, c: float):
    """Mass of ``D_c``: cells whose centre has a dyadic radius with ``mu(B(x, r)) <= c r``.

    Radii range over ``2**-k`` for ``k = 0 .. resolution``.  Returns the
    ``mu``-mass of those cells and a boolean mask of the complement
    (the cells where every tested ball is heavy).
    """
    if not c > 0:
        raise ParameterError("c must be positive")
    x = mu.centers
    in_dc = np.zeros(x.shape, dtype=bool)
    for k in range(mu.resolution + 1):
        r = 2.0 ** -k
        in_dc |= ball_mass(mu, x, r) <= c * r
    return float(mu.weights[in_dc].sum()), ~in_dc


@dataclass
class ConstructionReport:
    """Parameters and diagnostics of :func:`spectral_gap_measure`."""

    A: float
    B: float
    beta: float
    T: int
    T_required: int
    t_override: bool
    delta: float
    beta_min: float
    content: float
    child_masses: list
    child_mass_max: float
    child_mass_cap: float
    lipschitz_D: float
    lipschitz_term: float
    varphi_annulus: float
    chain_bound: float
    gap: float = float("nan")
    gap_error: float = float("nan")
    gap_certified: bool = False
    gap_target: float = float("nan")

    @property
    def gap_ok(self) -> bool:
        return self.gap_certified and self.gap + self.gap_error <= self.gap_target

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap_ok"] = self.gap_ok
        return d


def required_T(A: float, B: float) -> int:
    """Least ``T`` with ``2**(-T + 3) B**4 <= A**-3 / 2``."""
    return max(1, math.ceil(math.log2(16.0 * B ** 4 * A ** 3) - 1e-12))


def beta_threshold(T: int, delta: float) -> float:
    """Smallest ``beta`` for which content ``>= 1 - delta`` forces every level-``T`` cube half-dense.

    If one level-``T`` cube ``Q0`` had content below ``l(Q0)**beta / 2``,
    subadditivity would give ``1 - delta < (2**T - 1/2) 2**(-T beta)``.
    """
    return 1.0 - math.log2((1.0 - delta) / (1.0 - 2.0 ** (-T - 1))) / T


def spectral_gap_measure(dset: DyadicSet, A: float, B: float, beta: float,
                         T: int | None = None, gap_tol: float = 0.01):
    """Probability measure on ``dset`` whose transform nearly vanishes on ``A**(1/5) <= |xi| <= B**2``.

    The unit interval is cut into level-``T`` cubes; cube ``Q`` receives mass
    ``w(Q) = integral_Q varphi`` spread by the capped-tree Frostman measure of
    ``dset & Q``.  Then ``|mu_hat - varphi_hat| <= pi 2**(-T + 1) |xi|`` and the
    gap integral is bounded by the ``varphi_hat`` annulus integral plus
    ``pi 2**(-T + 1) (B**4 - A**(2/5))``.

    Returns
    -------
    (GridMeasure, ConstructionReport)
    """
    from .fourier import gap_integral
    from .errors import AccuracyError

    if not (A > 0 and B > 0 and A ** 0.2 < B * B):
        raise ParameterError("need A**(1/5) < B**2")
    T_req = required_T(A, B)
    T_used = T_req if T is None else int(T)
    if T_used < 1:
        raise ParameterError("T must be positive")
    if dset.resolution < T_used:
        raise ResolutionError(f"set resolution {dset.resolution} is below T = {T_used}")
    delta = 2.0 ** (-3 * T_used - 3)
    values = content_tree(dset, beta)
    content = float(values[0][0])
    if content < 1.0 - delta - CONTENT_SLACK:
        raise PreconditionError(
            f"content {content:.15g} is below 1 - delta = {1 - delta:.15g} "
            f"(deficit {1 - delta - content:.3e}, T = {T_used})")
    n = 1 << T_used
    edges = np.arange(n + 1) / n
    phi = weight()
    w = phi.integral(edges[:-1], edges[1:])
    w = np.where(w > 0, w, 0.0)
    w /= w.sum()
    child_content = values[T_used]
    need = 0.5 * 2.0 ** (-T_used * beta)
    bad = np.flatnonzero((w > 0) & (child_content < need - CONTENT_SLACK))
    if bad.size:
        raise PreconditionError(
            f"{bad.size} level-{T_used} cubes with positive weight have content below "
            f"l(Q)**beta / 2 (first: index {bad[0]}); beta {beta} vs threshold "
            f"{beta_threshold(T_used, delta):.8f}")
    leaves = _split_down(values, T_used, w)
    mu = GridMeasure(dset.resolution, leaves)

    lo, hi = A ** 0.2, B * B
    D = math.pi
    lip = D * 2.0 ** (-T_used + 1) * (hi * hi - lo * lo)
    xi = np.linspace(lo, hi, 4097)
    var_ann = 2.0 * float(trapezoid(np.abs(phi.fourier(xi)), xi))
    report = ConstructionReport(
        A=A, B=B, beta=beta, T=T_used, T_required=T_req, t_override=T_used < T_req,
        delta=delta, beta_min=beta_threshold(T_used, delta), content=content,
        child_masses=w.tolist(), child_mass_max=float(w.max()),
        child_mass_cap=2.0 * 2.0 ** -T_used, lipschitz_D=D, lipschitz_term=lip,
        varphi_annulus=var_ann, chain_bound=var_ann + lip, gap_target=A ** -3.0)
    try:
        report.gap, report.gap_error = gap_integral(mu, A, B, tol=gap_tol)
        report.gap_certified = True
    except AccuracyError:
        report.gap, report.gap_error = gap_integral(mu, A, B, tol=None)
    return mu, report
