"""Fourier transforms of grid measures, s-energies, Sobolev norms and the gap integral.

For a grid measure with cell length ``l`` the transform is exact:

    mu_hat(xi) = exp(-pi i l xi) sinc(l xi) S(xi),   S(xi) = sum_j w_j exp(-2 pi i j l xi),

and ``S`` has period ``P = 1 / l``.  Because ``sinc(l (u + n P))**2`` equals
``sinc(l u)**2 u**2 / (u + n P)**2``, any integral of ``|mu_hat|**2`` against a
power-like weight over the whole line folds onto one period ``[0, P]``; the
sum over periods is a Hurwitz zeta value.  Energies and Sobolev norms are
therefore computed with no truncation at all.  Sampled functions use the
transform of their piecewise-linear interpolant, which folds the same way
with ``sinc**4``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import binom, gamma, rgamma, roots_jacobi, zeta

from . import kernels
from .errors import AccuracyError, DivergenceError, ParameterError
from .measure import GridMeasure
from .profiles import mollifier, weight
from .sampled import SampledFunction

PANEL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_ORDER)
_DIRECT_FOLDS = 15
_BINOMIAL_TERMS = 7
#: Node cap for the certified midpoint rule in :func:`gap_integral`.
MAX_GAP_NODES = 2_000_000


class TailAccuracyWarning(RuntimeWarning):
    """The folded high-frequency contribution dominates an energy integral."""


@dataclass(frozen=True)
class SpectralProfile:
    """Values ``mu_hat(xi)`` on the symmetric grid ``-max_freq .. max_freq``."""

    frequencies: np.ndarray
    values: np.ndarray

    @property
    def step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def hermitian_defect(self) -> float:
        return float(np.abs(self.values - np.conj(self.values[::-1])).max())

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "re", "im", "abs"])
        for x, v in zip(self.frequencies, self.values):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text)
        return text


def transform(mu: GridMeasure, xi) -> np.ndarray:
    """Exact ``mu_hat(xi) = integral exp(-2 pi i x xi) dmu(x)``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    l = mu.cell_length
    s = kernels.cell_sum(mu.weights, l, xi.ravel()).reshape(xi.shape)
    return np.exp(-1j * np.pi * l * xi) * np.sinc(l * xi) * s


def spectrum(mu: GridMeasure, max_freq: float, step: float) -> SpectralProfile:
    if not (max_freq > 0 and step > 0):
        raise ParameterError("max_freq and step must be positive")
    k = int(math.floor(max_freq / step + 1e-9))
    pos = step * np.arange(k + 1)
    vals = transform(mu, pos)
    freqs = np.concatenate((-pos[:0:-1], pos))
    values = np.concatenate((np.conj(vals[:0:-1]), vals))
    return SpectralProfile(freqs, values)


def rho(s: float) -> float:
    """``rho_s = pi**(s - 1/2) Gamma((1 - s)/2) / Gamma(s/2)``."""
    return float(math.pi ** (s - 0.5) * gamma((1.0 - s) / 2.0) * rgamma(s / 2.0))


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    return s


# spatial energy -----------------------------------------------------------

def _second_difference(k: np.ndarray, a: float) -> np.ndarray:
    """``|k+1|**a - 2|k|**a + |k-1|**a`` for integer ``k >= 0``; series for large ``k``."""
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k < 16
    ks = k[small]
    out[small] = np.abs(ks + 1) ** a - 2 * np.abs(ks) ** a + np.abs(ks - 1) ** a
    kb = k[~small]
    series = np.zeros_like(kb)
    for n in range(2, 22, 2):
        series += 2.0 * binom(a, n) * kb ** (-n)
    out[~small] = kb ** a * series
    return out


def _autocorrelation(w: np.ndarray) -> np.ndarray:
    """``R[k] = sum_j w[j] w[j + k]`` for ``k = 0 .. n - 1``."""
    n = w.shape[0]
    if n <= 1 << 13:
        return np.correlate(w, w, mode="full")[n - 1:]
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(w, size)
    return np.fft.irfft(f * np.conj(f), size)[:n]


def _spatial_energy(mu: GridMeasure, s: float) -> float:
    # each cell pair at offset k contributes w_j w_{j+k} l**-s D2(k) / ((1-s)(2-s))
    a = 2.0 - s
    R = _autocorrelation(mu.weights)
    k = np.arange(R.shape[0])
    d2 = _second_difference(k, a)
    total = d2[0] * R[0] + 2.0 * float(np.dot(d2[1:], R[1:]))
    return float(mu.cell_length ** (-s) * total / ((1.0 - s) * (2.0 - s)))


# folded frequency quadrature ------------------------------------------------

def _panel_nodes(start: float, stop: float, width: float):
    k = np.arange(int(round((stop - start) / width)))
    u = start + (k[:, None] + 0.5 * (_GL_X + 1.0)) * width
    wts = np.broadcast_to(0.5 * width * _GL_W, u.shape)
    return u.ravel(), wts.ravel().copy()


def _period_values(mu: GridMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Panel nodes over one period ``[0, P)`` and ``|S|**2`` there (cached on ``mu``)."""
    key = ("period", PANEL_ORDER)
    if key not in mu._cache:
        P = 2.0 ** mu.resolution
        u, wts = _panel_nodes(0.0, P, 0.5)
        s = kernels.cell_sum(mu.weights, mu.cell_length, u)
        mu._cache[key] = (u, np.abs(s) ** 2)
    return mu._cache[key]


def _abs2_on_panels(mu: GridMeasure, stop: float):
    """Nodes, weights and ``|mu_hat|**2`` on width-1/2 panels of ``[0, stop]``."""
    u0, s2 = _period_values(mu)
    per = u0.shape[0]
    u, wts = _panel_nodes(0.0, stop, 0.5)
    idx = np.arange(u.shape[0]) % per
    return u, wts, np.sinc(mu.cell_length * u) ** 2 * s2[idx]


def _fold_weight(u, P, power, sigma):
    """``u**power * sum_{n >= 1} (u + n P)**-power (1 + (u + n P)**2)**(sigma / 2)``."""
    acc = np.zeros_like(u)
    for n in range(1, _DIRECT_FOLDS + 1):
        v = u + n * P
        acc += v ** (-power) * (1.0 + v * v) ** (sigma / 2.0)
    q = _DIRECT_FOLDS + 1 + u / P
    for k in range(_BINOMIAL_TERMS):
        e = power + 2 * k - sigma
        acc += binom(sigma / 2.0, k) * P ** (-e) * zeta(e, q)
    return u ** power * acc


def _frequency_energy(mu: GridMeasure, s: float, tail_warn: float = 0.5) -> float:
    P = 2.0 ** mu.resolution
    u, wts, a2 = _abs2_on_panels(mu, P)
    fold = u * u * P ** (s - 3.0) * zeta(3.0 - s, 1.0 + u / P)
    first = u < 0.5
    main = float(np.sum((wts * a2 * (u ** (s - 1.0) + fold))[~first]))
    tail = float(np.sum((wts * a2 * fold)[~first]))
    # [0, 1/2] with Gauss-Jacobi for the u**(s-1) singularity
    xj, wj = roots_jacobi(4 * PANEL_ORDER, 0.0, s - 1.0)
    uj = 0.25 * (xj + 1.0)
    base = np.sinc(mu.cell_length * uj) ** 2 * np.abs(kernels.cell_sum(mu.weights, mu.cell_length, uj)) ** 2
    foldj = uj ** (3.0 - s) * P ** (s - 3.0) * zeta(3.0 - s, 1.0 + uj / P)
    head = float(np.sum(wj * base * (1.0 + foldj))) * 4.0 ** (-s)
    total = head + main
    if total > 0 and tail / total > tail_warn:
        warnings.warn(f"folded tail carries {tail / total:.1%} of the energy; the grid "
                      "resolution dominates the measured value", TailAccuracyWarning, stacklevel=3)
    return 2.0 * rho(s) * total


def s_energy(mu: GridMeasure, s: float, form: str = "spatial") -> float:
    """Riesz energy ``I_s(mu) = integral integral |x - y|**-s dmu dmu``.

    ``form="spatial"`` sums exact cell-pair integrals; ``form="frequency"``
    evaluates ``rho_s integral |mu_hat|**2 |xi|**(s - 1)`` with the exact
    periodic fold.  Both are exact up to rounding and quadrature error.
    """
    s = _check_s(s)
    if form == "spatial":
        return _spatial_energy(mu, s)
    if form == "frequency":
        return _frequency_energy(mu, s)
    raise ParameterError(f"unknown energy form {form!r}")


# Sobolev norms --------------------------------------------------------------

def _measure_sobolev_sq(mu: GridMeasure, sigma: float) -> tuple[float, float]:
    P = 2.0 ** mu.resolution
    u, wts, a2 = _abs2_on_panels(mu, P)
    fold = _fold_weight(u, P, 2, sigma)
    main = wts * a2 * (1.0 + u * u) ** (sigma / 2.0)
    tail = float(np.sum(wts * a2 * fold))
    return 2.0 * (float(np.sum(main)) + tail), 2.0 * tail


def _sampled_sobolev_sq(f: SampledFunction, sigma: float) -> tuple[float, float]:
    h = f.step
    P = 1.0 / h
    span = f.x1 - f.x0
    width = 2.0 ** -math.ceil(math.log2(2.0 * span))
    u, wts = _panel_nodes(0.0, P, width)
    s2 = np.abs(kernels.cell_sum(f.values, h, u)) ** 2
    a2 = h * h * np.sinc(h * u) ** 4 * s2
    fold = _fold_weight(u, P, 4, sigma)
    main = float(np.sum(wts * a2 * (1.0 + u * u) ** (sigma / 2.0)))
    tail = float(np.sum(wts * a2 * fold))
    return 2.0 * (main + tail), 2.0 * tail


def sobolev_norm(obj, sigma: float, squared: bool = False, full_output: bool = False):
    """``||f||_{H^sigma} = (integral |f_hat|**2 (1 + |xi|**2)**(sigma/2))**(1/2)``.

    Grid measures accept ``sigma <= 0`` (a positive index is infinite for
    the singular measures these grids stand in for).  Sampled functions are
    normed through their piecewise-linear interpolant, finite for
    ``sigma < 3``.  With ``full_output`` the folded high-frequency part
    (beyond the first period) is returned as well.
    """
    sigma = float(sigma)
    if isinstance(obj, GridMeasure):
        if sigma > 0:
            raise DivergenceError("positive Sobolev index is not finite for singular measures")
        val, tail = _measure_sobolev_sq(obj, sigma)
    elif isinstance(obj, SampledFunction):
        if sigma >= 3:
            raise DivergenceError("piecewise-linear interpolants have finite H^sigma only for sigma < 3")
        val, tail = _sampled_sobolev_sq(obj, sigma)
    else:
        raise ParameterError(f"cannot take a Sobolev norm of {type(obj).__name__}")
    if not squared:
        val, tail = math.sqrt(max(val, 0.0)), math.sqrt(max(tail, 0.0))
    return (val, tail) if full_output else val


def multiplier_l1(mu: GridMeasure, multiplier, stop: float) -> float:
    """``integral_{|xi| <= stop} |mu_hat(xi) m(xi)| dxi`` for an even multiplier ``m``."""
    stop = 0.5 * math.ceil(2.0 * stop)
    u, wts, a2 = _abs2_on_panels(mu, stop)
    return 2.0 * float(np.sum(wts * np.sqrt(a2) * np.abs(multiplier(u))))


def multiplier_sobolev_sq(mu: GridMeasure, multiplier, stop: float, sigma: float) -> float:
    """``integral_{|xi| <= stop} |mu_hat m|**2 (1 + xi**2)**(sigma/2)``: squared norm of ``mu * m_check``."""
    stop = 0.5 * math.ceil(2.0 * stop)
    u, wts, a2 = _abs2_on_panels(mu, stop)
    return 2.0 * float(np.sum(wts * a2 * np.abs(multiplier(u)) ** 2 * (1.0 + u * u) ** (sigma / 2.0)))


# spectral gap ---------------------------------------------------------------

def lipschitz_constant(mu: GridMeasure) -> float:
    """Bound ``2 pi |mu| R`` on the Lipschitz constant of ``|mu_hat|`` (``R`` = support radius)."""
    _, radius = mu.support_radius()
    return 2.0 * math.pi * mu.total_mass * radius


def gap_integral(mu: GridMeasure, A: float, B: float, step: float | None = None,
                 tol: float | None = 0.01):
    """``integral_{A**(1/5) <= |xi| <= B**2} |mu_hat(xi)| dxi`` with a certified error bound.

    Midpoint rule; with ``L`` the Lipschitz constant of ``|mu_hat|`` the error
    is at most ``L h (b - a) / 2`` over both half-lines.  Unless ``step`` is
    given, the step is chosen so that this bound is at most ``tol * A**-3``.

    Returns
    -------
    (value, error_bound)

    Raises
    ------
    AccuracyError
        If the bound cannot be met within ``MAX_GAP_NODES`` nodes, or a
        given ``step`` is too coarse for ``tol``.
    """
    a, b = A ** 0.2, B * B
    if not a < b:
        raise ParameterError("need A**(1/5) < B**2")
    L = lipschitz_constant(mu)
    width = b - a
    target = None if tol is None else tol * A ** -3.0
    if step is None:
        if target is None:
            n = 4096
        else:
            n = max(1, math.ceil(L * width * width / (2.0 * target)))
            if n > MAX_GAP_NODES:
                raise AccuracyError(f"certifying the gap integral needs {n} nodes "
                                    f"(cap {MAX_GAP_NODES})")
        n = min(n, MAX_GAP_NODES)
    else:
        n = max(1, math.ceil(width / step))
    h = width / n
    bound = L * h * width / 2.0
    if target is not None and bound > target:
        raise AccuracyError(f"step {h:.3e} gives error bound {bound:.3e} above {target:.3e}")
    xi = a + h * (np.arange(n) + 0.5)
    val = 2.0 * h * float(np.abs(transform(mu, xi)).sum())
    return val, bound


def varphi_tail_bound(A: float, N: int) -> tuple[float, float]:
    """Measured ``C_N = sup |xi|**N |varphi_hat|`` and the tail bound ``2 C_N A**((1 - N)/5) / (N - 1)``."""
    xi = np.linspace(0.0, 64.0, 16385)
    c_n = float(np.max(xi ** N * np.abs(weight().fourier(xi))))
    return c_n, 2.0 * c_n * A ** ((1.0 - N) / 5.0) / (N - 1)


def varphi_deviation(mu: GridMeasure, xi) -> np.ndarray:
    """``|mu_hat(xi) - varphi_hat(xi)|`` for comparison with ``D 2**(-T + 1) |xi|``."""
    return np.abs(transform(mu, xi) - weight().fourier(xi))


def mollified_transform(mu: GridMeasure, eps: float, xi) -> np.ndarray:
    """``(mu * phi_eps)^(xi) = mu_hat(xi) phi_hat(eps xi)``."""
    return transform(mu, xi) * mollifier().fourier(eps * np.asarray(xi, dtype=float))
