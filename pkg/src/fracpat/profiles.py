"""Smooth compactly supported profiles: the mollifier, the t-window and the weight.

All three are built from ``psi(x) = exp(-1/x)`` (``x > 0``) and the smooth
step ``S(x) = psi(x) / (psi(x) + psi(1 - x))``, which is 0 for ``x <= 0``,
1 for ``x >= 1`` and satisfies ``S(x) + S(1 - x) = 1``.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .sampled import SampledFunction

_PROFILE_SAMPLES = 2049


def _psi(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C-infinity step: 0 on (-inf, 0], 1 on [1, inf)."""
    x = np.asarray(x, dtype=float)
    a = _psi(x)
    b = _psi(1.0 - x)
    return a / (a + b)


def _gl(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


class MollifierPhi:
    """Normalized bump ``phi(x) = exp(-1/(1 - x**2)) / Z`` on (-1, 1).

    ``phi`` is even, nonnegative, has unit integral and ``phi(1/2) ~ 0.594``.
    The CDF and the (real, even) Fourier transform are tabulated once and
    interpolated by cubic Hermite splines using exact derivatives.
    """

    #: Fourier transform is treated as zero beyond this frequency (|phi_hat| < 1e-14 there).
    FT_CUTOFF = 128.0
    FT_STEP = 1.0 / 128.0

    def __init__(self, nodes: int = 2048):
        self._nodes = nodes
        x, w = _gl(-1.0, 1.0, nodes)
        self._qx = x
        self._qw = w * _bump(x)
        self.normalization = float(self._qw.sum())
        self._qw /= self.normalization

    def __call__(self, x):
        return _bump(x) / self.normalization

    @cached_property
    def profile(self) -> SampledFunction:
        return SampledFunction.from_callable(self, -1.0, 1.0, _PROFILE_SAMPLES)

    @cached_property
    def _cdf_spline(self) -> CubicHermiteSpline:
        knots = np.linspace(-1.0, 1.0, 4097)
        xg, wg = _gl(0.0, 1.0, 16)
        a, b = knots[:-1], knots[1:]
        pts = a[:, None] + (b - a)[:, None] * xg
        cell = ((b - a)[:, None] * wg * self(pts)).sum(axis=1)
        cum = np.concatenate(([0.0], np.cumsum(cell)))
        cum /= cum[-1]
        return CubicHermiteSpline(knots, cum, self(knots))

    def cdf(self, x):
        """``Phi(x) = integral of phi over (-inf, x]``."""
        x = np.asarray(x, dtype=float)
        out = self._cdf_spline(np.clip(x, -1.0, 1.0))
        return np.where(x <= -1.0, 0.0, np.where(x >= 1.0, 1.0, out))

    def fourier_direct(self, xi):
        """``phi_hat(xi) = integral phi(x) cos(2 pi x xi) dx`` by Gauss-Legendre."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape)
        for s in range(0, xi.size, 256):
            out[s:s + 256] = np.cos(2 * np.pi * np.outer(xi[s:s + 256], self._qx)) @ self._qw
        return out

    @cached_property
    def _ft_spline(self) -> CubicHermiteSpline:
        xi = np.arange(0.0, self.FT_CUTOFF + self.FT_STEP / 2, self.FT_STEP)
        vals = self.fourier_direct(xi)
        der = np.empty(xi.shape)
        for s in range(0, xi.size, 256):
            der[s:s + 256] = (-2 * np.pi * np.sin(2 * np.pi * np.outer(xi[s:s + 256], self._qx))
                              @ (self._qw * self._qx))
        return CubicHermiteSpline(xi, vals, der)

    def fourier(self, xi):
        """Tabulated ``phi_hat``; zero for ``|xi| > FT_CUTOFF``."""
        a = np.abs(np.asarray(xi, dtype=float))
        inside = a <= self.FT_CUTOFF
        out = np.zeros(a.shape)
        out[inside] = self._ft_spline(a[inside])
        return out

    def scaled(self, eps: float):
        """``phi_eps(x) = phi(x / eps) / eps`` as a callable."""
        return lambda x: self(np.asarray(x, dtype=float) / eps) / eps


class WindowTau:
    """Smooth window equal to 1 on [1, 2] with support [1/2, 4]."""

    left = 0.5
    right = 4.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = smooth_step((x - 0.5) / 0.5)
        down = smooth_step((4.0 - x) / 2.0)
        return np.where(x < 1.0, up, np.where(x > 2.0, down, 1.0)) * ((x > 0.5) & (x < 4.0))

    def scaled(self, l: int):
        """``tau_l(t) = tau(2**l t)``, supported on ``[2**(-l-1), 2**(-l+2)]``."""
        c = 2.0 ** l
        return lambda t: self(c * np.asarray(t, dtype=float))

    @cached_property
    def l1_norm(self) -> float:
        # ramps of width 1/2 and 2 each contribute half their width
        return 0.25 + 1.0 + 1.0

    @cached_property
    def profile(self) -> SampledFunction:
        return SampledFunction.from_callable(self, self.left, self.right, _PROFILE_SAMPLES)


class WeightVarphi:
    """Smooth plateau weight on (0, 1) with unit integral and sup-norm 2.

    ``h(x) = S((x - a) / r) S((b - x) / r)`` with ramp width ``r`` and
    ``a = 1/2 - c - r``, ``b = 1/2 + c + r``; the half-plateau ``c`` is solved
    so that ``integral h = 1/2``, then ``varphi = 2 h``.
    """

    def __init__(self, ramp: float = 0.4):
        self.ramp = ramp
        self.half_plateau = brentq(lambda c: self._h_integral(c) - 0.5, 1e-6, 0.5 - ramp - 1e-6,
                                   xtol=1e-15)
        self.a = 0.5 - self.half_plateau - ramp
        self.b = 0.5 + self.half_plateau + ramp
        self._qx, w = _gl(self.a, self.b, 1024)
        self._qw = w * self(self._qx)

    def _h(self, x, c):
        a = 0.5 - c - self.ramp
        b = 0.5 + c + self.ramp
        return smooth_step((np.asarray(x, dtype=float) - a) / self.ramp) * smooth_step(
            (b - np.asarray(x, dtype=float)) / self.ramp)

    def _h_integral(self, c):
        a = 0.5 - c - self.ramp
        return quad(lambda x: float(self._h(x, c)), a, 1.0 - a, epsabs=1e-14, epsrel=1e-14,
                    limit=200)[0]

    def __call__(self, x):
        return 2.0 * self._h(x, self.half_plateau)

    @cached_property
    def profile(self) -> SampledFunction:
        return SampledFunction.from_callable(self, 0.0, 1.0, _PROFILE_SAMPLES)

    @cached_property
    def _cdf_spline(self) -> CubicHermiteSpline:
        knots = np.linspace(self.a, self.b, 8193)
        xg, wg = _gl(0.0, 1.0, 16)
        lo, hi = knots[:-1], knots[1:]
        pts = lo[:, None] + (hi - lo)[:, None] * xg
        cell = ((hi - lo)[:, None] * wg * self(pts)).sum(axis=1)
        cum = np.concatenate(([0.0], np.cumsum(cell)))
        return CubicHermiteSpline(knots, cum, self(knots))

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return self._cdf_spline(x)

    def integral(self, lo, hi):
        """``integral_lo^hi varphi``, elementwise over arrays of interval endpoints."""
        lo = np.asarray(lo, dtype=float)
        hi = np.maximum(np.asarray(hi, dtype=float), lo)
        return self.cdf(hi) - self.cdf(lo)

    def fourier(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape, dtype=complex)
        for s in range(0, xi.size, 512):
            out[s:s + 512] = np.exp(-2j * np.pi * np.outer(xi[s:s + 512], self._qx)) @ self._qw
        return out


_CACHE: dict = {}


def mollifier() -> MollifierPhi:
    if "phi" not in _CACHE:
        _CACHE["phi"] = MollifierPhi()
    return _CACHE["phi"]


def window() -> WindowTau:
    if "tau" not in _CACHE:
        _CACHE["tau"] = WindowTau()
    return _CACHE["tau"]


def weight() -> WeightVarphi:
    if "varphi" not in _CACHE:
        _CACHE["varphi"] = WeightVarphi()
    return _CACHE["varphi"]
