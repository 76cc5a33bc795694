"""Functions sampled on a uniform 1-D grid.

Between nodes a :class:`SampledFunction` is the natural cubic spline through
its samples; outside the grid it is zero.  Spline second derivatives depend
linearly on the samples, so sums and differences of sampled functions on a
common grid are exact operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .errors import ParameterError


def natural_second_derivatives(values: np.ndarray, step: float) -> np.ndarray:
    """Second derivatives of the natural cubic spline through rows of ``values``."""
    v = np.atleast_2d(np.asarray(values, dtype=float))
    n = v.shape[1]
    out = np.zeros_like(v)
    if n < 3:
        return out
    ab = np.zeros((3, n - 2))
    ab[0, 1:] = 1.0
    ab[1, :] = 4.0
    ab[2, :-1] = 1.0
    rhs = 6.0 * (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / (step * step)
    out[:, 1:-1] = solve_banded((1, 1), ab, rhs.T).T
    return out


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples ``values[i] = f(x0 + i * step)``.

    Parameters
    ----------
    x0 : float
        First node.
    step : float
        Grid spacing, positive.
    values : ndarray
        Real samples.
    """

    x0: float
    step: float
    values: np.ndarray
    _m2: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.step > 0:
            raise ParameterError("step must be positive")
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] < 2:
            raise ParameterError("need a 1-D array of at least two samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def from_callable(cls, func, a: float, b: float, n: int) -> SampledFunction:
        x = np.linspace(a, b, n)
        return cls(a, (b - a) / (n - 1), func(x))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x1(self) -> float:
        return self.x0 + (self.n - 1) * self.step

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.step * np.arange(self.n)

    @property
    def second_derivatives(self) -> np.ndarray:
        if self._m2 is None:
            object.__setattr__(self, "_m2", natural_second_derivatives(self.values, self.step)[0])
        return self._m2

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = kernels.spline_eval(self.values, self.second_derivatives, self.x0, self.step, y.ravel())
        return out[0].reshape(y.shape)

    def scaled(self, c: float) -> SampledFunction:
        return SampledFunction(self.x0, self.step, c * self.values)

    def _check_grid(self, other: SampledFunction):
        if self.n != other.n or self.x0 != other.x0 or self.step != other.step:
            raise ParameterError("sampled functions live on different grids")

    def __add__(self, other: SampledFunction) -> SampledFunction:
        self._check_grid(other)
        return SampledFunction(self.x0, self.step, self.values + other.values)

    def __sub__(self, other: SampledFunction) -> SampledFunction:
        self._check_grid(other)
        return SampledFunction(self.x0, self.step, self.values - other.values)

    def integral(self) -> float:
        """Exact integral of the spline over the grid."""
        v, m2, h = self.values, self.second_derivatives, self.step
        trap = h * (v.sum() - 0.5 * (v[0] + v[-1]))
        return float(trap - h ** 3 / 24.0 * (m2[:-1] + m2[1:]).sum())

    def l1_norm(self) -> float:
        return float(self.step * np.abs(self.values).sum())

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def fourier(self, xi) -> np.ndarray:
        """Transform of the piecewise-linear interpolant of the samples.

        ``hat f(xi) = step * sinc(step xi)**2 * sum_j v_j exp(-2 pi i x_j xi)``,
        exact for the hat-function interpolant; it differs from the spline
        transform by ``O(step**2)``.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        s = kernels.cell_sum(self.values, self.step, xi)
        return self.step * np.sinc(self.step * xi) ** 2 * np.exp(-2j * np.pi * self.x0 * xi) * s

    def end_slopes(self) -> tuple[float, float]:
        v, m2, h = self.values, self.second_derivatives, self.step
        left = (v[1] - v[0]) / h - h * (2 * m2[0] + m2[1]) / 6.0
        right = (v[-1] - v[-2]) / h + h * (m2[-2] + 2 * m2[-1]) / 6.0
        return float(left), float(right)

    def spline_fourier(self, xi, low: float = 1.0) -> np.ndarray:
        """Exact transform of the spline (zero outside the grid).

        Two integrations by parts turn the transform into boundary terms plus
        the transform of the piecewise-linear second derivative.  For
        ``|xi| < low`` that division by ``xi**2`` loses accuracy, so those
        values come from 4-point Gauss-Legendre on every grid interval.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape, dtype=complex)
        small = np.abs(xi) < low
        big = ~small
        h = self.step
        if big.any():
            z = xi[big]
            a = -2j * np.pi * z
            e0 = np.exp(a * self.x0)
            e1 = np.exp(a * self.x1)
            d0, d1 = self.end_slopes()
            hat = (h * np.sinc(h * z) ** 2 * e0
                   * kernels.cell_sum(self.second_derivatives, h, z))
            out[big] = ((self.values[-1] * e1 - self.values[0] * e0) / a
                        - (d1 * e1 - d0 * e0) / a ** 2 + hat / a ** 2)
        if small.any():
            gx, gw = np.polynomial.legendre.leggauss(4)
            pts = (self.grid[:-1, None] + 0.5 * h * (gx + 1.0)).ravel()
            wts = np.tile(0.5 * h * gw, self.n - 1) * self(pts)
            out[small] = np.exp(-2j * np.pi * np.outer(xi[small], pts)) @ wts
        return out

    def to_rows(self):
        return [(float(x), float(v)) for x, v in zip(self.grid, self.values)]
