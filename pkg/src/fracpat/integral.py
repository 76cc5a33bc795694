"""Configuration integrals, the nine-term decomposition and the positivity certificate.

The configuration integral of a grid measure ``mu`` is

    I = integral integral mu_eps(x + t) mu_eps(x + P(t)) tau_l(t) dt dmu(x),

with ``P(t) = p t**2 + q t`` and ``tau_l`` the window supported on
``[2**(-l-1), 2**(-l+2)]``.  Writing ``mu_eps = low + mid + high`` with
``low = mu_{1/A}``, ``mid = mu_{1/B} - mu_{1/A}``, ``high = mu_eps - mu_{1/B}``
splits ``I`` into nine terms, all evaluated here with the same quadrature so
that they add back to ``I`` up to rounding.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import AccuracyError, ParameterError
from .fourier import multiplier_l1, multiplier_sobolev_sq, s_energy, sobolev_norm, transform
from .measure import GridMeasure, mollify, regular_core
from .profiles import mollifier, window
from .sampled import SampledFunction, natural_second_derivatives

LABELS = ("low", "mid", "high")
_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)
_GL2_X, _GL2_W = np.polynomial.legendre.leggauss(2)


@dataclass(frozen=True)
class QuadraticPattern:
    """Pattern ``{x, x + t, x + p t**2 + q t}`` with ``t`` in the scale-``l`` window."""

    p: float
    q: float = 0.0
    l: int = 0

    def __post_init__(self):
        if self.p == 0:
            raise ParameterError("leading coefficient p must be nonzero")
        if self.l < 0:
            raise ParameterError("scale index l must be nonnegative")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.p * t * t + self.q * t

    @property
    def window(self) -> tuple[float, float]:
        return 2.0 ** (-self.l - 1), 2.0 ** (-self.l + 2)

    def max_slope(self) -> float:
        """``max |P'(t)|`` over the window."""
        lo, hi = self.window
        return max(abs(2 * self.p * lo + self.q), abs(2 * self.p * hi + self.q))

    def max_shift(self) -> float:
        """``max |P(t)|`` over the window (P is monotone or has one extremum there)."""
        lo, hi = self.window
        ts = [lo, hi]
        vertex = -self.q / (2 * self.p)
        if lo < vertex < hi:
            ts.append(vertex)
        return float(max(abs(self(t)) for t in ts))

    def tau(self, t):
        return window().scaled(self.l)(t)

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "l": self.l}


def _dyadic_at_most(x: float) -> int:
    """Least ``r`` with ``2**-r <= x``."""
    return max(0, math.ceil(-math.log2(x) - 1e-12))


@dataclass
class _Rule:
    xs: np.ndarray
    wx: np.ndarray
    ts: np.ndarray
    wt: np.ndarray
    sample_resolution: int


def _outer_nodes(mu: GridMeasure, sub: int):
    """Two Gauss nodes on each of ``sub`` subcells of every charged cell, weighted by the density."""
    idx = np.flatnonzero(mu.weights > 0)
    l = mu.cell_length
    d = l / sub
    starts = (idx[:, None] * l + d * np.arange(sub)[None, :]).ravel()
    xs = (starts[:, None] + 0.5 * d * (_GL2_X + 1.0)).ravel()
    dens = np.repeat(mu.weights[idx] / l, sub * 2)
    wx = dens * np.tile(0.5 * d * _GL2_W, idx.size * sub)
    return xs, wx


def _t_nodes(pat: QuadraticPattern, width: float):
    lo, hi = pat.window
    n = max(1, math.ceil((hi - lo) / width))
    d = (hi - lo) / n
    ts = (lo + d * (np.arange(n)[:, None] + 0.5 * (_GL4_X + 1.0))).ravel()
    wt = np.tile(0.5 * d * _GL4_W, n) * pat.tau(ts)
    keep = wt != 0
    return ts[keep], wt[keep]


def _rule(mu: GridMeasure, eps: float, pat: QuadraticPattern, level: int) -> _Rule:
    # subcells no longer than eps / 8
    sub = 1 << max(0, _dyadic_at_most(eps / 8.0) - mu.resolution)
    xs, wx = _outer_nodes(mu, sub << level)
    width = eps / (2.0 * (1.0 + pat.max_slope())) / (1 << level)
    ts, wt = _t_nodes(pat, width)
    res = _dyadic_at_most(eps / 32.0) + level
    return _Rule(xs, wx, ts, wt, res)


def _stack(funcs):
    v = np.ascontiguousarray(np.vstack([f.values for f in funcs]))
    m = np.ascontiguousarray(natural_second_derivatives(v, funcs[0].step))
    return v, m


def _pair_sums(F, G, xs, wx, ts, wt, pat: QuadraticPattern) -> np.ndarray:
    fv, fm = _stack(F)
    gv, gm = _stack(G)
    return kernels.trilinear_sums(fv, fm, F[0].x0, F[0].step, gv, gm, G[0].x0, G[0].step,
                                  np.ascontiguousarray(xs), np.ascontiguousarray(wx),
                                  np.ascontiguousarray(ts), np.ascontiguousarray(wt),
                                  float(pat.p), float(pat.q))


def _config_at(mu, eps, pat, level, extent=None):
    rule = _rule(mu, eps, pat, level)
    c = mollify(mu, eps, rule.sample_resolution, extent)
    return float(_pair_sums([c], [c], rule.xs, rule.wx, rule.ts, rule.wt, pat)[0, 0])


def config_integral(mu: GridMeasure, eps: float, pat: QuadraticPattern, rel_tol: float | None = None,
                    refine: bool = True, extent=None):
    """Configuration integral with a step-halving error estimate.

    The outer integral uses two Gauss nodes per subcell (subcells at most
    ``eps / 8``) of every charged cell; the inner ``t`` integral uses 4-point
    Gauss panels no wider than ``eps / (2 (1 + max|P'|))``, weighted by
    ``tau_l``; ``mu_eps`` is sampled at a dyadic spacing at most ``eps / 32``.
    A second pass halves all three spacings.

    Returns
    -------
    (value, error) where ``value`` is the refined result and ``error`` the
    difference between the two passes.  With ``refine=False`` only the first
    pass runs (the rule :func:`decompose` uses) and ``error`` is NaN.

    Raises
    ------
    AccuracyError
        If ``rel_tol`` is given and the error exceeds ``rel_tol * |value|``.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    coarse = _config_at(mu, eps, pat, 0, extent)
    if not refine:
        return coarse, float("nan")
    fine = _config_at(mu, eps, pat, 1, extent)
    err = abs(fine - coarse)
    if rel_tol is not None and err > rel_tol * abs(fine):
        raise AccuracyError(f"configuration integral did not converge: {fine} +/- {err}")
    # the integrand is nonnegative; spline ringing at support edges can leave a
    # negative residue far below err
    return max(fine, 0.0), err


# frequency-space form ----------------------------------------------------------

def _spline_tail_bound(f: SampledFunction, xi0: float) -> float:
    """Bound on ``integral_{|xi| > xi0} |f_hat|``, which dominates the grid sum beyond ``xi0 + delta``."""
    if f.values[0] != 0.0 or f.values[-1] != 0.0:
        raise AccuracyError("frequency tails are only bounded for functions vanishing at the grid ends")
    d0, d1 = f.end_slopes()
    m1 = float(np.abs(f.second_derivatives).sum())
    h = f.step
    # |f_hat| <= (|d0| + |d1| + m1 / (pi**2 h xi**2)) / (4 pi**2 xi**2) on each half-line
    b = (abs(d0) + abs(d1)) / (4 * math.pi ** 2 * xi0)
    c = m1 / (4 * math.pi ** 4 * h) / (3.0 * xi0 ** 3)
    return 2.0 * (b + c)


def _alias_free_step(f: SampledFunction, g: SampledFunction, mu: GridMeasure,
                     pat: QuadraticPattern) -> float:
    c, r = mu.support_radius()
    mlo, mhi = c - r, c + r
    lo, hi = pat.window
    reach_f = max(abs(f.x1 - mlo), abs(f.x0 - mhi)) + hi
    reach_g = max(abs(g.x1 - mlo), abs(g.x0 - mhi)) + pat.max_shift()
    reach = 1.05 * max(reach_f, reach_g)
    return 2.0 ** -math.ceil(math.log2(reach))


def config_integral_frequency(f: SampledFunction, g: SampledFunction, mu: GridMeasure,
                              pat: QuadraticPattern, trunc: float, tol: float | None = None,
                              return_details: bool = False):
    """``integral integral f(x + t) g(x + P(t)) tau_l(t) dt dmu(x)`` evaluated in frequency space.

    The identity

        I = integral integral mu_hat(xi + eta) conj(f_hat)(xi) conj(g_hat)(eta)
                K(xi, eta) dxi deta,   K = integral tau_l(t) exp(-2 pi i (t xi + P(t) eta)) dt,

    is discretized on a uniform grid of step ``delta`` small enough that the
    trapezoid rule is exact (no aliasing of the compact spatial supports),
    truncated to ``|xi|, |eta| <= trunc``.  ``K`` uses 8-point Gauss panels
    sized to the phase derivative ``2 pi (|xi| + |P'| |eta|)``.

    Returns
    -------
    (value, truncation_bound), or a details dict when ``return_details``.

    Raises
    ------
    AccuracyError
        When ``tol`` is given and the truncation bound exceeds it.
    """
    if not trunc > 0:
        raise ParameterError("trunc must be positive")
    delta = _alias_free_step(f, g, mu, pat)
    n = int(math.floor(trunc / delta))
    xi = delta * np.arange(-n, n + 1)
    fh = np.conj(f.spline_fourier(xi))
    gh = np.conj(g.spline_fourier(xi))
    mh = transform(mu, delta * np.arange(-2 * n, 2 * n + 1))
    lf = delta * float(np.abs(fh).sum())
    lg = delta * float(np.abs(gh).sum())
    # grid frequencies beyond n * delta are dropped; the tail integral starts there
    tf = _spline_tail_bound(f, n * delta)
    tg = _spline_tail_bound(g, n * delta)
    tau_l1 = 2.0 ** -pat.l * window().l1_norm
    bound = tau_l1 * mu.total_mass * (tf * lg + lf * tg + tf * tg)
    if tol is not None and bound > tol:
        raise AccuracyError(f"truncation bound {bound:.3e} exceeds tolerance {tol:.3e}")

    rate = 2.0 * math.pi * trunc * (1.0 + pat.max_slope())
    lo, hi = pat.window
    panels = max(1, math.ceil((hi - lo) * rate / 4.0))
    gx, gw = np.polynomial.legendre.leggauss(8)
    d = (hi - lo) / panels
    ts = (lo + d * (np.arange(panels)[:, None] + 0.5 * (gx + 1.0))).ravel()
    wt = np.tile(0.5 * d * gw, panels) * pat.tau(ts)
    keep = wt != 0
    ts, wt = ts[keep], wt[keep]

    size = 1 << (4 * n + 1).bit_length()
    total = 0.0 + 0.0j
    chunk = max(1, (1 << 22) // size)
    for s in range(0, ts.size, chunk):
        t = ts[s:s + chunk, None]
        a = fh[None, :] * np.exp(-2j * np.pi * t * xi[None, :])
        b = gh[None, :] * np.exp(-2j * np.pi * pat(t) * xi[None, :])
        conv = np.fft.ifft(np.fft.fft(a, size, axis=1) * np.fft.fft(b, size, axis=1), axis=1)
        # conv[:, k] pairs index sums k - 2n
        total += np.sum(wt[s:s + chunk] * (conv[:, : 4 * n + 1] @ mh))
    value = float((delta * delta * total).real)
    if return_details:
        return {"value": value, "truncation_bound": bound, "delta": delta, "t_nodes": int(ts.size),
                "l1_f": lf, "l1_g": lg}
    return value, bound


# decomposition ----------------------------------------------------------------

@dataclass
class DecompositionReport:
    """Nine measured terms, their bounds and the parameters used.

    ``terms[i][j]`` pairs piece ``i`` at ``x + t`` with piece ``j`` at
    ``x + P(t)``, pieces ordered ``low, mid, high``.
    """

    params: dict
    terms: list
    config_value: float
    config_error: float
    identity_defect: float
    l1_norms: dict
    sobolev_sq: dict
    energies: dict
    measured_bounds: list
    sobolev_bounds: list
    table_bounds: list
    main_bound: float
    main_ok: bool
    lemma_preconditions: dict
    regular_core_mass: float
    elapsed_terms: dict = field(default_factory=dict)

    @property
    def main(self) -> float:
        return self.terms[0][0]

    def remainder_abs_sum(self) -> float:
        return float(sum(abs(self.terms[i][j]) for i in range(3) for j in range(3) if (i, j) != (0, 0)))

    def ledger(self) -> list[dict]:
        rows = []
        for i in range(3):
            for j in range(3):
                v = self.terms[i][j]
                mb = self.measured_bounds[i][j]
                kind = "main" if (i, j) == (0, 0) else ("type II" if 2 in (i, j) else "type I")
                rows.append({
                    "row": LABELS[i], "col": LABELS[j], "kind": kind, "value": v,
                    "measured_bound": mb, "within_measured_bound": abs(v) <= mb * (1 + 1e-9),
                    "table_bound": self.table_bounds[i][j],
                    "table_ratio": abs(v) / self.table_bounds[i][j] if self.table_bounds[i][j] else None,
                    "sobolev_bound": self.sobolev_bounds[i][j],
                })
        return rows

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ledger"] = self.ledger()
        d["main"] = self.main
        d["remainder_abs_sum"] = self.remainder_abs_sum()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """3x3 ledger: measured value and Table-1 style bound per cell."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x+t \\ x+P(t)"] + [f"{c} value" for c in LABELS] + [f"{c} bound" for c in LABELS])
        for i in range(3):
            w.writerow([LABELS[i]] + [repr(self.terms[i][j]) for j in range(3)]
                       + [repr(self.table_bounds[i][j]) for j in range(3)])
        return buf.getvalue()


def lemma_main_preconditions(A: float, pat: QuadraticPattern) -> dict:
    """Hypotheses of the main-term lower bound: ``(4A)**-1 = 2**(1 - l)`` and ``|P(t)| <= |t|`` there."""
    scale_ok = math.isclose(1.0 / (4.0 * A), 2.0 ** (1 - pat.l), rel_tol=1e-12)
    poly_ok = abs(pat.p) / (4.0 * A) + abs(pat.q) <= 1.0
    return {"scale_ok": scale_ok, "poly_ok": poly_ok, "ok": scale_ok and poly_ok}


def main_term_bound(A: float, c: float = 1.0 / 20.0) -> float:
    return 2.0 ** -10 * c * c / A


def decompose(mu: GridMeasure, eps: float, A: float, B: float, pat: QuadraticPattern,
              s: float, gamma: float, kappa: float = 1.0, c_sie: float = 1.0,
              c: float = 1.0 / 20.0, refine: bool = True) -> DecompositionReport:
    """Evaluate the nine cross terms and compare them with their bounds.

    Three kinds of bound are reported for each term ``(i, j)``:

    * measured: ``2**-l ||tau||_1 |mu| L1_i L1_j`` with
      ``L1_i = integral |mu_hat m_i|``; this is a rigorous upper bound;
    * Sobolev form: ``c_sie 2**(kappa l) ||piece_i|| ||piece_j|| ||mu||`` in
      ``H^-gamma``, with the configured (not derived) constant ``c_sie``;
    * asymptotic: the Table 1 expressions with ``C = max(I_s, I_{1-gamma})``
      and implicit constants set to 1; only the measured/bound ratio is meaningful.
    """
    if not 0 < eps < 1.0 / B < 1.0 / A < 1.0:
        raise ParameterError(f"need 0 < eps < 1/B < 1/A < 1, got eps={eps}, A={A}, B={B}")
    rule = _rule(mu, eps, pat, 0)
    h = 2.0 ** -rule.sample_resolution
    extent = (-1.0 / A, 1.0 + 1.0 / A)
    a = mollify(mu, 1.0 / A, rule.sample_resolution, extent)
    b = mollify(mu, 1.0 / B, rule.sample_resolution, extent)
    cc = mollify(mu, eps, rule.sample_resolution, extent)
    pieces = [a, b - a, cc - b]
    S = _pair_sums(pieces, pieces, rule.xs, rule.wx, rule.ts, rule.wt, pat)
    coarse = float(_pair_sums([cc], [cc], rule.xs, rule.wx, rule.ts, rule.wt, pat)[0, 0])
    identity = abs(float(S.sum()) - coarse) / max(abs(coarse), 1e-300)
    if refine:
        fine = _config_at(mu, eps, pat, 1, extent)
        err = abs(fine - coarse)
    else:
        err = float("nan")

    phi = mollifier()
    mults = [
        (lambda u: phi.fourier(u / A), 128.0 * A),
        (lambda u: phi.fourier(u / B) - phi.fourier(u / A), 128.0 * B),
        (lambda u: phi.fourier(eps * u) - phi.fourier(u / B), 128.0 / eps),
    ]
    l1 = [multiplier_l1(mu, m, stop) for m, stop in mults]
    sob = [multiplier_sobolev_sq(mu, m, stop, -gamma) for m, stop in mults]
    mu_sob = sobolev_norm(mu, -gamma, squared=True)
    I_s = s_energy(mu, s)
    I_g = s_energy(mu, 1.0 - gamma)
    C = max(I_s, I_g)

    mass = mu.total_mass
    pre = 2.0 ** -pat.l * window().l1_norm * mass
    measured = [[pre * l1[i] * l1[j] for j in range(3)] for i in range(3)]
    growth = c_sie * 2.0 ** (kappa * pat.l)
    norms = [math.sqrt(x) for x in sob]
    sobolev = [[growth * norms[i] * norms[j] * math.sqrt(mu_sob) if 2 in (i, j) else None
                for j in range(3)] for i in range(3)]
    e = (1.0 - s - gamma)
    tI = 2.0 ** -pat.l * A ** -0.4
    tII = C ** 1.5 * growth * B ** (e / 10.0)
    tIIm = C * growth * A ** -1.5 * B ** (e / 10.0)
    table = [
        [main_term_bound(A, c), tI, tII],
        [tI, 2.0 ** -pat.l * A ** -2.8, tIIm],
        [tII, tIIm, C ** 1.5 * growth * B ** (e / 5.0)],
    ]
    core_mass, _ = regular_core(mu, c)
    main_lb = main_term_bound(A, c)
    params = {"eps": eps, "A": A, "B": B, "s": s, "gamma": gamma, "kappa": kappa,
              "c_sie": c_sie, "c": c, "pattern": pat.to_dict(), "C": C,
              "sample_step": h, "x_nodes": int(rule.xs.size), "t_nodes": int(rule.ts.size)}
    return DecompositionReport(
        params=params,
        terms=[[float(S[i, j]) for j in range(3)] for i in range(3)],
        config_value=coarse,
        config_error=err,
        identity_defect=identity,
        l1_norms={"low": l1[0], "mid": l1[1], "high": l1[2],
                  "low_vs_A": l1[0] / A, "mid_vs_A_7_5": l1[1] / A ** -1.4},
        sobolev_sq={"low": sob[0], "mid": sob[1], "high": sob[2], "mu": mu_sob,
                    "mid_vs_A_3": sob[1] / A ** -3.0,
                    "high_vs_B": sob[2] / (B ** (e / 5.0) * I_s),
                    "mu_vs_energy": mu_sob / I_g},
        energies={"I_s": I_s, "I_1_minus_gamma": I_g},
        measured_bounds=measured,
        sobolev_bounds=sobolev,
        table_bounds=table,
        main_bound=main_lb,
        main_ok=float(S[0, 0]) >= main_lb,
        lemma_preconditions=lemma_main_preconditions(A, pat),
        regular_core_mass=core_mass,
    )


# certificate ------------------------------------------------------------------

POSITIVE = "POSITIVE"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Certificate:
    """Lower bounds on the configuration integral along a decreasing ``eps`` schedule."""

    status: str
    eps: list
    margins: list
    mains: list
    remainders: list
    errors: list
    pattern: dict
    window: tuple

    @property
    def positive(self) -> bool:
        return self.status == POSITIVE

    def to_dict(self) -> dict:
        return asdict(self)


def positivity_certificate(mu: GridMeasure, A: float, B: float, pat: QuadraticPattern,
                           s: float, gamma: float, eps=None, **kwargs):
    """Certify ``I > 0`` via ``main - sum |remainders| - quadrature error > 0``.

    The margin is a lower bound for the configuration integral.  The status
    is POSITIVE only if it is positive at every ``eps`` of the schedule
    (default ``1/(2B), 1/(4B), 1/(8B)``); otherwise INCONCLUSIVE, which is not
    a refutation.

    Returns
    -------
    (Certificate, list of DecompositionReport)
    """
    if eps is None:
        schedule = [1.0 / (2 * B), 1.0 / (4 * B), 1.0 / (8 * B)]
    else:
        schedule = [float(e) for e in np.atleast_1d(eps)]
    reports = [decompose(mu, e, A, B, pat, s, gamma, **kwargs) for e in schedule]
    margins, mains, rems, errs = [], [], [], []
    for r in reports:
        err = 0.0 if math.isnan(r.config_error) else r.config_error
        margins.append(r.main - r.remainder_abs_sum() - err)
        mains.append(r.main)
        rems.append(r.remainder_abs_sum())
        errs.append(err)
    status = POSITIVE if all(m > 0 for m in margins) else INCONCLUSIVE
    cert = Certificate(status, schedule, margins, mains, rems, errs, pat.to_dict(), pat.window)
    return cert, reports


# trilinear probe ----------------------------------------------------------------

def trilinear_value(f: SampledFunction, g: SampledFunction, h: SampledFunction,
                    pat: QuadraticPattern, t_width: float | None = None) -> float:
    """``integral integral f(x + t) g(x + P(t)) h(x) tau_l(t) dt dx``."""
    xs = (h.grid[:-1, None] + 0.5 * h.step * (_GL2_X + 1.0)).ravel()
    wx = np.tile(0.5 * h.step * _GL2_W, h.n - 1) * h(xs)
    keep = wx != 0
    xs, wx = xs[keep], wx[keep]
    if xs.size == 0:
        return 0.0
    step = min(f.step, g.step)
    if t_width is None:
        t_width = 4.0 * step / (1.0 + pat.max_slope())
    ts, wt = _t_nodes(pat, t_width)
    return float(_pair_sums([f], [g], xs, wx, ts, wt, pat)[0, 0])


def trilinear_estimate(f: SampledFunction, g: SampledFunction, h: SampledFunction,
                       pat: QuadraticPattern, gamma: float = 0.05):
    """Measured trilinear value and its ratio to the product of ``H^-gamma`` norms.

    Returns ``(value, ratio)``; the ratio is 0 when any norm vanishes.
    """
    value = trilinear_value(f, g, h, pat)
    norms = [sobolev_norm(x, -gamma) for x in (f, g, h)]
    denom = norms[0] * norms[1] * norms[2]
    ratio = abs(value) / denom if denom > 0 else 0.0
    return value, ratio


def fit_kappa(ls, ratios) -> float:
    """Slope of ``log2(ratio)`` against ``l`` (least squares): the empirical exponent."""
    ls = np.asarray(ls, dtype=float)
    r = np.asarray(ratios, dtype=float)
    ok = r > 0
    if ok.sum() < 2:
        raise ParameterError("need at least two positive ratios to fit an exponent")
    slope, _ = np.polyfit(ls[ok], np.log2(r[ok]), 1)
    return float(slope)
