"""End-to-end runs: set -> dense cube -> measure -> decomposition -> certificate -> witness.

A :class:`RunConfig` fully determines a run.  :func:`run_pipeline` returns a
plain-JSON bundle (no timings, no absolute paths) whose SHA-256 is stable
across runs.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .dyadic import DyadicSet, content_upper, find_dense_cube, rescale
from .errors import ParameterError, StageError
from .fourier import spectrum
from .integral import QuadraticPattern, positivity_certificate
from .measure import GridMeasure, frostman, required_T, spectral_gap_measure
from .patterns import search_pattern
from .setgen import CantorSpec, cantor, percolation

MEASURES = ("spectral_gap", "frostman", "uniform")


@dataclass
class RunConfig:
    """All inputs of a run.

    ``set`` is a dict with ``kind`` one of ``full``, ``cantor``,
    ``percolation``, ``dyadic`` plus its parameters (``resolution``;
    ``pattern``/``branching``/``depth``; ``p``/``depth``/``seed``; or the
    serialized set).  ``l`` defaults to ``log2(A) + 3``.  ``T`` defaults to
    the smaller of the required level and ``resolution - 6``.
    """

    set: dict = field(default_factory=lambda: {"kind": "full", "resolution": 10})
    A: float = 4.0
    B: float = 16.0
    T: int | None = None
    beta: float = 0.99
    s: float | None = None
    gamma: float = 0.05
    p: float = 1.0
    q: float = 0.0
    l: int | None = None
    eps: list | None = None
    measure: str = "spectral_gap"
    dense_delta: float = 0.1
    kappa: float = 1.0
    c_sie: float = 1.0
    c: float = 0.05
    require_distinct: bool = False
    spectrum_max_freq: float = 64.0
    spectrum_step: float = 0.25

    def resolved(self) -> RunConfig:
        """Copy with every default made explicit."""
        cfg = replace(self, set=dict(self.set))
        if cfg.s is None:
            cfg.s = 1.0 - cfg.gamma / 2.0
        if cfg.l is None:
            cfg.l = int(round(math.log2(cfg.A))) + 3
        if cfg.eps is None:
            cfg.eps = [1.0 / (2 * cfg.B), 1.0 / (4 * cfg.B), 1.0 / (8 * cfg.B)]
        else:
            cfg.eps = [float(e) for e in cfg.eps]
        return cfg

    def validate(self) -> RunConfig:
        cfg = self.resolved()
        if not 1.0 < cfg.A < cfg.B:
            raise ParameterError(f"need 1 < A < B, got A={cfg.A}, B={cfg.B}")
        for e in cfg.eps:
            if not 0 < e < 1.0 / cfg.B:
                raise ParameterError(f"need 0 < eps < 1/B, got eps={e}, B={cfg.B}")
        if not 0 < cfg.beta <= 1:
            raise ParameterError("beta must lie in (0, 1]")
        if not 0 < cfg.gamma < 1:
            raise ParameterError("gamma must lie in (0, 1)")
        if not cfg.s > 1.0 - cfg.gamma:
            raise ParameterError(f"need s > 1 - gamma, got s={cfg.s}, gamma={cfg.gamma}")
        if not 0 < cfg.s < 1:
            raise ParameterError("s must lie in (0, 1)")
        if cfg.measure not in MEASURES:
            raise ParameterError(f"measure must be one of {MEASURES}")
        if cfg.p == 0:
            raise ParameterError("p must be nonzero")
        if cfg.l < 0:
            raise ParameterError("l must be nonnegative")
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        return cls.from_dict(json.loads(text))


def build_set(spec: dict) -> DyadicSet:
    kind = spec.get("kind", "full")
    if kind == "full":
        return DyadicSet.full(int(spec.get("resolution", 10)))
    if kind == "cantor":
        cs = CantorSpec(tuple(spec.get("pattern", (0, 3))), int(spec.get("branching", 2)),
                        int(spec.get("depth", 5)))
        return cantor(cs)
    if kind == "percolation":
        return percolation(float(spec["p"]), int(spec["depth"]), int(spec.get("seed", 0)))
    if kind == "dyadic":
        return DyadicSet.from_dict(spec)
    raise ParameterError(f"unknown set kind {kind!r}")


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
                raise StageError(name, exc) from exc
        return run
    return wrap


def _build_measure(cfg: RunConfig, dset: DyadicSet):
    if cfg.measure == "uniform":
        return GridMeasure.uniform_on(dset), None
    if cfg.measure == "frostman":
        return frostman(dset, cfg.beta).normalized(), None
    T = cfg.T
    if T is None:
        T = max(1, min(required_T(cfg.A, cfg.B), dset.resolution - 6))
    mu, rep = spectral_gap_measure(dset, cfg.A, cfg.B, cfg.beta, T)
    return mu, rep


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def bundle_hash(bundle: dict) -> str:
    body = {k: v for k, v in bundle.items() if k != "sha256"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage and return the report bundle.

    Stage failures raise :class:`~fracpat.errors.StageError` naming the stage.
    """
    try:
        cfg = config.validate()
    except ParameterError as exc:
        raise StageError("validate", exc) from exc

    dset = _stage("generate")(build_set)(cfg.set)
    cube = _stage("dense_cube")(find_dense_cube)(dset, cfg.beta, cfg.dense_delta)
    local = _stage("rescale")(rescale)(dset, cube)
    mu, construction = _stage("measure")(_build_measure)(cfg, local)

    prof = _stage("spectrum")(spectrum)(mu, cfg.spectrum_max_freq, cfg.spectrum_step)
    pat = QuadraticPattern(cfg.p, cfg.q, cfg.l)
    cert, reports = _stage("certify")(positivity_certificate)(
        mu, cfg.A, cfg.B, pat, cfg.s, cfg.gamma, eps=cfg.eps,
        kappa=cfg.kappa, c_sie=cfg.c_sie, c=cfg.c)
    witness = _stage("search")(search_pattern)(local, pat, cfg.require_distinct)

    corollary = None
    if witness is not None:
        a = witness.coefficient(cfg.q)
        corollary = {"coefficient": a, "matches_p": abs(a - cfg.p) <= 1e-9 * max(1.0, abs(cfg.p))}

    ledger_rows = []
    for e, rep in zip(cfg.eps, reports):
        for row in rep.ledger():
            ledger_rows.append([repr(e), row["row"], row["col"], row["kind"], repr(row["value"]),
                                repr(row["measured_bound"]), repr(row["table_bound"])])
    bundle = {
        "config": cfg.to_dict(),
        "set": {"resolution": dset.resolution, "count": dset.count,
                "content": content_upper(dset, cfg.beta), "hex": dset.to_hex()},
        "dense_cube": {"level": cube.level, "index": cube.index,
                       "local_content": content_upper(local, cfg.beta)},
        "measure": {"kind": cfg.measure, "resolution": mu.resolution,
                    "total_mass": mu.total_mass,
                    "construction": None if construction is None else construction.to_dict()},
        "spectrum_csv": prof.to_csv(),
        "decomposition": [r.to_dict() for r in reports],
        "ledger_csv": _csv(ledger_rows, ["eps", "row", "col", "kind", "value",
                                         "measured_bound", "table_bound"]),
        "certificate": cert.to_dict(),
        "witness": None if witness is None else witness.to_dict(),
        "corollary": corollary,
        "consistent": (not cert.positive) or witness is not None,
    }
    bundle["sha256"] = bundle_hash(bundle)
    return bundle


def write_bundle(bundle: dict, out_dir) -> list[Path]:
    """Write ``bundle.json`` plus the CSV tables into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, key in (("spectrum.csv", "spectrum_csv"), ("ledger.csv", "ledger_csv")):
        path = out / name
        path.write_text(bundle[key])
        paths.append(path)
    path = out / "bundle.json"
    path.write_text(json.dumps(bundle, indent=2, sort_keys=True))
    paths.append(path)
    return paths


SWEEP_AXES = ("A", "B", "beta", "s", "gamma", "p", "q", "l", "eps", "seed", "trilinear_l")


def sweep(config: RunConfig, axis: str, values) -> str:
    """CSV of certificate margins and term magnitudes against one swept parameter.

    ``eps`` sweeps a single-scale schedule; ``seed`` rewrites the set seed;
    ``trilinear_l`` evaluates the trilinear ratio on fixed bumps instead of
    running the pipeline.
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    values = list(values)
    if axis == "trilinear_l":
        return _trilinear_sweep(config, values)
    header = [axis, "status", "min_margin", "main", "remainder_abs_sum", "config_value",
              "witness", "content"]
    rows = []
    for v in values:
        if axis == "eps":
            cfg = replace(config, eps=[float(v)])
        elif axis == "seed":
            cfg = replace(config, set={**config.set, "seed": int(v)})
        elif axis == "l":
            cfg = replace(config, l=int(v))
        else:
            cfg = replace(config, **{axis: float(v)})
        b = run_pipeline(cfg)
        cert = b["certificate"]
        d0 = b["decomposition"][-1]
        rows.append([v, cert["status"], repr(min(cert["margins"])), repr(d0["main"]),
                     repr(d0["remainder_abs_sum"]), repr(d0["config_value"]),
                     b["witness"] is not None, repr(b["set"]["content"])])
    return _csv(rows, header)


def bumps(step: float = 1.0 / 64.0, half_width: float = 6.0):
    """Three fixed smooth bumps near the origin, sampled on ``[-half_width, half_width]``.

    The supports are wide enough that ``x + t`` and ``x + P(t)`` stay on the
    supports for every window with ``l >= 0``.
    """
    from .profiles import mollifier
    from .sampled import SampledFunction

    phi = mollifier()
    n = int(round(2 * half_width / step)) + 1
    f = SampledFunction.from_callable(lambda x: phi(x / 1.5), -half_width, half_width, n)
    g = SampledFunction.from_callable(lambda x: phi((x - 0.25) / 2.0), -half_width, half_width, n)
    h = SampledFunction.from_callable(lambda x: phi((x + 0.5) / 1.0), -half_width, half_width, n)
    return f, g, h


def _trilinear_sweep(config: RunConfig, values) -> str:
    from .integral import fit_kappa, trilinear_estimate

    f, g, h = bumps()
    rows, ls, ratios = [], [], []
    for v in values:
        pat = QuadraticPattern(config.p, config.q, int(v))
        val, ratio = trilinear_estimate(f, g, h, pat, config.gamma)
        rows.append([int(v), repr(val), repr(ratio), repr(math.log2(ratio) if ratio > 0 else float("nan"))])
        ls.append(int(v))
        ratios.append(ratio)
    text = _csv(rows, ["l", "value", "ratio", "log2_ratio"])
    if len(ls) >= 2:
        text += f"# kappa_hat,{fit_kappa(ls, ratios)!r}\n"
    return text
