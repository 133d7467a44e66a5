"""Exact Gaussian simulation of GARMA series and a Monte Carlo harness."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, EstimationError, NumericError, ParameterError, SeaperError
from .estimation import SearchConfig, _canonical_method, fit
from .gph import gph_pole_search
from .likelihood import make_objective
from .spectral import GarmaParams, acv

__all__ = [
    "simulate",
    "McConfig",
    "McResult",
    "run_mc",
    "summarize",
    "mean_likelihood_surface",
    "resolve_threads",
    "RECORD_COLUMNS",
    "ESTIMATORS",
    "MAX_FAILURE_RATE",
]

ESTIMATORS = ("demodulated", "whittle", "gph")
SIM_METHODS = ("levinson", "circulant")
MAX_FAILURE_RATE = 0.05
RECORD_COLUMNS = (
    "rep",
    "estimator",
    "xi_hat",
    "delta_hat",
    "phi_hat",
    "theta_hat",
    "sigma2_hat",
    "loglik",
    "ci_delta_lo",
    "ci_delta_hi",
    "ci_xi_lo",
    "ci_xi_hi",
    "ci_xi_cauchy_lo",
    "ci_xi_cauchy_hi",
)
_U64 = (1 << 64) - 1


def _generator(seed: int, rep: int) -> np.random.Generator:
    seed, rep = int(seed), int(rep)
    if not 0 <= seed <= _U64:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= rep <= _U64:
        raise ParameterError(f"replication index must be non-negative, got {rep}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, rep], dtype=np.uint64)))


def _circulant(gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    n = gamma.size
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        return None
    lam = np.clip(lam, 0.0, None)
    size = row.size
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    w = np.fft.fft(np.sqrt(lam / size) * z)
    return w.real[:n].copy()


def simulate(params: GarmaParams, n: int, seed: int = 0, rep: int = 0, method: str = "levinson") -> np.ndarray:
    """Exact zero-mean Gaussian draw with the GARMA autocovariances.

    Innovations come from a Philox stream keyed by ``(seed, rep)``, so each
    replication is reproducible on its own. ``method="circulant"`` uses
    circulant embedding when the embedding is non-negative and otherwise
    falls back to the Durbin-Levinson filter with a warning.
    """
    n = int(n)
    if n < 2:
        raise ParameterError(f"series length must be >= 2, got {n}")
    if method not in SIM_METHODS:
        raise ParameterError(f"simulation method must be one of {SIM_METHODS}, got {method!r}")
    rng = _generator(seed, rep)
    gamma = np.asarray(acv(params, n).gamma, dtype=float)
    if method == "circulant":
        x = _circulant(gamma, rng)
        if x is not None:
            return x
        warnings.warn("circulant embedding is not non-negative; using Durbin-Levinson", RuntimeWarning, stacklevel=2)
        rng = _generator(seed, rep)
    z = rng.standard_normal(n)
    x, bad = kernels.levinson_simulate(gamma, z)
    if bad >= 0:
        raise NumericError(f"autocovariance matrix is not positive definite at lag {bad}")
    return np.asarray(x)


# ------------------------------------------------------------------ harness


@dataclass(frozen=True)
class McConfig:
    params_true: GarmaParams
    n: int
    replications: int
    seed: int = 0
    estimators: tuple[str, ...] = ("demodulated", "whittle")
    alpha: float = 0.05
    model_order: tuple[int, int] = (0, 0)
    gph_m: int | None = None
    sim_method: str = "levinson"
    xi_min: float | None = None
    xi_max: float | None = None

    def __post_init__(self):
        if int(self.replications) < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if int(self.n) < 128 or int(self.n) % 2:
            raise ConfigError(f"n must be even and >= 128, got {self.n}")
        if not 0 <= int(self.seed) <= _U64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        ests = tuple("demodulated" if e == "demod" else e for e in self.estimators)
        if not ests or any(e not in ESTIMATORS for e in ests) or len(set(ests)) != len(ests):
            raise ConfigError(f"estimators must be distinct members of {ESTIMATORS}, got {self.estimators}")
        object.__setattr__(self, "estimators", ests)
        object.__setattr__(self, "model_order", tuple(int(v) for v in self.model_order))
        if not 0.0 < float(self.alpha) < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.sim_method not in SIM_METHODS:
            raise ConfigError(f"sim_method must be one of {SIM_METHODS}, got {self.sim_method!r}")

    def as_dict(self) -> dict:
        return {
            "params_true": self.params_true.as_dict(),
            "n": int(self.n),
            "replications": int(self.replications),
            "seed": int(self.seed),
            "estimators": list(self.estimators),
            "alpha": float(self.alpha),
            "model_order": list(self.model_order),
            "gph_m": self.gph_m,
            "sim_method": self.sim_method,
            "xi_min": self.xi_min,
            "xi_max": self.xi_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown McConfig fields: {sorted(unknown)}")
        try:
            d["params_true"] = GarmaParams(**d["params_true"])
            d["estimators"] = tuple(d.get("estimators", ("demodulated", "whittle")))
            d["model_order"] = tuple(d.get("model_order", (0, 0)))
            return cls(**d)
        except (TypeError, KeyError) as exc:
            raise ConfigError(f"malformed McConfig: {exc}") from exc


def _nan_record(rep: int, est: str) -> dict:
    rec = {c: math.nan for c in RECORD_COLUMNS}
    rec.update(rep=rep, estimator=est)
    return rec


def _one_replication(config: McConfig, rep: int) -> list[dict]:
    """Simulate one series and fit it with every requested estimator."""
    out = []
    try:
        x = simulate(config.params_true, config.n, config.seed, rep, config.sim_method)
    except SeaperError as exc:
        for est in config.estimators:
            rec = _nan_record(rep, est)
            rec["error"] = f"simulation: {exc}"
            out.append(rec)
        return out
    search = SearchConfig(config.xi_min, config.xi_max)
    for est in config.estimators:
        rec = _nan_record(rep, est)
        try:
            if est == "gph":
                g = gph_pole_search(x, m=config.gph_m, xi_min=config.xi_min, xi_max=config.xi_max)
                rec.update(xi_hat=g.xi_hat, delta_hat=g.delta_hat)
            else:
                f = fit(x, est, config.model_order, search, config.alpha)
                p = f.params_hat
                rec.update(
                    xi_hat=p.xi,
                    delta_hat=p.delta,
                    phi_hat=p.phi,
                    theta_hat=p.theta,
                    sigma2_hat=p.sigma2,
                    loglik=f.loglik,
                    ci_delta_lo=f.ci_delta[0],
                    ci_delta_hi=f.ci_delta[1],
                    ci_xi_lo=f.ci_xi_finite[0],
                    ci_xi_hi=f.ci_xi_finite[1],
                    ci_xi_cauchy_lo=f.ci_xi_cauchy[0],
                    ci_xi_cauchy_hi=f.ci_xi_cauchy[1],
                )
            rec["error"] = ""
        except (SeaperError, ArithmeticError, ValueError) as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
        out.append(rec)
    return out


def _chunk(args) -> list[list[dict]]:
    config, reps = args
    return [_one_replication(config, r) for r in reps]


def resolve_threads(threads=None) -> int:
    """``None`` reads SEAPER_THREADS; ``"auto"`` or 0 means the CPU count."""
    if threads is None:
        threads = os.environ.get("SEAPER_THREADS", "1")
    if isinstance(threads, str):
        threads = 0 if threads.strip().lower() == "auto" else threads
        try:
            threads = int(threads)
        except ValueError as exc:
            raise ConfigError(f"threads must be a positive integer or 'auto', got {threads!r}") from exc
    threads = int(threads)
    if threads < 0:
        raise ConfigError(f"threads must be non-negative, got {threads}")
    return threads or (os.cpu_count() or 1)


def _run_replications(config: McConfig, threads: int) -> list[dict]:
    reps = list(range(int(config.replications)))
    if threads <= 1 or len(reps) == 1:
        per_rep = [_one_replication(config, r) for r in reps]
    else:
        n_chunks = min(len(reps), 4 * threads)
        chunks = [reps[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_chunk, [(config, c) for c in chunks]))
        per_rep = [None] * len(reps)
        for c, res in zip(chunks, results):
            for r, recs in zip(c, res):
                per_rep[r] = recs
    return [rec for recs in per_rep for rec in recs]


def _stats(values: np.ndarray, truth: float) -> dict:
    if values.size == 0:
        return {k: math.nan for k in ("mean", "bias", "sd", "se", "q025", "q975", "mae")}
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    q = np.quantile(values, [0.025, 0.975])
    return {
        "mean": mean,
        "bias": mean - truth,
        "sd": sd,
        "se": sd / math.sqrt(values.size),
        "q025": float(q[0]),
        "q975": float(q[1]),
        "mae": float(np.mean(np.abs(values - truth))),
    }


def _coverage(lo: np.ndarray, hi: np.ndarray, truth: float) -> float:
    ok = np.isfinite(lo) & np.isfinite(hi)
    if not np.any(ok):
        return math.nan
    return float(np.mean((lo[ok] <= truth) & (truth <= hi[ok])))


def summarize(config: McConfig, records: list[dict]) -> dict:
    """Per-estimator location, spread, quantiles, coverage and failure rate."""
    truth = config.params_true
    blocks = {}
    for est in config.estimators:
        recs = [r for r in records if r["estimator"] == est]
        ok = [r for r in recs if not r.get("error")]
        col = lambda k: np.array([r[k] for r in ok], dtype=float)  # noqa: E731
        block = {
            "n_reps": len(recs),
            "n_ok": len(ok),
            "failure_rate": 1.0 - len(ok) / len(recs) if recs else math.nan,
            "xi": _stats(col("xi_hat"), truth.xi),
            "delta": _stats(col("delta_hat"), truth.delta),
        }
        if est != "gph":
            block["coverage"] = {
                "delta": _coverage(col("ci_delta_lo"), col("ci_delta_hi"), truth.delta),
                "xi_finite": _coverage(col("ci_xi_lo"), col("ci_xi_hi"), truth.xi),
                "xi_cauchy": _coverage(col("ci_xi_cauchy_lo"), col("ci_xi_cauchy_hi"), truth.xi),
            }
        blocks[est] = block
    summary = {"estimators": blocks}
    if "demodulated" in blocks and "whittle" in blocks:
        d, w = blocks["demodulated"], blocks["whittle"]
        summary["relative_efficiency"] = {
            k: (d[k]["sd"] ** 2 / w[k]["sd"] ** 2) if w[k]["sd"] > 0 else math.nan for k in ("xi", "delta")
        }
    return summary


@dataclass
class McResult:
    config: McConfig
    summary: dict
    records: list[dict] = field(default_factory=list)


def run_mc(config: McConfig, threads=1) -> McResult:
    """Simulate and fit ``config.replications`` series.

    Replication r always uses the innovation stream keyed by (seed, r), and
    records are reduced in replication order, so the result does not depend
    on ``threads``. Failed fits are excluded; a failure rate above 5% for any
    estimator raises :class:`EstimationError`.
    """
    records = _run_replications(config, resolve_threads(threads))
    summary = summarize(config, records)
    for est, block in summary["estimators"].items():
        if block["failure_rate"] > MAX_FAILURE_RATE:
            first = next(r["error"] for r in records if r["estimator"] == est and r.get("error"))
            raise EstimationError(
                f"{est}: {block['failure_rate']:.1%} of replications failed (limit 5%); first error: {first}"
            )
    return McResult(config=config, summary=summary, records=records)


# ------------------------------------------------------- likelihood curves


def _surface_one(config: McConfig, rep: int, method: str, xi_grid: np.ndarray, delta_grid: np.ndarray):
    x = simulate(config.params_true, config.n, config.seed, rep, config.sim_method)
    x = x - x.mean()
    f = fit(x, method, config.model_order, SearchConfig(config.xi_min, config.xi_max), config.alpha)
    p = f.params_hat
    xi_curve = np.array([make_objective(x, v, method).profiled(p.delta, p.phi, p.theta)[0] for v in xi_grid])
    obj = make_objective(x, p.xi, method)
    d_curve = np.array([obj.profiled(v, p.phi, p.theta)[0] for v in delta_grid])
    return np.exp(xi_curve - np.max(xi_curve)), np.exp(d_curve - np.max(d_curve))


def mean_likelihood_surface(config: McConfig, xi_grid, delta_grid, method: str = "demodulated") -> dict:
    """Conditional likelihood slices through each replication's MLE, max-standardized and averaged.

    The xi slice holds delta, phi and theta at their estimates; the delta
    slice holds xi, phi and theta there. sigma2 is profiled in both.
    """
    method = _canonical_method(method)
    xi_grid = np.asarray(xi_grid, dtype=float)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if xi_grid.ndim != 1 or delta_grid.ndim != 1 or xi_grid.size == 0 or delta_grid.size == 0:
        raise ParameterError("xi_grid and delta_grid must be non-empty 1-D arrays")
    xi_sum = np.zeros(xi_grid.size)
    d_sum = np.zeros(delta_grid.size)
    used = 0
    for rep in range(int(config.replications)):
        try:
            a, b = _surface_one(config, rep, method, xi_grid, delta_grid)
        except SeaperError:
            continue
        xi_sum += a
        d_sum += b
        used += 1
    if used == 0:
        raise EstimationError("no replication produced a likelihood curve")
    return {
        "method": method,
        "xi_grid": xi_grid,
        "xi_curve": xi_sum / used,
        "delta_grid": delta_grid,
        "delta_curve": d_sum / used,
        "replications_used": used,
    }

