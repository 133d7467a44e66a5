"""Two-stage maximum likelihood for the pole and memory parameter, with intervals and BIC."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal, special, stats

from . import constants
from .demod import _as_series, ddft, nearest_index
from .errors import EstimationError, GridError, NumericError, ParameterError
from .likelihood import (
    DELTA_BOUNDS,
    ProfileResult,
    _log_eta_delta_derivative,
    log_b_pole,
    make_objective,
)
from .spectral import GarmaParams

__all__ = [
    "SearchConfig",
    "FitResult",
    "fit",
    "fisher_dd",
    "ci_delta",
    "ci_xi_cauchy",
    "ci_xi_finite",
    "bic",
    "select_model",
    "CAUCHY_SCALE",
    "METHODS",
]

CAUCHY_SCALE = math.sqrt(5.0) / (2.0 * math.pi * math.sqrt(2.0))
METHODS = ("demodulated", "whittle")
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_DELTA_ITERS = 44
_XI_ITERS = 30
_SCREEN_KEEP = 5
_RESCANS = 3
_ROW_BLOCK = 256
_FINITE_DELTA_STEP = 0.005


def _canonical_method(method: str) -> str:
    if method in ("demod", "demodulated"):
        return "demodulated"
    if method == "whittle":
        return "whittle"
    raise ParameterError(f"method must be one of demod, demodulated, whittle; got {method!r}")


@dataclass(frozen=True)
class SearchConfig:
    """Pole search settings; ``fix_xi`` skips the search entirely."""

    xi_min: float | None = None
    xi_max: float | None = None
    fix_xi: float | None = None

    def bounds(self, n: int) -> tuple[float, float]:
        lo = 2.0 / n if self.xi_min is None else float(self.xi_min)
        hi = 0.5 - 2.0 / n if self.xi_max is None else float(self.xi_max)
        lo = max(lo, 2.0 / n)
        hi = min(hi, 0.5 - 2.0 / n)
        if not lo <= hi:
            raise ParameterError(f"empty pole search interval [{lo}, {hi}] for n={n}")
        return lo, hi


@dataclass(frozen=True)
class FitResult:
    params_hat: GarmaParams
    loglik: float
    method: str
    model_order: tuple[int, int]
    fisher_dd: float
    ci_delta: tuple[float, float]
    ci_xi_cauchy: tuple[float, float]
    ci_xi_finite: tuple[float, float]
    bic: float
    n: int
    alpha: float = 0.05
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["params_hat"] = self.params_hat.as_dict()
        out["model_order"] = list(self.model_order)
        out["ci_delta"] = list(self.ci_delta)
        out["ci_xi_cauchy"] = list(self.ci_xi_cauchy)
        out["ci_xi_finite"] = list(self.ci_xi_finite)
        return out


# ------------------------------------------------------------ stage 1 scan


def _golden_rows(objective, n_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section maximization in delta, run in lockstep for many rows."""
    a = np.full(n_rows, DELTA_BOUNDS[0])
    b = np.full(n_rows, DELTA_BOUNDS[1])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(_DELTA_ITERS):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _GOLDEN * (b - a)
        new_d = a + _GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        # exactly one new point per row
        probe = np.where(left, c_next, d_next)
        fp = objective(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_next, d_next
    x = 0.5 * (a + b)
    return x, objective(x)


def _arma_log_h2(lam: np.ndarray, arma: tuple[float, float] | None):
    if arma is None:
        return None
    phi, theta = arma
    c = np.cos(2.0 * np.pi * lam)
    return np.log((1.0 + 2.0 * theta * c + theta * theta) / (1.0 - 2.0 * phi * c + phi * phi))


def _profile_rows(logsep: np.ndarray, per: np.ndarray, mask: np.ndarray, pole_col: np.ndarray | None,
                  log_h2: np.ndarray | None = None):
    """Closure evaluating the sigma2-profiled likelihood row-wise for a delta vector.

    ``log_h2`` fixes an ARMA factor; its log weight -log|h|^2 is added to every ordinate.
    """
    k = mask.sum(axis=1)
    sep_sum = np.where(mask, logsep, 0.0).sum(axis=1)
    rows = np.arange(per.shape[0])
    if log_h2 is not None:
        per = per * np.exp(-log_h2)
        h_sum = np.where(mask, log_h2, 0.0).sum(axis=1)
    else:
        h_sum = 0.0

    def objective(delta):
        w = np.exp(2.0 * delta[:, None] * np.where(mask, logsep, 0.0)) * per
        w = np.where(mask, w, 0.0)
        val = 2.0 * delta * sep_sum - h_sum
        if pole_col is not None:
            logb = log_b_pole(delta)
            w[rows, pole_col] *= np.exp(-logb)
            val = val - logb
        s2 = w.sum(axis=1) / k
        with np.errstate(divide="ignore"):
            return val - k * np.log(s2) - k

    return objective


def _scan_demod(x: np.ndarray, m_values: np.ndarray, arma=None) -> np.ndarray:
    n = x.size
    half = n // 2
    z0 = ddft(x, 0.0)[1:half]
    z1 = ddft(x, 0.5 / n)[1:half]
    i0 = np.abs(z0) ** 2
    i1 = np.abs(z1) ** 2
    idx = np.arange(1, half)
    h0, h1 = _arma_log_h2(idx / n, arma), _arma_log_h2((idx + 0.5) / n, arma)
    out = np.empty(m_values.size)
    for s in range(0, m_values.size, _ROW_BLOCK):
        m = m_values[s : s + _ROW_BLOCK]
        j0 = m // 2  # odd m: n xi is a half-integer, rounded toward zero
        k = idx[None, :] - j0[:, None]
        per = np.where((m % 2 == 0)[:, None], i0[None, :], i1[None, :])
        left = np.abs(2.0 * np.sin(np.pi * k / n))
        right = np.abs(2.0 * np.sin(np.pi * (m[:, None] + k) / n))
        pole_col = j0 - 1
        rows = np.arange(m.size)
        with np.errstate(divide="ignore"):
            logsep = np.log(left * right)
        logsep[rows, pole_col] = np.log(2.0 * np.pi * right[rows, pole_col] / n)
        mask = np.ones_like(per, dtype=bool)
        log_h2 = None if arma is None else np.where((m % 2 == 0)[:, None], h0[None, :], h1[None, :])
        obj = _profile_rows(logsep, per, mask, pole_col, log_h2)
        _, vals = _golden_rows(obj, m.size)
        out[s : s + m.size] = vals
    return out


def _scan_whittle(x: np.ndarray, m_values: np.ndarray, arma=None) -> np.ndarray:
    n = x.size
    half = n // 2
    per_row = np.abs(np.fft.rfft(x)) ** 2 / n
    j = np.arange(half + 1)
    h_row = _arma_log_h2(j / n, arma)
    out = np.empty(m_values.size)
    for s in range(0, m_values.size, _ROW_BLOCK):
        m = m_values[s : s + _ROW_BLOCK]
        left = np.abs(2.0 * np.sin(np.pi * (2 * j[None, :] - m[:, None]) / (2 * n)))
        right = np.abs(2.0 * np.sin(np.pi * (2 * j[None, :] + m[:, None]) / (2 * n)))
        mask = (2 * j[None, :] != m[:, None]) & (left * right > 0)
        with np.errstate(divide="ignore"):
            logsep = np.log(left * right)
        per = np.broadcast_to(per_row, mask.shape)
        log_h2 = None if arma is None else np.broadcast_to(h_row, mask.shape)
        obj = _profile_rows(logsep, per, mask, None, log_h2)
        _, vals = _golden_rows(obj, m.size)
        out[s : s + m.size] = vals
    return out


def _stage1(x: np.ndarray, method: str, lo: float, hi: float, arma=None) -> tuple[np.ndarray, np.ndarray]:
    n = x.size
    m_lo = math.ceil(2 * n * lo - 1e-9)
    m_hi = math.floor(2 * n * hi + 1e-9)
    m_values = np.arange(m_lo, m_hi + 1)
    if m_values.size == 0:
        raise ParameterError("pole search interval contains no grid point")
    scan = _scan_demod if method == "demodulated" else _scan_whittle
    return m_values / (2.0 * n), scan(x, m_values, arma)


# ------------------------------------------------------------ stage 2


def _golden_xi(evaluate, lo: float, hi: float) -> tuple[float, ProfileResult]:
    cache: dict[float, ProfileResult] = {}

    def f(v):
        if v not in cache:
            try:
                cache[v] = evaluate(v)
            except GridError:
                cache[v] = None
        r = cache[v]
        return -np.inf if r is None else r.value

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_XI_ITERS):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    best = max((v for v in cache if cache[v] is not None), key=lambda v: (cache[v].value, -v))
    return best, cache[best]


# ------------------------------------------------------------ public API


def _information(x: np.ndarray, params: GarmaParams, method: str) -> float:
    n = x.size
    if method == "demodulated":
        from .demod import build_grid

        r = _log_eta_delta_derivative(params, build_grid(params.xi, n))
    else:
        lam = np.arange(n // 2 + 1) / n
        left = np.abs(2.0 * np.sin(np.pi * (lam - params.xi)))
        right = np.abs(2.0 * np.sin(np.pi * (lam + params.xi)))
        keep = (np.abs(lam - params.xi) >= 1e-12) & (left * right > 0)
        r = 2.0 * np.log(left[keep] * right[keep])
    return float(np.sum(r * r))


def fisher_dd(data, params_hat: GarmaParams, method: str = "demodulated") -> float:
    """Information in delta at ``params_hat``: sum of squared delta-derivatives of log eta."""
    x = _as_series(data)
    val = _information(x, params_hat, _canonical_method(method))
    if not val > 0.0:
        raise NumericError("non-positive delta information")
    return val


def ci_delta(fit_or_delta, alpha: float = 0.05, information: float | None = None) -> tuple[float, float]:
    """delta_hat +- z_{1-alpha/2} / sqrt(information), clipped to [0, 0.5]."""
    if isinstance(fit_or_delta, FitResult):
        delta, information = fit_or_delta.params_hat.delta, fit_or_delta.fisher_dd
    else:
        delta = float(fit_or_delta)
    _check_alpha(alpha)
    half = stats.norm.ppf(1.0 - alpha / 2.0) / math.sqrt(information)
    return max(0.0, delta - half), min(0.5, delta + half)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")


def ci_xi_cauchy(fit_or_xi, alpha: float = 0.05, n: int | None = None) -> tuple[float, float]:
    """Interval from the scaled-Cauchy limit of N (xi_hat - xi)."""
    if isinstance(fit_or_xi, FitResult):
        xi, n = fit_or_xi.params_hat.xi, fit_or_xi.n
    else:
        xi = float(fit_or_xi)
    _check_alpha(alpha)
    half = CAUCHY_SCALE * math.tan(math.pi * (1.0 - alpha / 2.0) - math.pi / 2.0) / n
    return xi - half, xi + half


@lru_cache(maxsize=2048)
def _finite_half_width_node(n: int, delta: float, j1: int, j2: int, alpha: float) -> float:
    fsc = constants._fsc(n, delta, j1, j2)
    return fsc.half_width(alpha)


def finite_half_width(n: int, delta: float, xi: float, alpha: float = 0.05) -> float:
    """Upper ratio-law quantile at ``delta`` for the grid of ``xi``.

    Quantiles are computed on a delta lattice and interpolated with a cubic
    through the four nearest nodes.
    """
    j0 = nearest_index(xi, n)
    j1, j2 = 1 - j0, n // 2 - 1 - j0
    step = _FINITE_DELTA_STEP
    lo_k, hi_k = 1, int(round(0.5 / step)) - 1
    d = min(max(delta, lo_k * step), hi_k * step)
    k0 = min(max(int(math.floor(d / step)) - 1, lo_k), hi_k - 3)
    nodes = np.arange(k0, k0 + 4) * step
    vals = np.array([_finite_half_width_node(n, round(float(v), 6), j1, j2, alpha) for v in nodes])
    weights = [np.prod([(d - nodes[m]) / (nodes[i] - nodes[m]) for m in range(4) if m != i]) for i in range(4)]
    return float(np.dot(weights, vals))


def ci_xi_finite(fit_or_xi, alpha: float = 0.05, n: int | None = None, delta: float | None = None):
    """Interval from the finite-sample ratio law, with its fallback flag.

    Returns ``((lo, hi), fell_back)``; on a failed quantile inversion the
    Cauchy interval is returned and the flag is set.
    """
    if isinstance(fit_or_xi, FitResult):
        xi, n, delta = fit_or_xi.params_hat.xi, fit_or_xi.n, fit_or_xi.params_hat.delta
    else:
        xi = float(fit_or_xi)
    _check_alpha(alpha)
    try:
        c12 = finite_half_width(n, delta, xi, alpha)
        if not (math.isfinite(c12) and c12 > 0):
            raise NumericError("invalid ratio-law quantile")
    except (NumericError, ParameterError):
        return ci_xi_cauchy(xi, alpha, n), True
    c11 = -c12  # the ratio law is symmetric
    return (xi - c12 / n, xi - c11 / n), False


def bic(fit_or_loglik, n: int | None = None, order: tuple[int, int] | None = None) -> float:
    """k log N - 2 loglik with k = 3 + p + q; lower is better."""
    if isinstance(fit_or_loglik, FitResult):
        loglik, n, order = fit_or_loglik.loglik, fit_or_loglik.n, fit_or_loglik.model_order
    else:
        loglik = float(fit_or_loglik)
    k = 3 + order[0] + order[1]
    return k * math.log(n) - 2.0 * loglik


def _check_order(order) -> tuple[int, int]:
    p, q = (int(v) for v in order)
    if p not in (0, 1) or q not in (0, 1):
        raise ParameterError(f"model order entries must be 0 or 1, got {order}")
    return p, q


def fit(
    data,
    method: str = "demodulated",
    model_order: tuple[int, int] = (0, 0),
    search: SearchConfig | None = None,
    alpha: float = 0.05,
    detrend: bool = False,
) -> FitResult:
    """Maximize the (demodulated or Whittle) likelihood over (xi, delta, phi, theta).

    Stage 1 scans xi on a 1/(2N) lattice with the pure-Gegenbauer profile
    (for ARMA orders, rescanned with the fitted ARMA factor held fixed);
    Stage 2 refines by golden section within +-1/N using the full profile for
    the requested order. sigma2 is profiled throughout.
    """
    method = _canonical_method(method)
    order = _check_order(model_order)
    _check_alpha(alpha)
    search = search or SearchConfig()
    x = _as_series(data)
    n = x.size
    if n < 128:
        raise ParameterError(f"fitting requires n >= 128, got {n}")
    x = signal.detrend(x, type="linear") if detrend else x - x.mean()

    diagnostics: dict = {}

    def profile(xi: float) -> ProfileResult:
        return make_objective(x, xi, method).maximize(order)

    if search.fix_xi is not None:
        xi_hat = float(search.fix_xi)
        if not 0.0 < xi_hat < 0.5:
            raise ParameterError(f"fix_xi must lie in (0, 0.5), got {xi_hat}")
        best = profile(xi_hat)
        diagnostics.update(stage="fixed_xi", n_evals=best.n_evals)
    else:
        lo, hi = search.bounds(n)
        grid, vals = _stage1(x, method, lo, hi)
        if not np.any(np.isfinite(vals)):
            raise EstimationError("pole scan produced no finite likelihood value")
        scored: dict[int, ProfileResult | None] = {}

        def score(cand):
            for i in cand:
                if i not in scored:
                    try:
                        scored[i] = profile(float(grid[i]))
                    except GridError:
                        scored[i] = None
            ok = [(r, float(grid[i])) for i, r in scored.items() if r is not None]
            if not ok:
                raise EstimationError("all stage-1 profiles failed")
            return max(ok, key=lambda t: (t[0].value, -t[1]))

        if order == (0, 0):
            stage1, xi1 = score([int(np.argmax(vals))])
        else:
            # an ARMA factor can mask the pole in the pure-memory scan; rescan
            # with the ARMA part fixed at the current best until it settles
            stage1, xi1 = score(np.argsort(-vals, kind="stable")[:_SCREEN_KEEP])
            for _ in range(_RESCANS):
                _, vals = _stage1(x, method, lo, hi, (stage1.phi, stage1.theta))
                before = xi1
                stage1, xi1 = score(np.argsort(-vals, kind="stable")[:_SCREEN_KEEP])
                if xi1 == before:
                    break
            diagnostics["candidates"] = len(scored)
        a = max(lo, xi1 - 1.0 / n)
        b = min(hi, xi1 + 1.0 / n)
        xi2, stage2 = _golden_xi(profile, a, b)
        if stage2.value >= stage1.value:
            xi_hat, best = xi2, stage2
        else:
            xi_hat, best = xi1, stage1
        diagnostics.update(
            stage="two_stage",
            stage1_xi=xi1,
            stage1_value=stage1.value,
            stage2_value=best.value,
            grid_points=int(grid.size),
        )
    diagnostics["converged"] = bool(best.converged)
    params = GarmaParams(xi_hat, best.delta, best.phi, best.theta, best.sigma2)
    info = _information(x, params, method)
    if not info > 0.0:
        raise NumericError("non-positive delta information at the optimum")
    cd = ci_delta(params.delta, alpha, info)
    cx = ci_xi_cauchy(params.xi, alpha, n)
    cf, fell_back = ci_xi_finite(params.xi, alpha, n, params.delta)
    diagnostics["ci_xi_finite_fallback"] = fell_back
    return FitResult(
        params_hat=params,
        loglik=float(best.value),
        method=method,
        model_order=order,
        fisher_dd=info,
        ci_delta=cd,
        ci_xi_cauchy=cx,
        ci_xi_finite=cf,
        bic=bic(best.value, n, order),
        n=n,
        alpha=alpha,
        diagnostics=diagnostics,
    )


def select_model(
    data,
    method: str = "demodulated",
    orders=((0, 0), (1, 0), (0, 1), (1, 1)),
    alpha: float = 0.05,
    search: SearchConfig | None = None,
    detrend: bool = False,
) -> tuple[FitResult, list[dict]]:
    """Fit each order and return the lowest-BIC fit with a comparison table."""
    orders = [_check_order(o) for o in orders]
    if not orders:
        raise ParameterError("at least one model order is required")
    table = []
    fits = []
    for order in orders:
        try:
            f = fit(data, method, order, search, alpha, detrend)
        except (EstimationError, NumericError) as exc:
            table.append({"order": list(order), "error": str(exc)})
            continue
        fits.append(f)
        table.append({
            "order": list(order),
            "loglik": f.loglik,
            "bic": f.bic,
            **{k: v for k, v in f.params_hat.as_dict().items()},
        })
    if not fits:
        raise EstimationError("every model order failed to fit")
    best = min(fits, key=lambda f: f.bic)
    return best, table
