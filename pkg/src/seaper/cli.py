"""Command-line front end: ``seaper {simulate,fit,gph,mc,constants,select}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields

import numpy as np

from . import constants as const
from .errors import ConfigError, DataError, IOFailure, SeaperError
from .estimation import SearchConfig, fit, select_model
from .gph import gph_estimate, gph_pole_search, gph_rss
from .simulation import RECORD_COLUMNS, McConfig, resolve_threads, run_mc, simulate
from .spectral import GarmaParams

SCHEMA_VERSION = "1"
COMMANDS = ("simulate", "fit", "gph", "mc", "constants", "select")
# execution details that never change results; kept out of recorded provenance
_EXECUTION_FIELDS = ("input_path", "output_path", "records_path", "threads")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    records_path: str | None = None
    format: str = "json"
    seed: int = 0
    threads: str = "1"
    method: str = "demodulated"
    order: tuple[int, int] = (0, 0)
    orders: tuple[tuple[int, int], ...] = ((0, 0), (1, 0), (0, 1), (1, 1))
    fix_xi: float | None = None
    detrend: bool = False
    alpha: float = 0.05
    m: int | None = None
    xi_min: float | None = None
    xi_max: float | None = None
    n: int | None = None
    xi: float | None = None
    delta: float | None = None
    phi: float = 0.0
    theta: float = 0.0
    sigma2: float = 1.0
    replications: int = 10
    estimators: tuple[str, ...] = ("demodulated", "whittle")
    sim_method: str = "levinson"
    asymptotic: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.method not in ("demod", "demodulated", "whittle"):
            raise ConfigError(f"method must be demod or whittle, got {self.method!r}")
        if self.method == "demod":
            object.__setattr__(self, "method", "demodulated")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["order"] = list(self.order)
        d["orders"] = [list(o) for o in self.orders]
        d["estimators"] = list(self.estimators)
        return d

    def provenance(self) -> dict:
        return {k: v for k, v in self.as_dict().items() if k not in _EXECUTION_FIELDS}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        types = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(d) - set(types))
        if unknown:
            raise ConfigError(f"unknown configuration fields: {unknown}")
        if "command" not in d:
            raise ConfigError("configuration is missing the 'command' field")
        kw = {}
        for k, v in d.items():
            kw[k] = _coerce(k, types[k], v)
        return cls(**kw)


def _coerce(name: str, typ: str, v):
    if v is None:
        if "None" in typ:
            return None
        raise ConfigError(f"field {name!r} may not be null")
    try:
        if name == "order":
            return _order(v)
        if name == "orders":
            return tuple(_order(o) for o in v)
        if name == "threads":
            if isinstance(v, bool) or not isinstance(v, int | str):
                raise TypeError
            return str(v)
        if name == "estimators":
            if not isinstance(v, list | tuple):
                raise TypeError
            return tuple(str(e) for e in v)
        if typ.startswith("bool"):
            if not isinstance(v, bool):
                raise TypeError
            return v
        if typ.startswith("int"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError
            return v
        if typ.startswith("float"):
            if isinstance(v, bool) or not isinstance(v, int | float):
                raise TypeError
            return float(v)
        if typ.startswith("str"):
            if not isinstance(v, str):
                raise TypeError
            return v
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field {name!r} has invalid value {v!r}") from exc
    return v


def _order(v) -> tuple[int, int]:
    if isinstance(v, str):
        v = v.split(",")
    p, q = (int(s) for s in v)
    return p, q


# ---------------------------------------------------------------- file I/O


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise IOFailure(f"output directory does not exist: {directory}")
    fd, tmp = tempfile.mkstemp(prefix=".seaper-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _emit(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def read_series(path: str) -> tuple[np.ndarray, dict]:
    """One numeric column; ``#`` comment lines carry ``key=value`` metadata."""
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    meta, values = {}, []
    header_seen = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        first = row[0].strip()
        if first.startswith("#"):
            body = ",".join(row)[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                meta[k.strip()] = v.strip()
            continue
        if len(row) != 1:
            raise DataError(f"{path}: line {lineno}: expected one column, found {len(row)}")
        try:
            v = float(first)
        except ValueError:
            if not values and not header_seen:
                header_seen = True
                continue
            raise DataError(f"{path}: line {lineno}: not a number: {first!r}") from None
        if not math.isfinite(v):
            raise DataError(f"{path}: line {lineno}: non-finite value {first!r}")
        values.append(v)
    if not values:
        raise DataError(f"{path}: no numeric values")
    return np.asarray(values), meta


def format_series(x: np.ndarray, meta: dict) -> str:
    out = io.StringIO()
    for k, v in meta.items():
        out.write(f"# {k}={v}\n")
    out.write("x\n")
    for v in x:
        out.write(f"{float(v):.17g}\n")
    return out.getvalue()


def _clean(obj):
    """JSON-safe copy: NaN and inf become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _json_doc(cfg: RunConfig, payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "config": cfg.provenance()}
    doc.update(payload)
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def _flat_csv(payload: dict) -> str:
    rows = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else str(k), v[k])
        elif isinstance(v, list | tuple):
            for i, e in enumerate(v):
                walk(f"{prefix}[{i}]", e)
        else:
            rows.append((prefix, "" if v is None else v))

    walk("", _clean(payload))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        w.writerow([k, repr(v) if isinstance(v, float) else v])
    return out.getvalue()


def _write_result(cfg: RunConfig, payload: dict) -> None:
    if cfg.format == "json":
        _emit(cfg.output_path, _json_doc(cfg, payload))
    else:
        meta = f"# schema_version={SCHEMA_VERSION}\n# command={cfg.command}\n"
        _emit(cfg.output_path, meta + _flat_csv(payload))


# ---------------------------------------------------------------- commands


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{cfg.command}: missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _params(cfg: RunConfig) -> GarmaParams:
    _require(cfg, "xi", "delta")
    return GarmaParams(cfg.xi, cfg.delta, cfg.phi, cfg.theta, cfg.sigma2)


def _search(cfg: RunConfig) -> SearchConfig:
    return SearchConfig(cfg.xi_min, cfg.xi_max, cfg.fix_xi)


def cmd_simulate(cfg: RunConfig) -> None:
    _require(cfg, "n")
    p = _params(cfg)
    x = simulate(p, cfg.n, cfg.seed, 0, cfg.sim_method)
    meta = {**{k: repr(v) for k, v in p.as_dict().items()}, "n": cfg.n, "seed": cfg.seed, "sim_method": cfg.sim_method}
    meta["schema_version"] = SCHEMA_VERSION
    _emit(cfg.output_path, format_series(x, meta))


def _load(cfg: RunConfig) -> np.ndarray:
    _require(cfg, "input_path")
    return read_series(cfg.input_path)[0]


def cmd_fit(cfg: RunConfig) -> None:
    x = _load(cfg)
    res = fit(x, cfg.method, cfg.order, _search(cfg), cfg.alpha, cfg.detrend)
    _write_result(cfg, {"fit": res.as_dict()})


def cmd_select(cfg: RunConfig) -> None:
    x = _load(cfg)
    best, table = select_model(x, cfg.method, cfg.orders, cfg.alpha, _search(cfg), cfg.detrend)
    _write_result(cfg, {"best": best.as_dict(), "table": table})


def cmd_gph(cfg: RunConfig) -> None:
    from scipy import signal

    x = _load(cfg)
    x = signal.detrend(x, type="linear") if cfg.detrend else x - x.mean()
    m = x.size // 8 if cfg.m is None else cfg.m
    if cfg.fix_xi is not None:
        out = {"xi_hat": cfg.fix_xi, "delta_hat": gph_estimate(x, cfg.fix_xi, m), "m": m, "rss": gph_rss(x, cfg.fix_xi, m)}
    else:
        g = gph_pole_search(x, m=m, xi_min=cfg.xi_min, xi_max=cfg.xi_max)
        out = {"xi_hat": g.xi_hat, "delta_hat": g.delta_hat, "m": g.m, "rss": g.rss}
    _write_result(cfg, {"gph": out})


def _records_path(cfg: RunConfig) -> str | None:
    if cfg.records_path is not None:
        return cfg.records_path
    if cfg.output_path in (None, "-"):
        return None
    stem, _ = os.path.splitext(cfg.output_path)
    return stem + "_records.csv"


def format_records(records: list[dict]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(RECORD_COLUMNS) + ["error"])
    for r in records:
        row = []
        for c in RECORD_COLUMNS:
            v = r[c]
            row.append("" if isinstance(v, float) and math.isnan(v) else (f"{v:.17g}" if isinstance(v, float) else v))
        row.append(r.get("error", ""))
        w.writerow(row)
    return out.getvalue()


def cmd_mc(cfg: RunConfig) -> None:
    _require(cfg, "n")
    mc = McConfig(
        params_true=_params(cfg),
        n=cfg.n,
        replications=cfg.replications,
        seed=cfg.seed,
        estimators=cfg.estimators,
        alpha=cfg.alpha,
        model_order=cfg.order,
        gph_m=cfg.m,
        sim_method=cfg.sim_method,
        xi_min=cfg.xi_min,
        xi_max=cfg.xi_max,
    )
    result = run_mc(mc, resolve_threads(cfg.threads))
    rec_path = _records_path(cfg)
    if rec_path is not None:
        _atomic_write(rec_path, format_records(result.records))
    _write_result(cfg, {"mc_config": mc.as_dict(), "summary": result.summary})


def cmd_constants(cfg: RunConfig) -> None:
    _require(cfg, "delta")
    if cfg.asymptotic:
        out = {
            "n": None,
            "delta": cfg.delta,
            "mu2": 0.0,
            "sigma1_sq": const.ASYMPTOTIC_SIGMA1_SQ,
            "sigma2_sq": const.ASYMPTOTIC_SIGMA2_SQ,
            "half_width_coefficient": const.ci_half_width(None, cfg.delta, cfg.alpha),
        }
    else:
        _require(cfg, "n")
        fsc = const.finite_sample_constants(cfg.n, cfg.delta, cfg.xi)
        out = {
            "n": cfg.n,
            "delta": cfg.delta,
            "mu2": fsc.mu2,
            "sigma1_sq": fsc.sigma1_sq,
            "sigma2_sq": fsc.sigma2_sq,
            "half_width_coefficient": fsc.half_width(cfg.alpha),
        }
    out["alpha"] = cfg.alpha
    if out["n"]:
        out["half_width"] = out["half_width_coefficient"] / out["n"]
    _write_result(cfg, {"constants": out})


_DISPATCH = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "gph": cmd_gph,
    "mc": cmd_mc,
    "constants": cmd_constants,
    "select": cmd_select,
}


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _order_arg(s: str) -> tuple[int, int]:
    try:
        return _order(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,q, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; command-line flags override it")
    common.add_argument("--input", dest="input_path")
    common.add_argument("--output", dest="output_path")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", help="worker count or 'auto' (env SEAPER_THREADS)")
    common.add_argument("--method", choices=("demod", "demodulated", "whittle"))
    common.add_argument("--order", type=_order_arg, help="ARMA order p,q with p,q in {0,1}")
    common.add_argument("--orders", type=_order_arg, nargs="+", help="candidate orders for select")
    common.add_argument("--fix-xi", type=float)
    common.add_argument("--detrend", action="store_true", default=None)
    common.add_argument("--alpha", type=float)
    common.add_argument("--m", type=int, help="GPH bandwidth")
    common.add_argument("--xi-min", type=float)
    common.add_argument("--xi-max", type=float)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--n", type=int)
    model.add_argument("--xi", type=float)
    model.add_argument("--delta", type=float)
    model.add_argument("--phi", type=float)
    model.add_argument("--theta", type=float)
    model.add_argument("--sigma2", type=float)
    model.add_argument("--sim-method", choices=("levinson", "circulant"))

    p = _Parser(prog="seaper", description="Seasonally persistent GARMA simulation and estimation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common, model], help="write a simulated series as CSV")
    sub.add_parser("fit", parents=[common], help="fit a GARMA model to a CSV series")
    sub.add_parser("gph", parents=[common], help="demodulated log-periodogram regression")
    mc = sub.add_parser("mc", parents=[common, model], help="Monte Carlo study")
    mc.add_argument("--replications", type=int)
    mc.add_argument("--estimators", type=lambda s: tuple(e.strip() for e in s.split(",")), help="comma list")
    mc.add_argument("--records", dest="records_path", help="per-replication CSV path")
    c = sub.add_parser("constants", parents=[common, model], help="finite-sample CI constants")
    c.add_argument("--asymptotic", action="store_true", default=None)
    sub.add_parser("select", parents=[common], help="BIC model selection over ARMA orders")
    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except OSError as exc:
            raise IOFailure(f"cannot read config {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {ns.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("configuration must be a JSON object")
        if base.get("command", ns.command) != ns.command:
            raise ConfigError(f"config is for command {base['command']!r}, not {ns.command!r}")
    over = {k: v for k, v in vars(ns).items() if k != "config" and v is not None}
    if over.get("method") == "demod":
        over["method"] = "demodulated"
    if "threads" not in over and "threads" not in base and "SEAPER_THREADS" in os.environ:
        over["threads"] = os.environ["SEAPER_THREADS"]
    for k in ("order",):
        if k in over:
            over[k] = list(over[k])
    if "orders" in over:
        over["orders"] = [list(o) for o in over["orders"]]
    if "estimators" in over:
        over["estimators"] = ["demodulated" if e == "demod" else e for e in over["estimators"]]
    return RunConfig.from_dict({**base, **over})


def _validate_paths(cfg: RunConfig) -> None:
    if cfg.input_path is not None and not os.path.isfile(cfg.input_path):
        raise IOFailure(f"input file not found: {cfg.input_path}")
    for p in (cfg.output_path, cfg.records_path):
        if p not in (None, "-"):
            d = os.path.dirname(os.path.abspath(p))
            if not os.path.isdir(d):
                raise IOFailure(f"output directory does not exist: {d}")


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = _config_from_args(ns)
        _validate_paths(cfg)
        resolve_threads(cfg.threads)
        _DISPATCH[cfg.command](cfg)
    except SeaperError as exc:
        print(f"seaper: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"seaper: I/O error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, ArithmeticError) as exc:
        print(f"seaper: error: {exc}", file=sys.stderr)
        return 3
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
