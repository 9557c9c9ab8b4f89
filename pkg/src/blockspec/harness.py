"""Monte Carlo studies: misassignment curves, K-selection statistics, bound checks.

A study is a grid of cells (n, R[, K']) times replicates. Each replicate draws
its graph from ``Seed(config.seed, stream)`` with a stream unique to
(n, replicate), so every record depends only on the config and the base seed,
never on the worker count or completion order.
"""

from __future__ import annotations

import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .clustering import DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL, lloyd_cluster
from .diagnostics import REPORT_COLUMNS, bound_suite
from .embedding import DEFAULT_OMEGA, KnowledgeMode, assemble_features, estimate_rank, full_svd, truncate_svd
from .evaluation import misassignment_fraction
from .exceptions import BlockspecError, ConfigError
from .io import ensure_dir, write_table
from .model import ModelConstants, SbmParams, compute_constants, resolve_params
from .sampler import GraphSample, grow_sample, sample_graph
from .seeding import Seed
from .selection import DEFAULT_XI, estimate_k_check, estimate_k_hat, log_statistic

log = logging.getLogger(__name__)

STUDIES = ("misassignment", "kstat", "bounds")
BOUND_FAMILIES = ("gram", "noiseless", "spectrum", "procrustes")


@dataclass
class ExperimentConfig:
    params: SbmParams
    study: str = "misassignment"
    n_list: list[int] = field(default_factory=lambda: [100, 200, 400, 800, 1600])
    R_list: list[int] = field(default_factory=lambda: [2])
    k_list: list[int] = field(default_factory=lambda: [2, 3, 4])
    replicates: int = 100
    seed: int = 0
    mode: str = "rows"
    xi: float = DEFAULT_XI
    omega: float = DEFAULT_OMEGA
    zeta: float = 0.01
    theta: float = 0.25
    k_max: int | None = None
    restarts: int = DEFAULT_RESTARTS
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    growth: bool = False
    bounds: list[str] = field(default_factory=lambda: list(BOUND_FAMILIES))
    constants: dict = field(default_factory=dict)
    params_label: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> "ExperimentConfig":
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES}, got {self.study!r}")
        for name in ("n_list", "R_list") + (("k_list",) if self.study == "kstat" else ()):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} must be nonempty")
            if any(int(v) < 1 for v in values):
                raise ConfigError(f"{name} entries must be positive")
        if self.study != "bounds" and any(int(R) > int(n) for n in self.n_list for R in self.R_list):
            raise ConfigError("every R must be at most every n")
        if self.study == "bounds" and min(self.n_list) < 2:
            raise ConfigError("bound checks need n >= 2")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be at least 1")
        if unknown := set(self.bounds) - set(BOUND_FAMILIES):
            raise ConfigError(f"unknown bound families {sorted(unknown)}")
        if unknown := set(self.constants) - {"alpha", "beta", "gamma"}:
            raise ConfigError(f"unknown constant overrides {sorted(unknown)}")
        KnowledgeMode.coerce(self.mode)
        return self

    def model_constants(self) -> ModelConstants:
        return replace(compute_constants(self.params), **{k: float(v) for k, v in self.constants.items()})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d


def config_from_dict(d: dict, base_dir: Path | None = None, **overrides) -> ExperimentConfig:
    d = {**d, **{k: v for k, v in overrides.items() if v is not None}}
    if "params" not in d:
        raise ConfigError("config needs a 'params' entry (preset name, mapping or file)")
    raw = d.pop("params")
    if "params_label" not in d:
        d["params_label"] = raw if isinstance(raw, str) else "custom"
    params = resolve_params(raw, base_dir)
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    if unknown := set(d) - known:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return ExperimentConfig(params=params, **d)


def load_config(path, **overrides) -> ExperimentConfig:
    import yaml

    path = Path(path)
    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return config_from_dict(data, path.parent, **overrides)


# ---------------------------------------------------------------------------
# record layouts

RECORD_COLUMNS = {
    "misassignment": ["study", "n", "R", "k", "replicate", "seed", "stream", "misassignment",
                      "statistic", "rank_hat", "k_hat", "k_check", "error"],
    "kstat": ["study", "n", "R", "k", "replicate", "seed", "stream", "statistic", "misassignment",
              "rank_hat", "k_hat", "k_check", "error"],
    "bounds": ["study", "n", "replicate", "seed", "stream"] + [c for c in REPORT_COLUMNS if c not in ("n", "seed")]
    + ["error"],
}

AGGREGATE_COLUMNS = {
    "misassignment": ["n", "R", "k", "count", "failures", "mean_misassignment", "std_misassignment",
                      "mean_statistic"],
    "kstat": ["n", "R", "k", "count", "failures", "mean_statistic", "std_statistic", "frac_k_hat_correct",
              "frac_k_check_correct", "mean_misassignment"],
    "bounds": ["n", "name", "count", "failures", "pass_rate", "min_margin"],
}


def _std(values) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


# ---------------------------------------------------------------------------
# per-replicate work


def _graphs_for_task(config: ExperimentConfig, task) -> list[tuple[int, int, int, GraphSample]]:
    """``(n, replicate, stream, graph)`` for every graph a task covers."""
    if config.growth:
        rep = task
        seed = Seed(config.seed, rep)
        out, g = [], None
        for n in sorted(set(int(v) for v in config.n_list)):
            g = grow_sample(config.params, n, seed, start=g)
            out.append((n, rep, rep, g))
        return out
    i_n, rep = task
    stream = i_n * config.replicates + rep
    n = int(config.n_list[i_n])
    return [(n, rep, stream, sample_graph(config.params, n, Seed(config.seed, stream)))]


def _decompose(g: GraphSample):
    return [full_svd(A.astype(np.float64)) for A in g.adjacency]


def _embed(decomps, R, mode):
    embeddings = [truncate_svd(d, R) for d in decomps]
    return embeddings, assemble_features(embeddings, mode)


def _rank_hat(embeddings, n, omega):
    ranks = [estimate_rank(e.sigma, n, omega) for e in embeddings]
    return ranks[0] if len(ranks) == 1 else ranks


def _misassignment_rows(config, n, rep, stream, g):
    rows = []
    base = {"study": "misassignment", "n": n, "replicate": rep, "seed": config.seed, "stream": stream}
    K = config.params.K
    decomps = _decompose(g)
    for R in config.R_list:
        row = {**base, "R": int(R), "k": K}
        try:
            embeddings, Z = _embed(decomps, int(R), config.mode)
            c = lloyd_cluster(Z, K, config.restarts, Seed(config.seed, stream), config.max_iter, config.tol)
            row.update(
                misassignment=misassignment_fraction(g.tau, c.assignment),
                statistic=log_statistic(c.residual, n),
                rank_hat=_rank_hat(embeddings, n, config.omega),
            )
        except BlockspecError as exc:
            row["error"] = type(exc).__name__
        rows.append(row)
    return rows


def _kstat_rows(config, n, rep, stream, g):
    rows = []
    base = {"study": "kstat", "n": n, "replicate": rep, "seed": config.seed, "stream": stream}
    seed = Seed(config.seed, stream)
    decomps = _decompose(g)
    for R in config.R_list:
        try:
            embeddings, Z = _embed(decomps, int(R), config.mode)
        except BlockspecError as exc:
            rows += [{**base, "R": int(R), "k": int(k), "error": type(exc).__name__} for k in config.k_list]
            continue
        cache = {}

        def cluster(Z_, k):
            if k not in cache:
                cache[k] = lloyd_cluster(Z_, k, config.restarts, seed, config.max_iter, config.tol)
            return cache[k]

        k_max = config.k_max if config.k_max is not None else min(2 * int(R) * g.S + 2, n)
        try:
            k_hat, _ = estimate_k_hat(Z, n, config.xi, k_max, clusterer=cluster)
        except BlockspecError as exc:
            k_hat = type(exc).__name__
        k_check, _ = estimate_k_check(Z, n, config.zeta, config.theta, clusterer=cluster)
        shared = {"R": int(R), "rank_hat": _rank_hat(embeddings, n, config.omega), "k_check": k_check}
        for k in config.k_list:
            row = {**base, **shared, "k": int(k)}
            if isinstance(k_hat, str):
                row["error"] = k_hat
            else:
                row["k_hat"] = k_hat
            if int(k) > n:
                row["error"] = "DimensionError"
                rows.append(row)
                continue
            c = cluster(Z, int(k))
            row.update(statistic=log_statistic(c.residual, n),
                       misassignment=misassignment_fraction(g.tau, c.assignment))
            rows.append(row)
    return rows


def _bounds_rows(config, n, rep, stream, g):
    base = {"study": "bounds", "n": n, "replicate": rep, "seed": config.seed, "stream": stream}
    try:
        reports = bound_suite(g, config.params, config.model_constants(), include=tuple(config.bounds),
                              seed=f"{config.seed}:{stream}", label=config.params_label)
    except BlockspecError as exc:
        return [{**base, "error": type(exc).__name__}]
    rows = []
    for r in reports:
        rec = r.as_record()
        rec.pop("n")
        rec.pop("seed")
        rows.append({**base, **rec})
    return rows


_ROW_BUILDERS = {"misassignment": _misassignment_rows, "kstat": _kstat_rows, "bounds": _bounds_rows}


def _run_task(config: ExperimentConfig, task):
    """Rows and wall time for one task; single-threaded BLAS keeps results
    independent of how many workers run side by side."""
    with threadpool_limits(limits=1):
        start = time.perf_counter()
        rows = []
        for n, rep, stream, g in _graphs_for_task(config, task):
            rows += _ROW_BUILDERS[config.study](config, n, rep, stream, g)
        return task, rows, time.perf_counter() - start


def _tasks(config: ExperimentConfig):
    if config.growth:
        return list(range(config.replicates))
    return [(i, rep) for i in range(len(config.n_list)) for rep in range(config.replicates)]


def _sort_key(study):
    if study == "bounds":
        return lambda r: (r["n"], r["replicate"])
    return lambda r: (r["n"], r["R"], r["k"], r["replicate"])


@dataclass
class StudyResult:
    config: ExperimentConfig
    records: list[dict]
    aggregates: list[dict]
    timings: list[dict]

    @property
    def record_columns(self):
        return RECORD_COLUMNS[self.config.study]

    def write(self, out_dir) -> Path:
        out = ensure_dir(out_dir)
        study = self.config.study
        write_table(self.records, out / f"{study}_records.csv", RECORD_COLUMNS[study])
        write_table(self.aggregates, out / f"{study}_aggregates.csv", AGGREGATE_COLUMNS[study])
        write_table(self.timings, out / f"{study}_timings.csv", ["task", "wall_time"])
        manifest = {
            "library": "blockspec",
            "version": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "generator": "numpy Philox keyed by SeedSequence(seed, spawn_key=(stream, ...))",
            "config": self.config.to_dict(),
        }
        (out / f"{study}_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return out


def aggregate(study: str, records: Sequence[dict], K: int | None = None) -> list[dict]:
    """Per-cell summaries; failed replicates are counted and left out.

    ``K`` (the true block count) is needed for the kstat hit rates.
    """
    cells: dict = {}
    if study == "bounds":
        for r in records:
            if r.get("error"):
                cells.setdefault((r["n"], "__error__"), []).append(r)
            else:
                cells.setdefault((r["n"], r["name"]), []).append(r)
        out = []
        for (n, name), rs in cells.items():
            if name == "__error__":
                continue
            margins = [r["margin"] for r in rs]
            out.append({"n": n, "name": name, "count": len(rs),
                        "failures": len(cells.get((n, "__error__"), [])),
                        "pass_rate": float(np.mean([bool(r["holds"]) for r in rs])),
                        "min_margin": float(np.min(margins))})
        return out
    for r in records:
        cells.setdefault((r["n"], r["R"], r["k"]), []).append(r)
    out = []
    for (n, R, k), rs in cells.items():
        ok = [r for r in rs if not r.get("error")]
        row = {"n": n, "R": R, "k": k, "count": len(ok), "failures": len(rs) - len(ok)}
        mis = [r["misassignment"] for r in ok]
        stat = [r["statistic"] for r in ok]
        if study == "misassignment":
            row.update(mean_misassignment=float(np.mean(mis)) if ok else math.nan,
                       std_misassignment=_std(mis) if ok else math.nan,
                       mean_statistic=float(np.mean(stat)) if ok else math.nan)
        else:
            row.update(mean_statistic=float(np.mean(stat)) if ok else math.nan,
                       std_statistic=_std(stat) if ok else math.nan,
                       mean_misassignment=float(np.mean(mis)) if ok else math.nan,
                       frac_k_hat_correct=float(np.mean([r.get("k_hat") == K for r in ok])) if ok else math.nan,
                       frac_k_check_correct=float(np.mean([r.get("k_check") == K for r in ok])) if ok else math.nan)
        out.append(row)
    return out


def run_study(config: ExperimentConfig, workers: int = 1) -> StudyResult:
    config.validate()
    tasks = _tasks(config)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, [config] * len(tasks), tasks, chunksize=1))
    else:
        results = [_run_task(config, t) for t in tasks]
    records = sorted((row for _, rows, _ in results for row in rows), key=_sort_key(config.study))
    timings = [{"task": str(t), "wall_time": dt} for t, _, dt in results]
    aggregates = aggregate(config.study, records, config.params.K)
    log.info("%s study: %d records from %d tasks", config.study, len(records), len(tasks))
    return StudyResult(config, records, aggregates, timings)


def run_misassignment_study(config: ExperimentConfig, workers: int = 1) -> StudyResult:
    if config.study != "misassignment":
        raise ConfigError(f"expected a misassignment config, got study={config.study!r}")
    return run_study(config, workers)


def run_kstat_study(config: ExperimentConfig, workers: int = 1) -> StudyResult:
    if config.study != "kstat":
        raise ConfigError(f"expected a kstat config, got study={config.study!r}")
    return run_study(config, workers)


def run_bounds_study(config: ExperimentConfig, workers: int = 1) -> StudyResult:
    if config.study != "bounds":
        raise ConfigError(f"expected a bounds config, got study={config.study!r}")
    return run_study(config, workers)
