"""Replicated CLT and bootstrap simulations with flat-file reports.

Seeds: the replication ``r`` at the ``i``-th sample size uses
``child_seed = mix64(master_seed, i * replications + r)``; its P sample uses
``mix64(child_seed, 0)``, its Q sample ``mix64(child_seed, 1)`` and a
max-sliced ascent ``mix64(child_seed, 2)``. Shared Monte-Carlo directions use
``mix64(master_seed, DIRS_STREAM)`` and are written to ``directions.csv``.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, population
from .config import ExperimentConfig, config_echo
from .errors import ConfigError, SwcltError
from .inference import bootstrap_distribution
from .samplers import ModelSpec, sample
from .seeding import mix64
from .sliced import Functional
from .stats import kde, ks_distance, ks_two_sample, qq_points

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DIRS_STREAM = 1 << 40
PLUGIN_STREAM = 1 << 41
BASE_STREAM = 1 << 42
BOOT_STREAM = 1 << 43
PLUGIN_FACTOR = 20


@dataclass
class ReplicationRows:
    n: int
    replication: np.ndarray
    child_seed: np.ndarray
    statistic: np.ndarray
    excluded: list = field(default_factory=list)


@dataclass
class BootstrapTable:
    n: int
    l: int
    exponent: float
    seed: int
    point: float
    child_seed: np.ndarray
    statistic: np.ndarray
    ks_vs_mc: float | None = None
    ks_vs_gaussian: float | None = None


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    reference: float
    reference_method: str
    theoretical_variance: float | None
    rows: list = field(default_factory=list)
    bootstrap: list = field(default_factory=list)
    directions: np.ndarray | None = None

    def summary(self) -> dict:
        per_n = []
        for r in self.rows:
            ok = r.statistic
            entry = {
                "n": r.n,
                "count": int(ok.size),
                "excluded_count": len(r.excluded),
                "excluded": r.excluded,
                "mean": float(ok.mean()) if ok.size else None,
                "variance": float(ok.var(ddof=1)) if ok.size > 1 else None,
            }
            if self.theoretical_variance is not None and ok.size:
                entry["ks_gaussian"] = ks_distance(ok, np.sqrt(self.theoretical_variance))
            per_n.append(entry)
        boot = [
            {
                "n": b.n,
                "l": b.l,
                "exponent": b.exponent,
                "B": int(b.statistic.size),
                "seed": b.seed,
                "point": b.point,
                "ks_vs_mc": b.ks_vs_mc,
                "ks_vs_gaussian": b.ks_vs_gaussian,
            }
            for b in self.bootstrap
        ]
        return {
            "format_version": FORMAT_VERSION,
            "code_version": __version__,
            "experiment": self.kind,
            "config": self.config,
            "reference": {"value": self.reference, "method": self.reference_method},
            "theoretical_variance": self.theoretical_variance,
            "kde": {"kernel": "gaussian", "bandwidth": "silverman 1.06*sd*N^(-1/5)"},
            "per_n": per_n,
            "bootstrap": boot,
        }


def _bind(cfg: ExperimentConfig) -> Functional:
    F = cfg.functional
    if F.kind == "sliced" and F.dirs is None:
        F = F.bind(cfg.dim, mix64(cfg.master_seed, DIRS_STREAM))
    return F


def _sample_pair(cfg: ExperimentConfig, n: int, seed: int):
    P = sample(cfg.model_P.with_n(n, mix64(seed, 0)))
    Q = sample(cfg.model_Q.with_n(n, mix64(seed, 1)))
    return P, Q


def reference_value(cfg: ExperimentConfig, F: Functional) -> tuple[float, str]:
    """Centering value ``F(W)``: analytic when known, else an oversampled plug-in."""
    if not isinstance(cfg.reference, str):
        return float(cfg.reference), "configured"
    if cfg.reference in ("auto", "analytic"):
        val = population.functional_value(cfg.model_P, cfg.model_Q, F, cfg.p, cfg.delta)
        if val is not None:
            return float(val), "analytic"
        if cfg.reference == "analytic":
            raise ConfigError("no closed-form population value for this model pair")
    n_ref = PLUGIN_FACTOR * max(cfg.n_list)
    P, Q = _sample_pair(cfg, n_ref, mix64(cfg.master_seed, PLUGIN_STREAM))
    Fr = replace(F, seed=mix64(cfg.master_seed, PLUGIN_STREAM + 1)) if F.kind == "max_sliced" else F
    return float(Fr.evaluate(P, Q, cfg.p, cfg.delta)), f"plugin(n_ref={n_ref})"


def _replicate(args):
    cfg, F, n, child, reference = args
    P, Q = _sample_pair(cfg, n, child)
    Fi = replace(F, seed=mix64(child, 2)) if F.kind == "max_sliced" else F
    return float(np.sqrt(n) * (Fi.evaluate(P, Q, cfg.p, cfg.delta) - reference))


def _run_tasks(fn, tasks, workers: int):
    """Run ``fn`` over ``tasks`` in task order; failures come back as exceptions."""
    caught = (SwcltError, ArithmeticError, ValueError)
    results = []
    if workers <= 1:
        for t in tasks:
            try:
                results.append(fn(t))
            except caught as exc:
                results.append(exc)
        return results
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(fn, t) for t in tasks]
        for fut in futures:
            try:
                results.append(fut.result())
            except caught as exc:
                results.append(exc)
    return results


def _clt_rows(cfg: ExperimentConfig, F: Functional, reference: float, workers: int) -> list:
    rows = []
    for i, n in enumerate(cfg.n_list):
        seeds = [mix64(cfg.master_seed, i * cfg.replications + r) for r in range(cfg.replications)]
        results = _run_tasks(_replicate, [(cfg, F, n, s, reference) for s in seeds], workers)
        rep, cs, stat, excluded = [], [], [], []
        for r, (s, res) in enumerate(zip(seeds, results)):
            if isinstance(res, Exception) or not np.isfinite(res):
                msg = repr(res) if isinstance(res, Exception) else "non-finite statistic"
                log.warning("replication %d at n=%d (seed %d) failed: %s", r, n, s, msg)
                excluded.append({"replication": r, "child_seed": s, "error": msg})
                continue
            rep.append(r)
            cs.append(s)
            stat.append(res)
        rows.append(
            ReplicationRows(
                n, np.array(rep, dtype=np.int64), np.array(cs, dtype=np.uint64), np.array(stat), excluded
            )
        )
    return rows


def run_clt_sim(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Simulate ``sqrt(n)(F(W_n) - F(W))`` over replications for every ``n``."""
    F = _bind(cfg)
    reference, method = reference_value(cfg, F)
    rows = _clt_rows(cfg, F, reference, workers)
    return ExperimentReport(
        "clt-sim",
        config_echo(cfg),
        reference,
        method,
        cfg.theoretical_variance,
        rows,
        [],
        F.dirs if F.kind == "sliced" else None,
    )


def _boot_task(args):
    cfg, F, n, l, seed, base_seed = args
    P, Q = _sample_pair(cfg, n, base_seed)
    Fb = replace(F, seed=mix64(base_seed, 2)) if F.kind == "max_sliced" else F
    return bootstrap_distribution(P, Q, Fb, l, cfg.bootstrap.B, seed, cfg.p, cfg.delta)


def run_bootstrap_sim(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Rescaled bootstrap on one base sample per ``n``, against the Monte-Carlo law."""
    if cfg.bootstrap is None:
        raise ConfigError("bootstrap-sim needs a 'bootstrap' section")
    F = _bind(cfg)
    reference, method = reference_value(cfg, F)
    rows = _clt_rows(cfg, F, reference, workers)
    tasks, meta = [], []
    n_beta = len(cfg.bootstrap.l_exponents)
    for i, n in enumerate(cfg.n_list):
        base_seed = mix64(cfg.master_seed, BASE_STREAM + i)
        for j, (beta, l) in enumerate(zip(cfg.bootstrap.l_exponents, cfg.bootstrap.resample_sizes(n))):
            seed = mix64(cfg.master_seed, BOOT_STREAM + i * n_beta + j)
            tasks.append((cfg, F, n, l, seed, base_seed))
            meta.append((i, n, beta, l, seed))
    results = _run_tasks(_boot_task, tasks, workers)
    tables = []
    for (i, n, beta, l, seed), bs in zip(meta, results):
        if isinstance(bs, Exception):
            raise bs
        t = BootstrapTable(n, l, beta, seed, bs.point, bs.child_seeds, bs.replicates)
        if rows[i].statistic.size:
            t.ks_vs_mc = ks_two_sample(bs.replicates, rows[i].statistic)
        if cfg.theoretical_variance is not None:
            t.ks_vs_gaussian = ks_distance(bs.replicates, np.sqrt(cfg.theoretical_variance))
        tables.append(t)
    return ExperimentReport(
        "bootstrap-sim",
        config_echo(cfg),
        reference,
        method,
        cfg.theoretical_variance,
        rows,
        tables,
        F.dirs if F.kind == "sliced" else None,
    )


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header_comment: str, columns: list[str], data: list) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {header_comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in zip(*data):
            fh.write(",".join(c if isinstance(c, str) else _fmt(c) if isinstance(c, float) else str(c) for c in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "__dataclass_fields__"):
        from dataclasses import asdict

        return asdict(o)
    raise TypeError(f"cannot serialize {type(o)!r}")


def write_report(report: ExperimentReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write statistics, KDE/Q-Q curves, bootstrap tables and ``summary.json``."""
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = report.config.get("master_seed")
    written = []
    tag = "clt"
    sigma = None if report.theoretical_variance is None else float(np.sqrt(report.theoretical_variance))

    for r in report.rows:
        head = f"swclt {tag} v{FORMAT_VERSION} master_seed={seed} n={r.n}"
        stats_cols = [r.replication.tolist(), [int(s) for s in r.child_seed], r.statistic.tolist()]
        if fmt == "csv":
            p = out / f"{tag}_n{r.n}.csv"
            _write_csv(p, head, ["replication", "child_seed", "statistic"], stats_cols)
        else:
            p = out / f"{tag}_n{r.n}.json"
            _write_json(p, {"header": head, "replication": stats_cols[0], "child_seed": stats_cols[1], "statistic": stats_cols[2]})
        written.append(p)
        if r.statistic.size >= 2 and np.unique(r.statistic).size >= 2:
            x, dens = kde(r.statistic)
            p = out / f"kde_{tag}_n{r.n}.csv"
            _write_csv(p, head + " kernel=gaussian bandwidth=silverman", ["x", "density"], [x.tolist(), dens.tolist()])
            written.append(p)
        if r.statistic.size and sigma is not None:
            tq, eq = qq_points(r.statistic, sigma)
            p = out / f"qq_{tag}_n{r.n}.csv"
            _write_csv(p, head + f" target_sigma={_fmt(sigma)}", ["theoretical_q", "empirical_q"], [tq.tolist(), eq.tolist()])
            written.append(p)

    for b in report.bootstrap:
        head = f"swclt bootstrap v{FORMAT_VERSION} master_seed={seed} n={b.n} l={b.l} seed={b.seed}"
        cols = [list(range(b.statistic.size)), [int(s) for s in b.child_seed], b.statistic.tolist()]
        if fmt == "csv":
            p = out / f"bootstrap_n{b.n}_l{b.l}.csv"
            _write_csv(p, head, ["replicate", "child_seed", "statistic"], cols)
        else:
            p = out / f"bootstrap_n{b.n}_l{b.l}.json"
            _write_json(p, {"header": head, "replicate": cols[0], "child_seed": cols[1], "statistic": cols[2]})
        written.append(p)
        if np.unique(b.statistic).size >= 2:
            x, dens = kde(b.statistic)
            p = out / f"kde_bootstrap_n{b.n}_l{b.l}.csv"
            _write_csv(p, head + " kernel=gaussian bandwidth=silverman", ["x", "density"], [x.tolist(), dens.tolist()])
            written.append(p)

    if report.directions is not None:
        p = out / "directions.csv"
        U = report.directions
        _write_csv(
            p,
            f"swclt directions v{FORMAT_VERSION} master_seed={seed} stream={DIRS_STREAM}",
            [f"u{k}" for k in range(U.shape[1])],
            [U[:, k].tolist() for k in range(U.shape[1])],
        )
        written.append(p)

    p = out / "summary.json"
    _write_json(p, report.summary())
    written.append(p)
    return written
