"""Seeded Monte Carlo sweeps over graph models, measuring concentration,
core, residual, detection and cut-norm behavior, with CSV/JSON persistence.

Replicate seeds are derived from the sweep seed and a stable hash of the
grid point, so removing a grid point never changes the samples of the
others.  Runtimes are recorded in the JSON output only; the CSV is kept
byte-reproducible for identical configs.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .community import auto_tau, davis_kahan_report, spectral_cluster
from .core_residual import degree_trim_core, residual_norm_bound, sparse_decompose
from .graph_model import (
    ProbabilityMatrix,
    SbmConfig,
    er_prob_matrix,
    model_params,
    sample_graph,
    sbm_prob_matrix,
)
from .oracles import cutnorm_concentration_check
from .spectral import (
    DiffOperator,
    ExpectedOperator,
    Kind,
    Mode,
    RegularizedOperator,
    operator_norm,
    submatrix_norm,
)

EXPERIMENTS = ("concentration", "core", "residual", "detection", "cutnorm")

# Columns never written to CSV (they vary between identical runs).
VOLATILE_COLUMNS = ("runtime_s",)


@dataclass
class SweepConfig:
    experiment: str
    n: list = field(default_factory=lambda: [2000])
    a: list = field(default_factory=lambda: [8.0])
    b: list | None = None            # None: Erdős–Rényi with rate a
    tau: list = field(default_factory=lambda: ["auto"])
    r: float = 1.0
    replicates: int = 10
    seed: int = 0
    out: str | None = None
    threads: int = 1
    svg: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.b is not None and len(self.b) != len(self.a):
            raise ValueError("a and b lists must have equal length")

    def grid(self):
        """Cross product of n x (a, b) x tau as flat grid-point dicts."""
        points = []
        bs = self.b if self.b is not None else list(self.a)
        for n in self.n:
            for a, b in zip(self.a, bs):
                for tau in self.tau:
                    points.append({"n": int(n), "a": float(a), "b": float(b),
                                   "tau_spec": str(tau)})
        return points


def parse_config_file(path, experiment=None) -> SweepConfig:
    """Plain-text key-value config with '#' comments and comma/space lists."""
    raw = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()

    def _list(key, cast):
        return [cast(tok) for tok in raw[key].replace(",", " ").split()]

    kwargs = {}
    if experiment is not None:
        kwargs["experiment"] = experiment
    elif "experiment" in raw:
        kwargs["experiment"] = raw["experiment"]
    if "n" in raw:
        kwargs["n"] = _list("n", int)
    if "a" in raw:
        kwargs["a"] = _list("a", float)
    if "b" in raw:
        kwargs["b"] = _list("b", float)
    if "tau" in raw:
        kwargs["tau"] = raw["tau"].replace(",", " ").split()
    for key, cast in (("r", float), ("replicates", int), ("seed", int),
                      ("threads", int)):
        if key in raw:
            kwargs[key] = cast(raw[key])
    if "out" in raw:
        kwargs["out"] = raw["out"]
    if "svg" in raw:
        kwargs["svg"] = raw["svg"].lower() in ("1", "true", "yes")
    return SweepConfig(**kwargs)


def replicate_seed(base_seed: int, point: dict, rep: int) -> int:
    """seed ^ hash(grid point, replicate): stable across grid edits."""
    tag = f"{point['n']}|{point['a']}|{point['b']}|{point['tau_spec']}|{rep}"
    h = int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")
    return (base_seed ^ h) & 0x7FFFFFFFFFFFFFFF


def _prob_matrix(point) -> ProbabilityMatrix:
    n, a, b = point["n"], point["a"], point["b"]
    if a == b:
        return er_prob_matrix(n, a)
    return sbm_prob_matrix(SbmConfig(n=n, a=a, b=b))


def _resolve_tau(spec: str, A) -> float:
    if spec == "auto":
        return auto_tau(A)
    if spec == "none":
        return 0.0
    return float(spec)


def _shape_term(r, alpha, d, ntau):
    """r * alpha^2 * log^3(d) * (1/sqrt(d) + 1/sqrt(n tau))."""
    if ntau <= 0:
        return float("nan")
    return r * alpha ** 2 * math.log(d) ** 3 * (1 / math.sqrt(d) + 1 / math.sqrt(ntau))


# ---- per-replicate measurements -------------------------------------------


def _measure_concentration(cfg, point, rep):
    P = _prob_matrix(point)
    params = model_params(P)
    seed = replicate_seed(cfg.seed, point, rep)
    A = sample_graph(P, seed)
    tau = _resolve_tau(point["tau_spec"], A)
    op_a = RegularizedOperator(A, tau, Mode.FULL, Kind.LAPLACIAN)
    op_e = ExpectedOperator(P, tau, Mode.FULL, Kind.LAPLACIAN)
    norm = operator_norm(DiffOperator(op_a, op_e), tol=1e-7, seed=seed)
    ntau = point["n"] * tau
    shape = _shape_term(cfg.r, params.alpha, params.d, ntau)
    return {
        "norm": norm,
        "tau_value": tau,
        "ntau": ntau,
        "d": params.d,
        "alpha": params.alpha,
        "shape_term": shape,
        "ratio": norm / shape if shape == shape and shape > 0 else float("nan"),
    }


def _measure_core(cfg, point, rep):
    P = _prob_matrix(point)
    params = model_params(P)
    seed = replicate_seed(cfg.seed, point, rep)
    A = sample_graph(P, seed)
    core = degree_trim_core(A, P, cfg.r)
    J = core.J

    class _AdjDiff:
        n = P.n

        @staticmethod
        def matvec(x):
            return A.csr @ x - P.matvec(x)

    adj_norm_core = submatrix_norm(_AdjDiff, J, J, tol=1e-6, seed=seed)
    adj_norm_full = operator_norm(_AdjDiff, tol=1e-6, seed=seed)
    op_a = RegularizedOperator(A, 0.0, Mode.NONE, Kind.LAPLACIAN)
    op_e = ExpectedOperator(P, 0.0, Mode.NONE, Kind.LAPLACIAN)
    lap_diff = DiffOperator(op_a, op_e)
    lap_norm_core = submatrix_norm(lap_diff, J, J, tol=1e-6, seed=seed)
    d, alpha = params.d, params.alpha
    return {
        "removed": core.removed_count,
        "removed_budget": point["n"] / d,
        "adj_core_over_sqrt_d": adj_norm_core / math.sqrt(d),
        "adj_full_over_sqrt_d": adj_norm_full / math.sqrt(d),
        "lap_core_scaled": lap_norm_core * math.sqrt(d) / (alpha ** 2 * math.log(d) ** 3),
        "d": d,
        "alpha": alpha,
    }


def _measure_residual(cfg, point, rep):
    P = _prob_matrix(point)
    params = model_params(P)
    seed = replicate_seed(cfg.seed, point, rep)
    A = sample_graph(P, seed)
    tau = _resolve_tau(point["tau_spec"], A)
    n, d = point["n"], params.d
    m = max(int(n // d), 1)
    # worst case: the highest-degree rows
    I = np.argsort(A.degrees, kind="stable")[::-1][:m]
    I = np.sort(I)
    cols = np.arange(n)
    record = {"tau_value": tau, "ntau": n * tau, "d": d, "block_rows": m}
    if tau > 0:
        op = RegularizedOperator(A, tau, Mode.FULL, Kind.AVERAGING)
        norm = submatrix_norm(op, I, cols, tol=1e-6, seed=seed)
        bound = residual_norm_bound(d, cfg.r, n, tau)
        record.update(norm=norm, bound=bound, violation=int(norm > bound))
    else:
        record.update(norm=float("nan"), bound=float("nan"), violation=0)
    decomp = sparse_decompose(A, I, cols, d=d, r=cfg.r)
    ones_cap = 20.0 * cfg.r * math.log(d)
    max_ones = max(decomp.max_ones_row_R, decomp.max_ones_col_C)
    record.update(
        max_pairs_per_line=decomp.max_pairs_per_line,
        pairs_cap=2 * min(m, n),
        max_ones_per_line=max_ones,
        ones_cap=ones_cap,
        ones_violation=int(max_ones > ones_cap),
    )
    return record


def _measure_detection(cfg, point, rep):
    if point["a"] == point["b"]:
        raise ValueError("detection requires a > b")
    sbm = SbmConfig(n=point["n"], a=point["a"], b=point["b"])
    P = sbm_prob_matrix(sbm)
    seed = replicate_seed(cfg.seed, point, rep)
    A = sample_graph(P, seed)
    tau = _resolve_tau(point["tau_spec"], A)
    result = spectral_cluster(A, tau, ground_truth=sbm.ground_truth, seed=seed)
    report = davis_kahan_report(A, P, tau, seed=seed)
    a, b = point["a"], point["b"]
    return {
        "tau_value": tau,
        "misclassification": result.misclassification,
        "vector_dist": report.vector_dist,
        "lambda2": result.lambda2,
        "norm_diff": report.norm_diff,
        "gap": report.gap,
        "dk_applicable": int(report.applicable),
        "snr": (a - b) ** 2 / (a + b),
    }


def run_cutnorm(cfg: SweepConfig):
    """Cut-norm concentration sweep (replicates handled inside the oracle)."""
    records = []
    for gi, point in enumerate(cfg.grid()):
        P = _prob_matrix(point)
        seed = replicate_seed(cfg.seed, point, 0)
        report = cutnorm_concentration_check(P, cfg.r, cfg.replicates, seed=seed)
        for rep, norm in enumerate(report.norms):
            records.append({
                "experiment": "cutnorm", "grid_index": gi, "replicate": rep,
                "n": point["n"], "a": point["a"], "b": point["b"],
                "tau_spec": point["tau_spec"], "seed": seed,
                "norm": norm, "bound": report.bound, "exact": int(report.exact),
                "violation": int(norm > report.bound),
                "d": report.d,
            })
    return records


_MEASURES = {
    "concentration": _measure_concentration,
    "core": _measure_core,
    "residual": _measure_residual,
    "detection": _measure_detection,
}


def run_sweep(cfg: SweepConfig):
    """Run the configured experiment over grid x replicates.

    Output order is (grid index, replicate index) regardless of worker
    completion order.  Grid points that violate model preconditions are
    skipped with a logged reason.
    """
    if cfg.experiment == "cutnorm":
        return run_cutnorm(cfg)
    measure = _MEASURES[cfg.experiment]
    tasks = [(gi, point, rep) for gi, point in enumerate(cfg.grid())
             for rep in range(cfg.replicates)]

    def _run(task):
        gi, point, rep = task
        base = {
            "experiment": cfg.experiment, "grid_index": gi, "replicate": rep,
            "n": point["n"], "a": point["a"], "b": point["b"],
            "tau_spec": point["tau_spec"],
            "seed": replicate_seed(cfg.seed, point, rep),
        }
        t0 = time.perf_counter()
        try:
            base.update(measure(cfg, point, rep))
        except ValueError as exc:
            return {**base, "skipped": str(exc)}
        base["runtime_s"] = time.perf_counter() - t0
        return base

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_run, tasks))
    else:
        results = [_run(t) for t in tasks]
    skipped = [r for r in results if "skipped" in r]
    for r in skipped:
        print(f"skipped grid point {r['grid_index']} replicate {r['replicate']}: "
              f"{r['skipped']}")
    return [r for r in results if "skipped" not in r]


# ---- persistence -----------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def summary_stats(records):
    """Per-grid-point median and 5th/95th percentiles of numeric columns."""
    out = {}
    by_grid = {}
    for rec in records:
        by_grid.setdefault(rec.get("grid_index", 0), []).append(rec)
    for gi, recs in sorted(by_grid.items()):
        stats = {}
        for key in recs[0]:
            vals = [r[key] for r in recs if isinstance(r.get(key), (int, float))]
            vals = [float(v) for v in vals if v == v]  # drop NaN
            if not vals or key in ("grid_index", "replicate", "seed", "n"):
                continue
            arr = np.array(vals)
            stats[key] = {
                "median": float(np.median(arr)),
                "p5": float(np.percentile(arr, 5)),
                "p95": float(np.percentile(arr, 95)),
            }
        out[str(gi)] = stats
    return out


def emit_report(records, outdir, svg: bool = False):
    """Write records.csv (RFC-4180-style, 17 significant digits), records.json
    and summary.json; optionally summary plots as SVG."""
    if not records:
        raise ValueError("no records to emit (empty grid?)")
    os.makedirs(outdir, exist_ok=True)
    columns = [c for c in records[0] if c not in VOLATILE_COLUMNS]
    csv_path = os.path.join(outdir, "records.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_fmt(rec.get(c, "")) for c in columns])
    with open(os.path.join(outdir, "records.json"), "w") as fh:
        json.dump(records, fh, indent=1)
    summary = summary_stats(records)
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    written = [csv_path]
    if svg:
        written.append(_plot_summary(records, summary, outdir))
    return written


def read_records_csv(path):
    """Re-parse an emitted CSV; numeric fields round-trip bit-exactly."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for key, raw in row.items():
                try:
                    value = int(raw)
                except ValueError:
                    try:
                        value = float(raw)
                    except ValueError:
                        value = raw
                rec[key] = value
            records.append(rec)
    return records


def _plot_summary(records, summary, outdir):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    metric = next(
        (m for m in ("norm", "misclassification", "adj_core_over_sqrt_d")
         if m in records[0]),
        None,
    )
    path = os.path.join(outdir, "summary.svg")
    fig, ax = plt.subplots(figsize=(6, 4))
    if metric is not None:
        gis = sorted(int(g) for g in summary)
        med = [summary[str(g)].get(metric, {}).get("median", float("nan")) for g in gis]
        p5 = [summary[str(g)].get(metric, {}).get("p5", float("nan")) for g in gis]
        p95 = [summary[str(g)].get(metric, {}).get("p95", float("nan")) for g in gis]
        ax.plot(gis, med, "o-", label=f"median {metric}")
        ax.fill_between(gis, p5, p95, alpha=0.2, label="5-95%")
        ax.set_xlabel("grid point")
        ax.set_ylabel(metric)
        ax.legend()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
