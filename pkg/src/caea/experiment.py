"""Cross-validated evaluation and lambda grid search for CAEA / HCAEA."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from caea.dataio import Dataset, Mode, StreamOrder, make_folds, order_stream
from caea.hierarchy import RECURSE_MIN_K, HcaeaTree, fit_hierarchy
from caea.metrics import score_all
from caea.model import CaeaModel, CaeaParams

ALGORITHMS = ("caea", "hcaea")
METRICS = ("accuracy", "nmi", "ari", "macro_f1")
STRUCTURE = ("node_count", "leaf_count", "depth")
# Excluded when comparing reports for reproducibility.
TIMING_COLUMNS = ("train_seconds",)

# Default lambda grid; age_max stays at 10 across it.
LAMBDA_GRID = (10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30)


@dataclass
class RunConfig:
    dataset: str
    algorithm: str = "caea"
    lam: int = 20
    age_max: int = 10
    environment: str = "stationary"
    repeats: int = 2
    folds: int = 10
    seed: int = 0
    aging_policy: str = "algorithm1"
    recurse_min_k: int = RECURSE_MIN_K

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        Mode(self.environment)
        if self.repeats < 1 or self.folds < 2:
            raise ValueError("need repeats >= 1 and folds >= 2")
        if self.recurse_min_k < 2:
            raise ValueError("recurse_min_k must be at least 2")
        self.params  # validates lam / age_max / aging_policy

    @property
    def params(self) -> CaeaParams:
        return CaeaParams(lam=self.lam, age_max=self.age_max, aging_policy=self.aging_policy)


@dataclass
class EvalReport:
    config: RunConfig
    records: list[dict] = field(default_factory=list)

    def aggregates(self) -> dict[str, dict[str, float]]:
        """Mean and sample standard deviation per metric over successful folds."""
        ok = [r for r in self.records if r["status"] == "ok"]
        out = {}
        for key in METRICS + STRUCTURE:
            vals = np.array([r[key] for r in ok], dtype=np.float64)
            out[key] = {
                "mean": float(vals.mean()) if len(vals) else float("nan"),
                "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                "n": len(vals),
            }
        return out

    def mean(self, key: str) -> float:
        return self.aggregates()[key]["mean"]

    def to_csv(self) -> str:
        cols = [f.name for f in fields(RunConfig)] + list(RECORD_COLUMNS)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        echo = asdict(self.config)
        for r in self.records:
            w.writerow([_cell(echo[c]) if c in echo else _cell(r.get(c, "")) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"config": asdict(self.config), "records": self.records, "aggregates": self.aggregates()},
            indent=2, sort_keys=True,
        )


RECORD_COLUMNS = ("repeat", "fold", "status", "reason", "n_train", "n_test") + METRICS + STRUCTURE + TIMING_COLUMNS


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def train(config: RunConfig, X: np.ndarray, y) -> CaeaModel | HcaeaTree:
    if config.algorithm == "caea":
        return CaeaModel(config.params).fit(X, y)
    return fit_hierarchy(X, y, config.params, recurse_min_k=config.recurse_min_k)


def structure(model) -> dict[str, int]:
    if isinstance(model, HcaeaTree):
        return {"node_count": model.node_count(), "leaf_count": model.leaf_count(), "depth": model.depth}
    return {"node_count": model.n_nodes, "leaf_count": model.n_nodes, "depth": 1}


def _run_fold(config: RunConfig, ds: Dataset, tr: np.ndarray, te: np.ndarray, repeat: int, fold: int) -> dict:
    rec = {"repeat": repeat, "fold": fold, "status": "ok", "reason": "",
           "n_train": len(tr), "n_test": len(te)}
    init = config.params.init_size
    if len(tr) < init:
        rec.update(status="failed", reason=f"{len(tr)} training points < {init} needed to initialize")
        return rec
    order = order_stream(ds.labels, tr, StreamOrder(Mode(config.environment), config.seed), repeat, fold)
    t0 = time.perf_counter()
    model = train(config, ds.points[order], ds.labels[order])
    elapsed = time.perf_counter() - t0
    if isinstance(model, CaeaModel) and model.n_nodes == 0:
        rec.update(status="failed", reason="every node was deleted as isolated")
        return rec
    pred = model.predict(ds.points[te])
    rec.update(score_all(pred.tolist(), ds.labels[te].tolist()))
    rec.update(structure(model))
    rec["train_seconds"] = elapsed
    return rec


def run_eval(config: RunConfig, ds: Dataset, jobs: int = 1) -> EvalReport:
    """Repeated stratified k-fold evaluation; records sorted by (repeat, fold)."""
    plan = make_folds(ds.labels, config.repeats, config.folds, config.seed)
    tasks = [(config, ds, *plan.split(r, f), r, f) for r in range(config.repeats) for f in range(config.folds)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            records = list(ex.map(_run_fold, *zip(*tasks)))
    else:
        records = [_run_fold(*t) for t in tasks]
    records.sort(key=lambda r: (r["repeat"], r["fold"]))
    return EvalReport(config, records)


@dataclass
class GridReport:
    config: RunConfig
    lambdas: list[int]
    reports: dict[int, EvalReport]

    def nmi_values(self, lam: int) -> list[float]:
        return [r["nmi"] for r in self.reports[lam].records if r["status"] == "ok"]

    def best_lambda(self) -> int:
        """Lambda with the highest mean NMI; ties go to the smaller lambda."""
        best, best_val = None, -np.inf
        for lam in sorted(self.lambdas):
            vals = self.nmi_values(lam)
            m = float(np.mean(vals)) if vals else -np.inf
            if m > best_val:
                best, best_val = lam, m
        return best if best is not None else min(self.lambdas)

    def distribution_csv(self) -> str:
        """Every fold's NMI per lambda, for box plots."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "environment", "seed", "lambda", "repeat", "fold", "nmi"])
        c = self.config
        for lam in sorted(self.lambdas):
            for r in self.reports[lam].records:
                if r["status"] == "ok":
                    w.writerow([c.dataset, c.algorithm, c.environment, c.seed, lam, r["repeat"], r["fold"], repr(r["nmi"])])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "environment", "seed", "lambda", "n",
                    "mean", "std", "min", "q1", "median", "q3", "max"])
        c = self.config
        for lam in sorted(self.lambdas):
            v = np.array(self.nmi_values(lam))
            if len(v):
                q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
                std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
                stats = [float(v.mean()), std, *map(float, q)]
            else:
                stats = [float("nan")] * 7
            w.writerow([c.dataset, c.algorithm, c.environment, c.seed, lam, len(v), *map(repr, stats)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "config": asdict(self.config),
            "lambdas": sorted(self.lambdas),
            "best_lambda": self.best_lambda(),
            "aggregates": {str(lam): self.reports[lam].aggregates() for lam in sorted(self.lambdas)},
        }, indent=2, sort_keys=True)


def run_grid(config: RunConfig, ds: Dataset, lambdas=LAMBDA_GRID, jobs: int = 1) -> GridReport:
    lambdas = sorted(set(int(v) for v in lambdas))
    if not lambdas:
        raise ValueError("lambda grid is empty")
    reports = {}
    for lam in lambdas:
        cfg = RunConfig(**{**asdict(config), "lam": lam})
        reports[lam] = run_eval(cfg, ds, jobs)
    return GridReport(config, lambdas, reports)
