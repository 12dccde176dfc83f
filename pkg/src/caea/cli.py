"""Command-line harness: train, eval, grid, predict, inspect.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from caea.dataio import DATA_DIR_ENV, DataError, Mode, StreamOrder, load_csv, order_stream, resolve_dataset
from caea.experiment import LAMBDA_GRID, RunConfig, run_eval, run_grid, structure, train
from caea.hierarchy import RECURSE_MIN_K, HcaeaTree
from caea.model import CaeaModel, ConfigError, StateError

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _add_run_args(p: argparse.ArgumentParser, lam_required: bool = True) -> None:
    p.add_argument("dataset", help=f"CSV path, builtin name (iris, wine, breast_cancer), or a name found in ${DATA_DIR_ENV}")
    p.add_argument("--algorithm", choices=("caea", "hcaea"), default="caea")
    if lam_required:
        p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--age-max", type=int, default=10)
    p.add_argument("--env", choices=[m.value for m in Mode], default="stationary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--aging-policy", choices=("algorithm1", "prose"), default="algorithm1")
    p.add_argument("--recurse-min-k", type=int, default=RECURSE_MIN_K)
    p.add_argument("--header", action="store_true", help="first CSV row is a header")
    p.add_argument("--label-column", type=int, default=-1)
    p.add_argument("--out", type=Path, default=Path("results"))


def _add_cv_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)


def _config(args, lam: int | None = None) -> RunConfig:
    return RunConfig(
        dataset=args.dataset,
        algorithm=args.algorithm,
        lam=args.lam if lam is None else lam,
        age_max=args.age_max,
        environment=args.env,
        repeats=getattr(args, "repeats", 1),
        folds=getattr(args, "folds", 2),
        seed=args.seed,
        aging_policy=args.aging_policy,
        recurse_min_k=args.recurse_min_k,
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_train(args) -> int:
    config = _config(args)
    ds = resolve_dataset(args.dataset, args.header, args.label_column)
    order = order_stream(ds.labels, np.arange(ds.n), StreamOrder(Mode(config.environment), config.seed))
    t0 = time.perf_counter()
    model = train(config, ds.points[order], ds.labels[order])
    elapsed = time.perf_counter() - t0
    name = "tree.json" if config.algorithm == "hcaea" else "model.json"
    _write(args.out / name, model.dumps())
    _write(args.out / "config.json", json.dumps(asdict(config), indent=2, sort_keys=True))
    s = structure(model)
    print(f"nodes={s['node_count']} leaves={s['leaf_count']} depth={s['depth']} "
          f"train_seconds={elapsed:.3f} -> {args.out / name}")
    return 0


def cmd_eval(args) -> int:
    config = _config(args)
    ds = resolve_dataset(args.dataset, args.header, args.label_column)
    report = run_eval(config, ds, args.jobs)
    _write(args.out / "eval.csv", report.to_csv())
    _write(args.out / "eval.json", report.to_json())
    agg = report.aggregates()
    failed = sum(r["status"] != "ok" for r in report.records)
    for key in ("accuracy", "nmi", "ari", "macro_f1", "node_count"):
        print(f"{key:>10}: {agg[key]['mean']:.3f} ({agg[key]['std']:.3f})")
    if failed:
        print(f"{failed} fold(s) failed; see {args.out / 'eval.csv'}")
    return 0


def cmd_grid(args) -> int:
    lambdas = args.lambdas or list(LAMBDA_GRID)
    config = _config(args, lam=lambdas[0])
    ds = resolve_dataset(args.dataset, args.header, args.label_column)
    grid = run_grid(config, ds, lambdas, args.jobs)
    _write(args.out / "grid_nmi.csv", grid.distribution_csv())
    _write(args.out / "grid_summary.csv", grid.summary_csv())
    _write(args.out / "grid.json", grid.to_json())
    for lam in grid.lambdas:
        print(f"lambda={lam:3d} mean NMI={grid.reports[lam].mean('nmi'):.3f}")
    print(f"best lambda: {grid.best_lambda()}")
    return 0


def _load_model(path: Path):
    d = json.loads(path.read_text(encoding="utf-8"))
    if d.get("format") == "hcaea-tree":
        return HcaeaTree.from_dict(d)
    return CaeaModel.from_dict(d)


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    ds = load_csv(args.data, args.header, args.label_column) if args.labeled else None
    if ds is None:
        X = np.loadtxt(args.data, delimiter=",", ndmin=2, skiprows=1 if args.header else 0)
    else:
        X = ds.points
    out = sys.stdout
    out.write("index,prediction\n")
    for i, p in enumerate(model.predict(X)):
        out.write(f"{i},{'' if p is None else p}\n")
    return 0


def cmd_inspect(args) -> int:
    model = _load_model(args.model)
    if isinstance(model, HcaeaTree):
        print(f"HCAEA tree: depth={model.depth} nodes={model.node_count()} leaves={model.leaf_count()} "
              f"lambda={model.params.lam} age_max={model.params.age_max}")
        for node in model.nodes():
            m = node.model
            vt = "unset" if m.v_threshold is None else f"{m.v_threshold:.4f}"
            print(f"  inputs={len(node.indices):5d} nodes={m.n_nodes:3d} edges={len(m.edges):3d} "
                  f"children={sorted(node.children)} v_threshold={vt}")
    else:
        m = model
        comps = m.components()
        vt = "unset" if m.v_threshold is None else f"{m.v_threshold:.6f}"
        print(f"CAEA model: nodes={m.n_nodes} edges={len(m.edges)} clusters={len(set(comps.tolist()))} "
              f"inputs={m.input_count} v_threshold={vt} lambda={m.params.lam} age_max={m.params.age_max}")
        for k, node in enumerate(m.nodes):
            print(f"  [{k}] M={node.win_count} sigma={node.sigma:.4g} cluster={comps[k]} "
                  f"labels={node.label_histogram}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="caea", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a full dataset and save the model")
    _add_run_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="repeated k-fold evaluation")
    _add_run_args(p)
    _add_cv_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="evaluate a lambda grid and report NMI distributions")
    _add_run_args(p, lam_required=False)
    _add_cv_args(p)
    p.add_argument("--lambdas", type=int, nargs="+", help=f"default: {' '.join(map(str, LAMBDA_GRID))}")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("predict", help="classify rows of a CSV with a saved model")
    p.add_argument("model", type=Path)
    p.add_argument("data", type=Path)
    p.add_argument("--header", action="store_true")
    p.add_argument("--labeled", action="store_true", help="data has a label column to drop")
    p.add_argument("--label-column", type=int, default=-1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("inspect", help="summarize a saved model or tree")
    p.add_argument("model", type=Path)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (StateError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
