"""Dataset loading, stream orderings and cross-validation folds.

Randomness comes from numpy's PCG64 generator. Every stream is seeded with
``SeedSequence([seed, *keys])`` so that a (seed, repeat, fold) triple maps
to the same draws on every platform.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import os
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DATA_DIR_ENV = "CAEA_DATA_DIR"

BUILTIN = ("iris", "wine", "breast_cancer")

MANIFEST = Path(__file__).with_name("datasets.manifest")


class DataError(ValueError):
    """Unreadable or malformed dataset."""


@dataclass
class Dataset:
    points: np.ndarray
    labels: np.ndarray
    name: str = ""
    classes: tuple = ()

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2 or len(self.points) != len(self.labels):
            raise DataError("points must be (N, d) with one label per point")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def load_csv(path, has_header: bool = False, label_column: int = -1,
             delimiter: str | None = ",", name: str | None = None) -> Dataset:
    """Read numeric features and one categorical label column.

    Labels are renumbered 0..C-1 in order of first appearance; features are
    left untouched. ``delimiter=None`` splits on runs of whitespace.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    if delimiter is None:
        rows = [(n, line.split()) for n, line in enumerate(lines, 1)]
    else:
        rows = list(zip(range(1, len(lines) + 1), csv.reader(lines, delimiter=delimiter)))
    rows = [(n, r) for n, r in rows if r and any(c.strip() for c in r)]
    if has_header:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0][1])
    if width < 2:
        raise DataError(f"{path}, line {rows[0][0]}: need at least one feature and a label")
    col = label_column % width if -width <= label_column < width else None
    if col is None:
        raise DataError(f"{path}: label column {label_column} out of range for {width} columns")

    points, raw = [], []
    for n, r in rows:
        if len(r) != width:
            raise DataError(f"{path}, line {n}: expected {width} fields, found {len(r)}")
        try:
            points.append([float(v) for i, v in enumerate(r) if i != col])
        except ValueError:
            bad = next(v for i, v in enumerate(r) if i != col and not _is_float(v))
            raise DataError(f"{path}, line {n}: non-numeric feature {bad!r}") from None
        raw.append(r[col].strip())

    classes = tuple(dict.fromkeys(raw))
    code = {c: i for i, c in enumerate(classes)}
    pts = np.array(points, dtype=np.float64)
    if not np.all(np.isfinite(pts)):
        raise DataError(f"{path}: features must be finite")
    return Dataset(pts, [code[c] for c in raw], name or path.stem, classes)


def _is_float(v: str) -> bool:
    try:
        float(v)
    except ValueError:
        return False
    return True


def save_csv(ds: Dataset, path) -> None:
    """Write features then the original class name, no header."""
    names = ds.classes or tuple(str(i) for i in range(int(ds.labels.max()) + 1))
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        for x, c in zip(ds.points, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [names[c]])


def load_builtin(name: str) -> Dataset:
    """One of the small UCI sets that ship with scikit-learn."""
    from sklearn import datasets

    loaders = {
        "iris": datasets.load_iris,
        "wine": datasets.load_wine,
        "breast_cancer": datasets.load_breast_cancer,
    }
    if name not in loaders:
        raise DataError(f"unknown builtin dataset {name!r}; choose from {BUILTIN}")
    bunch = loaders[name]()
    return Dataset(bunch.data, bunch.target, name, tuple(str(t) for t in bunch.target_names))


def read_manifest(path=MANIFEST) -> dict[str, dict]:
    """Parse ``name url rows cols sha256 delimiter`` lines."""
    entries = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, url, rows, cols, digest, delim = line.split()
        entries[name] = {
            "url": url,
            "rows": int(rows),
            "cols": int(cols),
            "sha256": None if digest == "-" else digest,
            "delimiter": {"comma": ",", "tab": "\t", "space": None}[delim],
        }
    return entries


def data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def fetch_dataset(name: str, dest: Path | None = None, manifest=MANIFEST) -> Path:
    """Download ``name`` per the manifest and check its shape and hash."""
    entry = read_manifest(manifest)[name]
    dest = Path(dest or data_dir())
    dest.mkdir(parents=True, exist_ok=True)
    target = dest / f"{name}.txt"
    with urllib.request.urlopen(entry["url"], timeout=60) as resp:
        blob = resp.read()
    if entry["sha256"] and hashlib.sha256(blob).hexdigest() != entry["sha256"]:
        raise DataError(f"{name}: content hash does not match the manifest")
    target.write_bytes(blob)
    ds = load_csv(target, delimiter=entry["delimiter"], name=name)
    if (ds.n, ds.dim) != (entry["rows"], entry["cols"]):
        raise DataError(f"{name}: expected {entry['rows']}x{entry['cols']}, got {ds.n}x{ds.dim}")
    return target


def resolve_dataset(source: str, has_header: bool = False, label_column: int = -1) -> Dataset:
    """Load ``source`` as a file path, a builtin name, or a file in the data directory."""
    path = Path(source)
    if path.is_file():
        delim = None if path.suffix == ".txt" else ","
        return load_csv(path, has_header, label_column, delim)
    if source in BUILTIN:
        return load_builtin(source)
    manifest = read_manifest()
    for suffix, delim in ((".csv", ","), (".txt", None)):
        cand = data_dir() / f"{source}{suffix}"
        if cand.is_file():
            if source in manifest and suffix == ".txt":
                delim = manifest[source]["delimiter"]
            return load_csv(cand, has_header, label_column, delim, name=source)
    hint = f"; fetch it from {manifest[source]['url']}" if source in manifest else ""
    raise DataError(f"dataset {source!r} not found as a file, builtin, or in {data_dir()}{hint}")


class Mode(str, enum.Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


@dataclass(frozen=True)
class StreamOrder:
    mode: Mode
    seed: int


def order_stream(labels, indices, order: StreamOrder, *keys: int) -> np.ndarray:
    """Presentation order for the points at ``indices``.

    Stationary: a uniform shuffle. Non-stationary: all of class 0 (shuffled),
    then all of class 1, and so on in ascending class id.
    """
    labels = np.asarray(labels)
    indices = np.asarray(indices, dtype=np.int64)
    rng = rng_for(order.seed, *keys)
    if Mode(order.mode) is Mode.STATIONARY:
        return rng.permutation(indices)
    blocks = [rng.permutation(indices[labels[indices] == c]) for c in np.unique(labels[indices])]
    return np.concatenate(blocks) if blocks else indices


@dataclass
class FoldPlan:
    repeats: int
    folds: int
    assignments: list[np.ndarray]

    def split(self, repeat: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
        a = self.assignments[repeat]
        return np.flatnonzero(a != fold), np.flatnonzero(a == fold)


def make_folds(labels, repeats: int = 2, folds: int = 10, seed: int = 0) -> FoldPlan:
    """Stratified fold ids for each repeat.

    Each class is shuffled and the classes are dealt round-robin into the
    folds one after another, so fold sizes differ by at most one and each
    fold holds floor or ceil of its share of every class.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError(f"cannot make {folds} folds from {n} instances")
    assignments = []
    for r in range(repeats):
        rng = rng_for(seed, r)
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)])
        a = np.empty(n, dtype=np.int64)
        a[order] = np.arange(n) % folds
        assignments.append(a)
    return FoldPlan(repeats, folds, assignments)
