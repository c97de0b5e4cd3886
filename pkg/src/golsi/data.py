"""Datasets: embedded Iris, the Wisconsin diagnostic breast cancer CSV, MNIST IDX.

All arrays are float64. Targets are one-hot for multi-class problems and a
single {0, 1} column for binary ones; :func:`one_hot_binary` expands the latter
for twin-output networks.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from golsi._iris import IRIS_CSV

BCWD_FEATURES = 30
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class DataError(Exception):
    """Raised for missing or malformed dataset files."""


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise ValueError("inputs and targets must be 2-D")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError(
                f"row mismatch: {self.inputs.shape[0]} inputs vs "
                f"{self.targets.shape[0]} targets"
            )

    @property
    def M(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_dim(self) -> int:
        return self.targets.shape[1]

    def subset(self, index, name: Optional[str] = None) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.inputs[index], self.targets[index], name or self.name)


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    shuffle_seed: Optional[int] = None


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, d: Dataset) -> Dataset:
        safe = np.where(self.std > 0, self.std, 1.0)
        z = (d.inputs - self.mean) / safe
        z[:, self.std == 0] = 0.0
        return replace(d, inputs=z)


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], k))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def one_hot_binary(d: Dataset) -> Dataset:
    """Expand a single {0,1} target column into two one-hot columns."""
    if d.output_dim != 1:
        return d
    labels = d.targets[:, 0].astype(np.int64)
    return replace(d, targets=_one_hot(labels, 2))


def load_iris() -> Dataset:
    raw = np.loadtxt(io.StringIO(IRIS_CSV), delimiter=",")
    labels = raw[:, 4].astype(np.int64)
    return Dataset(raw[:, :4].copy(), _one_hot(labels, 3), "iris")


def bundled_bcwd_path() -> Path:
    return Path(str(resources.files("golsi") / "resources" / "wdbc.csv"))


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_bcwd(path=None) -> Dataset:
    """Parse the UCI ``wdbc.data`` layout: id, diagnosis (M/B), 30 features.

    A header line is skipped when its first token is not numeric. Malignant
    maps to 1.
    """
    path = Path(path) if path is not None else bundled_bcwd_path()
    if not path.is_file():
        raise DataError(f"BCWD file not found: {path}")
    features, labels = [], []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            tokens = [t.strip() for t in line.split(",")]
            if lineno == 1 and not _is_number(tokens[0]):
                continue
            if len(tokens) != BCWD_FEATURES + 2:
                raise DataError(
                    f"{path}:{lineno}: expected {BCWD_FEATURES + 2} columns, "
                    f"got {len(tokens)}"
                )
            diag = tokens[1].upper()
            if diag not in ("M", "B"):
                raise DataError(f"{path}:{lineno}: bad diagnosis {tokens[1]!r}")
            try:
                row = [float(t) for t in tokens[2:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric feature ({exc})") from None
            features.append(row)
            labels.append(1.0 if diag == "M" else 0.0)
    if not features:
        raise DataError(f"{path}: no observations")
    return Dataset(np.array(features), np.array(labels)[:, None], "bcwd")


def _read_idx_header(fh, magic: int, ndim: int, path) -> tuple:
    head = fh.read(4 * (ndim + 1))
    if len(head) != 4 * (ndim + 1):
        raise DataError(f"{path}: truncated IDX header")
    values = struct.unpack(f">{ndim + 1}I", head)
    if values[0] != magic:
        raise DataError(f"{path}: bad magic 0x{values[0]:08x}, expected 0x{magic:08x}")
    return values[1:]


def load_mnist_idx(images, labels) -> Dataset:
    """Read an IDX image/label file pair; pixels are scaled to [0, 1]."""
    for p in (images, labels):
        if not Path(p).is_file():
            raise DataError(f"IDX file not found: {p}")
    with open(images, "rb") as fh:
        n, rows, cols = _read_idx_header(fh, IDX_IMAGES_MAGIC, 3, images)
        pix = np.frombuffer(fh.read(), dtype=np.uint8)
    with open(labels, "rb") as fh:
        (n_lab,) = _read_idx_header(fh, IDX_LABELS_MAGIC, 1, labels)
        lab = np.frombuffer(fh.read(), dtype=np.uint8)
    if n != n_lab:
        raise DataError(f"image count {n} != label count {n_lab}")
    if pix.size != n * rows * cols or lab.size != n:
        raise DataError("IDX payload size does not match header dimensions")
    x = pix.reshape(n, rows * cols).astype(np.float64) / 255.0
    return Dataset(x, _one_hot(lab.astype(np.int64), 10), "mnist")


def data_dir() -> Path:
    return Path(os.environ.get("GOLS_DATA_DIR", "."))


def standardize(d: Dataset, stats_from: Optional[Sequence[int]] = None):
    """Z-score every input column with population statistics from ``stats_from`` rows.

    Returns the transformed dataset and the :class:`Standardization` record so
    a test split can reuse the training statistics.
    """
    if stats_from is None:
        stats_from = np.arange(d.M)
    idx = np.asarray(stats_from, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("stats_from must be non-empty")
    ref = d.inputs[idx]
    mean, std = ref.mean(axis=0), ref.std(axis=0)
    # a constant column can show a round-off std of ~1e-16; treat it as constant
    std = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 0.0, std)
    stats = Standardization(mean, std)
    return stats.apply(d), stats


def split(d: Dataset, s: SplitSpec):
    if s.train_count <= 0 or s.test_count < 0:
        raise ValueError("train_count must be positive and test_count non-negative")
    if s.train_count + s.test_count > d.M:
        raise ValueError(
            f"split {s.train_count}+{s.test_count} exceeds {d.M} observations"
        )
    order = np.arange(d.M)
    if s.shuffle_seed is not None:
        order = np.random.default_rng(s.shuffle_seed).permutation(d.M)
    train = d.subset(order[: s.train_count], f"{d.name}-train")
    test = d.subset(order[s.train_count : s.train_count + s.test_count], f"{d.name}-test")
    return train, test


def prepare(d: Dataset, s: Optional[SplitSpec] = None):
    """Split, then standardize both halves with the training statistics."""
    if s is None:
        train, test = d, d.subset([], f"{d.name}-test")
    else:
        train, test = split(d, s)
    train, stats = standardize(train)
    return train, stats.apply(test)
