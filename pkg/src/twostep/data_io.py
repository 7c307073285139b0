"""LibSVM-format datasets, deterministic splits and CSV result emission."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import (
    EmptyPartition,
    InvalidParam,
    MalformedLine,
    NonFiniteValue,
    NonMonotoneIndex,
    SchemaMismatch,
)

BINARY = "binary"
MULTILABEL = "multilabel"


@dataclass(frozen=True)
class SparseDataset:
    """Rows of (1-based index, value) pairs with per-row labels.

    Binary labels are ints in {-1, +1}; multilabel labels are frozensets of
    non-negative label ids.
    """

    indices: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]
    labels: tuple
    mode: str = BINARY

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dimension(self) -> int:
        return max((int(ix[-1]) for ix in self.indices if ix.size), default=0)

    def subset(self, rows: Sequence[int]) -> "SparseDataset":
        return SparseDataset(
            tuple(self.indices[i] for i in rows),
            tuple(self.values[i] for i in rows),
            tuple(self.labels[i] for i in rows),
            self.mode,
        )

    def to_csr(self, dimension: int | None = None) -> sp.csr_matrix:
        """Feature matrix with LibSVM index j in column j-1."""
        d = self.dimension if dimension is None else dimension
        width = max(d, self.dimension)
        indptr = np.zeros(len(self) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([ix.size for ix in self.indices])
        cols = np.concatenate(self.indices) - 1 if len(self) else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(self.values) if len(self) else np.zeros(0)
        full = sp.csr_matrix((vals, cols, indptr), shape=(len(self), width))
        # Features beyond ``dimension`` (unseen at training time) are dropped.
        return full[:, :d] if width > d else full

    def binary_labels(self) -> np.ndarray:
        if self.mode != BINARY:
            raise InvalidParam("dataset is multilabel")
        return np.asarray(self.labels, dtype=np.int8)

    def label_matrix(self, num_labels: int | None = None) -> np.ndarray:
        """n x m matrix in {-1, +1}; column j is label id j."""
        if self.mode != MULTILABEL:
            raise InvalidParam("dataset is binary")
        if num_labels is None:
            num_labels = 1 + max((max(s) for s in self.labels if s), default=-1)
        y = -np.ones((len(self), num_labels), dtype=np.int8)
        for i, s in enumerate(self.labels):
            for j in s:
                if j < num_labels:
                    y[i, j] = 1
        return y


def _parse_label(field: str, mode: str, lineno: int):
    if mode == BINARY:
        try:
            v = float(field)
        except ValueError:
            raise MalformedLine(lineno, f"bad label {field!r}") from None
        if v in (1.0,):
            return 1
        if v in (-1.0, 0.0):
            return -1
        raise MalformedLine(lineno, f"binary label must be -1, +1, 0 or 1, got {field!r}")
    if field == "":
        return frozenset()
    ids = []
    for part in field.split(","):
        if not part.isdigit():
            raise MalformedLine(lineno, f"bad label id {part!r}")
        ids.append(int(part))
    return frozenset(ids)


def parse_libsvm(stream: TextIO | Iterable[str], mode: str = BINARY) -> SparseDataset:
    """Parse ``label idx:val idx:val ...`` lines; empty lines are skipped
    (in binary mode, whitespace-only lines too).

    Multilabel label fields are comma-separated ids and may be empty, in which
    case the line starts with a space (or holds no features at all).
    """
    if mode not in (BINARY, MULTILABEL):
        raise InvalidParam(f"mode must be {BINARY!r} or {MULTILABEL!r}")
    all_idx, all_val, labels = [], [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        # A lone space is a label-free, feature-free multilabel instance.
        if not line or (mode == BINARY and not line.strip()):
            continue
        label_field, _, rest = line.partition(" ")
        if mode == BINARY and label_field == "":
            raise MalformedLine(lineno, "missing label")
        label = _parse_label(label_field, mode, lineno)
        idx, val = [], []
        prev = 0
        for col, tok in enumerate(rest.split(), start=2):
            key, sep, num = tok.partition(":")
            if not sep or not key.isdigit():
                raise MalformedLine(lineno, f"token {col} {tok!r} is not idx:val")
            j = int(key)
            if j < 1:
                raise MalformedLine(lineno, f"token {col}: index must be >= 1")
            if j <= prev:
                raise NonMonotoneIndex(lineno, f"token {col}: index {j} after {prev}")
            try:
                x = float(num)
            except ValueError:
                raise MalformedLine(lineno, f"token {col}: bad value {num!r}") from None
            if not math.isfinite(x):
                raise NonFiniteValue(lineno, f"token {col}: value {num!r}")
            idx.append(j)
            val.append(x)
            prev = j
        all_idx.append(np.asarray(idx, dtype=np.int64))
        all_val.append(np.asarray(val, dtype=float))
        labels.append(label)
    return SparseDataset(tuple(all_idx), tuple(all_val), tuple(labels), mode)


def serialize_libsvm(dataset: SparseDataset) -> str:
    lines = []
    for ix, vals, label in zip(dataset.indices, dataset.values, dataset.labels):
        if dataset.mode == BINARY:
            head = "+1" if label == 1 else "-1"
        else:
            head = ",".join(str(j) for j in sorted(label))
        feats = " ".join(f"{j}:{_fmt_real(v)}" for j, v in zip(ix, vals))
        lines.append(f"{head} {feats}".rstrip() if head else f" {feats}")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class SplitSpec:
    train: float
    validation: float
    seed: int = 0

    def __post_init__(self):
        for f in (self.train, self.validation):
            if not 0.0 <= f <= 1.0:
                raise InvalidParam(f"fraction {f} outside [0, 1]")
        if self.train + self.validation > 1.0 + 1e-12:
            raise InvalidParam("train + validation fractions exceed 1")

    def sizes(self, n: int) -> tuple[int, int, int]:
        n_train = min(n, int(math.floor(self.train * n + 0.5)))
        n_val = min(n - n_train, int(math.floor(self.validation * n + 0.5)))
        n_test = n - n_train - n_val
        requested = (self.train > 0, self.validation > 0, 1.0 - self.train - self.validation > 1e-12)
        for name, size, want in zip(("train", "validation", "test"), (n_train, n_val, n_test), requested):
            if want and size == 0:
                raise EmptyPartition(f"{name} partition of {n} rows is empty")
        return n_train, n_val, n_test


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_train, n_val, _ = spec.sizes(n)
    perm = np.random.default_rng(spec.seed).permutation(n)
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def split(dataset: SparseDataset, spec: SplitSpec) -> tuple[SparseDataset, SparseDataset, SparseDataset]:
    return tuple(dataset.subset(part) for part in split_indices(len(dataset), spec))


def _fmt_real(v) -> str:
    return "%.17g" % v


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_real(float(v))
    if v is None:
        return ""
    return str(v)


def write_results(rows: Iterable[Mapping[str, object]], schema: Sequence[str]) -> str:
    """CSV text: header first, reals at 17 significant digits, no trailing newline."""
    schema = list(schema)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(schema)
    for i, row in enumerate(rows):
        if set(row) != set(schema):
            raise SchemaMismatch(f"record {i} has columns {sorted(row)}, expected {schema}")
        writer.writerow([_fmt(row[c]) for c in schema])
    return out.getvalue().rstrip("\n")


def read_columns(path_or_stream, dtype=float) -> np.ndarray:
    """Whitespace-separated numeric table, one instance per line, as n x m."""
    try:
        arr = np.loadtxt(path_or_stream, dtype=dtype, ndmin=2)
    except ValueError as exc:
        raise InvalidParam(f"cannot parse numeric table: {exc}") from None
    return arr


def read_labels(path_or_stream) -> np.ndarray:
    """Label table with entries in {-1, +1} or {0, 1}; 0 maps to -1."""
    y = read_columns(path_or_stream)
    if not np.all(np.isin(y, (-1.0, 0.0, 1.0))):
        raise InvalidParam("labels must be -1, 0 or +1")
    return np.where(y > 0, 1, -1).astype(np.int8)
