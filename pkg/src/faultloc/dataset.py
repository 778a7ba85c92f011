"""Sample containers, two-field fusion, normalization, splitting and CSV I/O."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

NUM_CLASSES = 8


class FieldId(enum.Enum):
    """Physical measurement channel a raw signal was taken from."""

    FIELD_I = "FieldI"  # total deformation, mm
    FIELD_II = "FieldII"  # equivalent stress, MPa


@dataclass(frozen=True)
class RawSample:
    label: int
    field_id: FieldId
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not 0 <= self.label < NUM_CLASSES:
            raise ValueError(f"label {self.label} outside [0, {NUM_CLASSES - 1}]")
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain non-finite entries")
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        if not isinstance(other, RawSample):
            return NotImplemented
        return (self.label == other.label and self.field_id == other.field_id
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class FusedSample:
    label: int
    features: np.ndarray


@dataclass
class Dataset:
    """Labeled feature matrix.

    ``provenance`` carries one tag per row (``"real"``, ``"generated"``, ...)
    so later stages can assert where each sample came from.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int = NUM_CLASSES
    provenance: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on sample count")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("label outside [0, num_classes)")
        if self.provenance is None:
            self.provenance = np.full(len(self.labels), "real", dtype=object)
        else:
            self.provenance = np.asarray(self.provenance, dtype=object)
            if self.provenance.shape != self.labels.shape:
                raise ValueError("provenance must have one tag per sample")

    def __len__(self):
        return len(self.labels)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_samples(cls, samples, num_classes=NUM_CLASSES) -> "Dataset":
        samples = list(samples)
        if not samples:
            raise ValueError("no samples")
        features = np.stack([s.features for s in samples])
        labels = np.array([s.label for s in samples])
        return cls(features, labels, num_classes)

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.features[index], self.labels[index], self.num_classes,
                       self.provenance[index])

    def with_features(self, features) -> "Dataset":
        return Dataset(features, self.labels.copy(), self.num_classes, self.provenance.copy())

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(np.vstack([self.features, other.features]),
                       np.concatenate([self.labels, other.labels]),
                       self.num_classes,
                       np.concatenate([self.provenance, other.provenance]))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


def fuse_fields(a: RawSample, b: RawSample) -> FusedSample:
    """Concatenate a FieldI sample with the FieldII sample of the same label."""
    if a.label != b.label:
        raise ValueError(f"label mismatch: {a.label} != {b.label}")
    if a.field_id is not FieldId.FIELD_I or b.field_id is not FieldId.FIELD_II:
        raise ValueError("fuse_fields expects (FieldI, FieldII) in that order")
    return FusedSample(a.label, np.concatenate([a.values, b.values]))


def fuse_by_index(samples) -> list[FusedSample]:
    """Pair the i-th FieldI and i-th FieldII sample of every class and fuse them."""
    by_key: dict[tuple[int, FieldId], list[RawSample]] = {}
    for s in samples:
        by_key.setdefault((s.label, s.field_id), []).append(s)
    fused = []
    for label in sorted({lab for lab, _ in by_key}):
        first = by_key.get((label, FieldId.FIELD_I), [])
        second = by_key.get((label, FieldId.FIELD_II), [])
        if len(first) != len(second):
            raise ValueError(f"class {label}: {len(first)} FieldI vs {len(second)} FieldII samples")
        fused.extend(fuse_fields(a, b) for a, b in zip(first, second))
    return fused


def interval_sample(features, stride: int) -> np.ndarray:
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return np.asarray(features, dtype=np.float64)[..., ::stride]


def normalize_minmax(data: Dataset) -> Dataset:
    """Per-column min-max scaling to [0, 1]; constant columns become 0."""
    if len(data) == 0:
        raise ValueError("cannot normalize an empty dataset")
    x = data.features
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature values")
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (x - lo) / safe, 0.0)
    return data.with_features(out)


def split_train_test(data: Dataset, train_fraction: float, seed: int):
    """Stratified random split; per class ``round(train_fraction * n_c)`` go to training."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in range(data.num_classes):
        idx = np.flatnonzero(data.labels == c)
        if idx.size == 0:
            continue
        if idx.size < 2:
            raise ValueError(f"class {c} has fewer than 2 samples")
        idx = rng.permutation(idx)
        n_train = int(round(train_fraction * idx.size))
        n_train = min(max(n_train, 1), idx.size - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    return (data.subset(np.sort(np.concatenate(train_idx))),
            data.subset(np.sort(np.concatenate(test_idx))))


def kfold(data: Dataset, k: int):
    """Contiguous, unshuffled k-fold partition.

    Returns a list of ``(train, validation)`` pairs. Fold sizes differ by at
    most one, larger folds first.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    counts = data.class_counts()
    present = counts[counts > 0]
    if present.size and k > present.min():
        raise ValueError(f"k={k} exceeds the smallest class size {present.min()}")
    folds = np.array_split(np.arange(len(data)), k)
    pairs = []
    for i, val_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        pairs.append((data.subset(train_idx), data.subset(val_idx)))
    return pairs


def write_csv(samples, path) -> None:
    samples = list(samples)
    width = max((s.values.size for s in samples), default=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "field_id"] + [f"f{i}" for i in range(width)])
        for s in samples:
            # repr() round-trips float64 exactly
            writer.writerow([s.label, s.field_id.value] + [repr(float(v)) for v in s.values])


def read_csv(path) -> list[RawSample]:
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: no header")
        if header[:2] != ["label", "field_id"]:
            raise ValueError(f"{path}: line 1: expected header 'label,field_id,f0,...'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                label = int(row[0])
                field_id = FieldId(row[1])
                values = np.array([float(v) for v in row[2:] if v != ""], dtype=np.float64)
                samples.append(RawSample(label, field_id, values))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return samples


def per_class_index(labels, num_classes=NUM_CLASSES) -> list[np.ndarray]:
    labels = np.asarray(labels)
    return [np.flatnonzero(labels == c) for c in range(num_classes)]


def interleave_by_class(data: Dataset) -> Dataset:
    """Reorder rows round-robin over classes (class 0, 1, ..., 0, 1, ...).

    Contiguous folds over the result keep every class in every fold.
    """
    groups = per_class_index(data.labels, data.num_classes)
    longest = max((g.size for g in groups), default=0)
    order = [g[i] for i in range(longest) for g in groups if i < g.size]
    return data.subset(order)
