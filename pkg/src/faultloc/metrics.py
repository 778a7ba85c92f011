"""Confusion matrices, run reports and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunReport:
    accuracy: float
    precision: list
    recall: list
    confusion: list
    seed: int = 0
    config: str = ""
    variant: str = "full"
    notes: list = field(default_factory=list)

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def empty_precision_columns(self) -> list:
        """Classes never predicted; their precision is reported as 0."""
        cm = np.asarray(self.confusion)
        return np.flatnonzero(cm.sum(axis=0) == 0).tolist()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "confusion": [list(map(int, row)) for row in self.confusion],
            "seed": int(self.seed),
            "config": self.config,
            "variant": self.variant,
            "macro_precision": self.macro_precision,
            "empty_precision_columns": self.empty_precision_columns,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(d["accuracy"], d["precision"], d["recall"], d["confusion"], d["seed"],
                   d["config"], d["variant"], d.get("notes", []))

    @classmethod
    def read(cls, path) -> "RunReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def confusion_matrix(predictions, truth, k: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape:
        raise ValueError("predictions and truth differ in length")
    if predictions.size and (min(predictions.min(), truth.min()) < 0
                             or max(predictions.max(), truth.max()) >= k):
        raise ValueError(f"labels outside [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (truth, predictions), 1)
    return cm


def evaluate(predictions, truth, k: int, seed: int = 0, config: str = "",
             variant: str = "full") -> RunReport:
    cm = confusion_matrix(predictions, truth, k)
    total = cm.sum()
    diag = np.diag(cm).astype(np.float64)
    col = cm.sum(axis=0)
    row = cm.sum(axis=1)
    precision = np.divide(diag, col, out=np.zeros(k), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros(k), where=row > 0)
    accuracy = float(diag.sum() / total) if total else 0.0
    return RunReport(accuracy, precision.tolist(), recall.tolist(), cm.tolist(), seed, config,
                     variant)


def aggregate(reports) -> dict:
    """Mean and sample standard deviation (0 for a single run) of each scalar metric."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    series = {
        "accuracy": [r.accuracy for r in reports],
        "macro_precision": [r.macro_precision for r in reports],
    }
    k = len(reports[0].precision)
    for c in range(k):
        series[f"precision_{c}"] = [r.precision[c] for r in reports]
        series[f"recall_{c}"] = [r.recall[c] for r in reports]
    out = {}
    for name, values in series.items():
        # fsum keeps the result exactly independent of run order
        n = len(values)
        mean = math.fsum(values) / n
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1) if n > 1 else 0.0
        out[name] = {"mean": mean, "std": math.sqrt(var)}
    out["runs"] = len(reports)
    return out
