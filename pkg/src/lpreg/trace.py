"""Per-iteration solve traces with JSON-lines serialization."""

from __future__ import annotations

import json
from typing import Any, Iterator

import numpy as np

__all__ = ["SolveTrace"]


class SolveTrace:
    """An append-only list of per-iteration records.

    Every record carries at least ``iter``, ``F`` (exact objective value) and
    ``nnz``; solvers add their own fields (``eps`` for reweighting schemes,
    ``H``/``sigma``/``mu``/``beta`` for the smoothed-gradient scheme).  One
    record per line when written as JSON lines.
    """

    def __init__(self, records: list[dict[str, Any]] | None = None):
        self.records: list[dict[str, Any]] = records if records is not None else []

    def append(self, **fields: Any) -> None:
        clean = {}
        for k, v in fields.items():
            if isinstance(v, (np.floating, np.integer)):
                v = v.item()
            clean[k] = v
        self.records.append(clean)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[dict[str, Any]]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def values(self, key: str) -> np.ndarray:
        """Column of one field across iterations (NaN where absent)."""
        return np.array([r.get(key, np.nan) for r in self.records], dtype=np.float64)

    @property
    def f_values(self) -> np.ndarray:
        return self.values("F")

    def final(self) -> dict[str, Any]:
        if not self.records:
            raise IndexError("empty trace")
        return self.records[-1]

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "SolveTrace":
        records = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return cls(records)
