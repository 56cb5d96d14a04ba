"""Feature encoding: name->value maps to dense float64 matrices.

Columns are derived from training data only: a name with any string value
becomes one-hot indicator columns over its observed vocabulary; everything
else (bools, numbers, absent markers) becomes one numeric column with
ABSENT encoded as a large sentinel, so absence separates from any observed
value through ordinary threshold splits.
"""

from __future__ import annotations

import numpy as np

SENTINEL = 1e18


class SchemaMismatch(ValueError):
    """Query feature names differ from the training schema."""


class FeatureTable:
    """Append-only columnar store of feature rows sharing one name schema."""

    def __init__(self, names: list[str]):
        self.names = list(names)
        self._name_set = set(names)
        self.rows = 0
        self._cols: dict[str, list] = {n: [] for n in names}
        self._frozen: dict[str, np.ndarray] | None = None

    @classmethod
    def from_rows(cls, rows) -> "FeatureTable":
        rows = list(rows)
        if not rows:
            raise ValueError("no rows")
        table = cls(sorted(rows[0].keys()))
        for r in rows:
            table.append(r)
        return table

    def append(self, row: dict) -> None:
        if set(row) != self._name_set:
            raise SchemaMismatch(
                f"row names differ from schema: +{sorted(set(row) - self._name_set)} "
                f"-{sorted(self._name_set - set(row))}"
            )
        for n in self.names:
            self._cols[n].append(row[n])
        self.rows += 1
        self._frozen = None

    def column(self, name: str) -> np.ndarray:
        """Numeric float64 view (sentinel for absent/str) or object array."""
        return self._freeze()[name]

    def _freeze(self) -> dict[str, np.ndarray]:
        if self._frozen is None:
            frozen = {}
            for n in self.names:
                values = self._cols[n]
                if any(isinstance(v, str) for v in values):
                    frozen[n] = np.array(values, dtype=object)
                else:
                    frozen[n] = np.array(
                        [SENTINEL if v is None else float(v) for v in values],
                        dtype=np.float64,
                    )
            self._frozen = frozen
        return self._frozen


class Encoder:
    """Column layout learned from a training table, applied to any table."""

    def __init__(self, table: FeatureTable):
        self.names = list(table.names)
        self.columns: list[tuple] = []  # ("num", name) | ("onehot", name, value)
        for n in self.names:
            col = table.column(n)
            if col.dtype == object:
                vocab = sorted({v for v in col if isinstance(v, str)})
                for v in vocab:
                    self.columns.append(("onehot", n, v))
                if not vocab:
                    self.columns.append(("num", n))
            else:
                self.columns.append(("num", n))
        self.feature_names = [
            c[1] if c[0] == "num" else f"{c[1]}=={c[2]}" for c in self.columns
        ]

    @property
    def width(self) -> int:
        return len(self.columns)

    def transform(self, table: FeatureTable) -> np.ndarray:
        if table.names != self.names:
            raise SchemaMismatch("table schema differs from training schema")
        out = np.empty((table.rows, len(self.columns)), dtype=np.float64)
        for i, spec in enumerate(self.columns):
            col = table.column(spec[1])
            if spec[0] == "num":
                if col.dtype == object:
                    out[:, i] = np.array(
                        [SENTINEL if (v is None or isinstance(v, str)) else float(v) for v in col],
                        dtype=np.float64,
                    )
                else:
                    out[:, i] = col
            else:
                if col.dtype == object:
                    out[:, i] = (col == spec[2]).astype(np.float64)
                else:
                    out[:, i] = 0.0
        return np.ascontiguousarray(out)

    def transform_rows(self, rows: list[dict]) -> np.ndarray:
        table = FeatureTable(self.names)
        for r in rows:
            table.append(r)
        return self.transform(table)
