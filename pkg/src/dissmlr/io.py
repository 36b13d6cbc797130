"""CSV readers and writers for matrices, dendrograms, partitions and bench rows.

Reals are written with ``repr``, which round-trips float64 exactly.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import DissimilarityMatrix, Partition, validate_matrix
from .errors import BadPartition, ParseError, RaggedRows
from .hca import Dendrogram, MergeStep

FORMATS = ("square_csv", "lower_triangle_csv")
DENDROGRAM_HEADER = ["step", "left", "right", "delta_e", "error_after", "new_size"]
PARTITION_HEADER = ["object", "cluster"]


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            yield lineno, cells


def _floats(lineno, cells):
    try:
        return [float(c) for c in cells]
    except ValueError as exc:
        raise ParseError(lineno, str(exc)) from None


def _is_numeric(cells):
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def parse_square(rows) -> np.ndarray:
    rows = list(rows)
    if rows and not _is_numeric(rows[0][1]):
        rows = rows[1:]
    data = [_floats(lineno, cells) for lineno, cells in rows]
    n = len(data)
    for (lineno, _), r in zip(rows, data):
        if len(r) != n:
            raise RaggedRows(f"line {lineno}: expected {n} values, got {len(r)}")
    return np.array(data, dtype=np.float64).reshape(n, n)


def parse_lower_triangle(rows) -> np.ndarray:
    data = [(lineno, _floats(lineno, cells)) for lineno, cells in rows]
    n = len(data) + 1
    a = np.zeros((n, n))
    for i, (lineno, r) in enumerate(data, start=1):
        if len(r) != i:
            raise RaggedRows(f"line {lineno}: expected {i} values, got {len(r)}")
        a[i, :i] = r
        a[:i, i] = r
    return a


def load_matrix(path, format: str = "square_csv", tolerance: float = 1e-9) -> DissimilarityMatrix:
    """Read a dissimilarity matrix.

    ``square_csv`` holds ``N`` rows of ``N`` values, optionally preceded by a
    non-numeric header row.  ``lower_triangle_csv`` holds ``N - 1`` rows, the
    ``i``-th one listing ``d(i, 0) .. d(i, i-1)``.
    """
    if format == "square_csv":
        raw = parse_square(_rows(path))
    elif format == "lower_triangle_csv":
        raw = parse_lower_triangle(_rows(path))
    else:
        raise ValueError(f"unknown matrix format {format!r}; expected one of {FORMATS}")
    return validate_matrix(raw, tolerance)


def save_matrix(D: DissimilarityMatrix, path, format: str = "square_csv") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if format == "square_csv":
            for row in D.values:
                w.writerow([repr(float(x)) for x in row])
        elif format == "lower_triangle_csv":
            for i in range(1, D.n):
                w.writerow([repr(float(x)) for x in D.values[i, :i]])
        else:
            raise ValueError(f"unknown matrix format {format!r}")


def save_dendrogram(dend: Dendrogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DENDROGRAM_HEADER)
        for s in dend.steps:
            w.writerow([s.step, s.left, s.right, repr(s.delta_e), repr(s.error_after), s.new_size])


def load_dendrogram(path) -> Dendrogram:
    rows = list(_rows(path))
    if not rows or rows[0][1] != DENDROGRAM_HEADER:
        raise ParseError(rows[0][0] if rows else 1, "missing dendrogram header")
    steps = []
    for lineno, cells in rows[1:]:
        if len(cells) != len(DENDROGRAM_HEADER):
            raise RaggedRows(f"line {lineno}: expected {len(DENDROGRAM_HEADER)} fields")
        try:
            steps.append(MergeStep(int(cells[0]), int(cells[1]), int(cells[2]),
                                   float(cells[3]), float(cells[4]), int(cells[5])))
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
    return Dendrogram(len(steps) + 1, steps)


def save_partition(P: Partition | np.ndarray, path) -> None:
    labels = P.labels if isinstance(P, Partition) else np.asarray(P)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PARTITION_HEADER)
        for i, c in enumerate(labels):
            w.writerow([i, int(c)])


def load_partition_labels(path) -> np.ndarray:
    rows = list(_rows(path))
    if not rows or rows[0][1] != PARTITION_HEADER:
        raise ParseError(rows[0][0] if rows else 1, "missing partition header")
    labels = {}
    for lineno, cells in rows[1:]:
        try:
            obj, c = int(cells[0]), int(cells[1])
        except (ValueError, IndexError) as exc:
            raise ParseError(lineno, str(exc)) from None
        labels[obj] = c
    if sorted(labels) != list(range(len(labels))):
        raise BadPartition("partition objects must be numbered 0..N-1")
    return np.array([labels[i] for i in range(len(labels))], dtype=np.intp)


def load_partition(path, D: DissimilarityMatrix) -> Partition:
    return Partition.from_labels(D, load_partition_labels(path))


def write_records(records, fields, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in records:
            w.writerow([repr(v) if isinstance(v, float) else v
                        for v in (getattr(r, f) for f in fields)])


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ensure_parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
