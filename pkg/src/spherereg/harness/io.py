"""CSV instances: ``d`` feature columns, then the target, then (optionally) a weight."""
from __future__ import annotations

import csv

import numpy as np

from ..instance import RegressionInstance


class DataError(ValueError):
    pass


def write_csv(path_or_file, instance, header=False, weighted=False):
    d = instance.d
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"a{j}" for j in range(d)] + ["b"] + (["w"] if weighted else []))
        for i in range(instance.n):
            row = [repr(float(v)) for v in instance.A[i]] + [repr(float(instance.b[i]))]
            if weighted:
                row.append(repr(float(instance.weights[i])))
            w.writerow(row)
    finally:
        if own:
            fh.close()


def read_csv(path_or_file, header=False, weighted=False):
    own = isinstance(path_or_file, str)
    try:
        fh = open(path_or_file, newline="") if own else path_or_file
    except OSError as exc:
        raise DataError(f"cannot open {path_or_file}: {exc.strerror}") from None
    try:
        rows = list(csv.reader(fh))
    finally:
        if own:
            fh.close()
    if header:
        rows = rows[1:]
        first = 2
    else:
        first = 1
    data, width = [], None
    for k, row in enumerate(rows):
        line = k + first
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
            if width < (4 if weighted else 3):
                raise DataError(f"row {line}: need at least {'4' if weighted else '3'} columns, got {width}")
        if len(row) != width:
            raise DataError(f"row {line}: expected {width} columns, got {len(row)}")
        vals = []
        for j, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(f"row {line}, column {j + 1}: not a number: {cell!r}") from None
        data.append(vals)
    if not data:
        raise DataError("no data rows")
    M = np.array(data)
    if not np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(M))[0]
        raise DataError(f"row {bad[0] + first}, column {bad[1] + 1}: non-finite value")
    if weighted:
        A, b, w = M[:, :-2], M[:, -2], M[:, -1]
    else:
        A, b, w = M[:, :-1], M[:, -1], None
    try:
        return RegressionInstance(A, b, w)
    except ValueError as exc:
        raise DataError(str(exc)) from None
