"""Text formats for walk matrices, vectors and traces.

Matrix files::

    DLRBG v1
    N M D
    <D ascending 0-based row indices of column 0>
    ...

Vector files hold one decimal value per line.
"""

import csv
import io
import os
import tempfile

import numpy as np

from nnlad.linalg import SparseWalkMatrix, as_vector

MATRIX_MAGIC = "DLRBG v1"
TRACE_HEADER = ("iter", "objective", "gap", "dual_infeas")


class FormatError(ValueError):
    """A file does not follow its declared format."""


def atomic_write_text(path, text):
    """Write ``text`` via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_matrix(A):
    lines = [MATRIX_MAGIC, f"{A.n_cols} {A.n_rows} {A.degree}"]
    lines.extend(" ".join(str(int(r)) for r in col) for col in A.col_rows)
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != MATRIX_MAGIC:
        raise FormatError(f"missing '{MATRIX_MAGIC}' header")
    try:
        n, m, d = (int(tok) for tok in lines[1].split())
    except (IndexError, ValueError) as exc:
        raise FormatError("second line must be 'N M D'") from exc
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != n:
        raise FormatError(f"expected {n} column lines, found {len(body)}")
    try:
        cols = [[int(tok) for tok in ln.split()] for ln in body]
    except ValueError as exc:
        raise FormatError("column lines must hold integers") from exc
    for i, col in enumerate(cols):
        if len(col) != d:
            raise FormatError(f"column {i} has {len(col)} entries, expected D={d}")
    try:
        return SparseWalkMatrix(np.array(cols, dtype=np.int64).reshape(n, d), m)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_matrix(path, A):
    atomic_write_text(path, format_matrix(A))


def read_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read())


def format_vector(x):
    return "".join(f"{float(v)!r}\n" for v in np.asarray(x, dtype=np.float64))


def write_vector(path, x):
    atomic_write_text(path, format_vector(x))


def read_vector(path, length=None):
    with open(path) as fh:
        toks = [ln.strip() for ln in fh if ln.strip()]
    try:
        values = [float(t) for t in toks]
    except ValueError as exc:
        raise FormatError(f"{path}: vector lines must be decimal numbers") from exc
    try:
        return as_vector(values, length, name=os.fspath(path))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_trace(path, trace):
    rows = [(s.iter, repr(s.objective), repr(s.gap), repr(s.dual_infeas)) for s in trace]
    atomic_write_text(path, format_csv(TRACE_HEADER, rows))
