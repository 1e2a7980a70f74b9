"""
Matrix Market reader and writer.

Supported: object "matrix", layouts "coordinate" and "array", field "real",
symmetry "general" and "symmetric". Symmetric files are expanded to full
storage; symmetric coordinate files must list the lower triangle. Values
are written with repr() so write-then-read reproduces them bitwise.
"""

import os
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from blockminres.core.exceptions import InputError, ParseError, UnsupportedFormatError
from blockminres.utils.logging_config import get_logger

logger = get_logger("io.matrix_market")

PathLike = Union[str, os.PathLike]

BANNER = "%%MatrixMarket"


def _data_lines(lines: List[str], start: int):
    """Yield (line number, stripped text) for non-comment, non-blank lines."""
    for number, raw in enumerate(lines[start:], start=start + 1):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        yield number, text


def _parse_header(line: str, path: str) -> Tuple[str, str, str]:
    tokens = line.split()
    if not tokens or tokens[0].lower() != BANNER.lower():
        raise ParseError(f"missing '{BANNER}' banner", path, 1)
    if len(tokens) != 5:
        raise ParseError(f"header must have 5 fields, got {len(tokens)}", path, 1)
    obj, layout, fld, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise UnsupportedFormatError(f"object '{obj}' is not supported", path, 1)
    if layout not in ("coordinate", "array"):
        raise ParseError(f"unknown layout '{layout}'", path, 1)
    if fld != "real":
        raise UnsupportedFormatError(f"field '{fld}' is not supported, only 'real'", path, 1)
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"symmetry '{symmetry}' is not supported", path, 1)
    return layout, fld, symmetry


def _ints(text: str, count: int, path: str, number: int, what: str) -> List[int]:
    tokens = text.split()
    if len(tokens) != count:
        raise ParseError(f"{what} must have {count} fields, got {len(tokens)}", path, number)
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"{what} must be integers: '{text}'", path, number) from None
    if any(v < 0 for v in values):
        raise ParseError(f"{what} must be non-negative: '{text}'", path, number)
    return values


def _float(token: str, path: str, number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"invalid value '{token}'", path, number) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value '{token}'", path, number)
    return value


def read_matrix_market(path: PathLike) -> sp.csr_matrix:
    """
    Read a Matrix Market file.

    Args:
        path: File to read.

    Returns:
        The matrix in CSR form with 0-based indices; duplicate coordinate
        entries are summed.

    Raises:
        OSError: If the file cannot be read.
        ParseError: On a malformed header, size line or entry (with line number).
        UnsupportedFormatError: For non-real fields or unsupported symmetry.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    if not lines:
        raise ParseError("empty file", path, 1)

    layout, _, symmetry = _parse_header(lines[0], path)
    entries = _data_lines(lines, 1)
    try:
        number, size_line = next(entries)
    except StopIteration:
        raise ParseError("missing size line", path, len(lines)) from None

    if layout == "coordinate":
        n_rows, n_cols, nnz = _ints(size_line, 3, path, number, "size line")
        matrix = _read_coordinate(entries, n_rows, n_cols, nnz, symmetry, path)
    else:
        n_rows, n_cols = _ints(size_line, 2, path, number, "size line")
        matrix = _read_array(entries, n_rows, n_cols, symmetry, path)

    logger.info(f"Read {path}: {matrix.shape[0]}x{matrix.shape[1]}, nnz={matrix.nnz}, {symmetry}")
    return matrix


def _read_coordinate(entries, n_rows: int, n_cols: int, nnz: int, symmetry: str, path: str) -> sp.csr_matrix:
    if symmetry == "symmetric" and n_rows != n_cols:
        raise ParseError(f"symmetric matrix must be square, got {n_rows}x{n_cols}", path)
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)

    count = 0
    for number, text in entries:
        if count == nnz:
            raise ParseError(f"more entries than the declared {nnz}", path, number)
        tokens = text.split()
        if len(tokens) != 3:
            raise ParseError(f"entry must be 'row col value', got '{text}'", path, number)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"invalid indices in '{text}'", path, number) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise ParseError(f"entry ({i}, {j}) outside {n_rows}x{n_cols}", path, number)
        if symmetry == "symmetric" and i < j:
            raise ParseError(f"symmetric file lists upper-triangle entry ({i}, {j})", path, number)
        rows[count], cols[count] = i - 1, j - 1
        vals[count] = _float(tokens[2], path, number)
        count += 1
    if count != nnz:
        raise ParseError(f"declared {nnz} entries, found {count}", path)

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    matrix.sum_duplicates()
    return matrix


def _read_array(entries, n_rows: int, n_cols: int, symmetry: str, path: str) -> sp.csr_matrix:
    if symmetry == "symmetric":
        if n_rows != n_cols:
            raise ParseError(f"symmetric matrix must be square, got {n_rows}x{n_cols}", path)
        positions = [(i, j) for j in range(n_cols) for i in range(j, n_rows)]
    else:
        positions = [(i, j) for j in range(n_cols) for i in range(n_rows)]

    dense = np.zeros((n_rows, n_cols))
    count = 0
    for number, text in entries:
        for token in text.split():
            if count == len(positions):
                raise ParseError(f"more values than the declared {len(positions)}", path, number)
            i, j = positions[count]
            dense[i, j] = _float(token, path, number)
            if symmetry == "symmetric":
                dense[j, i] = dense[i, j]
            count += 1
    if count != len(positions):
        raise ParseError(f"declared {len(positions)} values, found {count}", path)
    return sp.csr_matrix(dense)


def read_vector(path: PathLike, n: Optional[int] = None) -> np.ndarray:
    """
    Read a single-column (or single-row) Matrix Market file as a dense vector.

    Raises:
        ParseError: If the file holds a genuine matrix.
        InputError: If n is given and the length differs.
    """
    matrix = read_matrix_market(path)
    if 1 not in matrix.shape:
        raise ParseError(f"expected a vector, got a {matrix.shape[0]}x{matrix.shape[1]} matrix", os.fspath(path))
    vector = matrix.toarray().reshape(-1)
    if n is not None and vector.shape[0] != n:
        raise InputError(f"{os.fspath(path)}: vector has length {vector.shape[0]}, expected {n}")
    return vector


def write_matrix_market(
    path: PathLike,
    matrix,
    symmetric: bool = False,
    comment: Optional[str] = None,
) -> None:
    """
    Write a sparse or dense matrix in coordinate format.

    Args:
        path: Output file.
        matrix: Matrix to write.
        symmetric: Store only the lower triangle with symmetry "symmetric".
            The matrix must be exactly symmetric.
        comment: Optional comment line placed after the banner.

    Raises:
        InputError: If symmetric is requested for a non-symmetric matrix.
    """
    csr = sp.csr_matrix(matrix, dtype=np.float64)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    if symmetric:
        if csr.shape[0] != csr.shape[1] or (csr - csr.T).count_nonzero() != 0:
            raise InputError("matrix is not symmetric; write it as general")
        csr = sp.tril(csr, format="csr")
    csr.sort_indices()
    coo = csr.tocoo()
    _write_coordinate(path, coo.shape, coo.row, coo.col, coo.data, "symmetric" if symmetric else "general", comment)


def write_vector(path: PathLike, vector: np.ndarray, comment: Optional[str] = None) -> None:
    """Write a vector as an n x 1 coordinate file, zeros included."""
    vector = np.asarray(vector, dtype=np.float64).reshape(-1)
    n = vector.shape[0]
    _write_coordinate(path, (n, 1), np.arange(n), np.zeros(n, dtype=np.int64), vector, "general", comment)


def _write_coordinate(path, shape, rows, cols, vals, symmetry: str, comment: Optional[str]) -> None:
    path = os.fspath(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{BANNER} matrix coordinate real {symmetry}\n")
        if comment:
            for line in comment.splitlines():
                f.write(f"% {line}\n")
        f.write(f"{shape[0]} {shape[1]} {len(vals)}\n")
        for i, j, v in zip(rows, cols, vals):
            f.write(f"{int(i) + 1} {int(j) + 1} {float(v)!r}\n")
    logger.debug(f"Wrote {path}: {shape[0]}x{shape[1]}, {len(vals)} entries")
