"""Matrix Market coordinate-format reader and writer.

Supports the kinds the benchmark inputs use: field real/integer/pattern,
symmetry general/symmetric.  Symmetric files are expanded to both triangles,
pattern entries get value 1, and 1-based indices are converted to 0-based.
The result is canonical sorted, deduplicated CSR.
"""

from __future__ import annotations

import numpy as np

from .sparse import CsrMatrix, from_arrays

_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}


class MatrixMarketError(ValueError):
    """Malformed Matrix Market content; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def read_matrix_market(path) -> CsrMatrix:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise MatrixMarketError(1, "missing %%MatrixMarket header")
        parts = header.strip().split()
        if len(parts) < 5 or parts[1] != "matrix" or parts[2] != "coordinate":
            raise MatrixMarketError(1, f"unsupported header {header.strip()!r}")
        field, symmetry = parts[3], parts[4]
        if field not in _FIELDS:
            raise MatrixMarketError(1, f"unsupported field {field!r}")
        if symmetry not in _SYMMETRIES:
            raise MatrixMarketError(1, f"unsupported symmetry {symmetry!r}")

        lineno = 1
        size_line = None
        for line in fh:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise MatrixMarketError(lineno, "missing size line")
        toks = size_line.split()
        if len(toks) != 3:
            raise MatrixMarketError(lineno, f"size line must have 3 fields, got {size_line!r}")
        try:
            nrows, ncols, nnz = (int(t) for t in toks)
        except ValueError:
            raise MatrixMarketError(lineno, f"non-integer size line {size_line!r}")
        if nrows < 0 or ncols < 0 or nnz < 0:
            raise MatrixMarketError(lineno, "negative dimension or nnz")

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.ones(nnz, dtype=np.int64 if field != "real" else np.float64)
        k = 0
        for line in fh:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            if k >= nnz:
                raise MatrixMarketError(lineno, f"more than {nnz} entries")
            toks = stripped.split()
            want = 2 if field == "pattern" else 3
            if len(toks) < want:
                raise MatrixMarketError(lineno, f"entry needs {want} fields, got {stripped!r}")
            try:
                i = int(toks[0])
                j = int(toks[1])
            except ValueError:
                raise MatrixMarketError(lineno, f"non-integer index in {stripped!r}")
            if i < 1 or i > nrows or j < 1 or j > ncols:
                raise MatrixMarketError(
                    lineno, f"index ({i}, {j}) outside 1-based range ({nrows}, {ncols})")
            if field != "pattern":
                try:
                    vals[k] = float(toks[2]) if field == "real" else int(toks[2])
                except ValueError:
                    raise MatrixMarketError(lineno, f"bad value in {stripped!r}")
            rows[k] = i - 1
            cols[k] = j - 1
            k += 1
        if k != nnz:
            raise MatrixMarketError(lineno + 1, f"expected {nnz} entries, found {k}")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]),
                            np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return from_arrays(nrows, ncols, rows, cols, vals)


def write_matrix_market(path, a: CsrMatrix, field: str | None = None) -> None:
    """Write in coordinate general form (1-based indices)."""
    if field is None:
        field = "integer" if np.issubdtype(a.values.dtype, np.integer) else "real"
    if field not in _FIELDS:
        raise ValueError(f"unsupported field {field!r}")
    rows, cols, vals = a.triples()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        fh.write(f"{a.nrows} {a.ncols} {a.nnz}\n")
        if field == "pattern":
            for i, j in zip(rows, cols):
                fh.write(f"{i + 1} {j + 1}\n")
        elif field == "integer":
            for i, j, v in zip(rows, cols, vals):
                fh.write(f"{i + 1} {j + 1} {int(v)}\n")
        else:
            for i, j, v in zip(rows, cols, vals):
                fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
