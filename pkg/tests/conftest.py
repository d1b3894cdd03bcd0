import numpy as np
import pytest

from maskmul.sparse import CsrMatrix, from_arrays, from_triples


def random_csr(rng, nrows, ncols, avg_degree, vmax=9) -> CsrMatrix:
    """Random integer-valued CSR with roughly avg_degree entries per row."""
    nnz = max(int(avg_degree * nrows), 0)
    rows = rng.integers(0, nrows, nnz) if nrows else np.empty(0, dtype=np.int64)
    cols = rng.integers(0, ncols, nnz) if ncols else np.empty(0, dtype=np.int64)
    vals = rng.integers(1, vmax, max(nnz, 0))
    return from_arrays(nrows, ncols, rows, cols, vals)


def complete_graph(n) -> CsrMatrix:
    return from_triples(n, n, [(i, j, 1) for i in range(n) for j in range(n) if i != j])


def path_graph(n) -> CsrMatrix:
    edges = []
    for i in range(n - 1):
        edges += [(i, i + 1, 1), (i + 1, i, 1)]
    return from_triples(n, n, edges)


def star_graph(leaves) -> CsrMatrix:
    edges = []
    for i in range(1, leaves + 1):
        edges += [(0, i, 1), (i, 0, 1)]
    return from_triples(leaves + 1, leaves + 1, edges)


def ring_graph(n) -> CsrMatrix:
    edges = []
    for i in range(n):
        j = (i + 1) % n
        edges += [(i, j, 1), (j, i, 1)]
    return from_triples(n, n, edges)


def csr_as_dict(c: CsrMatrix) -> dict:
    rows, cols, vals = c.triples()
    return {(int(i), int(j)): v for i, j, v in zip(rows, cols, vals)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
