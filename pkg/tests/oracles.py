"""Independent reference computations the test suite checks against.

Everything here is deliberately naive (dense matmul, exhaustive enumeration,
textbook queue-based traversal) and shares no code path with the library.
"""

from collections import deque

import numpy as np


def dense_masked_product(mask_bool: np.ndarray, a_dense: np.ndarray,
                         b_dense: np.ndarray, complemented: bool):
    """Reference for C = M (.) (A B).

    Returns (keep, values): keep marks positions that hold a stored output
    entry (at least one structural product landed there and the mask allows
    it), values is the full dense product.  A stored entry may be a numeric
    zero from cancellation.
    """
    values = a_dense @ b_dense
    generated = ((a_dense != 0).astype(np.int64) @ (b_dense != 0).astype(np.int64)) > 0
    allow = ~mask_bool if complemented else mask_bool
    return generated & allow, values


def dense_to_csr_dict(keep: np.ndarray, values: np.ndarray) -> dict:
    rows, cols = np.nonzero(keep)
    return {(int(i), int(j)): values[i, j] for i, j in zip(rows, cols)}


def triangle_count_dense(adj_bool: np.ndarray) -> int:
    """sum over all vertex triples of A_ij A_jk A_ki, i.e. trace(A^3)/6."""
    a = adj_bool.astype(np.int64)
    return int(np.trace(a @ a @ a)) // 6


def triangle_count_triples(adj_bool: np.ndarray) -> int:
    """Literal enumeration over i<j<k triples (tiny graphs only)."""
    n = adj_bool.shape[0]
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            if not adj_bool[i, j]:
                continue
            for k in range(j + 1, n):
                if adj_bool[i, k] and adj_bool[j, k]:
                    total += 1
    return total


def edge_support_counts(adj_bool: np.ndarray) -> dict:
    """Number of triangles each (directed) stored edge participates in."""
    n = adj_bool.shape[0]
    support = {}
    for i in range(n):
        for j in range(n):
            if adj_bool[i, j]:
                support[(i, j)] = int(np.count_nonzero(adj_bool[i] & adj_bool[j]))
    return support


def k_truss_edges(adj_bool: np.ndarray, k: int) -> set:
    """Fixed point of pruning edges with fewer than k-2 supports."""
    adj = adj_bool.copy()
    while True:
        support = edge_support_counts(adj)
        drop = [(i, j) for (i, j), s in support.items() if s < k - 2]
        if not drop:
            return set(support.keys())
        for i, j in drop:
            adj[i, j] = False
            adj[j, i] = False


def brandes_scores(adj_bool: np.ndarray, sources) -> np.ndarray:
    """Textbook single-source Brandes, summed over the source set.

    Directed, unnormalized convention: every ordered shortest path (s, t)
    contributes to its interior vertices.
    """
    n = adj_bool.shape[0]
    neighbors = [np.nonzero(adj_bool[v])[0] for v in range(n)]
    scores = np.zeros(n, dtype=np.float64)
    for s in sources:
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in neighbors[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
            if w != s:
                scores[w] += delta[w]
    return scores
