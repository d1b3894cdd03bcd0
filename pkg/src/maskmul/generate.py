"""Synthetic graph generation: Erdős–Rényi and R-MAT.

Generation is a pure function of its parameters: the same GeneratorSpec always
yields a bitwise-identical matrix.  Duplicate sampled edges are merged and
the result is canonical sorted CSR with unit values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import CsrMatrix, from_arrays

GRAPH500_PARAMS = (0.57, 0.19, 0.19, 0.05)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str                      # "erdos-renyi" | "rmat"
    scale: int                     # log2(nrows)
    avg_degree: float
    rmat_params: tuple[float, float, float, float] = GRAPH500_PARAMS
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("erdos-renyi", "rmat"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if not self.avg_degree > 0:
            raise ValueError("avg_degree must be > 0")
        a, b, c, d = self.rmat_params
        if abs(a + b + c + d - 1.0) > 1e-9:
            raise ValueError("rmat_params must sum to 1 within 1e-9")

    @property
    def nrows(self) -> int:
        return 1 << self.scale

    @property
    def nedges(self) -> int:
        return int(round(self.avg_degree * self.nrows))

    def describe(self) -> str:
        if self.kind == "rmat":
            return f"rmat(scale={self.scale},deg={self.avg_degree:g},seed={self.seed})"
        return f"er(scale={self.scale},deg={self.avg_degree:g},seed={self.seed})"


def rmat_edges(spec: GeneratorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sample edges by recursive quadrant selection, one bit per level."""
    a, b, c, d = spec.rmat_params
    thresholds = np.array([a, a + b, a + b + c])
    rng = np.random.default_rng(spec.seed)
    n_edges = spec.nedges
    src = np.zeros(n_edges, dtype=np.int64)
    dst = np.zeros(n_edges, dtype=np.int64)
    for bit in range(spec.scale):
        # quadrants laid out (src_bit, dst_bit): 0->(0,0) 1->(0,1) 2->(1,0) 3->(1,1)
        q = np.searchsorted(thresholds, rng.random(n_edges), side="right")
        src |= (q >> 1).astype(np.int64) << bit
        dst |= (q & 1).astype(np.int64) << bit
    return src, dst


def erdos_renyi_edges(spec: GeneratorSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(spec.seed)
    n = spec.nrows
    src = rng.integers(0, n, spec.nedges, dtype=np.int64)
    dst = rng.integers(0, n, spec.nedges, dtype=np.int64)
    return src, dst


def generate(spec: GeneratorSpec) -> CsrMatrix:
    """Generate a sparse 2^scale x 2^scale matrix with unit values.

    Edge count before dedup is round(avg_degree * 2^scale); duplicates merge
    to a single unit entry.
    """
    if spec.kind == "rmat":
        src, dst = rmat_edges(spec)
    else:
        src, dst = erdos_renyi_edges(spec)
    m = from_arrays(spec.nrows, spec.nrows, src, dst, np.ones(src.size, dtype=np.int64))
    m.values[:] = 1
    return m
