"""Semirings parameterizing every multiply.

A semiring bundles the additive monoid (``add``, ``zero``) with the
multiplicative operation used to combine one entry of each input matrix.
Kernels only ever call ``multiply`` on stored nonzeros and ``add`` on
previously produced results, so annihilation by ``zero`` is never exercised.

The two built-ins cover the graph kernels: plain arithmetic, and "plus-pair"
where every product is 1 so the accumulated value counts structural overlap.
Both are instantiable over int64 (exact counting) or float64 (path-ratio
arithmetic).  The compiled full-matrix kernels dispatch on ``kernel_id``;
custom semirings (arbitrary callables) work with the pure-Python row
functions in :mod:`maskmul.accumulators`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ARITHMETIC = 0
PLUS_PAIR = 1


@dataclass(frozen=True)
class Semiring:
    add: Callable
    multiply: Callable
    zero: object
    dtype: np.dtype = field(default=np.dtype(np.float64))
    kernel_id: int = ARITHMETIC
    name: str = "arithmetic"

    def __repr__(self) -> str:
        return f"Semiring({self.name}, {self.dtype})"


def arithmetic_semiring(dtype=np.float64) -> Semiring:
    """(+, x, 0) over the given element dtype."""
    dt = np.dtype(dtype)
    return Semiring(
        add=lambda x, y: x + y,
        multiply=lambda x, y: x * y,
        zero=dt.type(0),
        dtype=dt,
        kernel_id=ARITHMETIC,
        name="arithmetic",
    )


def plus_pair_semiring(dtype=np.int64) -> Semiring:
    """add = +, multiply(x, y) = 1 regardless of operands, zero = 0.

    The dot product of two overlapping patterns of length k is k, which is
    what triangle counting and k-truss support counting need.
    """
    dt = np.dtype(dtype)
    one = dt.type(1)
    return Semiring(
        add=lambda x, y: x + y,
        multiply=lambda x, y: one,
        zero=dt.type(0),
        dtype=dt,
        kernel_id=PLUS_PAIR,
        name="plus_pair",
    )


_BY_NAME = {
    "arithmetic": arithmetic_semiring,
    "plus_pair": plus_pair_semiring,
}


def semiring_by_name(name: str, dtype=None) -> Semiring:
    try:
        factory = _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}; expected one of {sorted(_BY_NAME)}")
    return factory() if dtype is None else factory(dtype)
