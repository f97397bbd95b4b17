"""Index tables for truncated multivariate Taylor (jet) arithmetic.

A jet of order ``k`` in ``dim`` variables is stored as a flat coefficient
vector over all monomials ``x^alpha`` with ``|alpha| <= k``, ordered by total
degree and lexicographically within a degree ("graded" order).  The coefficient
attached to ``alpha`` is the Taylor coefficient ``D^alpha f / alpha!``, so the
jet product is plain truncated polynomial multiplication.

Graded ordering makes the order-``k'`` table a prefix of the order-``k`` table
for ``k' < k``, so truncation is a slice and extension is zero padding.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


class JetTables:
    """Precomputed index data for one (dim, order) combination."""

    __slots__ = (
        "dim",
        "order",
        "n_terms",
        "alphas",
        "index_of",
        "degree_start",
        "mul_i",
        "mul_j",
        "mul_k",
        "diff_src",
        "diff_fac",
        "fact",
    )

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        alphas = []
        degree_start = [0]
        for deg in range(order + 1):
            for comb in itertools.combinations_with_replacement(range(dim), deg):
                alpha = [0] * dim
                for c in comb:
                    alpha[c] += 1
                alphas.append(tuple(alpha))
            degree_start.append(len(alphas))
        self.alphas = np.array(alphas, dtype=np.int64).reshape(len(alphas), dim)
        self.index_of = {a: i for i, a in enumerate(alphas)}
        self.degree_start = degree_start
        self.n_terms = len(alphas)

        # product pairs: all (i, j) with deg(i) + deg(j) <= order
        mi, mj, mk = [], [], []
        for da in range(order + 1):
            for db in range(order + 1 - da):
                for i in range(degree_start[da], degree_start[da + 1]):
                    ai = alphas[i]
                    for j in range(degree_start[db], degree_start[db + 1]):
                        s = tuple(x + y for x, y in zip(ai, alphas[j]))
                        mi.append(i)
                        mj.append(j)
                        mk.append(self.index_of[s])
        self.mul_i = np.array(mi, dtype=np.int64)
        self.mul_j = np.array(mj, dtype=np.int64)
        self.mul_k = np.array(mk, dtype=np.int64)

        # per-coordinate derivative maps: output is an order-1 lower jet
        # (prefix table), coeff_out[beta] = (beta_d + 1) * coeff_in[beta + e_d]
        n_lower = degree_start[order] if order > 0 else 0
        self.diff_src = np.zeros((dim, n_lower), dtype=np.int64)
        self.diff_fac = np.zeros((dim, n_lower), dtype=np.float64)
        for d in range(dim):
            for b in range(n_lower):
                beta = list(alphas[b])
                beta[d] += 1
                self.diff_src[d, b] = self.index_of[tuple(beta)]
                self.diff_fac[d, b] = beta[d]

        # alpha! per monomial, for converting coefficients <-> partials
        self.fact = np.array(
            [math.prod(math.factorial(int(a)) for a in al) for al in self.alphas],
            dtype=np.float64,
        )


@lru_cache(maxsize=None)
def jet_tables(dim: int, order: int) -> JetTables:
    if dim < 1 or order < 0:
        raise ValueError(f"invalid jet shape dim={dim} order={order}")
    return JetTables(dim, order)


@lru_cache(maxsize=None)
def lift_map(dim: int, order: int) -> np.ndarray:
    """Index map embedding a dim-variable jet into dim+1 variables.

    The new (last) variable gets degree zero in every monomial.
    """
    src = jet_tables(dim, order)
    dst = jet_tables(dim + 1, order)
    return np.array(
        [dst.index_of[tuple(a) + (0,)] for a in src.alphas], dtype=np.int64
    )
