"""Scoring kernels for the passage index.

The hot path of retrieval is one dot product of the query against every
indexed vector. Two interchangeable implementations exist:

  * a numba @njit kernel (default when numba imports cleanly), and
  * a pure-numpy BLAS path.

Set APR_PURE_NUMPY=1 to force the numpy path. Only the dot products live in
the kernels; normalization and the division by norms are shared numpy code,
so both backends agree on the engineered fixtures used in tests. fastmath
stays off for the same reason. `benchmarks/bench_search.py` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "APR_PURE_NUMPY"


def _env_pure_numpy() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def dot_all_numpy(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    return matrix @ query


try:
    from numba import njit

    @njit(cache=True)
    def _dot_all_jit(matrix, query):  # pragma: no cover - exercised via wrapper
        n, d = matrix.shape
        out = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += matrix[i, j] * query[j]
            out[i] = s
        return out

    def dot_all_numba(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
        return _dot_all_jit(np.ascontiguousarray(matrix), np.ascontiguousarray(query))

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    dot_all_numba = None
    HAS_NUMBA = False

_use_numba = HAS_NUMBA and not _env_pure_numpy()


def backend_name() -> str:
    return "numba" if _use_numba else "numpy"


def dot_all(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Dot product of every matrix row with the query, on the active backend."""
    if _use_numba:
        return dot_all_numba(matrix, query)
    return dot_all_numpy(matrix, query)


def cosine_scores(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray,
                  query_norm: float) -> np.ndarray:
    """Cosine similarity of the query against every indexed row.

    `norms` are the precomputed row norms; the caller guarantees they and
    `query_norm` are positive.
    """
    return dot_all(matrix, query) / (norms * query_norm)


def warmup() -> None:
    """Trigger jit compilation ahead of the first real query."""
    if _use_numba:
        dot_all_numba(np.ones((2, 2)), np.ones(2))
