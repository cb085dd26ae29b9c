"""Pure-numpy jet convolution kernel (fallback when the compiled core is absent)."""

from __future__ import annotations

import numpy as np

# keep scratch products below ~32M complex entries per chunk
_CHUNK_ELEMENTS = 32_000_000


def conv_batch(u: np.ndarray, w: np.ndarray, plan, out: np.ndarray) -> np.ndarray:
    """out[b, k] = sum over admissible splits of u[b, i] * w[b, j].

    ``u``/``w``/``out`` have shape (B, K); the split triples live in ``plan``
    pre-sorted by k so a single reduceat per chunk does the scatter-add.
    """
    ii = plan.conv_i
    jj = plan.conv_j
    starts = plan.conv_starts
    B = u.shape[0]
    T = ii.shape[0]
    rows = max(1, _CHUNK_ELEMENTS // max(T, 1))
    for lo in range(0, B, rows):
        hi = min(B, lo + rows)
        prod = u[lo:hi, ii] * w[lo:hi, jj]
        out[lo:hi, :] = np.add.reduceat(prod, starts, axis=1)
    return out
