"""Deterministic pairwise reduction.

Accumulation order must not depend on chunking or thread count, so every
weighted sum in this package goes through :func:`pairwise_sum` instead of
``ndarray.sum``.  The scheme combines adjacent pairs repeatedly (index 0 with
1, 2 with 3, ...), which is shape-stable along the reduced axis: summing a
stacked batch column by column gives bitwise the same result as summing each
column on its own.
"""

from __future__ import annotations

import numpy as np


def pairwise_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum ``values`` along ``axis`` with a fixed pairwise order.

    Parameters
    ----------
    values : ndarray
        Array with at least one element along ``axis``.
    axis : int
        Axis to reduce.

    Returns
    -------
    ndarray or scalar
        Same shape as ``values`` with ``axis`` removed.  Error grows like
        O(log N) in the element count, and the result is reproducible
        bit for bit.
    """
    a = np.asarray(values, dtype=float)
    if a.shape == ():
        raise ValueError("pairwise_sum needs an array, got a scalar")
    if a.shape[axis] == 0:
        raise ValueError("pairwise_sum over an empty axis")
    a = np.moveaxis(a, axis, 0)
    while a.shape[0] > 1:
        m = a.shape[0] // 2
        paired = a[0 : 2 * m : 2] + a[1 : 2 * m : 2]
        if a.shape[0] % 2:
            paired = np.concatenate([paired, a[-1:]], axis=0)
        a = paired
    return a[0]
