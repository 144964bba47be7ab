"""Pure-Python implementations of the hot kernels.

Same contracts as the compiled module ``torustomo._kernels._core``; used when
the extension is unavailable or explicitly disabled via the environment
variable ``TORUSTOMO_FORCE_FALLBACK``.
"""

from __future__ import annotations

import numpy as np


def sign_change_counts(values):
    """Cyclic sign-change counts per row of a (rows, nodes) value matrix.

    Zeros count as positive, so an exact node zero on a transversal crossing
    still contributes exactly one change.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    pos = values >= 0.0
    return np.count_nonzero(pos != np.roll(pos, -1, axis=-1), axis=-1).astype(np.int32)


def _xor_merge(a, b):
    """Symmetric difference of two sorted index lists (column addition over F2)."""
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ai, bj = a[i], b[j]
        if ai < bj:
            out.append(ai)
            i += 1
        elif ai > bj:
            out.append(bj)
            j += 1
        else:
            i += 1
            j += 1
    if i < na:
        out.extend(a[i:])
    if j < nb:
        out.extend(b[j:])
    return out


def reduce_boundary(n_cells, indptr, indices, order):
    """Column reduction of a boundary matrix over the two-element field.

    The matrix is given in CSC form with rows and columns indexed by
    filtration position (faces always precede cofaces).  Columns are
    processed in the given order, which must be increasing within each
    dimension; grouping dimensions from high to low enables the clearing
    shortcut (a cell that shows up as a pivot row is a birth cell, so its own
    column reduces to zero and is skipped).

    Returns ``low`` with ``low[c]`` the pivot row of the reduced column ``c``
    or -1 for a zero column.  The pairing is the canonical one and does not
    depend on the processing order.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int32)
    order = np.asarray(order, dtype=np.int32)
    low = np.full(n_cells, -1, dtype=np.int32)
    owner = np.full(n_cells, -1, dtype=np.int32)
    cleared = np.zeros(n_cells, dtype=bool)
    stored = {}
    for c in order:
        c = int(c)
        if cleared[c]:
            continue
        col = indices[indptr[c]:indptr[c + 1]].tolist()
        while col:
            piv = col[-1]
            o = owner[piv]
            if o < 0:
                owner[piv] = c
                low[c] = piv
                cleared[piv] = True
                stored[c] = col
                break
            col = _xor_merge(col, stored[o])
    return low
