"""Numpy fallback for the compiled mixing kernels.

Both functions take node-major arrays: row ``i`` is node ``i``'s parameter.
"""

import numpy as np


def csr_mix(indptr, indices, data, y):
    """Return ``A @ y`` for the CSR matrix ``A`` given by (indptr, indices, data).

    Every row must hold at least one stored entry (the diagonal is always
    stored by :class:`~finitemix.graph.MixingMatrix`), which keeps
    ``np.add.reduceat`` well defined.
    """
    contrib = data[:, None] * y[indices]
    return np.add.reduceat(contrib, indptr[:-1], axis=0)


def consensus_error(y):
    n = y.shape[0]
    if n == 0:
        return 0.0
    dev = y - y.mean(axis=0)
    return float(np.einsum("ij,ij->", dev, dev) / n)
