"""Numba-compiled factorization-machine kernels.

Loops are written scalar-style so LLVM can vectorize the latent-dimension
sweeps. fastmath stays off: results must be reproducible bit-for-bit for a
fixed input, and the numpy fallback must agree to rounding error.
"""

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def fm_epoch_dense(x, y, order, w0, w, v, eta, l2w, l2v):
    """One SGD pass over dense rows in the given visit order.

    Updates ``w``/``v`` in place, returns the new bias and the sum of
    squared residuals observed at visit time.
    """
    d = x.shape[1]
    q = v.shape[1]
    s = np.empty(q)
    sse = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        lin = 0.0
        for f in range(q):
            s[f] = 0.0
        sq = 0.0
        for j in range(d):
            xj = x[i, j]
            if xj == 0.0:
                continue
            lin += w[j] * xj
            for f in range(q):
                vv = v[j, f]
                s[f] += vv * xj
                sq += vv * vv * xj * xj
        inter = 0.0
        for f in range(q):
            inter += s[f] * s[f]
        res = w0 + lin + 0.5 * (inter - sq) - y[i]
        sse += res * res
        w0 -= eta * res
        for j in range(d):
            xj = x[i, j]
            if xj == 0.0:
                continue
            w[j] -= eta * (res * xj + l2w * w[j])
            xj2 = xj * xj
            for f in range(q):
                vv = v[j, f]
                v[j, f] = vv - eta * (res * (xj * s[f] - vv * xj2) + l2v * vv)
    return w0, sse


@njit(cache=True)
def fm_epoch_sparse(indptr, indices, data, y, order, w0, w, v, eta, l2w, l2v):
    """One SGD pass over CSR rows; only touched coordinates are updated."""
    q = v.shape[1]
    s = np.empty(q)
    sse = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        beg = indptr[i]
        end = indptr[i + 1]
        lin = 0.0
        for f in range(q):
            s[f] = 0.0
        sq = 0.0
        for idx in range(beg, end):
            j = indices[idx]
            xj = data[idx]
            lin += w[j] * xj
            for f in range(q):
                vv = v[j, f]
                s[f] += vv * xj
                sq += vv * vv * xj * xj
        inter = 0.0
        for f in range(q):
            inter += s[f] * s[f]
        res = w0 + lin + 0.5 * (inter - sq) - y[i]
        sse += res * res
        w0 -= eta * res
        for idx in range(beg, end):
            j = indices[idx]
            xj = data[idx]
            w[j] -= eta * (res * xj + l2w * w[j])
            xj2 = xj * xj
            for f in range(q):
                vv = v[j, f]
                v[j, f] = vv - eta * (res * (xj * s[f] - vv * xj2) + l2v * vv)
    return w0, sse


@njit(cache=True)
def fm_predict_dense(x, w0, w, v):
    n = x.shape[0]
    d = x.shape[1]
    q = v.shape[1]
    out = np.empty(n)
    s = np.empty(q)
    for i in range(n):
        lin = 0.0
        for f in range(q):
            s[f] = 0.0
        sq = 0.0
        for j in range(d):
            xj = x[i, j]
            if xj == 0.0:
                continue
            lin += w[j] * xj
            for f in range(q):
                vv = v[j, f]
                s[f] += vv * xj
                sq += vv * vv * xj * xj
        inter = 0.0
        for f in range(q):
            inter += s[f] * s[f]
        out[i] = w0 + lin + 0.5 * (inter - sq)
    return out


@njit(cache=True)
def fm_predict_sparse(indptr, indices, data, n_rows, w0, w, v):
    q = v.shape[1]
    out = np.empty(n_rows)
    s = np.empty(q)
    for i in range(n_rows):
        lin = 0.0
        for f in range(q):
            s[f] = 0.0
        sq = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            j = indices[idx]
            xj = data[idx]
            lin += w[j] * xj
            for f in range(q):
                vv = v[j, f]
                s[f] += vv * xj
                sq += vv * vv * xj * xj
        inter = 0.0
        for f in range(q):
            inter += s[f] * s[f]
        out[i] = w0 + lin + 0.5 * (inter - sq)
    return out
