"""Pure-numpy factorization-machine kernels.

Semantics match the numba versions (same update rule, same visit order,
gradients taken at pre-update parameters); only summation order differs,
so the two backends agree to rounding error. The per-sample SGD loop stays
in Python, making this the fallback/verification path, not the fast one.
"""

import numpy as np

BACKEND = "numpy"


def fm_epoch_dense(x, y, order, w0, w, v, eta, l2w, l2v):
    sse = 0.0
    for i in order:
        xi = x[i]
        nz = np.flatnonzero(xi)
        xnz = xi[nz]
        vnz = v[nz]  # copy: keeps the gradient at pre-update parameters
        s = xnz @ vnz
        sq = (xnz**2) @ (vnz**2).sum(axis=1)
        res = w0 + w[nz] @ xnz + 0.5 * (s @ s - sq) - y[i]
        sse += res * res
        w0 -= eta * res
        w[nz] -= eta * (res * xnz + l2w * w[nz])
        grad = res * (np.outer(xnz, s) - vnz * (xnz**2)[:, None]) + l2v * vnz
        v[nz] = vnz - eta * grad
    return w0, sse


def fm_epoch_sparse(indptr, indices, data, y, order, w0, w, v, eta, l2w, l2v):
    sse = 0.0
    for i in order:
        sl = slice(indptr[i], indptr[i + 1])
        nz = indices[sl]
        xnz = data[sl]
        vnz = v[nz]
        s = xnz @ vnz
        sq = (xnz**2) @ (vnz**2).sum(axis=1)
        res = w0 + w[nz] @ xnz + 0.5 * (s @ s - sq) - y[i]
        sse += res * res
        w0 -= eta * res
        w[nz] -= eta * (res * xnz + l2w * w[nz])
        grad = res * (np.outer(xnz, s) - vnz * (xnz**2)[:, None]) + l2v * vnz
        v[nz] = vnz - eta * grad
    return w0, sse


def fm_predict_dense(x, w0, w, v):
    s = x @ v
    sq = (x**2) @ (v**2).sum(axis=1)
    return w0 + x @ w + 0.5 * ((s**2).sum(axis=1) - sq)


def fm_predict_sparse(indptr, indices, data, n_rows, w0, w, v):
    out = np.empty(n_rows)
    for i in range(n_rows):
        sl = slice(indptr[i], indptr[i + 1])
        nz = indices[sl]
        xnz = data[sl]
        s = xnz @ v[nz]
        sq = (xnz**2) @ (v[nz] ** 2).sum(axis=1)
        out[i] = w0 + w[nz] @ xnz + 0.5 * (s @ s - sq)
    return out
