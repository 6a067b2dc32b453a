"""Dense linear-algebra kernels: truncated SVD, minimum-norm least squares,
and the RMSE metric.

Everything runs in float64 and is bit-reproducible for a fixed input on a
fixed platform: the computation path depends only on the shape and sparsity
of the input, and sign ambiguities are resolved by one convention (the
largest-magnitude entry of each right singular vector is made positive,
lowest index winning ties).

Small problems go straight to LAPACK. Large ones are decomposed through
the Gram matrix of their smaller side, which is exact for the factor on
that side; the other factor is recovered by division and re-orthonormalized
with a QR pass. Directions whose singular value falls below the reliable
range (or beyond the numerical rank) are filled with a deterministic
orthonormal completion drawn from the standard basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["TruncatedSVD", "truncated_svd", "pseudoinverse_solve", "rmse"]

# Entry budget under which a (densified) matrix is decomposed directly by
# LAPACK; anything larger goes through the Gram route.
_DIRECT_MAX_ENTRIES = 1_000_000

# Gram-route singular values below sigma_max * this ratio cannot be divided
# through without losing orthonormality; their partner vectors come from
# basis completion instead.
_GRAM_DERIVE_RTOL = 1e-7

# Relative cutoff below which singular values count as zero in
# pseudoinverse solves: max(shape) * sigma_max * _PINV_RCOND.
_PINV_RCOND = 1e-12

# A standard-basis candidate joins an orthonormal completion only if its
# residual against the already-accepted columns keeps at least this norm;
# a second scan with the looser floor runs only if the first comes short.
_COMPLETION_MIN_NORM = (0.5, 1e-6)


@dataclass(frozen=True)
class TruncatedSVD:
    """Top-d singular triplets: ``u`` (n x d), values (d,), ``v`` (p x d)."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


def truncated_svd(a, d: int) -> TruncatedSVD:
    """Best rank-``d`` factorization of ``a`` (dense ndarray or scipy.sparse).

    Returns column-orthonormal factors and nonincreasing singular values.
    When ``d`` exceeds the numerical rank, the trailing columns span a
    deterministic orthonormal complement (singular value 0).
    """
    sparse = sp.issparse(a)
    if sparse:
        if a.data.size and not np.all(np.isfinite(a.data)):
            raise ValueError("matrix contains non-finite entries")
        n, p = a.shape
    else:
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix contains non-finite entries")
        n, p = a.shape
    if not 1 <= d <= min(n, p):
        raise ValueError(f"target rank {d} out of range for a {n}x{p} matrix")

    if sparse:
        # Columns without support contribute nothing to the spectrum; strip
        # them so the core decomposition sees only the live block.
        csc = a.tocsc().astype(np.float64)
        csc.sum_duplicates()
        live = np.flatnonzero(np.diff(csc.indptr))
        core = csc[:, live]
        k = min(d, n, live.size)
    else:
        live = None
        core = a
        k = d

    if k > 0:
        u_core, sigma_core, v_core = _svd_core(core, k)
    else:
        u_core = np.zeros((n, 0))
        sigma_core = np.zeros(0)
        v_core = np.zeros((0 if live is None else live.size, 0))

    sigma = np.zeros(d)
    sigma[:k] = sigma_core

    v = np.zeros((p, d))
    if live is None:
        v[:, :k] = v_core
    else:
        v[live, :k] = v_core

    u = np.zeros((n, d))
    u[:, :k] = u_core

    if k < d:
        v[:, k:] = _complete_orthonormal(v[:, :k], d - k)
        u[:, k:] = _complete_orthonormal(u[:, :k], d - k)

    return TruncatedSVD(u=u, singular_values=sigma, v=v)


def pseudoinverse_solve(a, b) -> np.ndarray:
    """Minimum-Frobenius-norm minimizer of ``||b - a @ g||_F``.

    Computed through the SVD of ``a`` with singular values below
    ``max(a.shape) * sigma_max * 1e-12`` treated as zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("design matrix must be 2-D")
    if b.ndim not in (1, 2):
        raise ValueError("right-hand side must be 1-D or 2-D")
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"row mismatch: design has {a.shape[0]} rows, rhs has {b.shape[0]}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("inputs contain non-finite entries")

    out_shape = (a.shape[1],) + b.shape[1:]
    if min(a.shape) == 0:
        return np.zeros(out_shape)

    u, s, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = max(a.shape) * (s[0] if s.size else 0.0) * _PINV_RCOND
    keep = s > cutoff
    if not np.any(keep):
        return np.zeros(out_shape)

    projected = u[:, keep].T @ b
    if b.ndim == 2:
        projected /= s[keep][:, None]
    else:
        projected /= s[keep]
    g = vt[keep].T @ projected
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("least-squares solution overflowed")
    return g


def rmse(predicted, actual) -> float:
    """Root mean squared error between two equal-length vectors."""
    p = np.asarray(predicted, dtype=np.float64).ravel()
    a = np.asarray(actual, dtype=np.float64).ravel()
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} vs {a.shape[0]}")
    if p.size == 0:
        raise ValueError("rmse is undefined for empty vectors")
    return float(np.sqrt(np.mean((p - a) ** 2)))


def _svd_core(m, k: int):
    """Top-``k`` triplets of a matrix with no all-zero columns.

    ``k`` must satisfy ``1 <= k <= min(m.shape)``. Factors come back
    sign-fixed; the Gram route re-orthonormalizes the derived side.
    """
    n, c = m.shape
    if n * c <= _DIRECT_MAX_ENTRIES:
        dense = m.toarray() if sp.issparse(m) else m
        u_all, s_all, vt_all = np.linalg.svd(dense, full_matrices=False)
        u = u_all[:, :k]
        s = s_all[:k].copy()
        v = vt_all[:k].T
        flips = _sign_flips(v)
        return u * flips, s, v * flips

    if c <= n:
        gram = m.T @ m
        gram = gram.toarray() if sp.issparse(gram) else np.asarray(gram)
        v, sigma = _top_eigenvectors(gram, k)
        flips = _sign_flips(v)
        v = v * flips
        good = _reliable_count(sigma)
        u_good = _qr_polish(_as_dense(m @ v[:, :good]) / sigma[:good])
        u = np.zeros((n, k))
        u[:, :good] = u_good
        if good < k:
            u[:, good:] = _complete_orthonormal(u_good, k - good)
        return u, sigma, v

    gram = m @ m.T
    gram = gram.toarray() if sp.issparse(gram) else np.asarray(gram)
    u, sigma = _top_eigenvectors(gram, k)
    scaled_v = _as_dense(m.T @ u)  # column j equals sigma_j * v_j
    flips = _sign_flips(scaled_v)
    u = u * flips
    scaled_v = scaled_v * flips
    good = _reliable_count(sigma)
    v_good = _qr_polish(scaled_v[:, :good] / sigma[:good])
    v = np.zeros((c, k))
    v[:, :good] = v_good
    if good < k:
        v[:, good:] = _complete_orthonormal(v_good, k - good)
    return u, sigma, v


def _as_dense(x) -> np.ndarray:
    return x.toarray() if sp.issparse(x) else np.asarray(x)


def _top_eigenvectors(gram: np.ndarray, k: int):
    """Leading ``k`` eigenvectors of a symmetric PSD matrix, eigenvalues
    mapped to singular values."""
    lam, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    sigma = np.sqrt(np.clip(lam[::-1][:k], 0.0, None))
    return np.ascontiguousarray(vecs[:, ::-1][:, :k]), sigma


def _reliable_count(sigma: np.ndarray) -> int:
    """Number of leading singular values safe to divide through."""
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sigma > sigma[0] * _GRAM_DERIVE_RTOL))


def _sign_flips(v: np.ndarray) -> np.ndarray:
    """Per-column +-1 making the largest-|entry| of each column positive."""
    if v.shape[1] == 0:
        return np.ones(0)
    idx = np.argmax(np.abs(v), axis=0)  # argmax takes the lowest tied index
    vals = v[idx, np.arange(v.shape[1])]
    return np.where(vals < 0.0, -1.0, 1.0)


def _qr_polish(b: np.ndarray) -> np.ndarray:
    """Re-orthonormalize near-orthonormal columns, keeping orientation."""
    if b.shape[1] == 0:
        return b
    q, r = np.linalg.qr(b)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs


def _complete_orthonormal(existing: np.ndarray, count: int) -> np.ndarray:
    """``count`` orthonormal columns orthogonal to ``existing``.

    Deterministic: standard-basis vectors are tried in index order, with a
    bulk fast path for coordinates the existing columns never touch.
    """
    dim, t = existing.shape
    if count <= 0:
        return np.zeros((dim, 0))
    if t + count > dim:
        raise ValueError("not enough dimensions to complete the basis")

    cols = np.zeros((dim, count))
    have = 0

    row_mass = (
        np.einsum("ij,ij->i", existing, existing) if t else np.zeros(dim)
    )
    free = np.flatnonzero(row_mass < 1e-24)[:count]
    if free.size:
        block = np.zeros((dim, free.size))
        block[free, np.arange(free.size)] = 1.0
        if t:
            block -= existing @ (existing.T @ block)
        block /= np.linalg.norm(block, axis=0)
        cols[:, : free.size] = block
        have = free.size

    used = set(free.tolist())
    for min_norm in _COMPLETION_MIN_NORM:
        if have == count:
            break
        for j in range(dim):
            if have == count:
                break
            if j in used:
                continue
            cand = np.zeros(dim)
            cand[j] = 1.0
            for _ in range(2):  # twice-is-enough Gram-Schmidt
                if t:
                    cand -= existing @ (existing.T @ cand)
                if have:
                    cand -= cols[:, :have] @ (cols[:, :have].T @ cand)
            norm = np.linalg.norm(cand)
            if norm >= min_norm:
                cols[:, have] = cand / norm
                have += 1
                used.add(j)
    if have < count:
        raise RuntimeError("orthonormal completion failed")
    return cols
