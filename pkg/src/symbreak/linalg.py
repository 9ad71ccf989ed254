"""Small dense linear-algebra helpers used throughout the package.

Subspaces are stored as matrices whose columns span the space.  Most helpers
accept an optional symmetric positive-definite matrix defining the inner
product; the default is the Euclidean one.
"""

import numpy as np
import scipy.linalg


def as_columns(vectors, dim):
    """Stack a list of 1-d vectors into a (dim, k) column matrix."""
    if len(vectors) == 0:
        return np.zeros((dim, 0))
    cols = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if cols.shape[0] != dim:
        raise ValueError(f"expected vectors of length {dim}, got {cols.shape[0]}")
    return cols


def gram_schmidt(cols, inner=None, tol=1e-12):
    """Orthonormalize the columns of ``cols`` with modified Gram-Schmidt.

    ``inner`` is the matrix of the inner product (identity if omitted).
    Columns that are numerically dependent on earlier ones are dropped.
    """
    cols = np.atleast_2d(np.asarray(cols, dtype=float))
    n, k = cols.shape
    if inner is None:
        inner = np.eye(n)
    out = []
    norms = [np.sqrt(cols[:, j] @ inner @ cols[:, j]) for j in range(k)]
    scale = max(norms + [1.0])
    for j in range(k):
        v = cols[:, j].copy()
        for u in out:
            v -= (u @ inner @ v) * u
        # second pass stabilizes nearly dependent inputs
        for u in out:
            v -= (u @ inner @ v) * u
        nrm = np.sqrt(v @ inner @ v)
        if nrm > tol * scale:
            out.append(v / nrm)
    return as_columns(out, n)


def nullspace(mat, rtol=1e-8):
    """Orthonormal (Euclidean) basis of the kernel of ``mat``.

    Singular values below ``rtol`` times the largest one count as zero.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[0] == 0 or mat.size == 0:
        return np.eye(mat.shape[1])
    u, s, vt = np.linalg.svd(mat)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vt[rank:].T.copy()


def column_space(mat, rtol=1e-8):
    """Orthonormal (Euclidean) basis of the column space of ``mat``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return u[:, :rank].copy()


def projector_onto(onto, along):
    """Matrix of the projection onto span(onto) along span(along).

    The two column blocks together must span the whole space.
    """
    onto = np.atleast_2d(onto)
    along = np.atleast_2d(along)
    n = onto.shape[0]
    full = np.hstack([onto, along])
    if full.shape != (n, n):
        raise ValueError("projector blocks must together span the full space")
    sel = np.zeros((n, n))
    sel[: onto.shape[1], : onto.shape[1]] = np.eye(onto.shape[1])
    return full @ sel @ np.linalg.inv(full)


def orthogonal_projector(basis, inner=None):
    """Orthogonal projector onto span(basis) in the given inner product."""
    basis = np.atleast_2d(basis)
    n = basis.shape[0]
    if basis.shape[1] == 0:
        return np.zeros((n, n))
    if inner is None:
        inner = np.eye(n)
    gram = basis.T @ inner @ basis
    return basis @ np.linalg.solve(gram, basis.T @ inner)


def principal_angles(a, b):
    """Principal angles between the column spans of ``a`` and ``b`` (radians)."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        return np.array([np.pi / 2.0])
    if a.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(a, b)


def equilibrated_det(mat):
    """Determinant after scaling each row by its largest absolute entry.

    Makes the singularity threshold insensitive to the overall row scales.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[0] == 0:
        return 1.0
    scales = np.max(np.abs(mat), axis=1)
    scales[scales == 0.0] = 1.0
    return float(np.linalg.det(mat / scales[:, None]))


def solve_spd(mat, rhs):
    """Solve with a symmetric matrix, falling back to lstsq near singularity."""
    try:
        return np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(mat, rhs, rcond=None)[0]
