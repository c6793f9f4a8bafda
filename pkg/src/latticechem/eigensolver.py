"""Extremal eigenpairs of large sparse symmetric operators.

The iterative path is restarted Lanczos (ARPACK via scipy) with a seeded
deterministic start vector; residuals and pairwise orthogonality are
re-verified with explicit matvecs after convergence, so the returned
``Eigenpairs`` always honours its contract or an exception is raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

_ORTHO_TOL = 1e-8
_DENSE_SYM_TOL = 1e-10


class EigensolverError(RuntimeError):
    """Iteration did not converge; carries the best residuals reached."""

    def __init__(self, message, values=None, residual_norms=None):
        super().__init__(message)
        self.values = values
        self.residual_norms = residual_norms


@dataclass
class Eigenpairs:
    """k extremal eigenpairs, values ascending, vectors orthonormal."""

    values: np.ndarray
    vectors: np.ndarray  # shape (N, k), column i pairs with values[i]
    residual_norms: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.residual_norms is not None:
            self.residual_norms = np.asarray(self.residual_norms, dtype=float)

    @property
    def k(self) -> int:
        return len(self.values)


def _as_operator(op):
    """Accept a scipy sparse matrix, LinearOperator, ndarray, or any object
    exposing a ``.matrix`` attribute (e.g. SparseHamiltonian)."""
    mat = getattr(op, "matrix", op)
    if isinstance(mat, np.ndarray) or sp.issparse(mat) or isinstance(mat, spla.LinearOperator):
        return mat
    raise TypeError(f"unsupported operator type {type(op)!r}")


def _canonicalize(values, vectors, degeneracy_tol=1e-9):
    """Deterministic ordering and sign convention.

    Values sort ascending.  Within a degenerate cluster the tie-break is the
    index of each vector's first significant component (then its magnitude),
    and every vector's first significant component is made positive.
    """
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    k = len(values)
    i = 0
    while i < k:
        j = i + 1
        while j < k and values[j] - values[i] <= degeneracy_tol * max(1.0, abs(values[i])):
            j += 1
        if j - i > 1:
            keys = []
            for c in range(i, j):
                v = vectors[:, c]
                lead = int(np.argmax(np.abs(v) > 10 * _ORTHO_TOL))
                keys.append((lead, -abs(v[lead])))
            sub = np.argsort(np.array(keys, dtype=[("lead", int), ("mag", float)]),
                             order=("lead", "mag"))
            vectors[:, i:j] = vectors[:, i:j][:, sub]
            values[i:j] = values[i:j][sub]
        i = j
    for c in range(k):
        v = vectors[:, c]
        lead = int(np.argmax(np.abs(v) > 10 * _ORTHO_TOL))
        if v[lead] < 0:
            vectors[:, c] = -v
    return values, vectors


def _verify(mat, values, vectors, tol, context):
    """Re-check residuals with one extra matvec per pair, and orthogonality."""
    hv = mat @ vectors if not isinstance(mat, spla.LinearOperator) else np.column_stack(
        [mat.matvec(vectors[:, i]) for i in range(vectors.shape[1])]
    )
    residuals = np.linalg.norm(hv - vectors * values[None, :], axis=0)
    gram = vectors.T @ vectors
    ortho_err = np.max(np.abs(gram - np.eye(len(values))))
    if ortho_err > _ORTHO_TOL:
        raise EigensolverError(
            f"{context}: orthogonality violated ({ortho_err:.2e} > {_ORTHO_TOL})",
            values=values, residual_norms=residuals,
        )
    if tol is not None and np.any(residuals > tol):
        raise EigensolverError(
            f"{context}: residual contract violated (max {residuals.max():.2e} > {tol})",
            values=values, residual_norms=residuals,
        )
    return residuals


def start_vector(n: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random unit start vector."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def lowest_eigenpairs(op, k: int = 1, tol: float = 1e-9, max_iter: int | None = None,
                      seed: int = 0, v0: np.ndarray | None = None) -> Eigenpairs:
    """The k algebraically smallest eigenpairs of a sparse symmetric operator.

    Parameters
    ----------
    op : sparse matrix, ndarray, LinearOperator, or SparseHamiltonian
    k : number of pairs; must satisfy 1 <= k << N
    tol : residual tolerance ||H v - lambda v|| for every returned pair,
        re-verified after convergence with an explicit matvec
    max_iter : restart budget handed to ARPACK
    seed : seed for the deterministic starting vector (ignored if v0 given)
    v0 : optional warm-start vector

    Raises
    ------
    EigensolverError
        On non-convergence; the exception carries the best residuals.
    """
    mat = _as_operator(op)
    n = mat.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if k >= max(2, n // 2):
        # Not an extremal-subspace problem any more; fall back to dense.
        dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
        return dense_lowest(dense, k)
    if v0 is None:
        v0 = start_vector(n, seed)
    ncv = min(n - 1, max(4 * k + 1, 20))
    try:
        vals, vecs = spla.eigsh(mat, k=k, which="SA", v0=v0, ncv=ncv,
                                maxiter=max_iter, tol=tol / 10)
    except spla.ArpackNoConvergence as exc:
        got = len(exc.eigenvalues) if exc.eigenvalues is not None else 0
        res = None
        if got:
            res = np.linalg.norm(
                mat @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues[None, :], axis=0
            )
        raise EigensolverError(
            f"Lanczos failed to converge {k} pairs within the iteration budget "
            f"({got} converged)", values=exc.eigenvalues, residual_norms=res,
        ) from exc
    vals, vecs = _canonicalize(vals, vecs)
    residuals = _verify(mat, vals, vecs, tol, "lowest_eigenpairs")
    return Eigenpairs(vals, vecs, residuals)


def dense_lowest(matrix: np.ndarray, k: int) -> Eigenpairs:
    """Full-accuracy smallest-k eigenpairs of a small dense symmetric matrix."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - a.T))
    if asym > _DENSE_SYM_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.2e})")
    if not 1 <= k <= a.shape[0]:
        raise ValueError(f"k must be in [1, {a.shape[0]}], got {k}")
    vals, vecs = np.linalg.eigh((a + a.T) / 2)
    vals, vecs = _canonicalize(vals[:k].copy(), vecs[:, :k].copy())
    residuals = _verify(a, vals, vecs, None, "dense_lowest")
    return Eigenpairs(vals, vecs, residuals)
