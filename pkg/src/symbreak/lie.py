"""Finite-dimensional compact Lie algebra data: bracket, adjoint and coadjoint
actions, invariant inner product, and the maximal-torus splitting.

Algebra elements are plain length-``dim`` numpy arrays of coordinates in a
fixed basis; covectors are coordinate arrays in the dual basis, paired with
vectors by the ordinary dot product.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotInTorus

TOL_ALG = 1e-10
TOL_RANK = 1e-8  # relative, times the largest singular value


@dataclass(frozen=True)
class LieAlgebra:
    """Lie algebra given by structure constants in a fixed basis.

    ``structure[k, i, j]`` is the ``e_k`` coefficient of ``[e_i, e_j]``;
    ``inner`` is the matrix of an invariant inner product; ``torus`` holds a
    basis of a maximal abelian subalgebra as columns.
    """

    structure: np.ndarray
    inner: np.ndarray
    torus: np.ndarray
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        structure = np.asarray(self.structure, dtype=float)
        inner = np.asarray(self.inner, dtype=float)
        torus = np.atleast_2d(np.asarray(self.torus, dtype=float))
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "torus", torus)
        if self.check:
            self.validate()

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    @property
    def dim_torus(self) -> int:
        return self.torus.shape[1]

    def validate(self):
        n = self.dim
        c = self.structure
        if c.shape != (n, n, n):
            raise DimensionMismatch(f"structure constants must be ({n},{n},{n})")
        if self.inner.shape != (n, n):
            raise DimensionMismatch("inner product matrix has wrong shape")
        if self.torus.shape[0] != n:
            raise DimensionMismatch("torus basis vectors have wrong length")
        if np.max(np.abs(c + c.transpose(0, 2, 1))) > TOL_ALG:
            raise ValueError("structure constants are not antisymmetric")
        if np.max(np.abs(self.inner - self.inner.T)) > TOL_ALG:
            raise ValueError("inner product is not symmetric")
        if np.min(np.linalg.eigvalsh(self.inner)) <= 0.0:
            raise ValueError("inner product is not positive definite")
        # Jacobi identity on all basis triples
        jac = (np.einsum("mij,lmk->lijk", c, c)
               + np.einsum("mjk,lmi->lijk", c, c)
               + np.einsum("mki,lmj->lijk", c, c))
        if np.max(np.abs(jac)) > TOL_ALG:
            raise ValueError("Jacobi identity fails")
        # torus: independent and pairwise commuting
        if self.dim_torus > 0:
            if np.linalg.matrix_rank(self.torus, tol=1e-10) < self.dim_torus:
                raise ValueError("torus basis vectors are linearly dependent")
            for i in range(self.dim_torus):
                for j in range(i + 1, self.dim_torus):
                    br = self.bracket(self.torus[:, i], self.torus[:, j])
                    if np.max(np.abs(br)) > TOL_ALG:
                        raise ValueError("torus basis vectors do not commute")
        # infinitesimal invariance of the inner product:
        # <[z,x],y> + <x,[z,y]> = 0 on basis triples
        adm = np.einsum("kij->ikj", c)  # adm[i] = ad_{e_i}
        inv = np.einsum("aki,kj->aij", adm, self.inner)
        inv = inv + inv.transpose(0, 2, 1)
        if np.max(np.abs(inv)) > TOL_ALG:
            raise ValueError("inner product is not ad-invariant")

    def _conform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"expected vector of length {self.dim}")
        return x

    def bracket(self, x, y) -> np.ndarray:
        """Lie bracket [x, y] from the structure constants."""
        x = self._conform(x)
        y = self._conform(y)
        return np.einsum("kij,i,j->k", self.structure, x, y)

    def ad(self, x) -> np.ndarray:
        """Matrix of ad_x = [x, .] acting on coordinate vectors."""
        x = self._conform(x)
        return np.einsum("kij,i->kj", self.structure, x)

    def coadjoint(self, x, m) -> np.ndarray:
        """Coadjoint action ad*_x m, defined by <ad*_x m, y> = <m, [x, y]>."""
        x = self._conform(x)
        m = self._conform(m)
        return self.ad(x).T @ m

    def pairing(self, m, x) -> float:
        """Natural pairing of a covector with a vector."""
        return float(self._conform(m) @ self._conform(x))

    def norm(self, x) -> float:
        """Norm in the invariant inner product."""
        x = self._conform(x)
        return float(np.sqrt(x @ self.inner @ x))

    def torus_projection_residual(self, x) -> float:
        """Distance of x from the torus subalgebra in the invariant norm."""
        x = self._conform(x)
        proj = linalg.orthogonal_projector(self.torus, self.inner)
        return self.norm(x - proj @ x)


def split_torus_complement(algebra: LieAlgebra):
    """Orthonormal bases of the torus subalgebra and its bracket complement.

    The complement is the span of all brackets of basis elements with torus
    elements; for a compact algebra with maximal abelian torus the two spans
    are orthogonal complements in the invariant inner product.
    """
    n = algebra.dim
    t_basis = linalg.gram_schmidt(algebra.torus, inner=algebra.inner)
    brackets = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for j in range(t_basis.shape[1]):
            brackets.append(algebra.bracket(e, t_basis[:, j]))
    if brackets:
        span = linalg.as_columns(brackets, n)
        u, s, _ = np.linalg.svd(span, full_matrices=False)
        smax = s[0] if s.size else 0.0
        rank = int(np.sum(s > TOL_RANK * smax)) if smax > 0 else 0
        comp = linalg.gram_schmidt(u[:, :rank], inner=algebra.inner)
    else:
        comp = np.zeros((n, 0))
    if t_basis.shape[1] + comp.shape[1] != n:
        raise ValueError(
            "torus and bracket span do not decompose the algebra; "
            "the supplied torus basis is probably not maximal abelian")
    return t_basis, comp


def is_regular(x, algebra: LieAlgebra) -> bool:
    """Whether a torus element is regular: the kernel of ad_x is the torus."""
    if algebra.torus_projection_residual(x) > 1e-8 * max(1.0, algebra.norm(x)):
        raise NotInTorus("element does not lie in the torus subalgebra")
    adx = algebra.ad(x)
    s = np.linalg.svd(adx, compute_uv=False)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > TOL_RANK * smax)) if smax > 0 else 0
    return rank == algebra.dim - algebra.dim_torus


def abelian_algebra(dim: int) -> LieAlgebra:
    """Torus Lie algebra of the given dimension with the identity product."""
    return LieAlgebra(
        structure=np.zeros((dim, dim, dim)),
        inner=np.eye(dim),
        torus=np.eye(dim),
    )


def so3_algebra() -> LieAlgebra:
    """Rotation algebra so(3) with [e1,e2]=e3 cyclically.

    The invariant inner product is the identity matrix, which equals the
    negative Killing form scaled by one half for these structure constants.
    """
    c = np.zeros((3, 3, 3))
    for (k, i, j) in [(2, 0, 1), (0, 1, 2), (1, 2, 0)]:
        c[k, i, j] = 1.0
        c[k, j, i] = -1.0
    return LieAlgebra(structure=c, inner=np.eye(3), torus=np.array([[0.0], [0.0], [1.0]]))
