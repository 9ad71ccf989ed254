"""Symmetry-adapted splittings of the algebra and its dual at the base
configuration: the isotropy kernel, its complement in the torus, the bracket
space, the annihilator subspaces, the associated projections, and the
restricted inverse of the locked inertia tensor.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .errors import IsotropyNotInTorus
from .lie import split_torus_complement
from .mechanics import ChartSystem, d_augmented, locked_inertia

TOL_RANK = 1e-8
TOL_H = 1e-8


@dataclass(frozen=True)
class SymmetryAnalysis:
    """All splitting data computed once at the base configuration.

    k0 is the kernel of the locked inertia tensor (the isotropy algebra), k1
    its orthocomplement inside the torus algebra, k2 the bracket space; m0,
    m1, m2 are the dual annihilator subspaces.  proj_range projects the dual
    onto the image of the inertia tensor along m0, proj_m1 / proj_m2 project
    onto m1 / m2, and ihat_inv inverts the inertia tensor from its image back
    to k1 + k2.  All bases are stored as columns, orthonormal in the invariant
    inner product (primal side) or the induced dual product (dual side).
    """

    q_e: np.ndarray
    inertia: np.ndarray
    k0: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    proj_range: np.ndarray
    proj_m1: np.ndarray
    proj_m2: np.ndarray
    ihat_inv: np.ndarray
    spectral_gap: float
    declared_isotropy_angle: Optional[float]

    @property
    def dim_g(self) -> int:
        return self.inertia.shape[0]

    @property
    def dim_k0(self) -> int:
        return self.k0.shape[1]

    @property
    def k_basis(self) -> np.ndarray:
        """Columns spanning k1 + k2, the complement of the kernel."""
        return np.hstack([self.k1, self.k2])

    @property
    def torus_basis(self) -> np.ndarray:
        """Columns spanning the torus algebra as k0 + k1."""
        return np.hstack([self.k0, self.k1])

    @property
    def abelian(self) -> bool:
        return self.k2.shape[1] == 0

    def torus_residual(self, x, inner) -> float:
        """Invariant-norm distance of an algebra element from the torus."""
        proj = linalg.orthogonal_projector(self.torus_basis, inner)
        d = np.asarray(x, dtype=float) - proj @ np.asarray(x, dtype=float)
        return float(np.sqrt(d @ inner @ d))


def analyze_symmetry(sys: ChartSystem) -> SymmetryAnalysis:
    """Compute the splitting data of the system at its base configuration.

    The isotropy algebra is taken to be the numerical kernel of the locked
    inertia tensor there; it must lie inside the torus subalgebra.
    """
    alg = sys.algebra
    n = alg.dim
    inner = alg.inner
    inertia = locked_inertia(sys, sys.q_e)

    u, s, _ = np.linalg.svd(inertia)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        kernel = np.eye(n)
        gap = 0.0
    else:
        small = s <= TOL_RANK * smax
        kernel = u[:, small]
        nonzero = s[~small]
        gap = float(nonzero[-1] / smax) if nonzero.size else 0.0

    t_basis, k2 = split_torus_complement(alg)
    proj_t = linalg.orthogonal_projector(t_basis, inner)
    if kernel.shape[1] > 0:
        resid = np.max(np.abs(kernel - proj_t @ kernel))
        if resid > 1e-7:
            raise IsotropyNotInTorus(
                f"{sys.name}: inertia kernel leaves the torus (residual {resid:.2e})")
    k0 = linalg.gram_schmidt(kernel, inner=inner)

    # k1: orthocomplement of k0 inside the torus
    proj_k0 = linalg.orthogonal_projector(k0, inner)
    k1 = linalg.gram_schmidt(t_basis - proj_k0 @ t_basis, inner=inner)

    if k0.shape[1] + k1.shape[1] + k2.shape[1] != n:
        raise IsotropyNotInTorus(f"{sys.name}: splitting dimensions do not add up")

    declared_angle = None
    if sys.isotropy is not None:
        if sys.isotropy.shape[1] != k0.shape[1]:
            raise ValueError(
                f"{sys.name}: declared isotropy dimension {sys.isotropy.shape[1]} "
                f"does not match the inertia kernel dimension {k0.shape[1]}")
        ang = linalg.principal_angles(sys.isotropy, k0)
        declared_angle = float(np.max(ang)) if ang.size else 0.0
        if declared_angle > 1e-7:
            raise ValueError(
                f"{sys.name}: declared isotropy disagrees with the inertia kernel "
                f"(principal angle {declared_angle:.2e})")

    dual_inner = np.linalg.inv(inner)
    m0 = _annihilator(np.hstack([k1, k2]), n, dual_inner)
    m1 = _annihilator(np.hstack([k0, k2]), n, dual_inner)
    m2 = _annihilator(np.hstack([k0, k1]), n, dual_inner)

    # projections onto the dual summands; [m1 m2] spans the inertia image
    full = np.hstack([m1, m2, m0])
    if full.shape[1] != n:
        raise IsotropyNotInTorus(f"{sys.name}: dual splitting dimensions do not add up")
    inv_full = np.linalg.inv(full)
    d1, d2 = m1.shape[1], m2.shape[1]
    sel_range = np.zeros((n, n))
    sel_range[: d1 + d2, : d1 + d2] = np.eye(d1 + d2)
    proj_range = full @ sel_range @ inv_full
    sel1 = np.zeros((n, n))
    sel1[:d1, :d1] = np.eye(d1)
    proj_m1 = full @ sel1 @ inv_full
    sel2 = np.zeros((n, n))
    sel2[d1: d1 + d2, d1: d1 + d2] = np.eye(d2)
    proj_m2 = full @ sel2 @ inv_full

    k_basis = np.hstack([k1, k2])
    restricted = proj_range @ inertia @ k_basis
    ihat_inv = k_basis @ np.linalg.pinv(restricted) if k_basis.shape[1] else np.zeros((n, n))

    return SymmetryAnalysis(
        q_e=sys.q_e.copy(), inertia=inertia, k0=k0, k1=k1, k2=k2,
        m0=m0, m1=m1, m2=m2, proj_range=proj_range, proj_m1=proj_m1,
        proj_m2=proj_m2, ihat_inv=ihat_inv, spectral_gap=gap,
        declared_isotropy_angle=declared_angle)


def _annihilator(span, n, dual_inner):
    """Basis of the annihilator of span(columns), orthonormal in the dual product."""
    if span.shape[1] == 0:
        return linalg.gram_schmidt(np.eye(n), inner=dual_inner)
    null = linalg.nullspace(span.T)
    return linalg.gram_schmidt(null, inner=dual_inner)


@dataclass
class HypothesisReport:
    """Residuals of the standing hypothesis that every torus generator at the
    base configuration is a steady motion."""

    max_residual: float
    per_basis: list
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def check_torus_equilibria(sys: ChartSystem, analysis: SymmetryAnalysis,
                           tol: float = TOL_H, rng=None) -> HypothesisReport:
    """Check that the augmented-potential gradient vanishes at the base
    configuration for every torus velocity (basis and random combinations)."""
    if rng is None:
        rng = np.random.default_rng(2)
    t_basis = analysis.torus_basis
    per = []
    worst = 0.0
    for j in range(t_basis.shape[1]):
        r = float(np.linalg.norm(d_augmented(sys, t_basis[:, j], sys.q_e)))
        per.append(r)
        worst = max(worst, r)
    for _ in range(3):
        coeff = rng.standard_normal(t_basis.shape[1]) if t_basis.shape[1] else np.zeros(0)
        xi = t_basis @ coeff if t_basis.shape[1] else np.zeros(analysis.dim_g)
        worst = max(worst, float(np.linalg.norm(d_augmented(sys, xi, sys.q_e))))
    return HypothesisReport(max_residual=worst, per_basis=per, tol=tol)


@dataclass
class CenterConditionsReport:
    """Residuals of the two derived conditions at the base configuration:
    the potential is critical, and the inertia image of the torus annihilates
    the bracket space."""

    potential_gradient: float
    inertia_pairing: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.potential_gradient, self.inertia_pairing) <= self.tol


def check_center_conditions(sys: ChartSystem, analysis: SymmetryAnalysis,
                            tol: float = TOL_H) -> CenterConditionsReport:
    """Check criticality of the potential at the base configuration and the
    annihilation pairing between the inertia image of the torus and the
    bracket space."""
    grad = float(np.linalg.norm(sys.potential_gradient(sys.q_e)))
    pairing = 0.0
    t_basis = analysis.torus_basis
    for j in range(t_basis.shape[1]):
        image = analysis.inertia @ t_basis[:, j]
        for i in range(analysis.k2.shape[1]):
            pairing = max(pairing, abs(float(image @ analysis.k2[:, i])))
    return CenterConditionsReport(potential_gradient=grad,
                                  inertia_pairing=pairing, tol=tol)
