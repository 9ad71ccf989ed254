"""Formal stability classification of branch points: second variation of the
blown-up potential over the slice for abelian symmetry, and the direct
amended-potential Hessian test at asymmetric configurations.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .branching import (Branch, SliceChart, Stability, blown_up_potential,
                        _with_mu2)
from .errors import NonAbelian, SymmetricPoint
from .geometry import NESTED_SCHEME, hessian_fd
from .mechanics import (ChartSystem, amended_potential, generator_matrix,
                        locked_inertia)
from .reduction import BetaFamily
from .splittings import SymmetryAnalysis

TOL_EIG_REL = 1e-8
N_SMALL = 8


def slice_hessian(sys: ChartSystem, analysis: SymmetryAnalysis, fam: BetaFamily,
                  slc: SliceChart, tau: float, u) -> np.ndarray:
    """Second variation of the blown-up potential in the slice coordinates.

    Only defined for abelian symmetry: with a nontrivial bracket space the
    cross terms of the second variation are not controlled and no
    classification is attempted.
    """
    if not analysis.abelian:
        raise NonAbelian("stability classification requires an abelian group")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return hessian_fd(
        lambda uu: blown_up_potential(sys, analysis, fam, slc, tau, uu),
        u, scheme=NESTED_SCHEME)


def classify_definiteness(mat, tol_eig: Optional[float] = None) -> Stability:
    """Definiteness class of a symmetric matrix with an eigenvalue deadband."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return Stability.DEGENERATE
    if tol_eig is None:
        tol_eig = TOL_EIG_REL * max(1.0, float(np.linalg.norm(mat)))
    eig = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    if np.any(np.abs(eig) <= tol_eig):
        return Stability.DEGENERATE
    if eig[0] > tol_eig:
        return Stability.POSITIVE_DEFINITE
    if eig[-1] < -tol_eig:
        return Stability.NEGATIVE_DEFINITE
    return Stability.INDEFINITE


@dataclass
class BranchStabilityReport:
    base_class: Stability
    first_change_tau: Optional[float]
    small_tau_consistent: bool


def classify_branch(sys: ChartSystem, analysis: SymmetryAnalysis,
                    fam: BetaFamily, slc: SliceChart,
                    branch: Branch) -> BranchStabilityReport:
    """Set the stability class at every branch point from the slice Hessian.

    Also records the class at the branch root and whether positive
    definiteness there persists over the first few positive-parameter points,
    which is reported rather than asserted.
    """
    if not analysis.abelian:
        raise NonAbelian("stability classification requires an abelian group")
    base_class = Stability.NOT_COMPUTED
    first_change = None
    for p in branch.points:
        fam_p = _with_mu2_covector(analysis, fam, p.mu2)
        hess = slice_hessian(sys, analysis, fam_p, slc, p.tau, p.u)
        p.stability = classify_definiteness(hess)
        if p.tau == 0.0:
            base_class = p.stability
        elif first_change is None and p.stability != base_class:
            first_change = p.tau
    consistent = True
    if base_class == Stability.POSITIVE_DEFINITE:
        positive = [p for p in branch.points if p.tau > 0.0][:N_SMALL]
        consistent = all(p.stability == Stability.POSITIVE_DEFINITE for p in positive)
    return BranchStabilityReport(base_class=base_class,
                                 first_change_tau=first_change,
                                 small_tau_consistent=consistent)


def _with_mu2_covector(analysis, fam, mu2):
    coords = np.linalg.lstsq(analysis.m2, mu2, rcond=None)[0] \
        if analysis.m2.shape[1] else np.zeros(0)
    return _with_mu2(analysis, fam, coords)


@dataclass
class FormalStabilityReport:
    classification: Stability
    hessian: np.ndarray
    eigenvalues: np.ndarray
    complement_dim: int


def formal_stability(sys: ChartSystem, q, mu,
                     tol_eig: Optional[float] = None) -> FormalStabilityReport:
    """Definiteness of the amended-potential Hessian on a complement of the
    momentum-isotropy orbit directions at an asymmetric configuration.

    Builds the momentum isotropy subalgebra numerically from the coadjoint
    action, takes the metric-orthogonal complement of its orbit directions in
    the tangent space, and classifies the restricted finite-difference
    Hessian of the amended potential.
    """
    q = np.asarray(q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    inertia = locked_inertia(sys, q)
    s = np.linalg.svd(inertia, compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] <= 1e-8 * s[0]:
        raise SymmetricPoint("formal stability test requires an asymmetric point")

    alg = sys.algebra
    dim = alg.dim
    # g_mu = kernel of eta -> ad*_eta mu
    rows = np.zeros((dim, dim))
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = 1.0
        rows[:, a] = alg.coadjoint(e, mu)
    gmu = linalg.nullspace(rows)

    gen = generator_matrix(sys, q)
    orbit_dirs = gen @ gmu if gmu.size else np.zeros((sys.n, 0))
    orbit = linalg.column_space(orbit_dirs) if orbit_dirs.size else np.zeros((sys.n, 0))
    g_q = sys.metric(q)
    proj = linalg.orthogonal_projector(orbit, g_q)
    comp = linalg.gram_schmidt(np.eye(sys.n) - proj @ np.eye(sys.n),
                               inner=g_q, tol=1e-9)

    def restricted(c):
        return amended_potential(sys, mu, q + comp @ c)

    hess = hessian_fd(restricted, np.zeros(comp.shape[1]), scheme=NESTED_SCHEME)
    cls = classify_definiteness(hess, tol_eig=tol_eig)
    return FormalStabilityReport(classification=cls, hessian=hess,
                                 eigenvalues=np.linalg.eigvalsh(hess),
                                 complement_dim=comp.shape[1])
