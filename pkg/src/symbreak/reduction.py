"""Blow-up machinery for the momentum rescaling around the symmetric base
configuration: the momentum perturbation path, the reduced linear system for
the isotropy component of the velocity, the singular direction set, and the
smooth extension of the velocity through the symmetric point.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .errors import InZMu, SingularInertia, TrivialIsotropyFailed
from .geometry import SECOND_SCHEME, DiffScheme
from .mechanics import ChartSystem, exp_ray, generator_matrix, locked_inertia
from .splittings import SymmetryAnalysis

TOL_Z = 1e-10
TAU_SWITCH = 1e-3
TOL_MATCH = 1e-7
SUBSPACE_TOL = 1e-10


@dataclass(frozen=True)
class BetaFamily:
    """Momentum perturbation data: the components of the target momentum in
    the two annihilator summands carried by the inertia image, plus the
    distinguished direction in the annihilator of the non-kernel part that
    drives the quadratic term of the path.
    """

    mu1: np.ndarray
    mu2: np.ndarray
    theta1: np.ndarray

    @property
    def mu(self) -> np.ndarray:
        return self.mu1 + self.mu2


def beta_family(analysis: SymmetryAnalysis, mu, theta1) -> BetaFamily:
    """Validate and split the inputs into a BetaFamily.

    ``mu`` may have arbitrary components; only its m1 and m2 parts enter the
    path.  ``theta1`` must be a nonzero element of m0.
    """
    mu = np.asarray(mu, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    mu1 = analysis.proj_m1 @ mu
    mu2 = analysis.proj_m2 @ mu
    resid = np.linalg.norm(mu - mu1 - mu2)
    if resid > SUBSPACE_TOL * max(1.0, np.linalg.norm(mu)):
        raise ValueError(
            f"momentum has a component of size {resid:.2e} outside the inertia image")
    t_res = np.linalg.norm(analysis.proj_range @ theta1)
    if t_res > SUBSPACE_TOL * max(1.0, np.linalg.norm(theta1)):
        raise ValueError(
            f"theta1 has a component of size {t_res:.2e} outside the kernel annihilator")
    if np.linalg.norm(theta1) == 0.0:
        raise ValueError("theta1 must be nonzero")
    return BetaFamily(mu1=mu1, mu2=mu2, theta1=theta1)


def momentum_path(fam: BetaFamily, tau: float) -> np.ndarray:
    """The rescaled momentum: m1 part, plus tau times the m2 part, plus tau
    squared times the distinguished annihilator element."""
    return fam.mu1 + tau * fam.mu2 + tau * tau * fam.theta1


def base_torus_velocity(analysis: SymmetryAnalysis, fam: BetaFamily) -> np.ndarray:
    """Velocity component in k1 responding to the m1 momentum part at the base
    configuration; the restricted inertia inverse applied to that part."""
    eta = analysis.ihat_inv @ fam.mu1
    # the result must lie in k1
    proj_k1 = linalg.orthogonal_projector(analysis.k1, np.eye(analysis.dim_g))
    resid = np.linalg.norm(eta - proj_k1 @ eta)
    if resid > 1e-9 * max(1.0, np.linalg.norm(eta)):
        raise ValueError(f"restricted inverse left k1 (residual {resid:.2e})")
    return eta


def ray_inertia_derivatives(sys: ChartSystem, v,
                            scheme: Optional[DiffScheme] = None):
    """First and second derivatives at 0 of the locked inertia tensor along
    the geodesic ray of the direction ``v``.

    Shares one symmetric stencil between the two derivatives; Richardson
    extrapolation over doubled nodes is applied to both.
    """
    if scheme is None:
        scheme = SECOND_SCHEME
    h = scheme.step_rel
    levels = scheme.richardson_levels
    steps = [h * 2.0 ** k for k in range(levels + 1)]
    plus = [locked_inertia(sys, exp_ray(sys, v, t)) for t in steps]
    minus = [locked_inertia(sys, exp_ray(sys, v, -t)) for t in steps]
    center = locked_inertia(sys, exp_ray(sys, v, 0.0))

    d1 = [(plus[k] - minus[k]) / (2.0 * steps[k]) for k in range(levels + 1)]
    d2 = [(plus[k] - 2.0 * center + minus[k]) / steps[k] ** 2
          for k in range(levels + 1)]
    for j in range(1, levels + 1):
        factor = 4.0 ** j
        d1 = [(factor * d1[i] - d1[i + 1]) / (factor - 1.0) for i in range(len(d1) - 1)]
        d2 = [(factor * d2[i] - d2[i + 1]) / (factor - 1.0) for i in range(len(d2) - 1)]
    return d1[0], d2[0]


def velocity_system_matrix(sys: ChartSystem, analysis: SymmetryAnalysis, v,
                           _derivs=None) -> np.ndarray:
    """Coefficient matrix of the reduced linear system on the isotropy algebra.

    Entry [a, b] pairs the second ray derivative of the inertia tensor applied
    to the a-th kernel basis vector with the b-th, minus twice the composed
    first-derivative correction through the restricted inverse.
    """
    first, second = ray_inertia_derivatives(sys, v) if _derivs is None else _derivs
    k0 = analysis.k0
    p = k0.shape[1]
    corr = first @ analysis.ihat_inv @ analysis.proj_range @ first
    out = np.zeros((p, p))
    for a in range(p):
        col = second @ k0[:, a] - 2.0 * (corr @ k0[:, a])
        for b in range(p):
            out[a, b] = float(col @ k0[:, b])
    return out


def velocity_system_offset(sys: ChartSystem, analysis: SymmetryAnalysis,
                           fam: BetaFamily, v, _derivs=None) -> np.ndarray:
    """Inhomogeneous term of the reduced linear system.

    Collects the second-derivative action on the k1 response, the composed
    first-derivative correction of that response, the coupling to the m2
    momentum part, and twice the pairing with the distinguished annihilator
    element.  The last coefficient is fixed by requiring the solved velocity
    to match the smooth limit of the direct inertia solve.
    """
    first, second = ray_inertia_derivatives(sys, v) if _derivs is None else _derivs
    k0 = analysis.k0
    p = k0.shape[1]
    eta = base_torus_velocity(analysis, fam)
    t1 = second @ eta
    t2 = -2.0 * (first @ (analysis.ihat_inv @ (analysis.proj_range @ (first @ eta))))
    t3 = 2.0 * (first @ (analysis.ihat_inv @ fam.mu2))
    t4 = -2.0 * fam.theta1
    total = t1 + t2 + t3 + t4
    return np.array([float(total @ k0[:, b]) for b in range(p)])


def solve_isotropy_velocity(matrix, offset, k0, tol_z: float = TOL_Z) -> np.ndarray:
    """Solve the reduced linear system for the kernel component of the velocity.

    ``matrix`` is indexed [a, b] as assembled above; the system pairs rows by
    the second index, so the transpose is solved.  Raises when the
    row-equilibrated determinant indicates a singular direction.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    offset = np.atleast_1d(np.asarray(offset, dtype=float))
    p = matrix.shape[0]
    if p == 0:
        return np.zeros(k0.shape[0])
    det = linalg.equilibrated_det(matrix.T)
    if abs(det) <= tol_z:
        raise InZMu(f"singular direction: equilibrated determinant {det:.3e}")
    alpha = np.linalg.solve(matrix.T, -offset)
    return k0 @ alpha


@dataclass(frozen=True)
class LSData:
    """Reduced-system data at one direction: the k1 velocity response, the
    system matrix and offset, the solved kernel velocity, and the singularity
    flag for the direction."""

    v: np.ndarray
    eta_mu: np.ndarray
    A: np.ndarray
    Bvec: np.ndarray
    xi0: Optional[np.ndarray]
    detA: float
    in_Z: bool

    @property
    def limit_velocity(self) -> np.ndarray:
        """Velocity at the blow-up limit: kernel part plus the k1 response."""
        if self.xi0 is None:
            raise InZMu("no limit velocity: direction is singular")
        return self.xi0 + self.eta_mu


def ls_data(sys: ChartSystem, analysis: SymmetryAnalysis, fam: BetaFamily,
            v, tol_z: float = TOL_Z) -> LSData:
    """Assemble the full reduced-system data at a direction."""
    v = np.asarray(v, dtype=float)
    derivs = ray_inertia_derivatives(sys, v)
    matrix = velocity_system_matrix(sys, analysis, v, _derivs=derivs)
    offset = velocity_system_offset(sys, analysis, fam, v, _derivs=derivs)
    det = linalg.equilibrated_det(matrix.T)
    in_z = abs(det) <= tol_z and matrix.shape[0] > 0
    xi0 = None
    if not in_z:
        xi0 = solve_isotropy_velocity(matrix, offset, analysis.k0, tol_z=tol_z)
    return LSData(v=v, eta_mu=base_torus_velocity(analysis, fam), A=matrix,
                  Bvec=offset, xi0=xi0, detA=det, in_Z=in_z)


def check_trivial_isotropy(sys: ChartSystem, analysis: SymmetryAnalysis, v,
                           probe: float = 0.05, tol: float = 1e-6):
    """Require every kernel generator to be nonzero just off the base point
    along the ray of ``v``; raises otherwise."""
    v = np.asarray(v, dtype=float)
    vn = np.linalg.norm(v)
    if vn == 0.0:
        raise TrivialIsotropyFailed("zero direction has full isotropy")
    eps = min(probe, 0.2 * sys.chart_radius / vn)
    q = exp_ray(sys, v, eps)
    for a in range(analysis.dim_k0):
        gen = sys.generator(analysis.k0[:, a], q)
        if np.linalg.norm(gen) <= tol * eps * vn:
            raise TrivialIsotropyFailed(
                "a kernel generator vanishes along the ray; "
                "the direction does not have trivial isotropy")


def solve_direct_velocity(sys: ChartSystem, q, beta_val) -> np.ndarray:
    """Direct inertia solve for the velocity at an asymmetric configuration."""
    inertia = locked_inertia(sys, q)
    s = np.linalg.svd(inertia, compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] <= 1e-13 * s[0]:
        raise SingularInertia("inertia tensor numerically singular in the direct regime")
    return np.linalg.solve(inertia, np.asarray(beta_val, dtype=float))


class ZetaPath:
    """Evaluator of the extended velocity along the ray of one direction.

    Away from the blow-up region the velocity is the direct inertia solve of
    the momentum path.  Inside it, a polynomial through the analytic limit at
    0 and direct solves at the switch-scale nodes on both sides is evaluated;
    the interpolant matches the direct solve exactly at the switch nodes.
    """

    NODE_FRACTIONS = (1.0, 0.5, 0.25)

    def __init__(self, sys: ChartSystem, analysis: SymmetryAnalysis,
                 fam: BetaFamily, v, tau_switch: float = TAU_SWITCH,
                 check_isotropy: bool = True, lsd: Optional[LSData] = None):
        self.sys = sys
        self.analysis = analysis
        self.fam = fam
        self.v = np.asarray(v, dtype=float)
        self.tau_switch = tau_switch
        if check_isotropy:
            check_trivial_isotropy(sys, analysis, self.v)
        self._lsd = lsd
        self._nodes = None

    @property
    def data(self) -> LSData:
        if self._lsd is None:
            self._lsd = ls_data(self.sys, self.analysis, self.fam, self.v)
        return self._lsd

    def _node_values(self):
        if self._nodes is None:
            taus = []
            for frac in self.NODE_FRACTIONS:
                taus.extend([frac * self.tau_switch, -frac * self.tau_switch])
            vals = [self.direct(t) for t in taus]
            anchor = self.data.limit_velocity
            self._nodes = ([0.0] + taus, [anchor] + vals)
        return self._nodes

    def direct(self, tau: float) -> np.ndarray:
        q = exp_ray(self.sys, self.v, tau)
        return solve_direct_velocity(self.sys, q, momentum_path(self.fam, tau))

    def at(self, tau: float) -> np.ndarray:
        if tau == 0.0:
            return self.data.limit_velocity
        if abs(tau) > self.tau_switch:
            return self.direct(tau)
        taus, vals = self._node_values()
        return _neville(taus, vals, tau)


def _neville(xs, ys, x: float):
    """Polynomial interpolation through (xs, ys) evaluated at x (componentwise)."""
    work = [np.asarray(y, dtype=float).copy() for y in ys]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            x_i, x_j = xs[i], xs[i + level]
            work[i] = ((x - x_j) * work[i] - (x - x_i) * work[i + 1]) / (x_i - x_j)
    return work[0]


def extended_velocity(sys: ChartSystem, analysis: SymmetryAnalysis,
                      fam: BetaFamily, v, tau: float,
                      tau_switch: float = TAU_SWITCH) -> np.ndarray:
    """The velocity solving the momentum condition along the ray of ``v``,
    smoothly extended through the symmetric point at parameter 0.

    At 0 this is the solved kernel velocity plus the k1 response; off the
    blow-up region it is the direct inertia solve of the momentum path.
    """
    path = ZetaPath(sys, analysis, fam, v, tau_switch=tau_switch)
    return path.at(tau)


def transverse_residual(sys: ChartSystem, analysis: SymmetryAnalysis,
                        fam: BetaFamily, v, tau: float, xi) -> np.ndarray:
    """Component of the momentum defect in the annihilator of the non-kernel
    part, after eliminating that part by the restricted solve.

    For a kernel velocity guess ``xi``, solve the projected equation for the
    complementary component at the given ray parameter and return the
    remaining defect; its second parameter derivative at 0 paired with the
    kernel basis reproduces the reduced linear system.
    """
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    q = exp_ray(sys, v, tau)
    inertia = locked_inertia(sys, q)
    beta_val = momentum_path(fam, tau)
    k_basis = analysis.k_basis
    if k_basis.shape[1]:
        lhs = analysis.proj_range @ inertia @ k_basis
        rhs = analysis.proj_range @ (beta_val - inertia @ xi)
        coeff = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
        eta = k_basis @ coeff
    else:
        eta = np.zeros_like(xi)
    defect = inertia @ (xi + eta) - beta_val
    return defect - analysis.proj_range @ defect
