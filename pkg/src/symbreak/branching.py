"""Slice parametrization transverse to the group orbit, the blown-up
potential and orbit-gradient functions, seed certification, and
predictor-corrector continuation of the bifurcating branches.
"""

import csv
import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import linalg
from .errors import (DeltaDegenerate, InZMu, NewtonDiverged, StepFailed,
                     TrivialIsotropyFailed)
from .geometry import (FIRST_SCHEME, NESTED_SCHEME, SECOND_SCHEME, DiffScheme,
                       derivative_along, dir_derivative, jacobian_fd,
                       pushforward_exp)
from .mechanics import (ChartSystem, amended_gradient_along, exp_ray,
                        generator_matrix)
from .reduction import (TAU_SWITCH, TOL_Z, BetaFamily, ZetaPath,
                        check_trivial_isotropy, ls_data, momentum_path,
                        solve_direct_velocity, velocity_system_matrix)
from .splittings import SymmetryAnalysis

TOL_NEWTON = 1e-10
NEWTON_MAX_ITER = 50
MIN_STEP_HALVINGS = 10
DEFAULT_N_STEPS = 64


class Stability(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"
    DEGENERATE = "Degenerate"
    NOT_COMPUTED = "NotComputed"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SliceChart:
    """Affine slice through a base direction, transverse to the group orbit.

    ``basis`` columns are orthonormal in the base-point metric, span the
    subspace of the orbit-normal space orthogonal to the linearized
    isotropy-orbit direction at ``v0``, and parametrize configurations as
    ``Exp(tau * sigma(u))`` with ``sigma(u)`` the linear combination of the
    basis columns.
    """

    v0: np.ndarray
    basis: np.ndarray
    u_v0: np.ndarray

    @property
    def dim_u(self) -> int:
        return self.basis.shape[1]

    def sigma(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.basis @ u


def make_slice(sys: ChartSystem, analysis: SymmetryAnalysis, v0) -> SliceChart:
    """Build the slice through ``v0``.

    The direction must be orbit-normal at the base configuration, have
    trivial isotropy, and stay out of the singular set of the reduced
    velocity system.
    """
    g0 = sys.metric(sys.q_e)
    v0 = np.asarray(v0, dtype=float)
    nrm = float(np.sqrt(v0 @ g0 @ v0))
    if nrm == 0.0:
        raise TrivialIsotropyFailed("slice direction must be nonzero")
    v0 = v0 / nrm

    orbit = linalg.column_space(generator_matrix(sys, sys.q_e))
    for j in range(orbit.shape[1]):
        if abs(float(v0 @ g0 @ orbit[:, j])) > 1e-8:
            raise ValueError("slice direction is not orthogonal to the group orbit")

    check_trivial_isotropy(sys, analysis, v0)

    a_mat = velocity_system_matrix(sys, analysis, v0)
    det = linalg.equilibrated_det(a_mat.T)
    if analysis.dim_k0 > 0 and abs(det) <= TOL_Z:
        raise InZMu(f"slice direction is singular (equilibrated det {det:.3e})")

    # linearized isotropy-group orbit direction at v0: Jacobians of the
    # kernel generator fields applied to v0
    orbit_dirs = []
    for a in range(analysis.dim_k0):
        xi = analysis.k0[:, a]
        w = derivative_along(lambda q: sys.generator(xi, q), sys.q_e, v0)
        if np.linalg.norm(w) > 1e-10:
            orbit_dirs.append(w)
    orbit_dirs = linalg.as_columns(orbit_dirs, sys.n) if orbit_dirs else np.zeros((sys.n, 0))

    proj_orbit = linalg.orthogonal_projector(orbit, g0)
    proj_lin = linalg.orthogonal_projector(orbit_dirs, g0)
    candidates = np.eye(sys.n) - proj_orbit
    candidates = candidates - proj_lin @ candidates
    basis = linalg.gram_schmidt(candidates, inner=g0, tol=1e-9)

    expected = sys.n - orbit.shape[1] - np.linalg.matrix_rank(orbit_dirs) \
        if orbit_dirs.size else sys.n - orbit.shape[1]
    if basis.shape[1] != expected:
        raise ValueError(
            f"slice dimension {basis.shape[1]} does not match expected {expected}")

    u_v0 = basis.T @ g0 @ v0
    if np.linalg.norm(basis @ u_v0 - v0) > 1e-8:
        raise ValueError("slice direction is not contained in the slice span")
    return SliceChart(v0=v0, basis=basis, u_v0=u_v0)


def _with_mu2(analysis: SymmetryAnalysis, fam: BetaFamily, mu2_coords) -> BetaFamily:
    mu2_coords = np.atleast_1d(np.asarray(mu2_coords, dtype=float))
    if mu2_coords.size != analysis.m2.shape[1]:
        raise ValueError("mu2 coordinate vector has wrong length")
    mu2 = analysis.m2 @ mu2_coords if mu2_coords.size else np.zeros(analysis.dim_g)
    return BetaFamily(mu1=fam.mu1, mu2=mu2, theta1=fam.theta1)


def mu2_coords(analysis: SymmetryAnalysis, fam: BetaFamily) -> np.ndarray:
    """Coordinates of the m2 momentum part in the m2 basis."""
    if analysis.m2.shape[1] == 0:
        return np.zeros(0)
    return np.linalg.lstsq(analysis.m2, fam.mu2, rcond=None)[0]


def amended_limit(sys: ChartSystem, analysis: SymmetryAnalysis,
                  fam: BetaFamily) -> float:
    """Value of the amended potential on the slice at parameter 0; depends
    only on the m1 momentum part."""
    eta = analysis.ihat_inv @ fam.mu1
    return float(sys.potential(sys.q_e) + 0.5 * fam.mu1 @ eta)


def amended_on_slice(sys: ChartSystem, analysis: SymmetryAnalysis,
                     fam: BetaFamily, slc: SliceChart, tau: float, u,
                     zpath: Optional[ZetaPath] = None) -> float:
    """Amended potential along the slice, written through the extended
    velocity so that the value is defined at parameter 0 as well."""
    w = slc.sigma(u)
    q = exp_ray(sys, w, tau)
    beta_val = momentum_path(fam, tau)
    if abs(tau) > TAU_SWITCH:
        zeta = solve_direct_velocity(sys, q, beta_val)
    else:
        if zpath is None:
            zpath = ZetaPath(sys, analysis, fam, w)
        zeta = zpath.at(tau)
    return float(sys.potential(q) + 0.5 * beta_val @ zeta)


def _blowup_nodes(direct_fn, tau_switch):
    taus = []
    vals = []
    for frac in (1.0, 0.5, 0.25):
        for sgn in (1.0, -1.0):
            t = sgn * frac * tau_switch
            taus.append(t)
            vals.append(np.asarray(direct_fn(t), dtype=float))
    return taus, vals


def _neville(xs, ys, x):
    work = [np.asarray(y, dtype=float).copy() for y in ys]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            xi, xj = xs[i], xs[i + level]
            work[i] = ((x - xj) * work[i] - (x - xi) * work[i + 1]) / (xi - xj)
    return work[0]


def blown_up_potential(sys: ChartSystem, analysis: SymmetryAnalysis,
                       fam: BetaFamily, slc: SliceChart, tau: float, u) -> float:
    """The amended potential on the slice with its limit value removed and
    the quadratic vanishing order divided out.

    Away from the blow-up region this is the direct quotient.  Inside it
    (including parameter 0, where the quotient realizes half the second
    parameter derivative of the slice potential) the symmetric switch-scale
    direct values are interpolated; the two regimes agree exactly at the
    switch nodes.
    """
    f0 = amended_limit(sys, analysis, fam)
    w = slc.sigma(u)

    def direct(t):
        q = exp_ray(sys, w, t)
        beta_val = momentum_path(fam, t)
        zeta = solve_direct_velocity(sys, q, beta_val)
        f1 = float(sys.potential(q) + 0.5 * beta_val @ zeta)
        return (f1 - f0) / (t * t)

    if abs(tau) > TAU_SWITCH:
        return direct(tau)
    taus, vals = _blowup_nodes(direct, TAU_SWITCH)
    return float(_neville(taus, vals, tau))


def _orbit_gradient_core(sys, analysis, tau, w, q, zeta):
    dirs = []
    for i in range(analysis.k2.shape[1]):
        gen = sys.generator(analysis.k2[:, i], sys.q_e)
        dirs.append(pushforward_exp(sys.metric, sys.q_e, tau * w, gen,
                                    steps=sys.geo_steps, tol_geo=sys.tol_geo,
                                    guard=sys.guard()))
    return amended_gradient_along(sys, q, zeta, dirs)


def orbit_gradient(sys: ChartSystem, analysis: SymmetryAnalysis,
                   fam: BetaFamily, slc: SliceChart, tau: float, u,
                   zpath: Optional[ZetaPath] = None) -> np.ndarray:
    """Derivative of the amended potential at the slice configuration along
    the pushed-forward bracket-space generator directions.

    Components are indexed by the bracket-space basis; the vector is empty
    for abelian symmetry.  Vanishes identically at parameter 0.
    """
    dim2 = analysis.k2.shape[1]
    if dim2 == 0:
        return np.zeros(0)
    w = slc.sigma(u)
    q = exp_ray(sys, w, tau)
    beta_val = momentum_path(fam, tau)
    if abs(tau) >= 0.2 * TAU_SWITCH and tau != 0.0:
        zeta = solve_direct_velocity(sys, q, beta_val)
    else:
        if zpath is None:
            zpath = ZetaPath(sys, analysis, fam, w)
        zeta = zpath.at(tau)
    return _orbit_gradient_core(sys, analysis, tau, w, q, zeta)


def blown_up_orbit_gradient(sys: ChartSystem, analysis: SymmetryAnalysis,
                            fam: BetaFamily, slc: SliceChart, tau: float,
                            u) -> np.ndarray:
    """Orbit gradient with its linear vanishing order divided out.

    Same two-regime evaluation as the blown-up potential: direct quotient
    outside the switch scale, interpolation of the symmetric switch-scale
    quotients inside it (realizing the parameter derivative at 0).
    """
    dim2 = analysis.k2.shape[1]
    if dim2 == 0:
        return np.zeros(0)

    def direct(t):
        return orbit_gradient(sys, analysis, fam, slc, t, u) / t

    if abs(tau) > TAU_SWITCH:
        return direct(tau)
    taus, vals = _blowup_nodes(direct, TAU_SWITCH)
    return np.asarray(_neville(taus, vals, tau), dtype=float)


def slice_gradient(sys: ChartSystem, analysis: SymmetryAnalysis,
                   fam: BetaFamily, slc: SliceChart, tau: float, u) -> np.ndarray:
    """Derivative of the amended potential at the slice configuration along
    the pushed-forward slice directions (one component per slice coordinate).

    Equals the parameter times the blown-up-potential gradient in u; its
    zeros for nonzero parameter are exactly the branch conditions.  Evaluated
    directly from the velocity, so the noise floor stays at the
    first-derivative level with no quadratic cancellation.
    """
    w = slc.sigma(u)
    w_full = tau * w
    q = exp_ray(sys, w, tau)
    beta_val = momentum_path(fam, tau)
    zeta = solve_direct_velocity(sys, q, beta_val) if abs(tau) > TAU_SWITCH \
        else ZetaPath(sys, analysis, fam, w).at(tau)
    dirs = []
    for i in range(slc.dim_u):
        dirs.append(pushforward_exp(sys.metric, sys.q_e, w_full, slc.basis[:, i],
                                    steps=sys.geo_steps, tol_geo=sys.tol_geo,
                                    guard=sys.guard()))
    return amended_gradient_along(sys, q, zeta, dirs)


def _seed_residual(sys, analysis, fam, slc, x):
    """Residual (gradient of the blown-up potential in u, blown-up orbit
    gradient) at parameter 0, as a function of stacked (u, mu2 coords)."""
    dim_u = slc.dim_u
    u = x[:dim_u]
    fam_x = _with_mu2(analysis, fam, x[dim_u:])
    grad = np.zeros(dim_u)
    for i in range(dim_u):
        e = np.zeros(dim_u)
        e[i] = 1.0
        grad[i] = dir_derivative(
            lambda t: blown_up_potential(sys, analysis, fam_x, slc, 0.0, u + t * e),
            1, scheme=NESTED_SCHEME, scale=max(1.0, abs(u[i])))
    gval = blown_up_orbit_gradient(sys, analysis, fam_x, slc, 0.0, u)
    return np.concatenate([grad, gval])


def seed_jacobian(sys: ChartSystem, analysis: SymmetryAnalysis, fam: BetaFamily,
                  slc: SliceChart, u, mu2_c) -> np.ndarray:
    """Jacobian of the seed conditions with respect to (u, mu2): the block
    matrix of second u-derivatives of the blown-up potential, its mixed
    mu2 derivatives, and the u and mu2 derivatives of the blown-up orbit
    gradient, all at parameter 0."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    mu2_c = np.atleast_1d(np.asarray(mu2_c, dtype=float))
    x0 = np.concatenate([u, mu2_c])
    scheme = DiffScheme(step_rel=NESTED_SCHEME.step_rel, richardson_levels=2)
    return jacobian_fd(lambda x: _seed_residual(sys, analysis, fam, slc, x),
                       x0, scheme=scheme)


@dataclass
class SeedResult:
    u0: np.ndarray
    mu2_coords: np.ndarray
    mu2: np.ndarray
    residual: float
    iterations: int
    delta: np.ndarray
    delta_det: float


def _newton(residual_fn, jacobian_fn, x0, tol, max_iter, floor_factor=1e3):
    """Newton iteration with a stall acceptance at the finite-difference floor.

    Iterates until the residual norm reaches ``tol``; when the residual stops
    improving while sitting within ``floor_factor * tol`` (the signature of
    the evaluation noise floor), the best iterate is accepted.
    """
    x = np.asarray(x0, dtype=float).copy()
    res = residual_fn(x)
    norm = float(np.linalg.norm(res))
    best_x, best_norm = x.copy(), norm
    stall = 0
    its = 0
    while its < max_iter:
        if norm <= tol:
            return x, norm, its
        jac = jacobian_fn(x)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise NewtonDiverged("singular Jacobian in Newton iteration")
        x = x + step
        res = residual_fn(x)
        norm = float(np.linalg.norm(res))
        its += 1
        if norm < 0.5 * best_norm:
            best_x, best_norm = x.copy(), norm
            stall = 0
        else:
            stall += 1
            if best_norm <= floor_factor * tol and stall >= 2:
                return best_x, best_norm, its
    if best_norm <= floor_factor * tol:
        return best_x, best_norm, its
    raise NewtonDiverged(f"no convergence after {max_iter} iterations "
                         f"(residual {best_norm:.3e})")


def find_seed(sys: ChartSystem, analysis: SymmetryAnalysis, fam: BetaFamily,
              slc: SliceChart, guess_u=None, guess_mu2=None,
              tol: float = TOL_NEWTON, max_iter: int = NEWTON_MAX_ITER,
              tol_z: float = TOL_Z) -> SeedResult:
    """Newton-solve the seed conditions at parameter 0 and certify the
    nondegeneracy of the Jacobian there."""
    u = np.atleast_1d(np.asarray(guess_u if guess_u is not None else slc.u_v0,
                                 dtype=float))
    m2c = np.atleast_1d(np.asarray(
        guess_mu2 if guess_mu2 is not None else np.zeros(analysis.m2.shape[1]),
        dtype=float))
    x0 = np.concatenate([u, m2c])
    scale = max(1.0, abs(amended_limit(sys, analysis, fam)))

    def res_fn(x):
        return _seed_residual(sys, analysis, fam, slc, x)

    # plain central differences suffice for the iteration Jacobian; the
    # certificate matrix below is recomputed with full extrapolation
    iter_scheme = DiffScheme(step_rel=NESTED_SCHEME.step_rel, richardson_levels=0)

    def jac_fn(x):
        return jacobian_fd(res_fn, x, scheme=iter_scheme)

    x, resnorm, its = _newton(res_fn, jac_fn, x0, tol * scale, max_iter)
    delta = seed_jacobian(sys, analysis, fam, slc, x[:slc.dim_u], x[slc.dim_u:])
    det = linalg.equilibrated_det(delta)
    if abs(det) <= tol_z:
        raise DeltaDegenerate(
            f"seed conditions hold but the certificate matrix is degenerate "
            f"(equilibrated det {det:.3e})")
    u0 = x[:slc.dim_u]
    m2c = x[slc.dim_u:]
    mu2 = analysis.m2 @ m2c if m2c.size else np.zeros(analysis.dim_g)
    return SeedResult(u0=u0, mu2_coords=m2c, mu2=mu2, residual=resnorm,
                      iterations=its, delta=delta, delta_det=float(np.linalg.det(delta)))


@dataclass
class BranchPoint:
    tau: float
    u: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    q: np.ndarray
    zeta: np.ndarray
    beta_val: np.ndarray
    res_F: float
    res_G: float
    stability: Stability = Stability.NOT_COMPUTED


@dataclass
class Branch:
    points: list
    seed: tuple
    delta_det: float
    diagnostics: dict = field(default_factory=dict)

    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points])


def _corrector_residual(sys, analysis, fam, slc, tau, x):
    dim_u = slc.dim_u
    u = x[:dim_u]
    fam_x = _with_mu2(analysis, fam, x[dim_u:])
    grad = slice_gradient(sys, analysis, fam_x, slc, tau, u)
    gval = orbit_gradient(sys, analysis, fam_x, slc, tau, u) / tau \
        if analysis.k2.shape[1] else np.zeros(0)
    return np.concatenate([grad, gval])


def _splitting_condition(sys, analysis, slc, tau, u, q):
    """Condition number of the tangent-space decomposition at a branch point:
    torus generators, pushed-forward slice directions, pushed-forward
    bracket generators."""
    cheap = DiffScheme(step_rel=SECOND_SCHEME.step_rel, richardson_levels=0)
    cols = []
    for j in range(analysis.torus_basis.shape[1]):
        cols.append(sys.generator(analysis.torus_basis[:, j], q))
    w_full = tau * slc.sigma(u)
    for i in range(slc.dim_u):
        cols.append(pushforward_exp(sys.metric, sys.q_e, w_full, slc.basis[:, i],
                                    steps=sys.geo_steps, tol_geo=sys.tol_geo,
                                    guard=sys.guard(), scheme=cheap))
    for i in range(analysis.k2.shape[1]):
        gen = sys.generator(analysis.k2[:, i], sys.q_e)
        cols.append(pushforward_exp(sys.metric, sys.q_e, w_full, gen,
                                    steps=sys.geo_steps, tol_geo=sys.tol_geo,
                                    guard=sys.guard(), scheme=cheap))
    mat = linalg.as_columns(cols, sys.n)
    norms = np.linalg.norm(mat, axis=0)
    norms[norms == 0.0] = 1.0
    return float(np.linalg.cond(mat / norms))


def continue_branch(sys: ChartSystem, analysis: SymmetryAnalysis,
                    fam: BetaFamily, slc: SliceChart, seed: SeedResult,
                    tau_max: float, n_steps: int = DEFAULT_N_STEPS,
                    tol: float = TOL_NEWTON, max_iter: int = NEWTON_MAX_ITER,
                    tol_z: float = TOL_Z) -> Branch:
    """March the branch conditions from the seed along the ray parameter.

    The corrector solves the parameter-scaled gradient conditions by Newton
    with a secant predictor; failed steps are halved down to the minimum
    step.  Every accepted point is checked for trivial isotropy, for drift
    into the singular direction set, and for well-conditioning of the
    tangent-space splitting.
    """
    fam0 = _with_mu2(analysis, fam, seed.mu2_coords)
    w0 = slc.sigma(seed.u0)
    zeta0 = ZetaPath(sys, analysis, fam0, w0).data.limit_velocity
    start = BranchPoint(
        tau=0.0, u=seed.u0.copy(), mu1=fam.mu1.copy(), mu2=fam0.mu2.copy(),
        q=sys.q_e.copy(), zeta=zeta0, beta_val=momentum_path(fam0, 0.0),
        res_F=seed.residual, res_G=0.0)
    points = [start]
    diagnostics = {"max_splitting_cond": 0.0, "min_k0_generator": np.inf,
                   "halvings": 0}
    branch = Branch(points=points, seed=(seed.u0.copy(), fam.mu1.copy(),
                                         fam0.mu2.copy()),
                    delta_det=seed.delta_det, diagnostics=diagnostics)
    if tau_max <= 0.0 or n_steps <= 0:
        return branch

    scale = max(1.0, abs(amended_limit(sys, analysis, fam)))
    min_step = tau_max / 2.0 ** MIN_STEP_HALVINGS
    jac_scheme = DiffScheme(step_rel=SECOND_SCHEME.step_rel, richardson_levels=1)

    x_prev = None
    x_cur = np.concatenate([seed.u0, seed.mu2_coords])
    tau_prev = None
    tau_cur = 0.0
    targets = [tau_max * (j / n_steps) for j in range(1, n_steps + 1)]
    idx = 0
    while idx < len(targets):
        tau_target = targets[idx]
        accepted = False
        sub_target = tau_target
        while not accepted:
            if x_prev is not None and tau_prev is not None and tau_cur > tau_prev:
                slope = (x_cur - x_prev) / (tau_cur - tau_prev)
                x_guess = x_cur + slope * (sub_target - tau_cur)
            else:
                x_guess = x_cur.copy()
            try:
                x_new, resnorm, _ = _newton(
                    lambda x: _corrector_residual(sys, analysis, fam, slc,
                                                  sub_target, x),
                    lambda x: jacobian_fd(
                        lambda y: _corrector_residual(sys, analysis, fam, slc,
                                                      sub_target, y),
                        x, scheme=jac_scheme),
                    x_guess, tol * scale, max_iter)
                accepted = True
            except NewtonDiverged:
                diagnostics["halvings"] += 1
                sub_target = 0.5 * (tau_cur + sub_target)
                if sub_target - tau_cur < min_step:
                    raise StepFailed(sub_target)
        point = _build_point(sys, analysis, fam, slc, sub_target, x_new, resnorm,
                             diagnostics, tol_z)
        points.append(point)
        x_prev, tau_prev = x_cur, tau_cur
        x_cur, tau_cur = x_new, sub_target
        if sub_target == tau_target:
            idx += 1
    return branch


def _build_point(sys, analysis, fam, slc, tau, x, resnorm, diagnostics, tol_z):
    dim_u = slc.dim_u
    u = x[:dim_u]
    fam_x = _with_mu2(analysis, fam, x[dim_u:])
    w = slc.sigma(u)
    q = exp_ray(sys, w, tau)
    beta_val = momentum_path(fam_x, tau)
    zeta = solve_direct_velocity(sys, q, beta_val) if abs(tau) > TAU_SWITCH \
        else ZetaPath(sys, analysis, fam_x, w).at(tau)

    # singular-set drift check
    a_mat = velocity_system_matrix(sys, analysis, w)
    det = linalg.equilibrated_det(a_mat.T)
    if analysis.dim_k0 > 0 and abs(det) <= tol_z:
        raise InZMu(f"continuation drifted into a singular direction at tau={tau}")

    gen_min = np.inf
    for a in range(analysis.dim_k0):
        gen_min = min(gen_min, float(np.linalg.norm(
            sys.generator(analysis.k0[:, a], q))))
    if analysis.dim_k0 and gen_min <= 1e-12:
        raise StepFailed(tau, "isotropy did not break along the branch")
    diagnostics["min_k0_generator"] = min(diagnostics["min_k0_generator"], gen_min)

    cond = _splitting_condition(sys, analysis, slc, tau, u, q)
    if cond > 1e12:
        raise StepFailed(tau, "tangent-space splitting degenerated")
    diagnostics["max_splitting_cond"] = max(diagnostics["max_splitting_cond"], cond)

    res_g = 0.0
    if analysis.k2.shape[1]:
        res_g = float(np.linalg.norm(
            orbit_gradient(sys, analysis, fam_x, slc, tau, u) / tau))
    res_f = float(np.linalg.norm(slice_gradient(sys, analysis, fam_x, slc, tau, u)))
    return BranchPoint(tau=tau, u=u.copy(), mu1=fam.mu1.copy(), mu2=fam_x.mu2.copy(),
                       q=q, zeta=zeta, beta_val=beta_val, res_F=res_f, res_G=res_g)


@dataclass
class BranchVerification:
    max_amended_residual: float
    base_augmented_residual: float
    dynamic_all_ok: bool
    per_point: list


def verify_branch(sys: ChartSystem, analysis: SymmetryAnalysis, branch: Branch,
                  horizon: float, dynamic_tol: float = 1e-4) -> BranchVerification:
    """Independent checks of a computed branch.

    For every positive-parameter point: the amended-potential gradient at the
    configuration, restricted to a complement of the torus-orbit directions,
    and a dynamic integration test of the steady motion.  The starting point
    is checked through the augmented potential with the limit velocity.
    """
    from .mechanics import d_amended, d_augmented, verify_steady_motion

    rows = []
    worst = 0.0
    dyn_ok = True
    base_res = 0.0
    for p in branch.points:
        if p.tau == 0.0:
            base_res = float(np.linalg.norm(d_augmented(sys, p.zeta, p.q)))
            rows.append({"tau": p.tau, "amended_residual": None,
                         "dynamic_ok": None, "augmented_residual": base_res})
            continue
        grad = d_amended(sys, p.beta_val, p.q)
        g_q = sys.metric(p.q)
        torus_dirs = [sys.generator(analysis.torus_basis[:, j], p.q)
                      for j in range(analysis.torus_basis.shape[1])]
        span = linalg.as_columns(torus_dirs, sys.n) if torus_dirs else np.zeros((sys.n, 0))
        proj = linalg.orthogonal_projector(span, g_q)
        comp = linalg.gram_schmidt(np.eye(sys.n) - proj @ np.eye(sys.n),
                                   inner=g_q, tol=1e-9)
        res = max((abs(float(grad @ comp[:, j])) for j in range(comp.shape[1])),
                  default=0.0)
        worst = max(worst, res)
        ok = None
        if sys.group_action is not None:
            ok = verify_steady_motion(sys, p.q, p.zeta, horizon, dynamic_tol)
            dyn_ok = dyn_ok and ok
        rows.append({"tau": p.tau, "amended_residual": res, "dynamic_ok": ok,
                     "augmented_residual": None})
    return BranchVerification(max_amended_residual=worst,
                              base_augmented_residual=base_res,
                              dynamic_all_ok=dyn_ok, per_point=rows)


def branch_csv_header(dim_u: int, dim_g: int, n: int):
    cols = ["tau"]
    cols += [f"u_{i}" for i in range(dim_u)]
    cols += [f"mu1_{i}" for i in range(dim_g)]
    cols += [f"mu2_{i}" for i in range(dim_g)]
    cols += [f"q_{i}" for i in range(n)]
    cols += [f"zeta_{i}" for i in range(dim_g)]
    cols += [f"beta_{i}" for i in range(dim_g)]
    cols += ["res_F", "res_G", "stability"]
    return cols


def write_branch_csv(branch: Branch, path):
    """One row per branch point; numeric cells use shortest round-trip text."""
    if not branch.points:
        raise ValueError("cannot serialize an empty branch")
    p0 = branch.points[0]
    header = branch_csv_header(p0.u.size, p0.mu1.size, p0.q.size)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for p in branch.points:
            row = ([repr(p.tau)] + [repr(x) for x in p.u]
                   + [repr(x) for x in p.mu1] + [repr(x) for x in p.mu2]
                   + [repr(x) for x in p.q] + [repr(x) for x in p.zeta]
                   + [repr(x) for x in p.beta_val]
                   + [repr(p.res_F), repr(p.res_G), str(p.stability)])
            writer.writerow(row)


def read_branch_csv(path) -> Branch:
    """Rebuild a Branch from its CSV serialization (seed data is not stored)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    dim_u = sum(1 for c in header if c.startswith("u_"))
    dim_g = sum(1 for c in header if c.startswith("mu1_"))
    n = sum(1 for c in header if c.startswith("q_"))
    points = []
    for row in rows:
        vals = row[:-1]
        stability = Stability(row[-1])
        nums = [float(x) for x in vals]
        i = 0
        tau = nums[i]; i += 1
        u = np.array(nums[i:i + dim_u]); i += dim_u
        mu1 = np.array(nums[i:i + dim_g]); i += dim_g
        mu2 = np.array(nums[i:i + dim_g]); i += dim_g
        q = np.array(nums[i:i + n]); i += n
        zeta = np.array(nums[i:i + dim_g]); i += dim_g
        beta_val = np.array(nums[i:i + dim_g]); i += dim_g
        res_f = nums[i]; i += 1
        res_g = nums[i]
        points.append(BranchPoint(tau=tau, u=u, mu1=mu1, mu2=mu2, q=q, zeta=zeta,
                                  beta_val=beta_val, res_F=res_f, res_G=res_g,
                                  stability=stability))
    seed = (points[0].u.copy(), points[0].mu1.copy(), points[0].mu2.copy()) \
        if points else (np.zeros(dim_u), np.zeros(dim_g), np.zeros(dim_g))
    return Branch(points=points, seed=seed, delta_det=float("nan"))
