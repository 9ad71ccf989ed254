"""Simple mechanical systems with symmetry in one chart: action generators,
the locked inertia tensor, momentum, augmented and amended potentials, and
dynamic verification of steady motions.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import geometry
from .errors import LeftChart, SymmetricPoint
from .geometry import (DiffScheme, MetricField, FIRST_SCHEME, christoffel,
                       dir_derivative, gradient_fd, make_chart_guard,
                       riemannian_exp)
from .lie import LieAlgebra

TOL_INV = 1e-8
TOL_RANK = 1e-8


@dataclass(frozen=True)
class ChartSystem:
    """A simple mechanical system with compact symmetry in one chart.

    ``generator(xi, q)`` returns the infinitesimal generator vector field of
    the algebra element ``xi`` at the chart point ``q``.  ``group_action``,
    when supplied, is the flow ``(xi, t, q) -> exp(t xi) . q`` of one-parameter
    subgroups and enables the finite (non-infinitesimal) checks.
    All callbacks must be pure; instances are immutable and safe to share.
    """

    name: str
    n: int
    metric: MetricField
    potential: Callable[[np.ndarray], float]
    generator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    algebra: LieAlgebra
    q_e: np.ndarray
    chart_radius: float
    group_action: Optional[Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = None
    d_potential: Optional[Callable[[np.ndarray], np.ndarray]] = None
    isotropy: Optional[np.ndarray] = None
    geo_steps: int = 64
    tol_geo: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "q_e", np.asarray(self.q_e, dtype=float))
        if self.isotropy is not None:
            object.__setattr__(self, "isotropy",
                               np.atleast_2d(np.asarray(self.isotropy, dtype=float)))

    def guard(self):
        return make_chart_guard(self.q_e, self.chart_radius)

    def in_chart(self, q) -> bool:
        return np.linalg.norm(np.asarray(q, dtype=float) - self.q_e) < self.chart_radius

    def potential_gradient(self, q) -> np.ndarray:
        if self.d_potential is not None:
            return np.asarray(self.d_potential(np.asarray(q, dtype=float)), dtype=float)
        return gradient_fd(self.potential, q)


def generator_matrix(sys: ChartSystem, q) -> np.ndarray:
    """Matrix whose column a is the generator of the a-th algebra basis vector."""
    q = np.asarray(q, dtype=float)
    dim = sys.algebra.dim
    cols = np.zeros((sys.n, dim))
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = 1.0
        cols[:, a] = sys.generator(e, q)
    return cols


def locked_inertia(sys: ChartSystem, q) -> np.ndarray:
    """Locked inertia tensor at q: the Gram matrix of the generators.

    Entry (a, b) is the metric pairing of the generators of the a-th and b-th
    algebra basis vectors; the kernel is the isotropy algebra at q.
    """
    k = generator_matrix(sys, q)
    g = sys.metric(q)
    inertia = k.T @ g @ k
    return 0.5 * (inertia + inertia.T)


def momentum(sys: ChartSystem, q, v) -> np.ndarray:
    """Momentum covector of the velocity v at q: component a is g(v, e_a.Q(q))."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    return generator_matrix(sys, q).T @ (sys.metric(q) @ v)


def inertia_rank_gap(sys: ChartSystem, q):
    """Singular values of the locked inertia tensor, for kernel diagnostics."""
    s = np.linalg.svd(locked_inertia(sys, q), compute_uv=False)
    return s


def _inertia_directional(sys: ChartSystem, q, direction,
                         scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Directional derivative of the locked inertia matrix along a chart vector."""
    q = np.asarray(q, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return dir_derivative(lambda t: locked_inertia(sys, q + t * direction), 1,
                          scheme=scheme)


def augmented_potential(sys: ChartSystem, xi, q) -> float:
    """V(q) minus half the locked-inertia quadratic form at the velocity xi."""
    xi = np.asarray(xi, dtype=float)
    return float(sys.potential(np.asarray(q, dtype=float))
                 - 0.5 * xi @ locked_inertia(sys, q) @ xi)


def d_augmented(sys: ChartSystem, xi, q) -> np.ndarray:
    """Chart gradient of the augmented potential.

    The inertia part is assembled from directional derivatives of the inertia
    matrix, which keeps the noise floor at the first-derivative level.
    """
    q = np.asarray(q, dtype=float)
    xi = np.asarray(xi, dtype=float)
    grad = sys.potential_gradient(q).copy()
    for i in range(sys.n):
        e = np.zeros(sys.n)
        e[i] = 1.0
        di = _inertia_directional(sys, q, e)
        grad[i] -= 0.5 * xi @ di @ xi
    return grad


def amended_potential(sys: ChartSystem, mu, q) -> float:
    """V(q) plus half the pairing of mu with the inertia-inverse of mu.

    Defined only where the locked inertia tensor is invertible; at symmetric
    points the blow-up machinery must be used instead.
    """
    mu = np.asarray(mu, dtype=float)
    inertia = locked_inertia(sys, q)
    s = np.linalg.svd(inertia, compute_uv=False)
    if s.size == 0 or s[-1] <= TOL_RANK * s[0] or s[0] == 0.0:
        raise SymmetricPoint("locked inertia tensor is singular at this point")
    zeta = np.linalg.solve(inertia, mu)
    return float(sys.potential(np.asarray(q, dtype=float)) + 0.5 * mu @ zeta)


def d_amended(sys: ChartSystem, mu, q) -> np.ndarray:
    """Chart gradient of the amended potential at an asymmetric point."""
    q = np.asarray(q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    inertia = locked_inertia(sys, q)
    s = np.linalg.svd(inertia, compute_uv=False)
    if s.size == 0 or s[-1] <= TOL_RANK * s[0] or s[0] == 0.0:
        raise SymmetricPoint("locked inertia tensor is singular at this point")
    zeta = np.linalg.solve(inertia, mu)
    grad = sys.potential_gradient(q).copy()
    for i in range(sys.n):
        e = np.zeros(sys.n)
        e[i] = 1.0
        di = _inertia_directional(sys, q, e)
        grad[i] -= 0.5 * zeta @ di @ zeta
    return grad


def amended_gradient_along(sys: ChartSystem, q, zeta, directions) -> np.ndarray:
    """Derivatives of the amended potential along given chart directions,
    expressed through the velocity ``zeta`` solving inertia * zeta = mu.

    Valid at any point where ``zeta`` is known, including the blow-up limit.
    """
    q = np.asarray(q, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    dv = sys.potential_gradient(q)
    out = np.zeros(len(directions))
    for i, w in enumerate(directions):
        w = np.asarray(w, dtype=float)
        di = _inertia_directional(sys, q, w)
        out[i] = dv @ w - 0.5 * zeta @ di @ zeta
    return out


def exp_ray(sys: ChartSystem, v, tau: float) -> np.ndarray:
    """Riemannian exponential of tau * v from the base configuration."""
    v = np.asarray(v, dtype=float)
    if tau == 0.0:
        return sys.q_e.copy()
    return riemannian_exp(sys.metric, sys.q_e, tau * v, steps=sys.geo_steps,
                          tol_geo=sys.tol_geo, guard=sys.guard())


@dataclass
class IdentityReport:
    """Maximum residuals of the inertia-tensor identities over random draws."""

    directional_pairing: float      # derivative of <I(.)xi,eta> vs bracket form
    infinitesimal_conjugation: float  # T_q I along a generator vs ad-star form
    finite_conjugation: Optional[float]  # inertia at moved points vs Ad-conjugation
    draws: int

    def max_residual(self) -> float:
        vals = [self.directional_pairing, self.infinitesimal_conjugation]
        if self.finite_conjugation is not None:
            vals.append(self.finite_conjugation)
        return max(vals)


def verify_identities(sys: ChartSystem, sample_count: int = 50,
                      rng=None) -> IdentityReport:
    """Check the structural identities of the locked inertia tensor.

    (i) the chart derivative of the pairing <I(.)xi, eta> along a generator
    equals the bracket combination <I[xi,zeta],eta> + <I xi,[eta,zeta]>;
    (ii) the derivative of I along a generator equals minus the coadjoint /
    adjoint conjugation by that algebra element;
    (iii) with a group action available, I at a moved point equals the
    Ad-conjugated tensor.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    alg = sys.algebra
    dim = alg.dim
    res_i = 0.0
    res_ii = 0.0
    res_iii = None if sys.group_action is None else 0.0
    for _ in range(sample_count):
        dq = rng.standard_normal(sys.n)
        dq *= 0.4 * sys.chart_radius * rng.uniform(0.0, 1.0) / max(np.linalg.norm(dq), 1e-12)
        q = sys.q_e + dq
        xi, eta, zeta = (rng.standard_normal(dim) for _ in range(3))
        gen_zeta = sys.generator(zeta, q)

        lhs = geometry.derivative_along(
            lambda p: float(xi @ locked_inertia(sys, p) @ eta), q, gen_zeta)
        inertia = locked_inertia(sys, q)
        rhs = float(alg.bracket(xi, zeta) @ inertia @ eta
                    + xi @ inertia @ alg.bracket(eta, zeta))
        res_i = max(res_i, abs(lhs - rhs))

        gen_xi = sys.generator(xi, q)
        t_inertia = _inertia_directional(sys, q, gen_xi)
        ad_xi = alg.ad(xi)
        rhs_mat = -ad_xi.T @ inertia - inertia @ ad_xi
        res_ii = max(res_ii, float(np.max(np.abs(t_inertia - rhs_mat))))

        if sys.group_action is not None:
            t = rng.uniform(-0.5, 0.5)
            moved = np.asarray(sys.group_action(xi, t, q), dtype=float)
            if sys.in_chart(moved):
                ad_inv = scipy.linalg.expm(-t * ad_xi)
                lhs_mat = locked_inertia(sys, moved)
                rhs_mat = ad_inv.T @ inertia @ ad_inv
                res_iii = max(res_iii, float(np.max(np.abs(lhs_mat - rhs_mat))))
    return IdentityReport(res_i, res_ii, res_iii, sample_count)


def validate_system(sys: ChartSystem, sample_count: int = 12, rng=None,
                    tol: float = TOL_INV):
    """Construction-time checks: generator linearity, invariance of the
    potential and of the metric along generators.  Raises ValueError.
    """
    if rng is None:
        rng = np.random.default_rng(1)
    alg = sys.algebra
    for _ in range(sample_count):
        dq = rng.standard_normal(sys.n)
        dq *= 0.4 * sys.chart_radius * rng.uniform(0.0, 1.0) / max(np.linalg.norm(dq), 1e-12)
        q = sys.q_e + dq
        xi = rng.standard_normal(alg.dim)
        eta = rng.standard_normal(alg.dim)
        lin = (sys.generator(xi + eta, q)
               - sys.generator(xi, q) - sys.generator(eta, q))
        if np.max(np.abs(lin)) > 1e-10 * max(1.0, np.linalg.norm(q)):
            raise ValueError(f"{sys.name}: generator is not linear in the algebra argument")
        gen = sys.generator(xi, q)
        dv_along = float(sys.potential_gradient(q) @ gen)
        if abs(dv_along) > tol * max(1.0, abs(sys.potential(q))):
            raise ValueError(f"{sys.name}: potential is not invariant along generators")
        lie_res = _metric_lie_derivative(sys, q, xi)
        if lie_res > tol:
            raise ValueError(f"{sys.name}: metric is not invariant along generators")


def _metric_lie_derivative(sys: ChartSystem, q, xi) -> float:
    """Max-abs entry of the Lie derivative of the metric along a generator."""
    q = np.asarray(q, dtype=float)
    gen = sys.generator(xi, q)
    dg_along = dir_derivative(lambda t: sys.metric(q + t * gen), 1)
    jac = geometry.jacobian_fd(lambda p: sys.generator(xi, p), q)
    g = sys.metric(q)
    lie = dg_along + jac.T @ g + g @ jac
    return float(np.max(np.abs(lie)))


def _el_acceleration_factory(sys: ChartSystem):
    def extra(q):
        g = sys.metric(q)
        return -np.linalg.solve(g, sys.potential_gradient(q))
    return extra


def integrate_motion(sys: ChartSystem, q0, v0, total_time: float, steps: int):
    """Integrate the Euler-Lagrange equations (geodesic with potential force)."""
    return geometry._rk4_path(sys.metric, q0, v0, total_time, steps, None,
                              guard=sys.guard(),
                              extra_accel=_el_acceleration_factory(sys))


def verify_steady_motion(sys: ChartSystem, q, xi, horizon: float, tol: float,
                         checkpoints: int = 16, steps_per_unit: int = 256) -> bool:
    """Integrate the dynamics from (q, xi_Q(q)) and compare the trajectory with
    the one-parameter group orbit through q at evenly spaced checkpoints.

    Requires the system's group action.  Returns True when the maximum chart
    deviation over all checkpoints stays within ``tol``.
    """
    if sys.group_action is None:
        raise ValueError("verify_steady_motion requires a group action")
    q = np.asarray(q, dtype=float)
    xi = np.asarray(xi, dtype=float)
    v0 = sys.generator(xi, q)
    n_steps = max(64, int(round(horizon * steps_per_unit)))
    per_checkpoint = max(1, n_steps // checkpoints)
    dt_block = horizon / checkpoints
    cur_q, cur_v = q.copy(), v0.copy()
    worst = 0.0
    for i in range(checkpoints):
        cur_q, cur_v = geometry._rk4_path(
            sys.metric, cur_q, cur_v, dt_block, per_checkpoint, None,
            guard=sys.guard(), extra_accel=_el_acceleration_factory(sys))
        t = dt_block * (i + 1)
        expected = np.asarray(sys.group_action(xi, t, q), dtype=float)
        worst = max(worst, float(np.linalg.norm(cur_q - expected)))
        if worst > 10.0 * tol and i >= 1:
            return False
    return worst <= tol
