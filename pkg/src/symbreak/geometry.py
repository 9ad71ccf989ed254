"""Single-chart Riemannian geometry: metric fields, Christoffel symbols, the
Riemannian exponential by geodesic integration, and the finite-difference
differentiation engine used everywhere else.

All points and tangent vectors are plain numpy arrays of chart coordinates.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GeoTolerance, LeftChart, MetricDegenerate, NonFinite

EPS = float(np.finfo(float).eps)

# Pinned relative steps.  Richardson nodes are laid out *above* the base step
# (h, 2h, 4h, ...): extrapolation removes the truncation of the large nodes
# while the base step keeps the roundoff amplification at its minimum.
STEP_FIRST = EPS ** (1.0 / 3.0)     # ~6.0e-6, first derivatives
STEP_SECOND = EPS ** 0.25           # ~1.2e-4, second derivatives
STEP_NESTED = EPS ** 0.125          # ~1.1e-2, outer derivatives of FD-computed values


@dataclass(frozen=True)
class DiffScheme:
    """Finite-difference scheme: relative step, stencil order, Richardson levels."""

    step_rel: float = STEP_SECOND
    order: int = 2
    richardson_levels: int = 2

    def __post_init__(self):
        if self.step_rel <= 0.0:
            raise ValueError("step_rel must be positive")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")


FIRST_SCHEME = DiffScheme(step_rel=STEP_FIRST, richardson_levels=2)
SECOND_SCHEME = DiffScheme(step_rel=STEP_SECOND, richardson_levels=2)
NESTED_SCHEME = DiffScheme(step_rel=STEP_NESTED, richardson_levels=2)


def _check_finite(value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite("stencil evaluation returned a non-finite value")
    return arr


def _stencil(f, order_d, order_acc, h):
    """One central-difference estimate of the derivative of given order."""
    if order_d == 1:
        if order_acc == 2:
            return (_check_finite(f(h)) - _check_finite(f(-h))) / (2.0 * h)
        return (-_check_finite(f(2 * h)) + 8.0 * _check_finite(f(h))
                - 8.0 * _check_finite(f(-h)) + _check_finite(f(-2 * h))) / (12.0 * h)
    if order_acc == 2:
        return (_check_finite(f(h)) - 2.0 * _check_finite(f(0.0))
                + _check_finite(f(-h))) / (h * h)
    return (-_check_finite(f(2 * h)) + 16.0 * _check_finite(f(h))
            - 30.0 * _check_finite(f(0.0)) + 16.0 * _check_finite(f(-h))
            - _check_finite(f(-2 * h))) / (12.0 * h * h)


def dir_derivative(f, order: int, scheme: Optional[DiffScheme] = None, scale: float = 1.0):
    """Derivative of the stated order of ``f`` at 0 by central differences.

    ``f`` maps a real parameter to a scalar or array; arrays are handled
    componentwise.  Richardson extrapolation runs over steps h, 2h, 4h, ...
    where h = step_rel * scale.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if scheme is None:
        scheme = FIRST_SCHEME if order == 1 else SECOND_SCHEME
    h = scheme.step_rel * max(1.0, abs(scale))
    levels = scheme.richardson_levels
    # estimates[i] uses step h * 2**(levels - i): coarsest first
    estimates = [_stencil(f, order, scheme.order, h * 2.0 ** (levels - i))
                 for i in range(levels + 1)]
    p0 = scheme.order  # leading error power; the series proceeds in h^2 steps
    for j in range(1, levels + 1):
        factor = 2.0 ** (p0 + 2 * (j - 1))
        estimates = [
            (factor * estimates[i + 1] - estimates[i]) / (factor - 1.0)
            for i in range(len(estimates) - 1)
        ]
    return estimates[0]


def derivative_along(f, x, direction, order: int = 1,
                     scheme: Optional[DiffScheme] = None):
    """Derivative of ``f`` along a straight chart line through ``x``."""
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return dir_derivative(lambda t: f(x + t * direction), order, scheme=scheme)


def gradient_fd(f, x, scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Finite-difference gradient of a scalar function of chart coordinates."""
    x = np.asarray(x, dtype=float)
    if scheme is None:
        scheme = FIRST_SCHEME
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = 1.0
        out[i] = dir_derivative(lambda t: f(x + t * e), 1, scheme=scheme,
                                scale=max(1.0, abs(x[i])))
    return out


def jacobian_fd(f, x, scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Finite-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    if scheme is None:
        scheme = DiffScheme(step_rel=STEP_SECOND, richardson_levels=1)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = 1.0
        cols.append(dir_derivative(lambda t: np.asarray(f(x + t * e), dtype=float),
                                   1, scheme=scheme, scale=max(1.0, abs(x[i]))))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def hessian_fd(f, x, scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Symmetric finite-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if scheme is None:
        scheme = NESTED_SCHEME
    hess = np.zeros((n, n))
    basis = np.eye(n)
    for i in range(n):
        hess[i, i] = dir_derivative(lambda t: f(x + t * basis[i]), 2, scheme=scheme,
                                    scale=max(1.0, abs(x[i])))
    for i in range(n):
        for j in range(i + 1, n):
            # second derivative along e_i + e_j minus the diagonal parts
            mixed = dir_derivative(lambda t: f(x + t * (basis[i] + basis[j])), 2,
                                   scheme=scheme,
                                   scale=max(1.0, abs(x[i]), abs(x[j])))
            hess[i, j] = hess[j, i] = 0.5 * (mixed - hess[i, i] - hess[j, j])
    return 0.5 * (hess + hess.T)


class MetricField:
    """Riemannian metric in one chart: a callback returning the matrix at a
    point, with an optional analytic derivative callback.

    ``deriv(q)[l, i, j]`` must be the partial derivative of ``g_ij`` with
    respect to coordinate ``l``.  Callbacks must be pure.  ``constant=True``
    declares coordinate-independent coefficients, making geodesics exactly
    affine and skipping the integrator.
    """

    def __init__(self, eval_fn: Callable[[np.ndarray], np.ndarray],
                 deriv_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 constant: bool = False):
        self._eval = eval_fn
        self._deriv = deriv_fn
        self.constant = constant

    def __call__(self, q) -> np.ndarray:
        g = np.asarray(self._eval(np.asarray(q, dtype=float)), dtype=float)
        return 0.5 * (g + g.T)

    @property
    def has_analytic_derivative(self) -> bool:
        return self._deriv is not None

    def derivative(self, q, scheme: Optional[DiffScheme] = None) -> np.ndarray:
        """(n, n, n) array d[l, i, j] = d g_ij / d q_l."""
        q = np.asarray(q, dtype=float)
        if self._deriv is not None:
            return np.asarray(self._deriv(q), dtype=float)
        if scheme is None:
            scheme = DiffScheme(step_rel=STEP_FIRST, richardson_levels=1)
        n = q.size
        out = np.zeros((n, n, n))
        for l in range(n):
            e = np.zeros(n)
            e[l] = 1.0
            out[l] = dir_derivative(lambda t: self(q + t * e), 1, scheme=scheme,
                                    scale=max(1.0, abs(q[l])))
        return out

    def check_positive(self, q):
        g = self(q)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricDegenerate(f"metric not positive definite at {q!r}")
        return g


def christoffel(metric: MetricField, q, scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Christoffel symbols Gamma[k, i, j] of the metric at a chart point."""
    q = np.asarray(q, dtype=float)
    g = metric.check_positive(q)
    dg = metric.derivative(q, scheme=scheme)
    # term[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij, with dg[l, i, j] = d_l g_ij
    term = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    g_inv = np.linalg.inv(g)
    return 0.5 * np.einsum("kl,ijl->kij", g_inv, term)


def _geodesic_accel(metric, q, v, scheme):
    if metric.constant:
        return np.zeros_like(v)
    g = metric(q)
    dg = metric.derivative(q, scheme=scheme)
    # -Gamma^k_ij v^i v^j without forming the symbols:
    # rhs_l = v^i v^j d_i g_jl - (1/2) d_l (v^T g v)
    rhs = (np.einsum("ijl,i,j->l", dg, v, v)
           - 0.5 * np.einsum("lij,i,j->l", dg, v, v))
    return -np.linalg.solve(g, rhs)


def _rk4_path(metric, q0, v0, total_time, steps, scheme, guard=None, extra_accel=None):
    """Fixed-step RK4 for the second-order geodesic(-with-force) equation."""
    q = np.asarray(q0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    h = total_time / steps

    def rhs(state_q, state_v):
        acc = _geodesic_accel(metric, state_q, state_v, scheme)
        if extra_accel is not None:
            acc = acc + extra_accel(state_q)
        return state_v, acc

    for _ in range(steps):
        k1q, k1v = rhs(q, v)
        k2q, k2v = rhs(q + 0.5 * h * k1q, v + 0.5 * h * k1v)
        k3q, k3v = rhs(q + 0.5 * h * k2q, v + 0.5 * h * k2v)
        k4q, k4v = rhs(q + h * k3q, v + h * k3v)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if guard is not None:
            guard(q)
    return q, v


def make_chart_guard(center, radius):
    center = np.asarray(center, dtype=float)

    def guard(q):
        if np.linalg.norm(q - center) >= radius:
            raise LeftChart(
                f"trajectory left the chart of radius {radius} around the base point")

    return guard


def integrate_geodesic(metric: MetricField, q0, v0, total_time: float = 1.0,
                       steps: int = 64, scheme: Optional[DiffScheme] = None,
                       guard=None):
    """Endpoint (q, v) of the geodesic with the given initial data."""
    return _rk4_path(metric, q0, v0, total_time, steps, scheme, guard=guard)


def riemannian_exp(metric: MetricField, q, v, steps: int = 64,
                   tol_geo: float = 1e-10, scheme: Optional[DiffScheme] = None,
                   guard=None) -> np.ndarray:
    """Riemannian exponential: integrate the geodesic for unit time.

    Runs the integrator with ``steps`` and ``2 * steps`` substeps; the
    step-doubling discrepancy (scaled by the RK4 Richardson factor) must stay
    within ``tol_geo``.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return q.copy()
    if metric.constant:
        out = q + v
        if guard is not None:
            guard(out)
        return out
    q_coarse, _ = _rk4_path(metric, q, v, 1.0, steps, scheme, guard=guard)
    q_fine, _ = _rk4_path(metric, q, v, 1.0, 2 * steps, scheme, guard=guard)
    err = np.linalg.norm(q_fine - q_coarse) / 15.0
    if err > tol_geo * max(1.0, np.linalg.norm(q)):
        raise GeoTolerance(
            f"geodesic step-doubling estimate {err:.3e} exceeds {tol_geo:.3e}")
    return q_fine


def pushforward_exp(metric: MetricField, q, w, direction, steps: int = 64,
                    tol_geo: float = 1e-10, guard=None,
                    scheme: Optional[DiffScheme] = None) -> np.ndarray:
    """Derivative of Exp_q at the tangent vector ``w`` along ``direction``.

    Central finite difference of the exponential in the tangent space; the
    pushforward is linear in ``direction``, so the direction is normalized
    first and the result rescaled.
    """
    direction = np.asarray(direction, dtype=float)
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        return np.zeros_like(direction)
    if metric.constant:
        return direction.astype(float).copy()
    unit = direction / nrm
    w = np.asarray(w, dtype=float)
    if scheme is None:
        scheme = DiffScheme(step_rel=STEP_SECOND, richardson_levels=1)

    def shifted(t):
        return riemannian_exp(metric, q, w + t * unit, steps=steps,
                              tol_geo=tol_geo, guard=guard)

    return nrm * dir_derivative(shifted, 1, scheme=scheme)
