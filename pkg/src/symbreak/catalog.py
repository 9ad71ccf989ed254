"""Built-in example systems with closed-form oracle relations, used by the
test suite and addressable from the command line.

All potentials are normalized to vanish at the base configuration; this
costs nothing physically and keeps the blow-up quotients free of large
constant backgrounds.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BadParams, UnknownSystem
from .geometry import MetricField
from .lie import abelian_algebra, so3_algebra
from .mechanics import ChartSystem, validate_system


# ---------------------------------------------------------------------------
# shared closed-form pieces

def _rotate2(angle: float, x, y):
    c, s = np.cos(angle), np.sin(angle)
    return c * x - s * y, s * x + c * y


def _rodrigues(axis, angle: float, p):
    """Rotate a 3-vector about ``axis`` (unit not required) by ``angle`` times
    the axis norm."""
    axis = np.asarray(axis, dtype=float)
    nrm = np.linalg.norm(axis)
    if nrm == 0.0:
        return np.asarray(p, dtype=float).copy()
    k = axis / nrm
    th = angle * nrm
    p = np.asarray(p, dtype=float)
    return (p * np.cos(th) + np.cross(k, p) * np.sin(th)
            + k * (k @ p) * (1.0 - np.cos(th)))


def _warped_block(x, psi: float, dpsi: float):
    """2x2 rotationally invariant metric block psi*I + (1-psi) xx^T/r^2 and
    its coordinate derivative, given psi(r) and psi'(r) at r = |x|."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 == 0.0:
        return np.eye(2), np.zeros((2, 2, 2))
    r = np.sqrt(r2)
    proj = np.outer(x, x) / r2
    g = psi * np.eye(2) + (1.0 - psi) * proj
    dg = np.zeros((2, 2, 2))
    eye = np.eye(2)
    for k in range(2):
        d_proj = ((np.outer(eye[k], x) + np.outer(x, eye[k])) / r2
                  - 2.0 * x[k] * np.outer(x, x) / (r2 * r2))
        dg[k] = dpsi * (x[k] / r) * (np.eye(2) - proj) + (1.0 - psi) * d_proj
    return g, dg


def _psi_sphere(r: float):
    """sin(r)^2 / r^2 and its derivative, stable near zero."""
    if r <= 1e-2:
        r2 = r * r
        psi = 1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 45.0 - r2 ** 3 / 315.0
        dpsi = -2.0 * r / 3.0 + 8.0 * r ** 3 / 45.0 - 2.0 * r ** 5 / 105.0
        return psi, dpsi
    s = np.sin(r)
    psi = (s / r) ** 2
    dpsi = (r * np.sin(2.0 * r) - 2.0 * s * s) / r ** 3
    return float(psi), float(dpsi)


def _sinc(r: float) -> float:
    if r < 1e-4:
        return 1.0 - r * r / 6.0 + r ** 4 / 120.0
    return float(np.sin(r) / r)


def _sinc_slope(r: float) -> float:
    """(d/dr)(sin r / r) divided by r, stable near zero."""
    if r < 1e-3:
        return -1.0 / 3.0 + r * r / 30.0 - r ** 4 / 840.0
    return float((r * np.cos(r) - np.sin(r)) / r ** 3)


def _sphere_embed(x):
    """Unit-sphere point of the normal chart centered at the downward pole."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    s = _sinc(r)
    return np.array([s * x[0], s * x[1], -np.cos(r)])


def _sphere_embed_jacobian(x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    s = _sinc(r)
    c = _sinc_slope(r)
    jac = np.zeros((3, 2))
    for j in range(2):
        for a in range(2):
            jac[a, j] = c * x[j] * x[a] + (s if a == j else 0.0)
        jac[2, j] = s * x[j]
    return jac


# ---------------------------------------------------------------------------
# system builders

def _require_positive(params, keys):
    for key in keys:
        if params[key] <= 0.0:
            raise BadParams(f"parameter {key!r} must be positive, got {params[key]!r}")


def _build_planar_rotor(p):
    k = p["stiffness"]
    if k == 0.0:
        raise BadParams("stiffness must be nonzero")

    metric = MetricField(lambda q: np.eye(2), lambda q: np.zeros((2, 2, 2)),
                         constant=True)

    def potential(q):
        return 0.5 * k * float(q @ q)

    def d_potential(q):
        return k * np.asarray(q, dtype=float)

    def generator(xi, q):
        return xi[0] * np.array([-q[1], q[0]])

    def group_action(xi, t, q):
        x, y = _rotate2(xi[0] * t, q[0], q[1])
        return np.array([x, y])

    return ChartSystem(
        name="planar_rotor", n=2, metric=metric, potential=potential,
        generator=generator, algebra=abelian_algebra(1),
        q_e=np.zeros(2), chart_radius=p["chart_radius"],
        group_action=group_action, d_potential=d_potential,
        isotropy=np.array([[1.0]]))


def _build_flat_t2(p):
    _require_positive(p, ["a"])
    a = p["a"]
    kr = p["k_radial"]
    ks = p["k_second"]
    a2 = a * a

    def psi_pair(r):
        # angular factor (a^2 + (r^2-a^2)^2) / r^2: generator norm is critical
        # in the radial direction exactly on the circle r = a
        r2 = r * r
        phi2 = a2 + (r2 - a2) ** 2
        psi = phi2 / r2
        dpsi = (4.0 * r2 * (r2 - a2) - 2.0 * phi2) / r ** 3
        return psi, dpsi

    def metric_eval(q):
        x = q[:2]
        psi, dpsi = psi_pair(float(np.linalg.norm(x)))
        block, _ = _warped_block(x, psi, dpsi)
        g = np.eye(4)
        g[:2, :2] = block
        return g

    def metric_deriv(q):
        x = q[:2]
        psi, dpsi = psi_pair(float(np.linalg.norm(x)))
        _, dblock = _warped_block(x, psi, dpsi)
        dg = np.zeros((4, 4, 4))
        dg[:2, :2, :2] = dblock
        return dg

    def potential(q):
        r1sq = float(q[0] ** 2 + q[1] ** 2)
        r2sq = float(q[2] ** 2 + q[3] ** 2)
        return 0.25 * kr * (r1sq - a2) ** 2 + 0.5 * ks * r2sq

    def d_potential(q):
        r1sq = float(q[0] ** 2 + q[1] ** 2)
        out = np.zeros(4)
        out[0] = kr * (r1sq - a2) * q[0]
        out[1] = kr * (r1sq - a2) * q[1]
        out[2] = ks * q[2]
        out[3] = ks * q[3]
        return out

    def generator(xi, q):
        return np.array([-xi[0] * q[1], xi[0] * q[0],
                         -xi[1] * q[3], xi[1] * q[2]])

    def group_action(xi, t, q):
        x1, y1 = _rotate2(xi[0] * t, q[0], q[1])
        x2, y2 = _rotate2(xi[1] * t, q[2], q[3])
        return np.array([x1, y1, x2, y2])

    return ChartSystem(
        name="flat_t2", n=4, metric=MetricField(metric_eval, metric_deriv),
        potential=potential, generator=generator, algebra=abelian_algebra(2),
        q_e=np.array([a, 0.0, 0.0, 0.0]), chart_radius=p["chart_radius"],
        group_action=group_action, d_potential=d_potential,
        isotropy=np.array([[0.0], [1.0]]))


def _build_spherical_pendulum(p):
    _require_positive(p, ["mass", "length", "gravity"])
    m, ell, g0 = p["mass"], p["length"], p["gravity"]
    scale = m * ell * ell

    def metric_eval(q):
        psi, dpsi = _psi_sphere(float(np.linalg.norm(q)))
        block, _ = _warped_block(q, psi, dpsi)
        return scale * block

    def metric_deriv(q):
        psi, dpsi = _psi_sphere(float(np.linalg.norm(q)))
        _, dblock = _warped_block(q, psi, dpsi)
        return scale * dblock

    def potential(q):
        r = float(np.linalg.norm(q))
        # 2 sin^2(r/2) = 1 - cos(r) without the small-r cancellation
        return m * g0 * ell * 2.0 * np.sin(0.5 * r) ** 2

    def d_potential(q):
        r = float(np.linalg.norm(q))
        return m * g0 * ell * _sinc(r) * np.asarray(q, dtype=float)

    def generator(xi, q):
        return xi[0] * np.array([-q[1], q[0]])

    def group_action(xi, t, q):
        x, y = _rotate2(xi[0] * t, q[0], q[1])
        return np.array([x, y])

    return ChartSystem(
        name="spherical_pendulum", n=2,
        metric=MetricField(metric_eval, metric_deriv), potential=potential,
        generator=generator, algebra=abelian_algebra(1), q_e=np.zeros(2),
        chart_radius=p["chart_radius"], group_action=group_action,
        d_potential=d_potential, isotropy=np.array([[1.0]]))


def _build_double_spherical_pendulum(p):
    _require_positive(p, ["m1", "m2", "l1", "l2", "gravity"])
    m1, m2, l1, l2, g0 = p["m1"], p["m2"], p["l1"], p["l2"], p["gravity"]

    def metric_eval(q):
        j1 = l1 * _sphere_embed_jacobian(q[:2])
        j2 = l2 * _sphere_embed_jacobian(q[2:])
        g = np.zeros((4, 4))
        g[:2, :2] = (m1 + m2) * (j1.T @ j1)
        g[:2, 2:] = m2 * (j1.T @ j2)
        g[2:, :2] = g[:2, 2:].T
        g[2:, 2:] = m2 * (j2.T @ j2)
        return g

    def potential(q):
        r1 = float(np.linalg.norm(q[:2]))
        r2 = float(np.linalg.norm(q[2:]))
        return ((m1 + m2) * g0 * l1 * 2.0 * np.sin(0.5 * r1) ** 2
                + m2 * g0 * l2 * 2.0 * np.sin(0.5 * r2) ** 2)

    def d_potential(q):
        r1 = float(np.linalg.norm(q[:2]))
        r2 = float(np.linalg.norm(q[2:]))
        out = np.zeros(4)
        out[:2] = (m1 + m2) * g0 * l1 * _sinc(r1) * q[:2]
        out[2:] = m2 * g0 * l2 * _sinc(r2) * q[2:]
        return out

    def generator(xi, q):
        return xi[0] * np.array([-q[1], q[0], -q[3], q[2]])

    def group_action(xi, t, q):
        x1, y1 = _rotate2(xi[0] * t, q[0], q[1])
        x2, y2 = _rotate2(xi[0] * t, q[2], q[3])
        return np.array([x1, y1, x2, y2])

    return ChartSystem(
        name="double_spherical_pendulum", n=4,
        metric=MetricField(metric_eval), potential=potential,
        generator=generator, algebra=abelian_algebra(1), q_e=np.zeros(4),
        chart_radius=p["chart_radius"], group_action=group_action,
        d_potential=d_potential, isotropy=np.array([[1.0]]))


def _build_so3_central_force(p):
    _require_positive(p, ["mass", "r0", "stiffness"])
    m, r0, k = p["mass"], p["r0"], p["stiffness"]

    metric = MetricField(lambda q: m * np.eye(3), lambda q: np.zeros((3, 3, 3)),
                         constant=True)

    def potential(q):
        r = float(np.linalg.norm(q))
        return 0.5 * k * (r - r0) ** 2

    def d_potential(q):
        q = np.asarray(q, dtype=float)
        r = float(np.linalg.norm(q))
        return k * (r - r0) * q / r

    def generator(xi, q):
        return np.cross(xi, q)

    def group_action(xi, t, q):
        return _rodrigues(xi, t, q)

    return ChartSystem(
        name="so3_central_force", n=3, metric=metric, potential=potential,
        generator=generator, algebra=so3_algebra(),
        q_e=np.array([0.0, 0.0, r0]), chart_radius=p["chart_radius"],
        group_action=group_action, d_potential=d_potential,
        isotropy=np.array([[0.0], [0.0], [1.0]]))


def _build_so3_coupled(p):
    _require_positive(p, ["r1", "r2", "k1", "k2"])
    r1, r2, k1, k2, kc = p["r1"], p["r2"], p["k1"], p["k2"], p["k_cross"]

    metric = MetricField(lambda q: np.eye(6), lambda q: np.zeros((6, 6, 6)),
                         constant=True)

    def potential(q):
        x, y = q[:3], q[3:]
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        return (0.5 * k1 * (nx - r1) ** 2 + 0.5 * k2 * (ny - r2) ** 2
                + 0.5 * kc * (float(x @ y) - r1 * r2) ** 2)

    def d_potential(q):
        x, y = np.asarray(q[:3], dtype=float), np.asarray(q[3:], dtype=float)
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        cross = float(x @ y) - r1 * r2
        out = np.zeros(6)
        out[:3] = k1 * (nx - r1) * x / nx + kc * cross * y
        out[3:] = k2 * (ny - r2) * y / ny + kc * cross * x
        return out

    def generator(xi, q):
        return np.concatenate([np.cross(xi, q[:3]), np.cross(xi, q[3:])])

    def group_action(xi, t, q):
        return np.concatenate([_rodrigues(xi, t, q[:3]), _rodrigues(xi, t, q[3:])])

    return ChartSystem(
        name="so3_coupled", n=6, metric=metric, potential=potential,
        generator=generator, algebra=so3_algebra(),
        q_e=np.array([0.0, 0.0, r1, 0.0, 0.0, r2]),
        chart_radius=p["chart_radius"], group_action=group_action,
        d_potential=d_potential, isotropy=np.array([[0.0], [0.0], [1.0]]))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict
    build: Callable[[dict], ChartSystem]
    oracle_notes: str


CATALOG = {
    "planar_rotor": CatalogEntry(
        name="planar_rotor",
        params={"stiffness": 1.0, "chart_radius": 8.0},
        build=_build_planar_rotor,
        oracle_notes=("Circle action on the plane, radial potential. Steady "
                      "rotations of radius r satisfy V'(r) = r w^2; on the "
                      "slice the seed satisfies u^4 = theta^2 / stiffness.")),
    "flat_t2": CatalogEntry(
        name="flat_t2",
        params={"a": 1.0, "k_radial": 1.0, "k_second": 1.0,
                "chart_radius": 0.75},
        build=_build_flat_t2,
        oracle_notes=("Two-torus acting on two planar factors; first factor "
                      "carries a warped angular metric so that every torus "
                      "generator at the base circle is a steady motion. "
                      "Seed: u = (0, (theta^2/k_second)^(1/4)).")),
    "spherical_pendulum": CatalogEntry(
        name="spherical_pendulum",
        params={"mass": 1.0, "length": 1.0, "gravity": 1.0,
                "chart_radius": 2.6},
        build=_build_spherical_pendulum,
        oracle_notes=("Normal chart at the downward pole. Steady rotations "
                      "at polar angle r from the downward vertical satisfy "
                      "cos(r) = gravity / (length * w^2).")),
    "double_spherical_pendulum": CatalogEntry(
        name="double_spherical_pendulum",
        params={"m1": 1.0, "m2": 1.0, "l1": 1.0, "l2": 1.0, "gravity": 1.0,
                "chart_radius": 1.2},
        build=_build_double_spherical_pendulum,
        oracle_notes=("Two coupled pendula under a diagonal circle action; "
                      "checks are property-based (residuals and stability "
                      "flags only).")),
    "so3_central_force": CatalogEntry(
        name="so3_central_force",
        params={"mass": 1.0, "r0": 1.0, "stiffness": 1.0,
                "chart_radius": 0.7},
        build=_build_so3_central_force,
        oracle_notes=("Full rotation group on a radial potential with "
                      "critical radius r0. Every configuration keeps a "
                      "circle of symmetry, so no slice direction has trivial "
                      "isotropy and no symmetry-breaking branch exists; the "
                      "identity, splitting, and criticality layers all "
                      "apply.")),
    "so3_coupled": CatalogEntry(
        name="so3_coupled",
        params={"r1": 1.0, "r2": 1.5, "k1": 1.0, "k2": 1.0, "k_cross": 0.2,
                "chart_radius": 0.5},
        build=_build_so3_coupled,
        oracle_notes=("Rotation group acting diagonally on two vectors; "
                      "aligned base configuration keeps a circle of symmetry "
                      "while generic slice directions break it completely. "
                      "Exercises the bracket-space (orbit-gradient) "
                      "machinery.")),
}


def make_system(name: str, params: Optional[dict] = None,
                validate: bool = True) -> ChartSystem:
    """Build a catalog system, overriding default parameters as requested."""
    if name not in CATALOG:
        raise UnknownSystem(f"unknown system {name!r}; "
                            f"available: {sorted(CATALOG)}")
    entry = CATALOG[name]
    merged = dict(entry.params)
    if params:
        unknown = set(params) - set(merged)
        if unknown:
            raise BadParams(f"unknown parameters for {name!r}: {sorted(unknown)}")
        merged.update({k: float(v) for k, v in params.items()})
    if merged["chart_radius"] <= 0.0:
        raise BadParams("chart_radius must be positive")
    sys = entry.build(merged)
    if validate:
        validate_system(sys)
    return sys
