"""Sublevel geometry of PSH exhaustions: boundary measures and the
Lelong-Jensen identity.

For a smooth exhaustion ``phi`` with regular level set S_phi(r) = {phi = r},
the associated boundary measure concentrates on the level set with an
explicit surface density built from the quaternionic normal frame of the
outward unit normal, the first-order operators applied to phi, and the
second-order delta matrices:

    density = 2^(n-1) (n-1)! * sum_{i != j} sum_{matchings of the rest}
              sign * n_{i0} * (grad_{j1} phi) * prod delta_{ab} phi.

The Lelong-Jensen identity ties three quantities together:

    mu_{phi,r}(V) - integral_{B_phi(r)} V (laplace phi)^n
        = integral_{B_phi(r)} (r - phi) laplace(V) ^ (laplace phi)^(n-1)
        = integral_{-inf}^{r} dt integral_{B_phi(t)} laplace(V) ^ (laplace phi)^(n-1)

and ``lelong_jensen`` evaluates all three with residuals and quadrature
error estimates.  Spherical and ellipsoidal level sets (quadratic phi) use
exact surface rules; generic smooth star-shaped phi falls back to a
co-area shell estimator.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateLevelSetError, DimensionError
from .calculus import delta_matrices, nabla_matrices
from .exterior import perm_sign
from .fields import ChainField, QuadraticForm, ScalarField
from .monge_ampere import _to_real, ma_density, mixed_ma
from .quadrature import (BallQuadrature, EllipsoidRule, SphereRule,
                         gauss_legendre_panels, sobol_sphere, sphere_area)
from .currents import _matchings_of

_GRAD_FLOOR = 1e-6


@dataclasses.dataclass
class NormalFrame:
    """Quaternionic frame components of a unit vector: entry (i, alpha) is
    the same linear combination of the vector's real components that the
    first-order operator (i, alpha) takes of a function's partials."""
    vector: np.ndarray
    components: np.ndarray  # (2n, 2) complex

    def __getitem__(self, key):
        i, alpha = key
        return self.components[i, alpha]


def normal_frame(phi, x):
    """Frame of the outward unit normal grad(phi)/|grad(phi)| at x."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(phi.gradient(x), dtype=float)
    norm = float(np.linalg.norm(g))
    if norm < _GRAD_FLOOR:
        raise DegenerateLevelSetError("vanishing gradient on the level set")
    unit = g / norm
    v0, v1 = nabla_matrices(phi.n)
    return NormalFrame(unit, np.stack([v0 @ unit, v1 @ unit], axis=1))


def boundary_measure_density(phi, pts, check_tol=1e-8):
    """Surface density of the boundary measure of phi at on-level points."""
    n = phi.n
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    grads = phi.gradients(pts)
    norms = np.linalg.norm(grads, axis=1)
    if norms.min() < _GRAD_FLOOR:
        raise DegenerateLevelSetError("vanishing gradient on the level set")
    v0, v1 = nabla_matrices(n)
    n0 = (grads / norms[:, None]) @ v0.T          # n_{i0}
    g1 = grads @ v1.T                             # grad_{j1} phi
    dmat = delta_matrices(phi, pts)
    total = np.zeros(len(pts), dtype=complex)
    idx = range(2 * n)
    for i in idx:
        for j in idx:
            if i == j:
                continue
            rest = tuple(m for m in idx if m != i and m != j)
            pair_val = n0[:, i] * g1[:, j]
            for pairs in _matchings_of(rest):
                sign = perm_sign([i, j] + [v for p in pairs for v in p])
                prod = pair_val.copy()
                for a, b in pairs:
                    prod = prod * dmat[:, a, b]
                total += sign * prod
    scale = 2 ** (n - 1) * math.factorial(n - 1)
    return _to_real(scale * total, "boundary measure density", check_tol)


# ---------------------------------------------------------------------------
# surface and sublevel quadrature

@dataclasses.dataclass
class SurfaceResult:
    value: float
    error: float

    def __float__(self):
        return self.value


def _quadratic_geometry(phi):
    """(center, m_real, const) when phi is quadratic with positive definite
    part, else None."""
    if not isinstance(phi, QuadraticForm):
        return None
    m = np.asarray(phi.m_real, dtype=float)
    if np.linalg.eigvalsh(0.5 * (m + m.T)).min() <= 0:
        return None
    center = np.zeros(4 * phi.n) if phi.center is None else np.asarray(phi.center, dtype=float)
    return center, m, float(phi.const)


def _as_callable(f, n):
    if f is None:
        return lambda pts: np.ones(len(pts))
    if isinstance(f, ScalarField):
        return f.values
    return f


def surface_integral(phi, r, f=None, delta=None, sphere_pow=10, seed=0,
                     center=None, radial_nodes=8):
    """integral of f over the level set {phi = r} with respect to surface
    measure.

    Quadratic phi with positive definite part gets the exact sphere or
    ellipsoid rule; otherwise a co-area shell estimate
    (1/2 delta) * integral_{r-delta < phi < r+delta} f |grad phi| dV,
    computed along Sobol rays from ``center``, with a delta-halving error
    estimate.  Returns SurfaceResult (float() gives the value).
    """
    n = phi.n
    fn = _as_callable(f, n)
    geom = _quadratic_geometry(phi)
    if geom is not None:
        a, m, const = geom
        level = r - const
        if level <= 0:
            raise DegenerateLevelSetError("empty level set")
        if np.allclose(m, m[0, 0] * np.eye(4 * n), atol=1e-14 * abs(m[0, 0])):
            rule = SphereRule(n, math.sqrt(level / m[0, 0]), a,
                              sphere_pow=sphere_pow, seed=seed)
        else:
            rule = EllipsoidRule(m, a, level, sphere_pow=sphere_pow, seed=seed)
        val, err = rule.integrate(fn)
        return SurfaceResult(val, err)

    center = np.zeros(4 * n) if center is None else np.asarray(center, dtype=float)
    if delta is None:
        delta = abs(r) * 1e-2 if r else 1e-2
    coarse = _coarea_shell(phi, r, fn, delta, center, sphere_pow, seed, radial_nodes)
    fine = _coarea_shell(phi, r, fn, delta / 2, center, sphere_pow, seed, radial_nodes)
    return SurfaceResult(fine, abs(fine - coarse))


def _ray_root(phi, level, center, theta, r_hint=1.0):
    g = lambda rho: phi.value(center + rho * theta) - level
    lo, hi = 1e-9, r_hint
    glo = g(lo)
    ghi = g(hi)
    grow = 0
    while glo * ghi > 0:
        hi *= 2.0
        ghi = g(hi)
        grow += 1
        if grow > 60:
            raise DegenerateLevelSetError("level set does not cross a sample ray")
    return brentq(g, lo, hi, xtol=1e-13, rtol=1e-13)


def _coarea_shell(phi, r, fn, delta, center, sphere_pow, seed, radial_nodes):
    n = phi.n
    d = 4 * n
    dirs = sobol_sphere(d, sphere_pow, seed)
    area = sphere_area(n)
    w_dir = area / len(dirs)
    total = 0.0
    r_hint = 1.0
    for theta in dirs:
        lo = _ray_root(phi, r - delta, center, theta, r_hint)
        hi = _ray_root(phi, r + delta, center, theta, max(r_hint, lo * 1.5))
        r_hint = hi
        rho, w = gauss_legendre_panels([lo, hi], radial_nodes)
        pts = center[None, :] + rho[:, None] * theta[None, :]
        gnorm = np.linalg.norm(phi.gradients(pts), axis=1)
        vals = np.asarray(fn(pts), dtype=float)
        total += w_dir * float(np.sum(w * vals * gnorm * rho ** (d - 1)))
    return total / (2 * delta)


def sublevel_integral(phi, t, fn, center=None, sphere_pow=9, radial_nodes=12,
                      seed=0, peak_scale=None):
    """integral of fn over the sublevel set {phi < t} (value, error)."""
    n = phi.n
    geom = _quadratic_geometry(phi)
    if geom is not None:
        a, m, const = geom
        if np.allclose(m, m[0, 0] * np.eye(4 * n), atol=1e-14 * abs(m[0, 0])):
            level = t - const
            if level <= 0:
                return 0.0, 0.0
            quad = BallQuadrature(n, math.sqrt(level / m[0, 0]), center=a,
                                  peak_scale=peak_scale, sphere_pow=sphere_pow,
                                  radial_nodes=radial_nodes, seed=seed)
            return quad.integrate(fn)
    center = np.zeros(4 * n) if center is None else np.asarray(center, dtype=float)
    if phi.value(center) >= t:
        return 0.0, 0.0
    d = 4 * n
    dirs = sobol_sphere(d, sphere_pow, seed)
    area = sphere_area(n)

    def accumulate(n_dirs):
        w_dir = area / n_dirs
        acc = 0.0
        r_hint = 1.0
        for theta in dirs[:n_dirs]:
            edge = _ray_root(phi, t, center, theta, r_hint)
            r_hint = edge
            rho, w = gauss_legendre_panels([0.0, edge], radial_nodes)
            pts = center[None, :] + rho[:, None] * theta[None, :]
            vals = np.asarray(fn(pts), dtype=float)
            acc += w_dir * float(np.sum(w * vals * rho ** (d - 1)))
        return acc

    full = accumulate(len(dirs))
    half = accumulate(len(dirs) // 2)
    return full, abs(full - half)


# ---------------------------------------------------------------------------
# Lelong-Jensen

@dataclasses.dataclass
class JensenReport:
    """All three expressions of the Lelong-Jensen identity plus residuals."""
    boundary_term: float          # mu_{phi,r}(V)
    interior_term: float          # integral_B V (laplace phi)^n
    lhs: float                    # boundary_term - interior_term
    rhs_spatial: float            # integral_B (r - phi) laplace V ^ (laplace phi)^(n-1)
    rhs_layered: float            # integral dt integral_{B_t} ...
    residual_spatial: float
    residual_layered: float
    residual_cross: float
    errors: dict

    def finite(self):
        vals = [self.boundary_term, self.interior_term, self.lhs,
                self.rhs_spatial, self.rhs_layered]
        return all(math.isfinite(v) for v in vals)


def lelong_jensen(phi, v, r, t_nodes=48, sphere_pow=9, radial_nodes=12,
                  seed=0, center=None):
    """Evaluate the Lelong-Jensen identity for exhaustion phi and potential
    v at level r; returns a JensenReport."""
    n = phi.n
    if v.n != n:
        raise DimensionError("phi and V live on different spaces")
    center = (np.zeros(4 * n) if center is None else np.asarray(center, dtype=float))

    dens_fn = lambda pts: boundary_measure_density(phi, pts) * v.values(pts)
    mu_v = surface_integral(phi, r, dens_fn, sphere_pow=sphere_pow + 1,
                            seed=seed, center=center)

    ma_fn = lambda pts: ma_density(phi, pts) * v.values(pts)
    interior, interior_err = sublevel_integral(
        phi, r, ma_fn, center, sphere_pow, radial_nodes, seed)
    lhs = mu_v.value - interior

    mixed_fields = [v] + [phi] * (n - 1)
    mixed_fn = lambda pts: mixed_ma(mixed_fields, pts)
    spatial_fn = lambda pts: (r - phi.values(pts)) * mixed_fn(pts)
    rhs_spatial, spatial_err = sublevel_integral(
        phi, r, spatial_fn, center, sphere_pow, radial_nodes, seed)

    t_min = float(phi.value(center))
    if t_min >= r:
        rhs_layered, layered_err = 0.0, 0.0
    else:
        ts, ws = gauss_legendre_panels([t_min, r], t_nodes)
        rhs_layered = 0.0
        layered_err = 0.0
        for t, w in zip(ts, ws):
            val, err = sublevel_integral(phi, t, mixed_fn, center,
                                         sphere_pow - 1, radial_nodes, seed)
            rhs_layered += w * val
            layered_err += w * err

    return JensenReport(
        boundary_term=mu_v.value,
        interior_term=interior,
        lhs=lhs,
        rhs_spatial=rhs_spatial,
        rhs_layered=rhs_layered,
        residual_spatial=abs(lhs - rhs_spatial),
        residual_layered=abs(lhs - rhs_layered),
        residual_cross=abs(rhs_spatial - rhs_layered),
        errors={
            "boundary": mu_v.error,
            "interior": interior_err,
            "spatial": spatial_err,
            "layered": layered_err,
        },
    )


def boundary_mass_residual(phi, r, sphere_pow=9, radial_nodes=12, seed=0,
                           center=None):
    """|mu_{phi,r}(1) - integral_{B_phi(r)} (laplace phi)^n| (the V = 1
    instance of the identity; both sides are the total boundary mass)."""
    n = phi.n
    center = np.zeros(4 * n) if center is None else np.asarray(center, dtype=float)
    mu1 = surface_integral(phi, r, lambda pts: boundary_measure_density(phi, pts),
                           sphere_pow=sphere_pow + 1, seed=seed, center=center)
    total, err = sublevel_integral(phi, r, lambda pts: ma_density(phi, pts),
                                   center, sphere_pow, radial_nodes, seed)
    return abs(mu1.value - total), mu1.value, total


# ---------------------------------------------------------------------------
# smooth max family

def smooth_max_family(phi, r, l):
    """chi_l(phi) for the C^2 convex ramp chi_l: equals r below r - 1/l,
    the identity above r + 1/l, and a monotone convex cubic-quartic blend
    in between (0 <= chi' <= 1, chi'' >= 0); decreases pointwise in l."""
    if l < 1:
        raise ValueError("the family index must be >= 1")
    a = r - 1.0 / l
    w = 2.0 / l

    def blend(y):
        return y ** 3 - 0.5 * y ** 4

    def f(t):
        t = np.asarray(t, dtype=float)
        y = np.clip((t - a) / w, 0.0, 1.0)
        return np.where(t <= a, r, np.where(t >= a + w, t, r + w * blend(y)))

    def d1(t):
        t = np.asarray(t, dtype=float)
        y = np.clip((t - a) / w, 0.0, 1.0)
        return np.where((t <= a) | (t >= a + w), np.where(t >= a + w, 1.0, 0.0),
                        3 * y ** 2 - 2 * y ** 3)

    def d2(t):
        t = np.asarray(t, dtype=float)
        y = np.clip((t - a) / w, 0.0, 1.0)
        return np.where((t <= a) | (t >= a + w), 0.0, (6 * y - 6 * y ** 2) / w)

    return ChainField(phi, f, d1, d2, name=f"smooth_max(r={r}, l={l})")
