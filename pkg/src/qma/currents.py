"""Regularized closed positive currents and their quantitative invariants.

A current here is a smooth object of even degree

    T = (constant factor) ^ laplace(u_1) ^ ... ^ laplace(u_m),

stored by its potential list plus an optional constant-coefficient factor
(so the basic positive form beta and its powers are currents with no
potentials at all).  Genuinely singular currents enter as eps-families of
such smooth ones.

Everything quantitative reduces to evaluating top-form densities

    T ^ beta^p   (relative to the volume element)

in batch over quadrature nodes: the constant factor contributes a fixed
index mask, each laplacian contributes its antisymmetric delta matrix, and
the expansion runs over signed matchings of the remaining indices with a
permanent over the participating fields.  On top of that sit:

* ``bt_product``       wedge with another laplacian (degree +2);
* ``cln_norm``         integral of T ^ beta^p over a ball;
* ``sigma_mass``       the same with error estimate, for Lelong masses;
* ``lelong_number``    the radial profile sigma(a, r)/r^(4p) and its
                       small-radius limit;
* ``shell_identity_check``  the two-radius shell identity for the profile;
* ``stokes_check`` / ``integration_by_parts_residual``  quadrature checks
                       of the duality between d_alpha and wedging;
* ``convergence_suite``    pairings of decreasing potential sequences
                       against their limit;
* ``mollify``          grid convolution with a compact smooth bump (n = 1).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import ndimage

import dataclasses

from .errors import DimensionError
from .exterior import ExtElement, beta, perm_sign, random_strongly_positive
from .calculus import FormField, delta_matrices, laplace
from .fields import GridField, InvShift, Polynomial, invshift, normsq
from .monge_ampere import _batched_permanent, _to_real
from .quadrature import (BallQuadrature, ball_moment_coefficient,
                         gauss_legendre_panels, sobol_sphere, sphere_area)


@lru_cache(maxsize=None)
def _matchings_of(indices):
    """Signed perfect matchings of an arbitrary even index tuple; the sign
    slot is left to the caller (pairs only)."""
    out = []

    def rec(remaining, acc):
        if not remaining:
            out.append(tuple(acc))
            return
        a = remaining[0]
        for t in range(1, len(remaining)):
            rec(remaining[1:t] + remaining[t + 1:], acc + [(a, remaining[t])])

    rec(tuple(indices), [])
    return tuple(out)


def _std_j(n):
    j = np.zeros((2 * n, 2 * n))
    for l in range(n):
        j[2 * l, 2 * l + 1] = 1.0
        j[2 * l + 1, 2 * l] = -1.0
    return j


def wedge_top_density(n, constant_coeffs, dmats, check_tol=1e-8):
    """Top-form density of  (sum_I c_I w^I) ^ prod_s (2-form with delta
    matrix D_s)  over a batch of points.

    ``constant_coeffs``: {mask: complex}; ``dmats``: list of (N, 2n, 2n).
    The 2-form attached to D is sum_{i<j} 2 D_ij w^i w^j, i.e. exactly the
    laplacian when D is the delta matrix of a potential.
    """
    m = len(dmats)
    npts = dmats[0].shape[0] if m else None
    if npts is None:
        raise ValueError("at least one delta matrix is required")
    total = np.zeros(npts, dtype=complex)
    for mask, cval in constant_coeffs.items():
        rest = tuple(i for i in range(2 * n) if not mask >> i & 1)
        if len(rest) != 2 * m:
            raise DimensionError("constant factor degree does not complement the products")
        fixed = tuple(i for i in range(2 * n) if mask >> i & 1)
        for pairs in _matchings_of(rest):
            sign = perm_sign(list(fixed) + [v for p in pairs for v in p])
            p = np.stack([np.stack([dmats[i][:, a, b] for (a, b) in pairs], axis=1)
                          for i in range(m)], axis=1)
            total += (complex(cval) * sign) * _batched_permanent(p)
    return _to_real((2.0 ** m) * total, "current density", check_tol)


class RegularizedCurrent:
    """constant ^ laplace(u_1) ^ ... ^ laplace(u_m), all smooth."""

    __slots__ = ("n", "potentials", "constant", "tag")

    def __init__(self, n, potentials=(), constant=None, tag=""):
        self.n = n
        self.potentials = tuple(potentials)
        if any(u.n != n for u in self.potentials):
            raise DimensionError("potential on the wrong space")
        if constant is not None and (constant.n != n or constant.degree % 2):
            raise DimensionError("constant factor must be an even-degree element")
        self.constant = constant
        self.tag = tag or self._auto_tag()
        if self.degree > 2 * n:
            raise DimensionError("current degree exceeds the top degree")

    def _auto_tag(self):
        parts = []
        if self.constant is not None:
            parts.append(f"const[deg {self.constant.degree}]")
        parts.extend("laplace" for _ in self.potentials)
        return "^".join(parts) or "unit"

    @property
    def degree(self):
        return 2 * len(self.potentials) + (self.constant.degree if self.constant else 0)

    # ------------------------------------------------------------ constructors
    @classmethod
    def unit(cls, n):
        """The 0-current with density 1."""
        return cls(n, (), ExtElement.scalar(n, 1), tag="unit")

    @classmethod
    def beta_power(cls, n, k):
        """beta^k as a constant-coefficient positive current."""
        return cls(n, (), beta(n).wedge_power(k), tag=f"beta^{k}")

    @classmethod
    def from_laplace(cls, u, tag=""):
        return cls(u.n, (u,), None, tag=tag or "laplace(u)")

    def wedge_constant(self, element):
        const = element if self.constant is None else self.constant ^ element
        return RegularizedCurrent(self.n, self.potentials, const,
                                  tag=self.tag + "^const")

    # ------------------------------------------------------------ evaluation
    def _constant_coeffs(self):
        if self.constant is None:
            return {0: 1.0}
        return {m: complex(c) for m, c in self.constant.coeffs.items()}

    def _dmats(self, pts, pad=0):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        mats = [delta_matrices(u, pts) for u in self.potentials]
        if pad:
            half_j = np.broadcast_to(0.5 * _std_j(self.n).astype(complex),
                                     (len(pts), 2 * self.n, 2 * self.n))
            mats.extend([half_j] * pad)
        if not mats:
            raise DimensionError("no two-form factors to expand")
        return mats

    def trace_density(self, pts, pad=None):
        """Density of T ^ beta^pad (default: pad up to top degree)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pad is None:
            pad = (2 * self.n - self.degree) // 2
        if self.degree + 2 * pad != 2 * self.n:
            raise DimensionError("padding does not reach the top degree")
        coeffs = self._constant_coeffs()
        if not self.potentials and pad == 0:
            # purely constant top current
            full = (1 << (2 * self.n)) - 1
            c = coeffs.get(full, 0.0)
            return np.full(len(pts), float(np.real(c)))
        return wedge_top_density(self.n, coeffs, self._dmats(pts, pad))

    def density(self, pts):
        """Top-form density of T itself (requires degree 2n)."""
        if self.degree != 2 * self.n:
            raise DimensionError("current is not of top degree")
        return self.trace_density(pts, pad=0)

    def form(self):
        """Symbolic FormField (wedge of laplacians times the constant)."""
        f = None
        for u in self.potentials:
            lf = laplace(u)
            f = lf if f is None else f.wedge(lf)
        if self.constant is not None:
            cf = FormField.from_constant(self.constant)
            f = cf if f is None else f.wedge(cf)
        if f is None:
            f = FormField.from_constant(ExtElement.scalar(self.n, 1))
        return f


def bt_product(u, current):
    """laplace(u) ^ T as a new current (degree +2)."""
    if current.degree + 2 > 2 * current.n:
        raise DimensionError("wedge with a laplacian overflows the top degree")
    return RegularizedCurrent(current.n, current.potentials + (u,),
                              current.constant,
                              tag=f"laplace^{current.tag}")


# ---------------------------------------------------------------------------
# integral invariants

@dataclasses.dataclass
class SigmaResult:
    value: float
    error: float

    def __float__(self):
        return self.value


def _default_quad(current, a, r, peak_scale, sphere_pow, radial_nodes, seed):
    if peak_scale is None:
        eps_list = [u.eps for u in current.potentials if isinstance(u, InvShift)]
        if eps_list:
            peak_scale = min(e if e > 0 else 1e-6 for e in eps_list)
    return BallQuadrature(current.n, r, center=a, peak_scale=peak_scale,
                          sphere_pow=sphere_pow, radial_nodes=radial_nodes, seed=seed)


def sigma_mass(current, a, r, quad=None, peak_scale=None, sphere_pow=8,
               radial_nodes=16, seed=0):
    """Lelong mass sigma_T(a, r) = integral of T ^ beta^p over B(a, r).

    Returns a SigmaResult (value, node-doubling error estimate).  Constant
    polynomial densities (quadratic potentials) short-circuit to the exact
    ball volume formula.
    """
    n = current.n
    p = (2 * n - current.degree) // 2
    probe = np.atleast_2d(np.asarray(a, dtype=float))
    if not current.potentials:
        dens = float(current.trace_density(probe + 0.1, pad=p)[0])
        vol = float(ball_moment_coefficient(4 * n, (0,) * 4 * n, Fraction(r).limit_denominator(10 ** 12))) \
            * math.pi ** (2 * n)
        return SigmaResult(dens * vol, 0.0)
    if quad is None:
        quad = _default_quad(current, a, r, peak_scale, sphere_pow, radial_nodes, seed)
    val, err = quad.integrate(lambda pts: current.trace_density(pts, pad=p))
    return SigmaResult(val, err)


def cln_norm(current, radius, center=None, **quad_opts):
    """Chern-Levine-Nirenberg norm: integral of T ^ beta^p over the ball."""
    center = np.zeros(4 * current.n) if center is None else np.asarray(center, dtype=float)
    return sigma_mass(current, center, radius, **quad_opts).value


def cln_ratio(fields, inner_radius, outer_radius, center=None, sup_samples=4096,
              seed=0, **quad_opts):
    """|| laplace(u_1)^...^laplace(u_k) ||_L  /  prod_i sup_K |u_i|.

    L = B(center, inner_radius) inside K = B(center, outer_radius); the sup
    norms are sampled on quasi-random nodes of K (reported bound, not a
    certified maximum).
    """
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one potential")
    n = fields[0].n
    if inner_radius > outer_radius:
        raise ValueError("inner ball must sit inside the outer ball")
    center = np.zeros(4 * n) if center is None else np.asarray(center, dtype=float)
    t = RegularizedCurrent(n, fields)
    norm = cln_norm(t, inner_radius, center, seed=seed, **quad_opts)
    pow2 = min(12, max(6, int(math.ceil(math.log2(max(2, sup_samples))))))
    dirs = sobol_sphere(4 * n, pow2, seed + 1)
    rng = np.random.default_rng(seed + 2)
    radii = outer_radius * rng.random(size=(len(dirs), 1)) ** (1.0 / (4 * n))
    block = np.concatenate([center + dirs * outer_radius,
                            center + dirs * radii,
                            center[None, :]], axis=0)
    sups = []
    for u in fields:
        sup = float(np.abs(u.values(block)).max())
        if sup == 0.0:
            raise ValueError("a potential has zero sup-norm on the outer ball")
        sups.append(sup)
    return norm / math.prod(sups)


@dataclasses.dataclass
class RadialProfile:
    """sigma_T(a, r)/r^(4p) along a geometric radius ladder."""
    radii: np.ndarray
    values: np.ndarray
    errors: np.ndarray

    def monotone_violations(self, slack=3.0):
        """Indices k where the profile decreases beyond combined error bars."""
        bad = []
        for k in range(len(self.radii) - 1):
            allowed = slack * (self.errors[k] + self.errors[k + 1])
            if self.values[k] > self.values[k + 1] + allowed + 1e-12 * abs(self.values[k + 1]):
                bad.append(k)
        return bad


def lelong_number(current, a, radii=None, rel_tol=0.05, **quad_opts):
    """(RadialProfile, nu) for the current at the point a.

    nu is read off at the smallest radius whose quadrature error estimate is
    below rel_tol of the value scale (the profile tends to its limit from
    above as r decreases for closed positive currents).
    """
    n = current.n
    p = (2 * n - current.degree) // 2
    a = np.asarray(a, dtype=float)
    if radii is None:
        radii = [2.0 ** (-k) for k in range(6, -1, -1)]
    radii = np.asarray(sorted(float(r) for r in radii))
    if (radii <= 0).any():
        raise ValueError("radii must be positive")
    vals = np.empty(len(radii))
    errs = np.empty(len(radii))
    for i, r in enumerate(radii):
        s = sigma_mass(current, a, r, **quad_opts)
        vals[i] = s.value / r ** (4 * p)
        errs[i] = s.error / r ** (4 * p)
    profile = RadialProfile(radii, vals, errs)
    scale = max(float(np.abs(vals).max()), 1e-300)
    nu = None
    for i in range(len(radii)):
        if errs[i] <= rel_tol * scale:
            nu = vals[i]
            break
    if nu is None:
        nu = vals[0]
    return profile, float(nu)


def shell_identity_check(current, a, r1, r2, sphere_pow=9, radial_nodes=24,
                         seed=0):
    """Residual of the two-radius shell identity

        integral_{r1<|q-a|<r2} T ^ (laplace(-1/|q-a|^2))^p
            = 8^p [ sigma(a,r2)/r2^(4p) - sigma(a,r1)/r1^(4p) ].

    The kernel power on the left carries delta matrices that scale like
    8/|q-a|^4 per factor, which is where the 8^p on the right comes from.
    Returns |lhs - rhs|.
    """
    n = current.n
    p = (2 * n - current.degree) // 2
    a = np.asarray(a, dtype=float)
    if not 0 < r1 <= r2:
        raise ValueError("need 0 < r1 <= r2")
    if r1 == r2:
        return 0.0
    kernel = invshift(n, 0.0, center=a)

    shell_current = RegularizedCurrent(n, current.potentials + (kernel,) * p,
                                       current.constant, tag="shell")

    # product rule on the shell: geometric t-panels between the two radii
    t_lo, t_hi = r1 ** 2, r2 ** 2
    panels = 12
    ratio = (t_hi / t_lo) ** (1.0 / panels)
    breaks = [t_lo * ratio ** k for k in range(panels + 1)]
    t, w = gauss_legendre_panels(breaks, radial_nodes)
    dirs = sobol_sphere(4 * n, sphere_pow, seed, antithetic=True)
    area = sphere_area(n)
    lhs = 0.0
    for ti, wi in zip(t, w):
        pts = a[None, :] + math.sqrt(ti) * dirs
        dens = shell_current.trace_density(pts, pad=0)
        lhs += wi * ti ** (2 * n - 1) * float(dens.mean())
    lhs *= area * 0.5

    s2 = sigma_mass(current, a, r2, sphere_pow=sphere_pow, radial_nodes=radial_nodes,
                    seed=seed)
    s1 = sigma_mass(current, a, r1, sphere_pow=sphere_pow, radial_nodes=radial_nodes,
                    seed=seed)
    rhs = (8.0 ** p) * (s2.value / r2 ** (4 * p) - s1.value / r1 ** (4 * p))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Stokes-type checks

def bump_field(n, radius=1.0, center=None):
    """(r^2 - |x - a|^2)^3 / r^6 inside the ball, as an exact polynomial.

    Vanishes to third order at the boundary, so first and second
    derivatives are continuous across it; the canonical compactly
    supported test factor on B(a, r).
    """
    r2 = Fraction(radius) ** 2
    base = Polynomial.constant(n, r2) - Polynomial(n, normsq(n, center=center).terms)
    return base ** 3 * (1 / r2 ** 3)


def stokes_check(h, tform, radius=1.0, center=None, sphere_pow=9,
                 radial_nodes=12, seed=0):
    """max_alpha | integral h d_alpha(T) + integral d_alpha(h) ^ T |.

    h must vanish at the boundary of the ball (e.g. a ``bump_field``
    multiple); T is a smooth (2n-1)-form field.  Exact polynomial data is
    integrated exactly; anything else falls back to the product rule.
    """
    n = tform.n
    if tform.degree != 2 * n - 1:
        raise DimensionError("T must have degree 2n - 1")
    hf = FormField.from_scalar(h)
    worst = 0.0
    for alpha in (0, 1):
        lhs_form = hf.wedge(tform.d(alpha))
        rhs_form = hf.d(alpha).wedge(tform)
        total = lhs_form + rhs_form  # = d_alpha(h T), integrates to 0
        full = (1 << (2 * n)) - 1
        coeff = total.coeffs.get(full)
        if coeff is None:
            continue
        if coeff.is_exact():
            val_re = _exact_ball_integral(coeff.re, radius, center)
            val_im = _exact_ball_integral(coeff.im, radius, center)
            worst = max(worst, math.hypot(val_re, val_im))
        else:
            quad = BallQuadrature(n, radius, center=center, sphere_pow=sphere_pow,
                                  radial_nodes=radial_nodes, seed=seed)
            vr, _ = quad.integrate(lambda pts: coeff.re.values(pts))
            vi, _ = quad.integrate(lambda pts: coeff.im.values(pts))
            worst = max(worst, math.hypot(vr, vi))
    return worst


def _exact_ball_integral(poly, radius, center):
    from .quadrature import integrate_polynomial_ball
    r = Fraction(radius).limit_denominator(10 ** 12)
    c = None if center is None else [Fraction(x).limit_denominator(10 ** 12) for x in center]
    return float(integrate_polynomial_ball(poly, r, c)) * math.pi ** (2 * poly.n)


def integration_by_parts_residual(fields, radius=1.0, sphere_pow=9,
                                  radial_nodes=12, seed=0):
    """Residual of  integral laplace(u_1)^...^laplace(u_k) ^ psi
                  = integral u_1 laplace(u_2)^...^laplace(u_k) ^ laplace(b) ^ beta^(n-k)

    with psi = bump * beta^(n-k) and b the bump itself (compact support in
    the unit ball makes the boundary terms vanish).  All-polynomial data is
    integrated exactly; otherwise the ball product rule is used.
    """
    fields = list(fields)
    if not fields:
        raise DimensionError("need between 1 and n potentials")
    n = fields[0].n
    k = len(fields)
    if k > n:
        raise DimensionError("need between 1 and n potentials")
    b = bump_field(n, radius)
    pad = beta(n).wedge_power(n - k) if k < n else None

    t_lhs = RegularizedCurrent(n, tuple(fields), pad)
    t_rhs = RegularizedCurrent(n, tuple(fields[1:]) + (b,), pad)
    u1 = fields[0]

    full = (1 << (2 * n)) - 1
    top_l = t_lhs.form().coeffs.get(full)
    top_r = t_rhs.form().coeffs.get(full)
    exact = (isinstance(u1, Polynomial)
             and (top_l is None or top_l.is_exact())
             and (top_r is None or top_r.is_exact()))
    if exact:
        def integral(coeff, weight):
            if coeff is None:
                return 0.0
            vr = _exact_ball_integral(coeff.re * weight, radius, None)
            vi = _exact_ball_integral(coeff.im * weight, radius, None)
            return complex(vr, vi)
        return abs(integral(top_l, b) - integral(top_r, u1))

    quad = BallQuadrature(n, radius, sphere_pow=sphere_pow,
                          radial_nodes=radial_nodes, seed=seed)
    lhs, _ = quad.integrate(
        lambda pts: t_lhs.trace_density(pts, pad=0) * b.values(pts))
    rhs, _ = quad.integrate(
        lambda pts: t_rhs.trace_density(pts, pad=0) * u1.values(pts))
    return abs(lhs - rhs)


def positivity_pairing_min(current, pts, trials=20, seed=0, tol_scale=True):
    """Smallest pairing density of T against sampled strongly positive
    elements of complementary degree (should be >= -1e-9 for positive T)."""
    n = current.n
    comp = 2 * n - current.degree
    if comp % 2:
        raise DimensionError("complementary degree must be even")
    rng = np.random.default_rng(seed)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    worst = np.inf
    for _ in range(trials):
        if comp == 0:
            dens = current.density(pts)
        else:
            eta = random_strongly_positive(rng, n, comp // 2)
            dens = current.wedge_constant(eta).density(pts)
        worst = min(worst, float(dens.min()))
    return worst


# ---------------------------------------------------------------------------
# mollification (n = 1 grids)

def mollifier_weights(spacing, eps):
    """Normalized discrete bump kernel exp(-1/(1-(|o|/eps)^2)) on the
    lattice offsets with |o| < eps; weights sum to exactly 1."""
    if eps < 2 * spacing:
        raise ValueError("mollifier radius must be at least two grid spacings")
    m = int(math.floor(eps / spacing + 1e-12))
    axis = spacing * np.arange(-m, m + 1)
    g = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"))
    r2 = np.sum(g * g, axis=0) / eps ** 2
    w = np.zeros_like(r2)
    inside = r2 < 1.0
    w[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    total = w.sum()
    if total <= 0:
        raise ValueError("empty mollifier support")
    return w / total


def mollify(field, eps):
    """Convolve a grid-sampled field on R^4 with the normalized bump of
    radius eps; returns a GridField on the shrunk domain."""
    if not isinstance(field, GridField):
        raise TypeError("mollify expects a grid-sampled field")
    w = mollifier_weights(field.spacing, eps)
    margin = (w.shape[0] - 1) // 2
    shape = field.data.shape
    if any(s - 2 * margin < 5 for s in shape):
        raise ValueError("domain too small after shrinking by the kernel radius")
    smoothed = ndimage.convolve(field.data, w, mode="constant")
    sl = tuple(slice(margin, s - margin) for s in shape)
    origin = field.origin + margin * field.spacing
    return GridField(origin, field.spacing, smoothed[sl])


def kernel_second_moment(spacing, eps):
    """sum_o w_o |o|^2 of the discrete mollifier (the exact constant added
    to |q|^2 by mollification)."""
    w = mollifier_weights(spacing, eps)
    m = (w.shape[0] - 1) // 2
    axis = spacing * np.arange(-m, m + 1)
    g = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"))
    return float(np.sum(w * np.sum(g * g, axis=0)))


# ---------------------------------------------------------------------------
# Bedford-Taylor convergence

@dataclasses.dataclass
class ConvergenceReport:
    indices: list
    pairings: list
    limit_pairing: float
    deviations: list

    @property
    def final_deviation(self):
        return self.deviations[-1]


def convergence_suite(sequences, limits, radius=1.0, sphere_pow=8,
                      radial_nodes=10, seed=0, monotone_tol=1e-9):
    """Pairings of decreasing smooth sequences against the limit fields.

    ``sequences``: list of k lists, each the j-indexed approximants of one
    potential; ``limits``: the k limit fields.  The pairing is

        integral u^(1) laplace(u^(2)) ^ ... ^ laplace(u^(k)) ^ laplace(bump)
                 ^ beta^(n-k)

    over the ball (the first potential enters by value, so sequences that
    differ from the limit by constants still show their convergence rate).
    Raises if a sequence fails to decrease pointwise on the sample nodes.
    """
    k = len(sequences)
    if k == 0 or len(limits) != k:
        raise ValueError("sequences/limits mismatch")
    steps = len(sequences[0])
    if any(len(s) != steps for s in sequences):
        raise ValueError("sequences have unequal lengths")
    n = limits[0].n
    rng = np.random.default_rng(seed)
    sample = rng.normal(size=(64, 4 * n))
    sample *= (radius * 0.9) / np.linalg.norm(sample, axis=1)[:, None]
    sample *= rng.random(size=(64, 1)) ** (1.0 / (4 * n))
    for seq in sequences:
        prev = None
        for u in seq:
            vals = u.values(sample)
            if prev is not None and np.any(vals > prev + monotone_tol):
                raise ValueError("sequence is not pointwise decreasing")
            prev = vals

    b = bump_field(n, radius)
    quad = BallQuadrature(n, radius, sphere_pow=sphere_pow,
                          radial_nodes=radial_nodes, seed=seed)

    def pairing(fields):
        t = RegularizedCurrent(n, tuple(fields[1:]) + (b,))
        val, _ = quad.integrate(
            lambda pts: t.trace_density(pts, pad=n - k) * fields[0].values(pts))
        return val

    limit_pairing = pairing(limits)
    indices, pairings, deviations = [], [], []
    for j in range(steps):
        fields = [sequences[i][j] for i in range(k)]
        pj = pairing(fields)
        indices.append(j)
        pairings.append(pj)
        deviations.append(abs(pj - limit_pairing))
    return ConvergenceReport(indices, pairings, limit_pairing, deviations)
