"""Quaternionic Monge-Ampere densities and the Hessian bridge.

The n-fold product of the 2-form laplacian of u is a top form; its
coefficient relative to the volume element w^0^...^w^{2n-1} is the
Monge-Ampere density computed here.  Expanding the product over perfect
matchings of {0..2n-1} gives

    density(u) = 2^n n! * sum_M sign(M) * prod_s D[a_s, b_s],

with D the antisymmetric delta matrix of u, and the polarized (mixed)
version replaces the product by a permanent over the participating fields.
For twice-differentiable u the density agrees with n! times the Moore
determinant of the hyperhermitian Hessian matrix

    H(u)_{lk} = 2 delta_{(2l)(2k+1)} u + j * 2 delta_{(2l+1)(2k+1)} u,

which is the bridge between the pointwise linear-algebra picture (Moore
determinants, mixed discriminants, eigenvalues of the complex embedding)
and the differential-form picture.

The family u_eps = -1/(|q|^2 + eps) has closed-form references implemented
at the bottom: its delta matrix, its density 8^n n! eps / (|q|^2+eps)^(2n+1),
the exact ball mass as a rational multiple of pi^(2n), and the eps -> 0
limit 8^n n! pi^(2n) / (2n)! concentrating at the origin.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NumericalInconsistencyError
from .calculus import delta_from_hessians, delta_matrices, delta_matrix, nabla_matrices
from .hamilton import MAX_MATRIX_DIM, QMatrix, Quaternion, moore_det
from .exterior import perm_sign


@lru_cache(maxsize=None)
def perfect_matchings(n):
    """Signed perfect matchings of {0..2n-1}.

    Returns a tuple of (pairs, sign) where pairs = ((a_1,b_1),...,(a_n,b_n))
    with a_s < b_s and a_1 < a_2 < ...; sign is the parity of the flattened
    sequence as a permutation of 0..2n-1.  There are (2n-1)!! of them.
    """
    if n > MAX_MATRIX_DIM:
        raise DimensionError(f"n={n} exceeds the supported cap {MAX_MATRIX_DIM}")

    out = []

    def rec(remaining, acc):
        if not remaining:
            flat = [v for pair in acc for v in pair]
            out.append((tuple(acc), perm_sign(flat)))
            return
        a = remaining[0]
        for idx in range(1, len(remaining)):
            b = remaining[idx]
            rec(remaining[1:idx] + remaining[idx + 1:], acc + [(a, b)])

    rec(list(range(2 * n)), [])
    return tuple(out)


def _matching_product(dmats, n):
    """sum_M sign(M) prod_s D[:, a_s, b_s] for a batch of delta matrices."""
    total = np.zeros(dmats.shape[0], dtype=complex)
    for pairs, sign in perfect_matchings(n):
        term = np.full(dmats.shape[0], float(sign), dtype=complex)
        for a, b in pairs:
            term = term * dmats[:, a, b]
        total += term
    return total


def _to_real(arr, what, check_tol):
    scale = max(1.0, float(np.abs(arr).max()) if arr.size else 0.0)
    worst = float(np.abs(arr.imag).max()) if arr.size else 0.0
    if worst > check_tol * scale:
        raise NumericalInconsistencyError(
            f"{what} came out non-real (imaginary residue {worst:.3e})")
    return arr.real.copy()


def ma_density(u, pts, check_tol=1e-8):
    """Monge-Ampere density of u at the sample points (real array).

    Computed as 2^n n! sum over signed perfect matchings of products of
    delta-matrix entries, from a single batched Hessian sweep.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = u.n
    dm = delta_matrices(u, pts)
    vals = (2.0 ** n) * math.factorial(n) * _matching_product(dm, n)
    return _to_real(vals, "Monge-Ampere density", check_tol)


def ma_density_from_hessians(n, hessians, check_tol=1e-8):
    """Density from precomputed real Hessians (N, 4n, 4n)."""
    dm = delta_from_hessians(n, np.asarray(hessians, dtype=float))
    vals = (2.0 ** n) * math.factorial(n) * _matching_product(dm, n)
    return _to_real(vals, "Monge-Ampere density", check_tol)


def _batched_permanent(mats):
    """Permanents of a (N, k, k) stack via the subset-sum expansion."""
    nmat, k, _ = mats.shape
    total = np.zeros(nmat, dtype=mats.dtype)
    for subset in range(1, 1 << k):
        cols = [j for j in range(k) if subset >> j & 1]
        rowsums = mats[:, :, cols].sum(axis=2)
        prod = rowsums[:, 0]
        for i in range(1, k):
            prod = prod * rowsums[:, i]
        if (k - len(cols)) % 2:
            total -= prod
        else:
            total += prod
    return total


def mixed_ma(fields, pts, check_tol=1e-8):
    """Polarized Monge-Ampere density of n fields (symmetric, multilinear).

    mixed(u, u, ..., u) equals ma_density(u).  Cost grows like
    (2n-1)!! * 2^n per point; fine for the supported n <= 8.
    """
    fields = list(fields)
    n = fields[0].n
    if len(fields) != n:
        raise DimensionError(f"need exactly n={n} fields, got {len(fields)}")
    if any(f.n != n for f in fields):
        raise DimensionError("fields live on different spaces")
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    dms = [delta_matrices(f, pts) for f in fields]
    total = np.zeros(len(pts), dtype=complex)
    for pairs, sign in perfect_matchings(n):
        # P[b, i, s] = D^(i)[a_s, b_s]; permanent sums over assignments
        p = np.stack([np.stack([dms[i][:, a, b] for (a, b) in pairs], axis=1)
                      for i in range(n)], axis=1)
        total += float(sign) * _batched_permanent(p)
    vals = (2.0 ** n) * total
    return _to_real(vals, "mixed Monge-Ampere density", check_tol)


# ---------------------------------------------------------------------------
# hyperhermitian Hessian

def hyperhermitian_hessian(u, x):
    """The n x n hyperhermitian Hessian of u at x (quaternion entries)."""
    d = delta_matrix(u, x)
    n = u.n
    rows = []
    for l in range(n):
        row = []
        for k in range(n):
            c1 = 2.0 * d[2 * l, 2 * k + 1]
            c2 = 2.0 * d[2 * l + 1, 2 * k + 1]
            row.append(Quaternion(c1.real, c1.imag, c2.real, -c2.imag))
        rows.append(row)
    return QMatrix(rows)


def tau_hessians(u, pts):
    """Complex embeddings tau(H(u)) at many points: (N, 2n, 2n) Hermitian."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    d = delta_matrices(u, pts)
    n = u.n
    out = np.empty((len(pts), 2 * n, 2 * n), dtype=complex)
    for l in range(n):
        for k in range(n):
            c1 = 2.0 * d[:, 2 * l, 2 * k + 1]
            c2 = 2.0 * d[:, 2 * l + 1, 2 * k + 1]
            out[:, 2 * l, 2 * k] = np.conj(c1)
            out[:, 2 * l, 2 * k + 1] = -c2
            out[:, 2 * l + 1, 2 * k] = np.conj(c2)
            out[:, 2 * l + 1, 2 * k + 1] = c1
    return out


def moore_equivalence_residual(u, pts):
    """max |density(u) - n! Moore(H(u))| over the sample points.

    The two sides are computed through genuinely different pipelines
    (matchings over delta matrices vs. the cyclic Moore expansion), so this
    doubles as an internal consistency check.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    dens = ma_density(u, pts)
    worst = 0.0
    for t, x in enumerate(pts):
        md = moore_det(hyperhermitian_hessian(u, x))
        worst = max(worst, abs(dens[t] - math.factorial(u.n) * float(md)))
    return worst


class PshResult:
    """Outcome of a pointwise plurisubharmonicity scan."""

    __slots__ = ("is_psh", "min_eigenvalue", "witness")

    def __init__(self, is_psh, min_eigenvalue, witness):
        self.is_psh = bool(is_psh)
        self.min_eigenvalue = float(min_eigenvalue)
        self.witness = witness

    def __bool__(self):
        return self.is_psh

    def __repr__(self):
        return (f"PshResult(is_psh={self.is_psh}, "
                f"min_eigenvalue={self.min_eigenvalue:.6g})")


def psh_test(u, pts, tol=1e-9):
    """Check nonnegativity of the hyperhermitian Hessian on sample points.

    The Hessian is nonnegative iff its complex embedding tau(H) is positive
    semidefinite; eigenvalues are allowed to dip to -tol before failing.
    Returns a PshResult with the smallest eigenvalue seen and its point.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    th = tau_hessians(u, pts)
    herm_defect = float(np.abs(th - np.conj(np.swapaxes(th, 1, 2))).max())
    if herm_defect > 1e-6 * max(1.0, float(np.abs(th).max())):
        raise NumericalInconsistencyError(
            f"Hessian embedding is not Hermitian (defect {herm_defect:.3e})")
    eigs = np.linalg.eigvalsh(0.5 * (th + np.conj(np.swapaxes(th, 1, 2))))
    idx = int(np.argmin(eigs[:, 0]))
    least = float(eigs[idx, 0])
    return PshResult(least >= -tol, least, pts[idx].copy())


# ---------------------------------------------------------------------------
# closed-form references for u_eps = -1/(|q|^2 + eps)

def fundamental_delta_matrices(n, eps, pts):
    """Delta matrices of -1/(|q|^2+eps) in closed form: (N, 2n, 2n)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    s = eps + np.einsum("bi,bi->b", pts, pts)
    # complex coordinate columns
    z0 = np.empty((len(pts), 2 * n), dtype=complex)
    z1 = np.empty((len(pts), 2 * n), dtype=complex)
    for l in range(n):
        x0, x1, x2, x3 = (pts[:, 4 * l + m] for m in range(4))
        z0[:, 2 * l] = x0 - 1j * x1
        z1[:, 2 * l] = -x2 + 1j * x3
        z0[:, 2 * l + 1] = x2 + 1j * x3
        z1[:, 2 * l + 1] = x0 + 1j * x1
    m = np.einsum("bi,bj->bij", z0, z1) - np.einsum("bi,bj->bij", z1, z0)
    j_std = np.zeros((2 * n, 2 * n))
    for l in range(n):
        j_std[2 * l, 2 * l + 1] = 1.0
        j_std[2 * l + 1, 2 * l] = -1.0
    return (-4.0 / s[:, None, None] ** 3) * (np.conj(m) - s[:, None, None] * j_std[None])


def fundamental_ma_density(n, eps, pts):
    """Density of the regularized fundamental family, in closed form:
    8^n n! eps / (|q|^2 + eps)^(2n+1)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    s = eps + np.einsum("bi,bi->b", pts, pts)
    return (8.0 ** n) * math.factorial(n) * eps / s ** (2 * n + 1)


def sphere_area_coefficient(n):
    """|S^(4n-1)| as the rational coefficient of pi^(2n): 2/(2n-1)!."""
    return Fraction(2, math.factorial(2 * n - 1))


def ball_volume_coefficient(n):
    """Volume of the unit ball of R^(4n) as a coefficient of pi^(2n)."""
    return Fraction(1, math.factorial(2 * n))


def fundamental_mass_exact(n, eps, r):
    """Exact mass of the regularized density over the ball B(0, r).

    Returns the Fraction c with   mass = c * pi^(2n).   Uses the
    substitution t = rho^2 and an exact binomial antiderivative, so eps and
    r must be rational (Fractions or ints/floats that convert exactly).
    """
    eps = Fraction(eps)
    r = Fraction(r)
    if eps <= 0:
        raise ValueError("eps must be positive for the exact mass")

    def antideriv(t):
        # integral of t^(2n-1)/(t+eps)^(2n+1) dt via t = (t+eps) - eps
        v = t + eps
        acc = Fraction(0)
        for k in range(2 * n):
            c = Fraction(math.comb(2 * n - 1, k)) * (-eps) ** (2 * n - 1 - k)
            acc += c * v ** (k - 2 * n) / (k - 2 * n)
        return acc

    integral = antideriv(r * r) - antideriv(Fraction(0))
    return (sphere_area_coefficient(n) * Fraction(8 ** n * math.factorial(n), 2)
            * eps * integral)


def fundamental_mass_limit_coefficient(n):
    """eps -> 0 limit of the ball mass: 8^n n! / (2n)!  (times pi^(2n))."""
    return Fraction(8 ** n * math.factorial(n), math.factorial(2 * n))
