"""First- and second-order operators of the quaternionic calculus.

The real space R^(4n) carries 2n complex first-order operators per column
index alpha in {0, 1}:

    row 2l:   nabla_{(2l)0}   = d/dx_{4l}   + i d/dx_{4l+1}
              nabla_{(2l)1}   = -d/dx_{4l+2} - i d/dx_{4l+3}
    row 2l+1: nabla_{(2l+1)0} = d/dx_{4l+2} - i d/dx_{4l+3}
              nabla_{(2l+1)1} = d/dx_{4l}   - i d/dx_{4l+1}

They are dual to the complex coordinates z^{j,alpha} (nabla_{j a} z^{k b} =
2 delta delta) and commute, being constant-coefficient.  Everything else is
built from them:

* ``delta_field(u, i, j)``  the antisymmetric second-order operators
  (1/2)(nabla_{i0} nabla_{j1} - nabla_{i1} nabla_{j0}) u;
* ``laplace(u)``            the 2-form sum_{i<j} 2 delta_{ij} u  w^i ^ w^j,
  equal to d0 d1 u;
* ``FormField``             forms with field coefficients, with wedge and
  the two exterior-type differentials d0/d1 (both square to zero);
* ``delta_matrix(u, x)``    the 2n x 2n antisymmetric matrix of
  delta_{ij} u(x), computed from the real Hessian in one batched
  sandwich product.

Complex-valued fields are pairs of real fields (``CxField``), so exact
polynomial inputs stay exact through every operator.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DimensionError
from .exterior import ExtElement, RationalComplex, mask_to_indices, wedge_sign
from .fields import (LinearSubstitution, Polynomial, ScalarField, field_scale,
                     field_sum)
from .hamilton import QMatrix


# ---------------------------------------------------------------------------
# complex-valued fields

class CxField:
    """A complex-valued field as a (re, im) pair of real scalar fields."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        if im is None:
            im = Polynomial(re.n)
        if re.n != im.n:
            raise DimensionError("mismatched components")
        self.re = re
        self.im = im

    @property
    def n(self):
        return self.re.n

    @classmethod
    def constant(cls, n, z):
        if isinstance(z, RationalComplex):
            return cls(Polynomial.constant(n, z.re), Polynomial.constant(n, z.im))
        z = complex(z)
        return cls(Polynomial.constant(n, z.real), Polynomial.constant(n, z.imag))

    def value(self, x):
        return complex(self.re.value(x)) + 1j * complex(self.im.value(x))

    def values(self, pts):
        return self.re.values(pts) + 1j * self.im.values(pts)

    def diff(self, axis):
        return CxField(self.re.diff(axis), self.im.diff(axis))

    def conj(self):
        return CxField(self.re, field_scale(self.im, -1))

    def __add__(self, other):
        other = _as_cx(other, self.n)
        return CxField(field_sum(self.re, other.re), field_sum(self.im, other.im))

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_cx(other, self.n)
        return self + (-other)

    def __neg__(self):
        return CxField(field_scale(self.re, -1), field_scale(self.im, -1))

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return CxField(field_scale(self.re, other), field_scale(self.im, other))
        if isinstance(other, RationalComplex):
            a, b = other.re, other.im
            return CxField(field_sum(field_scale(self.re, a), field_scale(self.im, -b)),
                           field_sum(field_scale(self.re, b), field_scale(self.im, a)))
        if isinstance(other, complex):
            a, b = other.real, other.imag
            return CxField(field_sum(field_scale(self.re, a), field_scale(self.im, -b)),
                           field_sum(field_scale(self.re, b), field_scale(self.im, a)))
        other = _as_cx(other, self.n)
        # (a + ib)(c + id) = (ac - bd) + i(ad + bc)
        a, b, c, d = self.re, self.im, other.re, other.im
        return CxField(field_sum(a * c, field_scale(b * d, -1)),
                       field_sum(a * d, b * c))

    __rmul__ = __mul__

    def is_exact_zero(self):
        return (isinstance(self.re, Polynomial) and self.re.is_zero()
                and isinstance(self.im, Polynomial) and self.im.is_zero())

    def is_exact(self):
        return isinstance(self.re, Polynomial) and isinstance(self.im, Polynomial)


def _as_cx(v, n):
    if isinstance(v, CxField):
        return v
    if isinstance(v, ScalarField):
        return CxField(v)
    if isinstance(v, (int, float, Fraction, complex, RationalComplex)):
        return CxField.constant(n, v)
    raise TypeError(f"cannot use {type(v).__name__} as a complex field")


# ---------------------------------------------------------------------------
# the nabla operators

def _nabla_parts(j, alpha):
    """(axis, sign) pairs for the real and imaginary parts of nabla_{j,alpha}."""
    base = 4 * (j >> 1)
    if j % 2 == 0:
        if alpha == 0:
            return (base, 1), (base + 1, 1)
        return (base + 2, -1), (base + 3, -1)
    if alpha == 0:
        return (base + 2, 1), (base + 3, -1)
    return (base, 1), (base + 1, -1)


def nabla(f, j, alpha):
    """Apply nabla_{j,alpha} to a real or complex field; returns a CxField.

    Exact when f has exact polynomial components.
    """
    if isinstance(f, CxField):
        gr = nabla(f.re, j, alpha)
        gi = nabla(f.im, j, alpha)
        # gr + i*gi
        return CxField(field_sum(gr.re, field_scale(gi.im, -1)),
                       field_sum(gr.im, gi.re))
    (mr, sr), (mi, si) = _nabla_parts(j, alpha)
    re = f.diff(mr) if sr > 0 else field_scale(f.diff(mr), -1)
    im = f.diff(mi) if si > 0 else field_scale(f.diff(mi), -1)
    return CxField(re, im)


@lru_cache(maxsize=None)
def nabla_matrices(n):
    """(V0, V1): complex (2n, 4n) coefficient matrices with
    nabla_{j,alpha} u = sum_m V_alpha[j, m] du/dx_m."""
    v = np.zeros((2, 2 * n, 4 * n), dtype=complex)
    for j in range(2 * n):
        for alpha in (0, 1):
            (mr, sr), (mi, si) = _nabla_parts(j, alpha)
            v[alpha, j, mr] = sr
            v[alpha, j, mi] += 1j * si
    v.setflags(write=False)
    return v[0], v[1]


def nabla_value(u, j, alpha, x):
    """nabla_{j,alpha} u at a point, from the gradient."""
    v0, v1 = nabla_matrices(u.n)
    v = v0 if alpha == 0 else v1
    return complex(v[j] @ u.gradient(x))


# ---------------------------------------------------------------------------
# exact complex coordinates

def z_field(n, j, alpha):
    """The complex coordinate z^{j,alpha} as an exact CxField."""
    base = 4 * (j >> 1)
    c = lambda m: Polynomial.coordinate(n, m)
    if j % 2 == 0:
        if alpha == 0:
            return CxField(c(base), field_scale(c(base + 1), -1))
        return CxField(field_scale(c(base + 2), -1), c(base + 3))
    if alpha == 0:
        return CxField(c(base + 2), c(base + 3))
    return CxField(c(base), c(base + 1))


def m_field(n, i, j):
    """The 2x2 minor M_{ij} = z^{i0} z^{j1} - z^{i1} z^{j0} (exact)."""
    return z_field(n, i, 0) * z_field(n, j, 1) - z_field(n, i, 1) * z_field(n, j, 0)


# ---------------------------------------------------------------------------
# second-order operators

def delta_field(u, i, j):
    """The antisymmetric second-order operator applied to u, as a CxField:
    (1/2)(nabla_{i0} nabla_{j1} u - nabla_{i1} nabla_{j0} u)."""
    a = nabla(nabla(u, j, 1), i, 0)
    b = nabla(nabla(u, j, 0), i, 1)
    return (a - b) * Fraction(1, 2)


def delta_matrix(u, x):
    """The antisymmetric 2n x 2n matrix of delta_{ij} u(x), from the Hessian."""
    v0, v1 = nabla_matrices(u.n)
    h = u.hessian(x)
    return 0.5 * (v0 @ h @ v1.T - v1 @ h @ v0.T)


def delta_matrices(u, pts):
    """Batched delta matrices: (N, 2n, 2n) complex from one Hessian sweep."""
    v0, v1 = nabla_matrices(u.n)
    h = u.hessians(pts)
    a = np.einsum("im,bmk,jk->bij", v0, h, v1, optimize=True)
    return 0.5 * (a - np.swapaxes(a, 1, 2))


def delta_from_hessians(n, hess):
    """Delta matrices from precomputed Hessians (N, 4n, 4n)."""
    v0, v1 = nabla_matrices(n)
    a = np.einsum("im,bmk,jk->bij", v0, hess, v1, optimize=True)
    return 0.5 * (a - np.swapaxes(a, 1, 2))


# ---------------------------------------------------------------------------
# forms with field coefficients

class FormField:
    """A degree-p form whose coefficients are complex-valued fields.

    Stored sparsely as {index bitmask: CxField}; masks use bit j for the
    basis covector w^j, exactly like the constant-coefficient elements.
    """

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n, degree, coeffs=None):
        if not 0 <= degree <= 2 * n:
            raise DimensionError(f"degree {degree} out of range for n={n}")
        self.n = n
        self.degree = degree
        self.coeffs = {}
        if coeffs:
            for mask, f in coeffs.items():
                if mask.bit_count() != degree or mask >= 1 << (2 * n):
                    raise DimensionError(f"mask {mask:b} is not degree {degree}")
                f = _as_cx(f, n)
                if not f.is_exact_zero():
                    self.coeffs[mask] = f

    @classmethod
    def zero(cls, n, degree):
        return cls(n, degree)

    @classmethod
    def from_scalar(cls, u):
        return cls(u.n, 0, {0: _as_cx(u, u.n)})

    @classmethod
    def from_constant(cls, element):
        """Constant-coefficient form from an exterior-algebra element."""
        coeffs = {m: CxField.constant(element.n, c) for m, c in element.coeffs.items()}
        return cls(element.n, element.degree, coeffs)

    # -------------------------------------------------------------- evaluate
    def at(self, x):
        """Evaluate to a constant-coefficient element at one point."""
        return ExtElement(self.n, self.degree,
                          {m: f.value(x) for m, f in self.coeffs.items()})

    def coefficient_table(self, pts):
        """{mask: complex array over pts} for batch work."""
        return {m: f.values(pts) for m, f in self.coeffs.items()}

    def top_values(self, pts):
        """Coefficient of the full wedge w^0^...^w^{2n-1} over pts."""
        pts = np.asarray(pts, dtype=float)
        full = (1 << (2 * self.n)) - 1
        if self.degree != 2 * self.n or full not in self.coeffs:
            return np.zeros(len(pts), dtype=complex)
        return self.coeffs[full].values(pts)

    # -------------------------------------------------------------- algebra
    def __add__(self, other):
        if not isinstance(other, FormField):
            return NotImplemented
        if (self.n, self.degree) != (other.n, other.degree):
            raise DimensionError("cannot add forms of different shape")
        out = dict(self.coeffs)
        for m, f in other.coeffs.items():
            out[m] = out[m] + f if m in out else f
        return FormField(self.n, self.degree, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        return FormField(self.n, self.degree,
                         {m: f * s for m, f in self.coeffs.items()})

    def wedge(self, other):
        if isinstance(other, ExtElement):
            other = FormField.from_constant(other)
        if self.n != other.n:
            raise DimensionError("mismatched dimensions")
        deg = self.degree + other.degree
        if deg > 2 * self.n:
            return FormField(self.n, 2 * self.n)
        out = {}
        for ma, fa in self.coeffs.items():
            for mb, fb in other.coeffs.items():
                if ma & mb:
                    continue
                s = wedge_sign(ma, mb)
                term = fa * fb if s > 0 else (fa * fb) * -1
                m = ma | mb
                out[m] = out[m] + term if m in out else term
        return FormField(self.n, deg, out)

    __xor__ = wedge

    # -------------------------------------------------------------- calculus
    def d(self, alpha):
        """Exterior-type differential: sum_j nabla_{j,alpha} f_I w^j ^ w^I."""
        if self.degree == 2 * self.n:
            return FormField(self.n, self.degree)  # no room; only top forms
        out = {}
        for mask, f in self.coeffs.items():
            for j in range(2 * self.n):
                bit = 1 << j
                if mask & bit:
                    continue
                g = nabla(f, j, alpha)
                if wedge_sign(bit, mask) < 0:
                    g = -g
                m = mask | bit
                out[m] = out[m] + g if m in out else g
        return FormField(self.n, self.degree + 1, out)

    def is_exact(self):
        return all(f.is_exact() for f in self.coeffs.values())

    def is_exact_zero(self):
        return all(f.is_exact_zero() for f in self.coeffs.values())


def laplace(u):
    """The closed 2-form with coefficients 2 delta_{ij} u at mask {i, j}.

    Equals d0(d1(u)); for plurisubharmonic u this is the basic positive form
    (e.g. u = |q|^2 gives 8 * beta)."""
    n = u.n
    coeffs = {}
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            f = delta_field(u, i, j) * 2
            if not f.is_exact_zero():
                coeffs[(1 << i) | (1 << j)] = f
    return FormField(n, 2, coeffs)


def d_scalar(u, alpha):
    """d_alpha of a scalar field, as a degree-1 FormField."""
    return FormField.from_scalar(u).d(alpha)


def closedness_residual(form, pts=None):
    """Max |coefficient| of d0(form) and d1(form).

    Exact-polynomial forms are checked symbolically (returns 0.0 when both
    differentials vanish identically); otherwise `pts` samples are required.
    """
    if form.is_exact():
        worst = Fraction(0)
        for alpha in (0, 1):
            for f in form.d(alpha).coeffs.values():
                for part in (f.re, f.im):
                    for c in part.terms.values():
                        worst = max(worst, abs(Fraction(c)) if not isinstance(c, float)
                                    else Fraction(abs(c)))
        return float(worst)
    if pts is None:
        raise ValueError("sample points are required for non-polynomial forms")
    worst = 0.0
    for alpha in (0, 1):
        for arr in form.d(alpha).coefficient_table(pts).values():
            if len(arr):
                worst = max(worst, float(np.abs(arr).max()))
    return worst


def is_closed(form, pts=None, tol=1e-9):
    return closedness_residual(form, pts) <= tol


# ---------------------------------------------------------------------------
# change of variables

def real_rep(a_matrix):
    """The 4n x 4n real matrix of q -> A q acting on stacked components.

    Each quaternion entry a contributes the left-multiplication block
    [[a0,-a1,-a2,-a3],[a1,a0,-a3,a2],[a2,a3,a0,-a1],[a3,-a2,a1,a0]].
    """
    a_matrix = a_matrix if isinstance(a_matrix, QMatrix) else QMatrix(a_matrix)
    rows, cols = a_matrix.rows, a_matrix.cols
    out = np.zeros((4 * rows, 4 * cols))
    for l in range(rows):
        for k in range(cols):
            a0, a1, a2, a3 = (float(c) for c in a_matrix[l, k].components)
            out[4 * l:4 * l + 4, 4 * k:4 * k + 4] = [
                [a0, -a1, -a2, -a3],
                [a1, a0, -a3, a2],
                [a2, a3, a0, -a1],
                [a3, -a2, a1, a0],
            ]
    return out


def pullback_potential(u_tilde, a_matrix):
    """The composed field u(x) = u_tilde(A x), A acting quaternionically."""
    return LinearSubstitution(u_tilde, real_rep(a_matrix))


def change_of_variables_check(u_tilde, a_matrix, pts):
    """Residual of the delta-matrix transformation law under q -> A q.

    For u(x) = u_tilde(Ax) the claim is
        D_u(x) = tau(A)^T  D_{u_tilde}(Ax)  tau(A),
    checked at the sample points; returns the max entrywise residual.
    """
    a_matrix = a_matrix if isinstance(a_matrix, QMatrix) else QMatrix(a_matrix)
    tau_a = a_matrix.tau()
    r = real_rep(a_matrix)
    u = LinearSubstitution(u_tilde, r)
    pts = np.asarray(pts, dtype=float)
    lhs = delta_matrices(u, pts)
    rhs = np.einsum("pi,bij,jq->bpq", tau_a.T, delta_matrices(u_tilde, pts @ r.T),
                    tau_a, optimize=True)
    return float(np.abs(lhs - rhs).max())
