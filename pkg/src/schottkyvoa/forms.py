"""Differentials on the sewn surface, evaluated in the global coordinate.

Every form is returned as its coefficient in the single planar coordinate:
``omega(x, y)`` means the coefficient of ``dx dy``, ``nu(b, x)`` that of ``dx``,
and the prime-form function ``K(x, y)`` is the coefficient of
``dx^{-1/2} dy^{-1/2}``.  Points must lie in the fundamental domain (outside
all sewing circles); a :class:`DomainWarning` is emitted otherwise.

All functions broadcast over array-valued points.
"""

import cmath
import functools
import warnings

import numpy as np

from ._validation import BranchWarning, PoleError
from .moments import L_vector, R_vector, antiderivative_vectors, d_vectors
from .schottky import handle_labels, reduced_words


def _pair(x, y):
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if np.any(x == y):
        raise PoleError("coincident points on the diagonal of a double pole")
    return x, y


def _scalar(value):
    value = np.asarray(value)
    return complex(value) if value.ndim == 0 else value


def omega(system, x, y):
    """Normalized bidifferential of the second kind, ``1/(x-y)^2 - L(x)(I-A)^{-1}R(y)``."""
    x, y = _pair(x, y)
    x, y = np.broadcast_arrays(x, y)
    corr = system.bilinear(L_vector(system, x), R_vector(system, y))
    return _scalar(1.0 / (x - y) ** 2 - corr)


@functools.lru_cache(maxsize=8)
def _word_matrices(surface, max_word_length):
    mats = [np.eye(2, dtype=complex)]
    gens = {}
    for a in handle_labels(surface.genus):
        wa, wma, rho = surface.w(a), surface.w(-a), surface.rho_of(a)
        gens[a] = np.array([[wma, rho - wa * wma], [1.0, -wa]]) / cmath.sqrt(-rho)
    frontier = [((), np.eye(2, dtype=complex))]
    for _ in range(max_word_length):
        nxt = []
        for letters, m in frontier:
            for a, ga in gens.items():
                if letters and a == -letters[-1]:
                    continue
                prod = m @ ga
                nxt.append((letters + (a,), prod))
                mats.append(prod)
        frontier = nxt
    out = np.array(mats)
    out.setflags(write=False)
    return out


def omega_poincare(system, x, y, max_word_length):
    """Poincare series ``sum_gamma (dx d(gamma y)) / (x - gamma y)^2`` over reduced words.

    Words of length at most `max_word_length` are summed; length zero gives
    ``1/(x-y)^2``.  Independent of the moment matrix (only the surface is used).
    """
    if max_word_length < 0:
        raise ValueError("max_word_length must be non-negative")
    x, y = _pair(x, y)
    x, y = np.broadcast_arrays(x, y)
    mats = _word_matrices(system.surface, int(max_word_length))
    a, b, c, d = (mats[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    xf, yf = x.reshape(1, -1), y.reshape(1, -1)
    den = c * yf + d
    gy = (a * yf + b) / den
    terms = 1.0 / ((xf - gy) ** 2 * den**2)
    return _scalar(terms.sum(axis=0).reshape(x.shape))


def omega_poincare_partial_sums(system, x, y, max_word_length):
    """Partial sums of :func:`omega_poincare` by word length ``0..max_word_length``."""
    x, y = complex(x), complex(y)
    out = []
    for n in range(max_word_length + 1):
        out.append(omega_poincare(system, x, y, n))
    return np.array(out)


def nu(system, b, x):
    """Normalized holomorphic 1-form ``nu_b``, ``b = 1..g``.

    ``1/(x - w_b) - 1/(x - w_{-b}) - d_b (I-A)^{-1} R(x)``.
    """
    s = system.surface
    x = np.asarray(x, dtype=complex)
    if np.any(x == s.w(b)) or np.any(x == s.w(-b)):
        raise PoleError("nu evaluated at a circle centre")
    d, _ = d_vectors(system, b)
    corr = R_vector(system, x) @ system.solve_left(d)
    return _scalar(1.0 / (x - s.w(b)) - 1.0 / (x - s.w(-b)) - corr)


def nu_dual(system, b, x):
    """``nu_b`` through the equivalent expression ``... - L(x) (I-A)^{-1} dbar_b``."""
    s = system.surface
    x = np.asarray(x, dtype=complex)
    _, dbar = d_vectors(system, b)
    corr = L_vector(system, x) @ system.solve(dbar)
    return _scalar(1.0 / (x - s.w(b)) - 1.0 / (x - s.w(-b)) - corr)


def _near_cut(value, tol=1e-10):
    return value.real < 0 and abs(value.imag) <= tol * abs(value)


def period_matrix(system):
    """Period matrix ``Omega`` (``g x g``) from the moment vectors.

    Off-diagonal: ``2 pi i Omega_ab = log(cross-ratio) - d_a (I-A)^{-1} dbar_b``;
    diagonal: ``log(-rho_a / (w_a - w_{-a})^2) - d_a (I-A)^{-1} dbar_a``.
    Principal logarithms; a :class:`BranchWarning` flags arguments on the
    negative real axis.  The result is not symmetrized.
    """
    s = system.surface
    g = s.genus
    d = [None] * g
    dbar = [None] * g
    for b in range(1, g + 1):
        d[b - 1], dbar[b - 1] = d_vectors(system, b)
    solved = system.solve(np.column_stack(dbar))
    omega_mat = np.empty((g, g), dtype=complex)
    for a in range(1, g + 1):
        for b in range(1, g + 1):
            if a == b:
                arg = -s.rho_of(a) / (s.w(a) - s.w(-a)) ** 2
            else:
                arg = ((s.w(a) - s.w(b)) * (s.w(-a) - s.w(-b))) / (
                    (s.w(-a) - s.w(b)) * (s.w(a) - s.w(-b))
                )
            if _near_cut(arg):
                warnings.warn(
                    f"log argument for Omega[{a},{b}] lies on the branch cut",
                    BranchWarning,
                    stacklevel=2,
                )
            val = cmath.log(arg) - d[a - 1] @ solved[:, b - 1]
            omega_mat[a - 1, b - 1] = val / (2j * np.pi)
    return omega_mat


def symmetry_residual(matrix):
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0


def omega_third_kind(system, p, q, x):
    """Third-kind differential ``omega_{p-q}(x)``, residues ``+1`` at ``p`` and ``-1`` at ``q``."""
    x = np.asarray(x, dtype=complex)
    if np.any(x == p) or np.any(x == q):
        raise PoleError("third-kind form evaluated at one of its poles")
    rt = antiderivative_vectors(system, p, "R") - antiderivative_vectors(system, q, "R")
    corr = L_vector(system, x) @ system.solve(rt)
    return _scalar(1.0 / (x - p) - 1.0 / (x - q) - corr)


def _r_at_infinity(system, x, y):
    lt = antiderivative_vectors(system, x, "L")
    rt = antiderivative_vectors(system, y, "R")
    return -system.bilinear(lt, rt)


def prime_form_r(system, x, y):
    """``r(x, y) = log(K(x, y) / (x - y))``: symmetric, with ``r(x, x) = 0``.

    Built from the double termwise antiderivative ``-L~(x)(I-A)^{-1}R~(y)``
    (which vanishes at infinity), shifted by its diagonal values.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    x, y = np.broadcast_arrays(x, y)
    r = (
        _r_at_infinity(system, x, y)
        - 0.5 * _r_at_infinity(system, x, x)
        - 0.5 * _r_at_infinity(system, y, y)
    )
    return _scalar(r)


def prime_form_K(system, x, y):
    """Prime-form coefficient ``K(x, y) = (x - y) exp(r(x, y))``; antisymmetric."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return _scalar((x - y) * np.exp(prime_form_r(system, x, y)))


def log_prime_form(system, x, y):
    """Branch of ``log K(x, y)`` used for complex powers: ``Log(x - y) + r(x, y)``."""
    x, y = _pair(x, y)
    return _scalar(np.log(x - y) + prime_form_r(system, x, y))


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def abelian_potential(system, b, z):
    """Fixed antiderivative of ``nu_b``: ``Log((z-w_b)/(z-w_{-b})) - d_b (I-A)^{-1} R~(z)``.

    The logarithm's cut is the segment joining ``w_b`` and ``w_{-b}``.
    """
    s = system.surface
    z = np.asarray(z, dtype=complex)
    d, _ = d_vectors(system, b)
    rt = antiderivative_vectors(system, z, "R")
    return _scalar(np.log((z - s.w(b)) / (z - s.w(-b))) - rt @ system.solve_left(d))


def abelian_integral(system, b, p, q):
    """``int_q^p nu_b`` as a difference of :func:`abelian_potential` values.

    Agrees with integration along the straight segment from `q` to `p` unless
    that segment crosses the cut between ``w_b`` and ``w_{-b}``, in which case
    the two differ by ``2 pi i`` and a :class:`BranchWarning` is issued.
    """
    s = system.surface
    if _segments_cross(complex(q), complex(p), s.w(b), s.w(-b)):
        warnings.warn(
            f"path from {q} to {p} crosses the log cut of nu_{b}",
            BranchWarning,
            stacklevel=2,
        )
    return complex(abelian_potential(system, b, p) - abelian_potential(system, b, q))


def projective_connection(system, x):
    """``s(x) = 6 lim_{y->x} (omega(x,y) - 1/(x-y)^2) = -6 L(x)(I-A)^{-1}R(x)``."""
    x = np.asarray(x, dtype=complex)
    return _scalar(-6.0 * system.bilinear(L_vector(system, x), R_vector(system, x)))


def contour_integral(f, centre, radius, nodes=256, clockwise=False):
    """Trapezoid rule for ``oint f(z) dz`` on the circle ``|z - centre| = radius``."""
    t = 2 * np.pi * np.arange(nodes) / nodes
    if clockwise:
        t = -t
    z = centre + radius * np.exp(1j * t)
    dz = 1j * (z - centre) * (2 * np.pi / nodes) * (-1 if clockwise else 1)
    return complex(np.sum(np.asarray(f(z)) * dz))


def alpha_cycle(surface, a, scale=1.1):
    """``(centre, radius, clockwise)`` of the alpha_a cycle: circle about ``w_{-a}``.

    The cycle is the boundary circle ``C_{-a}`` of the fundamental domain,
    traversed with the domain on its left (clockwise about ``w_{-a}``).
    """
    return surface.w(-a), scale * surface.radius(a), True
