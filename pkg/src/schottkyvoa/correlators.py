"""Genus-zero and genus-g correlation generating functions for Heisenberg modules.

Rank 2 uses charges ``alpha = (alpha_1, alpha_2)`` with the Euclidean pairing
``alpha . beta = alpha_+ beta_- + alpha_- beta_+``; rank 1 uses scalar charges.
Complex powers of prime forms are taken as ``exp(p * log_prime_form)``.
"""

import cmath
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import BranchWarning, DimensionError, PoleError
from .forms import (
    abelian_integral,
    log_prime_form,
    nu,
    omega,
    omega_third_kind,
    period_matrix,
    prime_form_K,
    projective_connection,
)
from .mmt import partial_permanent, permanent
from .partition import (
    _charge_array,
    _sqrt_det,
    as_system,
    charge_dot,
    charged_exponent,
    light_cone,
    partition_charged,
    riemann_theta,
)


def trivial_cocycle(alpha, beta):
    """The default 2-cocycle ``epsilon = 1``."""
    return 1.0


def cocycle_product(charges, cocycle=None):
    """``epsilon_beta = prod_{t < n} epsilon(beta^t, sum_{u > t} beta^u)``."""
    cocycle = cocycle or trivial_cocycle
    charges = [np.asarray(c, dtype=complex) for c in charges]
    out = 1.0 + 0j
    for t in range(len(charges) - 1):
        rest = np.sum(charges[t + 1:], axis=0)
        out *= cocycle(charges[t], rest)
    return out


def _distinct(points, what="points"):
    pts = [complex(p) for p in points]
    if len(set(pts)) != len(pts):
        raise PoleError(f"coincident {what}")
    return pts


def genus0_2npt(x_plus, x_minus):
    """``perm [1 / (x_i^+ - x_j^-)^2]``, the genus-zero ``h_+ h_-`` correlator."""
    xp = np.asarray(x_plus, dtype=complex).reshape(-1)
    xm = np.asarray(x_minus, dtype=complex).reshape(-1)
    if xp.size != xm.size:
        raise DimensionError("need equally many + and - insertions")
    if xp.size == 0:
        return 1.0 + 0j
    diff = xp[:, None] - xm[None, :]
    if np.any(diff == 0):
        raise PoleError("coincident + and - insertions")
    return permanent(1.0 / diff**2)


def _principal_power(base, exponent):
    base = complex(base)
    if base.real < 0 and abs(base.imag) < 1e-12 * abs(base) and exponent != int(
        exponent.real
    ):
        warnings.warn(
            "complex power of a negative real base", BranchWarning, stacklevel=3
        )
    return cmath.exp(exponent * cmath.log(base))


def genus0_charged(x_plus, x_minus, z, alpha, cocycle=None):
    """Genus-zero generating function with ``h_+-`` at ``x^{+-}`` and ``e^{alpha^t}`` at ``z_t``.

    ``eps_alpha prod_{t<u} (z_t - z_u)^{alpha^t . alpha^u} pperm_{theta^-, theta^+}``
    of ``1 / (x_i^+ - x_j^-)^2`` with ``theta_i^+- = sum_t alpha_+-^t / (x_i^+- - z_t)``.
    Returns 0 when the charges do not sum to zero.
    """
    xp = np.asarray(x_plus, dtype=complex).reshape(-1)
    xm = np.asarray(x_minus, dtype=complex).reshape(-1)
    if xp.size != xm.size:
        raise DimensionError("need equally many + and - insertions")
    z = np.asarray(_distinct(z, "charge insertions"), dtype=complex)
    alpha = np.asarray(alpha, dtype=complex).reshape(-1, 2)
    if alpha.shape[0] != z.size:
        raise DimensionError("one charge per insertion point required")
    if not np.allclose(alpha.sum(axis=0), 0, atol=1e-14):
        return 0j
    pref = cocycle_product(alpha, cocycle)
    for t, u in itertools.combinations(range(z.size), 2):
        pref *= _principal_power(z[t] - z[u], charge_dot(alpha[t], alpha[u]))
    if xp.size == 0:
        return pref
    ap, am = light_cone(alpha)
    theta_p = (ap[None, :] / (xp[:, None] - z[None, :])).sum(axis=1)
    theta_m = (am[None, :] / (xm[:, None] - z[None, :])).sum(axis=1)
    diff = xp[:, None] - xm[None, :]
    if np.any(diff == 0):
        raise PoleError("coincident + and - insertions")
    return pref * partial_permanent(1.0 / diff**2, theta_m, theta_p)


@dataclass(frozen=True)
class InsertionSet:
    """Insertion data for the genus-g generating functions.

    Attributes
    ----------
    y_plus, y_minus : tuple of complex
        ``h_+`` and ``h_-`` insertion points (rank 1 uses `y_plus` only).
    z : tuple of complex
        Points carrying ``e^{beta^t}``.
    beta : ndarray
        Charges, shape ``(n, 2)`` for rank 2 or ``(n,)`` for rank 1; must sum to 0.
    z0 : complex
        Basepoint for the abelian integrals; the result does not depend on it.
    """

    y_plus: tuple = ()
    y_minus: tuple = ()
    z: tuple = ()
    beta: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    z0: complex = 0j

    def __post_init__(self):
        for name in ("y_plus", "y_minus", "z"):
            object.__setattr__(self, name, tuple(complex(p) for p in getattr(self, name)))
        beta = np.asarray(self.beta, dtype=complex)
        if beta.shape[:1] != (len(self.z),):
            raise DimensionError("one charge per z insertion required")
        if len(self.z) and not np.allclose(beta.sum(axis=0), 0, atol=1e-13):
            raise ValueError("charges beta must sum to zero")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "z0", complex(self.z0))
        _distinct(self.y_plus + self.y_minus + self.z, "insertion points")


def _prime_power_product(system, z, exponents):
    """``prod_{t<u} E(z_t, z_u)^{exponents[t, u]}`` via :func:`log_prime_form`."""
    total = 0j
    for t, u in itertools.combinations(range(len(z)), 2):
        p = exponents[t, u]
        if p != 0:
            total += p * log_prime_form(system, z[t], z[u])
    return cmath.exp(total)


def _abelian_matrix(system, z, z0):
    """``I[a, t] = int_{z0}^{z_t} nu_a``."""
    g = system.surface.genus
    out = np.zeros((g, len(z)), dtype=complex)
    for a in range(1, g + 1):
        for t, zt in enumerate(z):
            out[a - 1, t] = abelian_integral(system, a, zt, z0)
    return out


def _third_kind_sum(system, y, z, weights, z0):
    """``sum_t weights[t] omega_{z_t - z0}(y)`` for each point of `y`."""
    y = np.asarray(y, dtype=complex)
    out = np.zeros(y.shape, dtype=complex)
    for zt, c in zip(z, weights):
        if c != 0:
            out = out + c * omega_third_kind(system, zt, z0, y)
    return out


def _nu_sum(system, y, coeffs):
    y = np.asarray(y, dtype=complex)
    out = np.zeros(y.shape, dtype=complex)
    for a, c in enumerate(coeffs, start=1):
        if c != 0:
            out = out + c * nu(system, a, y)
    return out


def generating_rank2(system, insertions, charges, cocycle=None, K=8, tol=1e-12):
    """Rank-2 generating function for ``h_+-`` and ``e^{beta^t}`` insertions on charged modules.

    Assembles ``eps_beta prod_{t<u} E(z_t, z_u)^{beta^t . beta^u}
    pperm_{theta~^-, theta~^+} omega(y_r^+, y_s^-)
    exp(i pi alpha.Omega.alpha + sum alpha^a . beta^t int_{z0}^{z_t} nu_a) / det(I-A)``
    with ``theta~_r^+- = sum_a alpha_+-^a nu_a(y_r^+-) + sum_t beta_+-^t omega_{z_t - z0}(y_r^+-)``.

    Parameters
    ----------
    system : MomentSystem or SchottkySurface
    insertions : InsertionSet
        ``beta`` of shape ``(n, 2)``.
    charges : array_like, shape (g, 2)
    cocycle : callable, optional
        ``epsilon(alpha, beta)``; defaults to 1.
    """
    system = as_system(system, K, tol)
    g = system.surface.genus
    alpha = _charge_array(charges, g)
    ins = insertions
    if len(ins.y_plus) != len(ins.y_minus):
        raise DimensionError("need equally many h_+ and h_- insertions")
    beta = ins.beta.reshape(len(ins.z), 2) if ins.z else np.zeros((0, 2), dtype=complex)
    Omega = period_matrix(system)
    expo = 1j * np.pi * charged_exponent(Omega, alpha)
    pref = cocycle_product(beta, cocycle)
    if ins.z:
        ints = _abelian_matrix(system, ins.z, ins.z0)
        expo += np.sum(charge_dot(alpha[:, None, :], beta[None, :, :]) * ints)
        bb = charge_dot(beta[:, None, :], beta[None, :, :])
        pref *= _prime_power_product(system, ins.z, bb)
    value = pref * cmath.exp(expo) / system.det
    if not ins.y_plus:
        return value
    ap, am = light_cone(alpha)
    bp, bm = light_cone(beta)
    yp = np.array(ins.y_plus)
    ym = np.array(ins.y_minus)
    theta_p = _nu_sum(system, yp, ap) + _third_kind_sum(system, yp, ins.z, bp, ins.z0)
    theta_m = _nu_sum(system, ym, am) + _third_kind_sum(system, ym, ins.z, bm, ins.z0)
    omat = omega(system, yp[:, None], ym[None, :])
    return value * partial_permanent(np.atleast_2d(omat), theta_m, theta_p)


def involutions(m):
    """Yield involutions of ``{0..m-1}`` as ``(fixed_points, pairs)``."""

    def rec(rest):
        if not rest:
            yield (), ()
            return
        first, tail = rest[0], rest[1:]
        for fixed, pairs in rec(tail):
            yield (first,) + fixed, pairs
        for i, partner in enumerate(tail):
            remaining = tail[:i] + tail[i + 1:]
            for fixed, pairs in rec(remaining):
                yield fixed, ((first, partner),) + pairs

    yield from rec(tuple(range(m)))


def sym_m(omega_values, nu_values):
    """``sum over involutions`` of ``prod_{fixed q} nu_q * prod_{pairs (r,s)} omega_rs``."""
    nu_values = np.asarray(nu_values, dtype=complex).reshape(-1)
    m = nu_values.size
    omega_values = np.asarray(omega_values, dtype=complex).reshape(m, m)
    total = 0j
    for fixed, pairs in involutions(m):
        term = 1.0 + 0j
        for q in fixed:
            term *= nu_values[q]
        for r, s in pairs:
            term *= omega_values[r, s]
        total += term
    return total


def generating_rank1(system, insertions, charges, cocycle=None, K=8, tol=1e-12):
    """Rank-1 generating function for ``h`` at ``y_r`` and ``e^{beta^t}`` at ``z_t``.

    ``eps_beta prod_{t<u} E(z_t, z_u)^{beta^t beta^u} Sym_m(omega, nu_{alpha,beta})
    exp(i pi alpha.Omega.alpha + sum alpha^a beta^t int_{z0}^{z_t} nu_a) / det(I-A)^{1/2}``,
    ``nu_{alpha,beta} = sum_a alpha^a nu_a + sum_t beta^t omega_{z_t - z0}``.
    `insertions.y_plus` holds the ``h`` points; `insertions.beta` has shape ``(n,)``.
    """
    system = as_system(system, K, tol)
    g = system.surface.genus
    alpha = np.asarray(charges, dtype=complex).reshape(g)
    ins = insertions
    beta = ins.beta.reshape(len(ins.z))
    Omega = period_matrix(system)
    expo = 1j * np.pi * (alpha @ Omega @ alpha)
    pref = cocycle_product(beta, cocycle)
    if ins.z:
        ints = _abelian_matrix(system, ins.z, ins.z0)
        expo += alpha @ ints @ beta
        pref *= _prime_power_product(system, ins.z, np.outer(beta, beta))
    value = pref * cmath.exp(expo) / _sqrt_det(system.det)
    if not ins.y_plus:
        return value
    y = np.array(ins.y_plus)
    nu_vals = _nu_sum(system, y, alpha) + _third_kind_sum(system, y, ins.z, beta, ins.z0)
    m = y.size
    omat = np.zeros((m, m), dtype=complex)
    for r, s in itertools.combinations(range(m), 2):
        omat[r, s] = omat[s, r] = omega(system, y[r], y[s])
    return value * sym_m(omat, nu_vals)


def virasoro_1pt(system, charges, z, K=8, tol=1e-12):
    """Virasoro 1-point function on the charged rank-2 module.

    The ``x^0`` coefficient of the ``h_+(z + x) h_-(z)`` generating function:
    ``(s(z)/6 + theta~^+(z) theta~^-(z)) Z_alpha`` with ``theta~^+- = sum_a alpha_+-^a nu_a``.
    At zero charge this is ``s(z) Z / 6``.
    """
    system = as_system(system, K, tol)
    alpha = _charge_array(charges, system.surface.genus)
    ap, am = light_cone(alpha)
    tp = _nu_sum(system, complex(z), ap)
    tm = _nu_sum(system, complex(z), am)
    s = projective_connection(system, z)
    return (s / 6.0 + complex(tp * tm)) * partition_charged(system, alpha)


def fermion_generating(system, x_points, y_points, alpha_shift, K=8, tol=1e-12, theta_cutoff=8):
    """Twisted free-fermion generating function.

    ``prod_{i<j} E(x_i,x_j) E(y_i,y_j) / prod_{i,j} E(x_i,y_j)
    Theta[alpha](Omega, zeta) / det(I-A)^{1/2}`` with
    ``zeta_a = sum_i int_{y_i}^{x_i} nu_a``.
    """
    system = as_system(system, K, tol)
    x = _distinct(x_points, "x points")
    y = _distinct(y_points, "y points")
    if len(x) != len(y):
        raise DimensionError("need equally many x and y points")
    _distinct(x + y, "insertion points")
    g = system.surface.genus
    ratio = 1.0 + 0j
    for i, j in itertools.combinations(range(len(x)), 2):
        ratio *= prime_form_K(system, x[i], x[j]) * prime_form_K(system, y[i], y[j])
    for xi in x:
        for yj in y:
            ratio /= prime_form_K(system, xi, yj)
    zeta = np.array(
        [sum(abelian_integral(system, a, xi, yi) for xi, yi in zip(x, y)) for a in range(1, g + 1)],
        dtype=complex,
    )
    theta = riemann_theta(period_matrix(system), alpha_shift, zeta, theta_cutoff)
    return ratio * theta / _sqrt_det(system.det)
