"""Genus-g partition functions of the rank-1 and rank-2 Heisenberg algebras.

Three independent routes to ``det(I - A)`` are provided: the moment-matrix
determinant, the product over primitive classes of the Schottky group
(:func:`montonen_zograf`) and a brute-force Fock-basis permanent sum
(:func:`fock_oracle`).
"""

import cmath
import itertools
import math
import warnings

import numpy as np

from ._validation import (
    BranchWarning,
    ConvergenceError,
    DimensionError,
    DivergenceWarning,
    DomainError,
    check_matrix,
)
from .forms import period_matrix
from .mmt import enumerate_weighted_multisets, permanent, permanent_naive, submatrix
from .moments import MomentSystem, auto_moment_system, d_vectors
from .schottky import primitive_class_reps


def as_system(surface_or_system, K=8, tol=1e-12):
    """Return `surface_or_system` if it is a :class:`MomentSystem`, else escalate one."""
    if isinstance(surface_or_system, MomentSystem):
        return surface_or_system
    return auto_moment_system(surface_or_system, K, tol)


def partition_rank2(surface, K=8, tol=1e-12):
    """``Z = 1 / det(I - A)``; `surface` may also be a prepared :class:`MomentSystem`."""
    return 1.0 / as_system(surface, K, tol).det


def _sqrt_det(det):
    if det.real < 0 and abs(det.imag) < 1e-8 * abs(det):
        warnings.warn(
            "det(I - A) lies on the square-root cut", BranchWarning, stacklevel=3
        )
    return cmath.sqrt(det)


def partition_rank1(surface, K=8, tol=1e-12):
    """``Z = det(I - A)^{-1/2}``, principal branch."""
    return 1.0 / _sqrt_det(as_system(surface, K, tol).det)


def _charge_array(charges, genus):
    alpha = np.asarray(charges, dtype=complex)
    if alpha.shape == (genus,):
        alpha = np.column_stack([alpha, np.zeros(genus)])
    if alpha.shape != (genus, 2):
        raise DimensionError(f"charges must have shape ({genus}, 2), got {alpha.shape}")
    return alpha


def charge_dot(alpha, beta):
    """``alpha . beta = alpha_+ beta_- + alpha_- beta_+`` (the Euclidean product)."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    return alpha[..., 0] * beta[..., 0] + alpha[..., 1] * beta[..., 1]


def light_cone(alpha):
    """``(alpha_+, alpha_-)`` with ``alpha_+- = (alpha_1 +- i alpha_2) / sqrt 2``."""
    alpha = np.asarray(alpha, dtype=complex)
    return (
        (alpha[..., 0] + 1j * alpha[..., 1]) / math.sqrt(2),
        (alpha[..., 0] - 1j * alpha[..., 1]) / math.sqrt(2),
    )


def charged_exponent(Omega, charges):
    """``alpha . Omega . alpha = sum_{a,b} (alpha^a . alpha^b) Omega_ab``."""
    alpha = _charge_array(charges, Omega.shape[0])
    gram = charge_dot(alpha[:, None, :], alpha[None, :, :])
    return complex(np.sum(gram * Omega))


def _log_cross_ratios(surface):
    """Matrix of the principal logs entering ``2 pi i Omega`` before the moment correction."""
    g = surface.genus
    w = surface.w
    out = np.empty((g, g), dtype=complex)
    for a in range(1, g + 1):
        for b in range(1, g + 1):
            if a == b:
                arg = -surface.rho_of(a) / (w(a) - w(-a)) ** 2
            else:
                arg = ((w(a) - w(b)) * (w(-a) - w(-b))) / (
                    (w(-a) - w(b)) * (w(a) - w(-b))
                )
            out[a - 1, b - 1] = cmath.log(arg)
    return out


def partition_charged(surface, charges, K=8, tol=1e-12, route="omega"):
    """Charged partition function ``exp(i pi alpha.Omega.alpha) / det(I - A)``.

    Parameters
    ----------
    surface : SchottkySurface or MomentSystem
    charges : array_like, shape (g, 2) or (g,)
        ``alpha^a`` for ``a = 1..g``; a 1-d input sets the second component to 0.
    route : {"omega", "phi"}
        ``"omega"`` uses :func:`forms.period_matrix`; ``"phi"`` assembles the
        unsimplified form ``F(w, rho) exp(phi^- (I-A)^{-1} phi^+) / det``
        from the charge-weighted moment vectors ``phi^{+-}``.
    """
    system = as_system(surface, K, tol)
    s = system.surface
    g = s.genus
    alpha = _charge_array(charges, g)
    if route == "omega":
        expo = 1j * np.pi * charged_exponent(period_matrix(system), alpha)
        return cmath.exp(expo) / system.det
    if route != "phi":
        raise ValueError(f"unknown route {route!r}")
    ap, am = light_cone(alpha)
    phi_plus = np.zeros(system.size, dtype=complex)
    phi_minus = np.zeros(system.size, dtype=complex)
    for b in range(1, g + 1):
        d, dbar = d_vectors(system, b)
        phi_plus -= ap[b - 1] * dbar
        phi_minus += am[b - 1] * d
    gram = charge_dot(alpha[:, None, :], alpha[None, :, :])
    log_f = 0.5 * np.sum(gram * _log_cross_ratios(s))
    return cmath.exp(log_f + system.bilinear(phi_minus, phi_plus)) / system.det


def multiplier_product(multipliers, max_power):
    """``prod_gamma prod_{k <= max_power} (1 - q_gamma^k)``."""
    q = np.asarray(list(multipliers), dtype=complex)
    if q.size == 0:
        return 1.0 + 0j
    k = np.arange(1, max_power + 1)
    return complex(np.prod(1.0 - q[:, None] ** k[None, :]))


def montonen_zograf(surface, max_multiplier_power=40, max_word_length=6):
    """``det(I - A)`` as a product over primitive conjugacy classes.

    Each class representative of word length ``<= max_word_length`` contributes
    ``prod_{k <= max_multiplier_power} (1 - q^k)`` with ``q`` the eigenvalue
    ratio of its matrix.
    """
    if max_multiplier_power < 1 or max_word_length < 1:
        raise ValueError("cutoffs must be >= 1")
    qs = []
    for word in primitive_class_reps(surface, max_word_length):
        q = word.moebius(surface).multiplier()
        if not abs(q) < 1:
            raise ArithmeticError(f"non-loxodromic word {word}")
        qs.append(q)
    return multiplier_product(qs, max_multiplier_power)


def fock_oracle(surface, max_weight):
    """Brute-force ``sum perm A(i, i) / r!`` over Fock labels of weight ``<= max_weight``.

    A Fock label is a multiset of moment indices ``(a, k)`` with weight ``sum k``.
    Permanents of size up to 8 are taken by direct permutation sums.  The
    result approximates ``1 / det(I - A)`` with an error of order
    ``|rho|^(max_weight + 1)``.
    """
    if not 0 <= max_weight <= 8:
        raise ValueError("max_weight must lie in 0..8")
    if max_weight == 0:
        return 1.0 + 0j
    system = MomentSystem(surface, max_weight)
    weights = [k for _ in system.labels for k in range(1, max_weight + 1)]
    total = 0j
    for ms in enumerate_weighted_multisets(weights, max_weight):
        idx = list(ms)
        if not idx:
            total += 1.0
            continue
        sub = submatrix(system.A, idx, idx)
        perm = permanent_naive(sub) if len(idx) <= 8 else permanent(sub)
        total += perm / ms.factorial
    return total


def _integer_grid(dim, cutoff):
    axis = np.arange(-cutoff, cutoff + 1)
    return np.array(list(itertools.product(axis, repeat=dim)), dtype=float).reshape(
        -1, dim
    )


def _check_imag_pd(Omega):
    im = Omega.imag
    eig = np.linalg.eigvalsh(0.5 * (im + im.T))
    if eig.min() <= 0:
        raise DomainError("Im Omega is not positive definite")
    return float(eig.min())


def lattice_theta(Omega, gram, cutoff):
    """Siegel theta ``sum_{lambda} exp(i pi sum_ab (lambda_a . lambda_b) Omega_ab)``.

    Lattice vectors are ``lambda_a = n_a`` in the basis with Gram matrix
    `gram`; coefficients range over ``|n| <= cutoff`` componentwise.

    Returns
    -------
    (complex, float)
        The sum and a tail estimate for the omitted shells.
    """
    Omega = check_matrix(Omega, square=True, name="Omega")
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionError("gram must be square")
    mu = _check_imag_pd(Omega)
    g, d = Omega.shape[0], gram.shape[0]
    Q = np.kron(Omega, gram)
    N = _integer_grid(g * d, cutoff)
    quad = np.einsum("ni,ij,nj->n", N, Q, N)
    value = complex(np.sum(np.exp(1j * np.pi * quad)))
    gmin = float(np.linalg.eigvalsh(gram).min())
    r2 = (cutoff + 1) ** 2
    count = 2 * g * d * (2 * cutoff + 3) ** (g * d - 1)
    tail = count * math.exp(-math.pi * mu * gmin * r2)
    return value, tail


def lattice_partition(surface, gram, cutoff, K=8, tol=1e-12):
    """``Theta_L(Omega) / det(I - A)^{d/2}`` for the lattice with Gram matrix `gram`.

    Raises
    ------
    ConvergenceError
        If the theta-tail estimate exceeds `tol`.
    """
    system = as_system(surface, K, tol)
    gram = np.atleast_2d(np.asarray(gram, dtype=float))
    value, tail = lattice_theta(period_matrix(system), gram, cutoff)
    if tail > tol * max(abs(value), 1.0):
        raise ConvergenceError(
            f"theta cutoff {cutoff} too small: tail estimate {tail:.3g}", (value,)
        )
    d = gram.shape[0]
    return value / _sqrt_det(system.det) ** d


def riemann_theta(Omega, alpha_shift, zeta, cutoff=8):
    """``Theta[alpha](Omega, zeta) = sum_m exp(i pi (m+alpha).Omega.(m+alpha) + (m+alpha).zeta)``.

    Summed over ``m`` in ``Z^g`` with ``|m|_inf <= cutoff``.  A
    :class:`DivergenceWarning` is issued if the outermost shell still
    contributes more than ``1e-12`` relative.
    """
    Omega = check_matrix(Omega, square=True, name="Omega")
    g = Omega.shape[0]
    _check_imag_pd(Omega)
    alpha = np.asarray(alpha_shift, dtype=float).reshape(g)
    zeta = np.asarray(zeta, dtype=complex).reshape(g)
    grid = _integer_grid(g, cutoff)
    v = grid + alpha
    terms = np.exp(1j * np.pi * np.einsum("ni,ij,nj->n", v, Omega, v) + v @ zeta)
    value = complex(np.sum(terms))
    shell = np.abs(grid).max(axis=1) == cutoff
    edge = float(np.sum(np.abs(terms[shell]))) if cutoff > 0 else 0.0
    if cutoff > 0 and edge > 1e-12 * max(abs(value), 1e-300):
        warnings.warn(
            f"theta cutoff {cutoff}: outer shell contributes {edge:.3g}",
            DivergenceWarning,
            stacklevel=2,
        )
    return value
