"""Permanents, partial permanents and generalized MacMahon Master Theorem checks.

The four identities relate a sum over multisets of (partial) permanents of
repeated-index submatrices to a closed form built from ``(I - A)^{-1}`` and
``det(I - A)``.  They are used in production (the Fock-sum partition function)
and as verification oracles for the determinant route.

Multisets are over 0-based indices and are enumerated in graded order (by
size), lexicographic within each size, so truncated sums are reproducible.
"""

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from ._validation import (
    DimensionError,
    DivergenceWarning,
    FactorizationError,
    check_matrix,
    check_vector,
)

_RYSER_MAX = 20
_NAIVE_MAX = 8
_CHUNK = 1 << 14


@dataclass(frozen=True)
class Multiset:
    """A multiset of non-negative integer indices.

    Stored as the sorted tuple of its elements, repeated with multiplicity.
    """

    elements: tuple = ()

    def __post_init__(self):
        els = tuple(sorted(int(e) for e in self.elements))
        if els and els[0] < 0:
            raise ValueError("multiset indices must be non-negative")
        object.__setattr__(self, "elements", els)

    @classmethod
    def from_counts(cls, counts):
        """Build from a mapping ``index -> repetition count``."""
        els = []
        for idx, r in counts.items():
            if r < 0:
                raise ValueError("repetition counts must be non-negative")
            els.extend([idx] * r)
        return cls(tuple(els))

    @property
    def counts(self):
        out = {}
        for e in self.elements:
            out[e] = out.get(e, 0) + 1
        return out

    @property
    def size(self):
        return len(self.elements)

    @property
    def factorial(self):
        """Order of the label symmetry group, the product of ``r(i)!``."""
        return math.prod(math.factorial(r) for r in self.counts.values())

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        body = ", ".join(
            f"{i}" if r == 1 else f"{i}^{r}" for i, r in sorted(self.counts.items())
        )
        return f"Multiset({{{body}}})"


def enumerate_multisets(n, max_size):
    """Yield every multiset over ``range(n)`` with at most `max_size` elements.

    Order is graded by size, then lexicographic in the sorted element tuples,
    e.g. ``{}, {0}, {1}, {0,0}, {0,1}, {1,1}, ...``.
    """
    if max_size < 0:
        raise ValueError("max_size must be non-negative")
    for size in range(max_size + 1):
        for combo in itertools.combinations_with_replacement(range(n), size):
            yield Multiset(combo)


def enumerate_weighted_multisets(weights, max_weight):
    """Yield multisets over ``range(len(weights))`` of total weight <= `max_weight`.

    `weights` are positive integers; the weight of a multiset is the sum of
    its elements' weights counted with multiplicity.  Order is graded by total
    weight, then lexicographic in the element tuples.
    """
    weights = [int(w) for w in weights]
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive integers")
    found = []

    def extend(start, prefix, total):
        found.append((total, tuple(prefix)))
        for idx in range(start, len(weights)):
            w = total + weights[idx]
            if w <= max_weight:
                prefix.append(idx)
                extend(idx, prefix, w)
                prefix.pop()

    extend(0, [], 0)
    found.sort()
    for _, els in found:
        yield Multiset(els)


def submatrix(M, rows, cols):
    """Matrix with entry ``(p, q) = M[rows[p], cols[q]]``, repeating indices."""
    M = np.asarray(M)
    r = np.fromiter(rows, dtype=int)
    c = np.fromiter(cols, dtype=int)
    if r.size and (r.max() >= M.shape[0]):
        raise IndexError("row multiset index out of range")
    if c.size and (c.max() >= M.shape[1]):
        raise IndexError("column multiset index out of range")
    return M[np.ix_(r, c)] if r.size and c.size else np.zeros((r.size, c.size), M.dtype)


def permanent_naive(M):
    """Permanent by summing over all permutations; an O(n!) reference path."""
    M = check_matrix(M, square=True)
    n = M.shape[0]
    if n > _NAIVE_MAX:
        raise ValueError(f"naive permanent limited to n <= {_NAIVE_MAX}")
    rows = np.arange(n)
    total = 0j
    for perm in itertools.permutations(range(n)):
        total += np.prod(M[rows, list(perm)])
    return complex(total)


def permanent(M):
    """Permanent by Ryser's inclusion-exclusion formula.

    Column subsets are visited in Gray-code order so that each subset's row
    sums differ from the previous one by a single column; the updates are
    accumulated in vectorized chunks.

    Parameters
    ----------
    M : (n, n) array_like
        Square complex matrix with ``n <= 20``.

    Returns
    -------
    complex
        ``sum over permutations pi of prod_i M[i, pi(i)]``; 1 for ``n = 0``.
    """
    M = check_matrix(M, square=True)
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(M[0, 0])
    if n > _RYSER_MAX:
        raise ValueError(f"permanent limited to n <= {_RYSER_MAX}")
    cols = M.T  # cols[j] is column j
    total = 0j
    rowsum = np.zeros(n, dtype=complex)
    last = 1 << n
    start = 1
    while start < last:
        t = np.arange(start, min(start + _CHUNK, last), dtype=np.int64)
        flip = np.log2(t & -t).astype(np.int64)
        gray = t ^ (t >> 1)
        sign_in = ((gray >> flip) & 1).astype(bool)
        steps = np.where(sign_in[:, None], cols[flip], -cols[flip])
        sums = rowsum + np.cumsum(steps, axis=0)
        parity = np.where(t & 1, -1.0, 1.0)
        total += np.dot(parity, np.prod(sums, axis=1))
        rowsum = sums[-1]
        start = int(t[-1]) + 1
    return complex((-1) ** n * total)


def _pperm_dp(M, theta, phi):
    n = M.shape[0]
    size = 1 << n
    masks = np.arange(size)
    dp = np.zeros(size, dtype=complex)
    dp[0] = 1.0
    free = [masks[(masks >> j) & 1 == 0] for j in range(n)]
    for i in range(n):
        new = dp * phi[i]
        for j in range(n):
            src = free[j]
            new[src | (1 << j)] += M[i, j] * dp[src]
        dp = new
    # product of theta over columns outside each mask
    unused = np.ones(size, dtype=complex)
    for j in range(n):
        unused[free[j]] *= theta[j]
    return complex(np.dot(dp, unused))


def partial_permanent(M, theta, phi):
    """``(theta, phi)``-extended partial permanent.

    Sums over injective partial maps ``psi`` of ``{0..n-1}`` into itself the
    weight ``prod_{i in dom} M[i, psi(i)] * prod_{j not in image} theta[j] *
    prod_{k not in dom} phi[k]``.  Computed by a dynamic program over the set
    of used columns, ``O(n^2 2^n)``.
    """
    M = check_matrix(M, square=True)
    n = M.shape[0]
    theta = check_vector(theta, n, "theta")
    phi = check_vector(phi, n, "phi")
    if n == 0:
        return 1.0 + 0j
    return _pperm_dp(M, theta, phi)


def partial_permanent_minors(M, theta, phi):
    """Partial permanent as a sum over equal-size row/column subsets.

    Each square minor's permanent is weighted by the ``theta`` product over
    the missed columns and the ``phi`` product over the missed rows.  Kept as
    an independent check on :func:`partial_permanent`; exponential in ``n``
    squared, so only for small matrices.
    """
    M = check_matrix(M, square=True)
    n = M.shape[0]
    theta = check_vector(theta, n, "theta")
    phi = check_vector(phi, n, "phi")
    total = 0j
    everything = set(range(n))
    for k in range(n + 1):
        for rows in itertools.combinations(range(n), k):
            phi_w = np.prod(phi[list(everything - set(rows))])
            for cols in itertools.combinations(range(n), k):
                theta_w = np.prod(theta[list(everything - set(cols))])
                minor = M[np.ix_(rows, cols)] if k else np.zeros((0, 0))
                total += permanent(minor) * theta_w * phi_w
    return complex(total)


def spectral_radius_estimate(A, iterations=50, tol=1e-10):
    """Power-iteration estimate of the spectral radius of `A`."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 0:
        return 0.0
    v = np.ones(n, dtype=complex) / math.sqrt(n)
    estimate = 0.0
    for _ in range(iterations):
        w = A @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        if abs(norm - estimate) <= tol * max(norm, 1.0):
            return float(norm)
        estimate = norm
        v = w / norm
    return float(estimate)


class MMTCheck(NamedTuple):
    lhs: complex
    rhs: complex


_VARIANTS = ("basic", "submatrix", "pperm", "general")


def _resolvent(A):
    n = A.shape[0]
    I = np.eye(n, dtype=complex)
    try:
        lu = scipy.linalg.lu_factor(I - A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FactorizationError(str(exc)) from exc
    if np.any(np.diag(lu[0]) == 0):
        raise FactorizationError("I - A is singular")
    piv_sign = (-1) ** np.count_nonzero(lu[1] != np.arange(n))
    det = complex(piv_sign * np.prod(np.diag(lu[0])))
    inv = scipy.linalg.lu_solve(lu, I)
    return inv, det


def mmt_identity_check(
    A,
    variant="basic",
    max_size=8,
    *,
    B=None,
    U=None,
    V=None,
    theta=None,
    phi=None,
    theta_prime=None,
    phi_prime=None,
):
    """Truncated multiset sum against the closed form of an MMT identity.

    Parameters
    ----------
    A : (n, n) array_like
    variant : {"basic", "submatrix", "pperm", "general"}
        ``basic``: ``sum perm A(i,i)/r! = 1/det(I-A)``.
        ``submatrix``: block permanent with ``B, U, V``; closed form
        ``perm(B + U (I-A)^{-1} V) / det(I-A)``.
        ``pperm``: ``(theta, phi)`` partial permanents; closed form
        ``exp(theta (I-A)^{-1} phi^T) / det(I-A)``.
        ``general``: block partial permanents with ``theta_prime, phi_prime``
        on the ``B`` block.
    max_size : int
        Largest multiset size kept in the truncated sum.

    Returns
    -------
    MMTCheck
        ``(lhs, rhs)``; comparing them is left to the caller.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}")
    A = check_matrix(A, square=True, name="A")
    n = A.shape[0]
    radius = spectral_radius_estimate(A)
    if radius >= 1.0:
        warnings.warn(
            f"spectral radius estimate {radius:.3g} >= 1; multiset sum diverges",
            DivergenceWarning,
            stacklevel=2,
        )
    resolvent, det = _resolvent(A)

    block = variant in ("submatrix", "general")
    partial = variant in ("pperm", "general")
    if block:
        B = np.zeros((0, 0), complex) if B is None else check_matrix(B, True, "B")
        m = B.shape[0]
        U = np.zeros((m, n), complex) if U is None else np.asarray(U, complex)
        V = np.zeros((n, m), complex) if V is None else np.asarray(V, complex)
        if U.shape != (m, n) or V.shape != (n, m):
            raise DimensionError("U must be (n', n) and V must be (n, n')")
    else:
        m = 0
        B = np.zeros((0, 0), complex)
        U = np.zeros((0, n), complex)
        V = np.zeros((n, 0), complex)
    if partial:
        theta = check_vector(np.zeros(n) if theta is None else theta, n, "theta")
        phi = check_vector(np.zeros(n) if phi is None else phi, n, "phi")
        theta_prime = check_vector(
            np.zeros(m) if theta_prime is None else theta_prime, m, "theta_prime"
        )
        phi_prime = check_vector(
            np.zeros(m) if phi_prime is None else phi_prime, m, "phi_prime"
        )

    lhs = 0j
    for ms in enumerate_multisets(n, max_size):
        idx = list(ms.elements)
        sub = A[np.ix_(idx, idx)] if idx else np.zeros((0, 0), complex)
        full = np.block([[B, U[:, idx]], [V[idx, :], sub]]) if m else sub
        if partial:
            big_theta = np.concatenate([theta_prime, theta[idx]])
            big_phi = np.concatenate([phi_prime, phi[idx]])
            term = partial_permanent(full, big_theta, big_phi)
        else:
            term = permanent(full)
        lhs += term / ms.factorial

    B_tilde = B + U @ resolvent @ V
    if variant == "basic":
        rhs = 1.0 / det
    elif variant == "submatrix":
        rhs = permanent(B_tilde) / det
    else:
        expo = np.exp(theta @ resolvent @ phi) / det
        if variant == "pperm":
            rhs = expo
        else:
            theta_tilde = theta_prime + theta @ resolvent @ V
            phi_tilde = phi_prime + U @ resolvent @ phi
            rhs = expo * partial_permanent(B_tilde, theta_tilde, phi_tilde)
    return MMTCheck(complex(lhs), complex(rhs))
