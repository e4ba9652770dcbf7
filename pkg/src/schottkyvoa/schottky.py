"""Schottky parameters, Moebius generators and free-group word enumeration.

A genus ``g`` surface is described by ``3g`` complex numbers: for each handle
``a = 1..g`` two circle centres ``w_a, w_{-a}`` and a sewing parameter
``rho_a``.  Circle ``C_a`` has centre ``w_a`` and radius ``|rho_a|^{1/2}``;
the generator ``gamma_a z = w_{-a} + rho_a / (z - w_a)`` maps the outside of
``C_a`` onto the inside of ``C_{-a}``.

Handle labels are signed integers ``a in {-g..-1, 1..g}``.  Wherever an order
is needed it is ``-1, 1, -2, 2, ..., -g, g``.
"""

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import DivergenceWarning, SchottkyError, SurfaceError, as_complex


def handle_labels(genus):
    """Signed handle labels in canonical order ``-1, 1, -2, 2, ...``."""
    return [s * j for j in range(1, genus + 1) for s in (-1, 1)]


def letter_key(a):
    """Sort key realizing the letter order ``-1 < 1 < -2 < 2 < ...``."""
    return (abs(a), a > 0)


@dataclass(frozen=True, eq=False)
class SchottkySurface:
    """Validated Schottky parameters; build with :func:`validate_surface`.

    Attributes
    ----------
    w_plus, w_minus, rho, sqrt_rho : ndarray of complex, shape (g,)
        ``w_a``, ``w_{-a}``, ``rho_a`` and the fixed branch of ``rho_a^{1/2}``
        for ``a = 1..g``.
    """

    w_plus: np.ndarray
    w_minus: np.ndarray
    rho: np.ndarray
    sqrt_rho: np.ndarray = field(repr=False)

    @property
    def genus(self):
        return len(self.rho)

    @property
    def labels(self):
        return handle_labels(self.genus)

    def w(self, a):
        return complex(self.w_plus[a - 1] if a > 0 else self.w_minus[-a - 1])

    def rho_of(self, a):
        return complex(self.rho[abs(a) - 1])

    def sqrt_rho_of(self, a):
        return complex(self.sqrt_rho[abs(a) - 1])

    def radius(self, a):
        return math.sqrt(abs(self.rho[abs(a) - 1]))

    def centres(self):
        """Centres ``w_a`` in canonical label order."""
        return np.array([self.w(a) for a in self.labels])

    def radii(self):
        return np.array([self.radius(a) for a in self.labels])

    def inside_circle(self, z, margin=1.0):
        """Labels of circles containing `z` (radius scaled by `margin`)."""
        return [a for a in self.labels if abs(z - self.w(a)) < margin * self.radius(a)]

    def params(self):
        """Flat parameter vector ``w_1, w_{-1}, rho_1, ..., w_g, w_{-g}, rho_g``."""
        return np.ravel(np.column_stack([self.w_plus, self.w_minus, self.rho]))

    def scaled(self, factor):
        """Same centres with every ``rho`` multiplied by `factor`."""
        return validate_surface(self.w_plus, self.w_minus, self.rho * factor)

    def __repr__(self):
        handles = ", ".join(
            f"({self.w_plus[i]:.4g}, {self.w_minus[i]:.4g}, {self.rho[i]:.4g})"
            for i in range(self.genus)
        )
        return f"SchottkySurface(g={self.genus}, handles=[{handles}])"


def circle_violations(w_plus, w_minus, rho):
    """All label pairs whose circles fail ``|w_a - w_b| > r_a + r_b``."""
    g = len(rho)
    labels = handle_labels(g)
    centre = {a: (w_plus[a - 1] if a > 0 else w_minus[-a - 1]) for a in labels}
    radius = {a: math.sqrt(abs(rho[abs(a) - 1])) for a in labels}
    bad = []
    for a, b in itertools.combinations(labels, 2):
        sep = abs(centre[a] - centre[b])
        rsum = radius[a] + radius[b]
        if not sep > rsum:
            bad.append((a, b, sep, rsum))
    return bad


def validate_surface(w_plus, w_minus=None, rho=None):
    """Check Schottky parameters and return a :class:`SchottkySurface`.

    Accepts either three length-``g`` sequences or a single flat sequence of
    ``3g`` values ordered ``w_1, w_{-1}, rho_1, w_2, ...``.  Complex values may
    be given as ``[re, im]`` pairs.  The principal square root of each
    ``rho_a`` is fixed here and used for every half-integer power downstream.

    Raises
    ------
    SurfaceError
        If any ``rho_a`` vanishes or any pair of circles intersects; the
        exception lists every offending pair.
    """
    if w_minus is None and rho is None:
        flat = [as_complex(v) for v in w_plus]
        if len(flat) % 3 or not flat:
            raise SurfaceError("flat parameter list must have length 3g, g >= 1")
        w_plus, w_minus, rho = flat[0::3], flat[1::3], flat[2::3]
    w_plus = np.array([as_complex(v) for v in w_plus], dtype=complex)
    w_minus = np.array([as_complex(v) for v in w_minus], dtype=complex)
    rho = np.array([as_complex(v) for v in rho], dtype=complex)
    if not (len(w_plus) == len(w_minus) == len(rho)) or len(rho) == 0:
        raise SurfaceError("need equal, non-zero numbers of w_plus, w_minus, rho")
    if not (np.all(np.isfinite(w_plus)) and np.all(np.isfinite(w_minus))):
        raise SurfaceError("circle centres must be finite")
    if np.any(rho == 0) or not np.all(np.isfinite(rho)):
        raise SurfaceError("every rho must be finite and non-zero")
    bad = circle_violations(w_plus, w_minus, rho)
    if bad:
        desc = "; ".join(
            f"C_{a} and C_{b}: |w_a - w_b| = {sep:.6g} <= {rsum:.6g}"
            for a, b, sep, rsum in bad
        )
        raise SurfaceError(f"circles intersect ({desc})", bad)
    sqrt_rho = np.sqrt(rho)
    for arr in (w_plus, w_minus, rho, sqrt_rho):
        arr.setflags(write=False)
    return SchottkySurface(w_plus, w_minus, rho, sqrt_rho)


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b) / (c z + d)``, stored with ``ad - bc = 1``.

    Infinity is represented by ``complex('inf')``; use :func:`is_infinite`.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise ValueError("degenerate Moebius map (zero determinant)")
        s = cmath.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)) / s)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def from_unimodular(cls, m):
        """Wrap a matrix already known to have determinant 1, skipping renormalization.

        Used for long products where recomputing ``ad - bc`` cancels catastrophically.
        """
        m = np.asarray(m, dtype=complex)
        obj = object.__new__(cls)
        for name, val in zip("abcd", m.ravel()):
            object.__setattr__(obj, name, complex(val))
        return obj

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def translation(cls, shift):
        return cls(1, shift, 0, 1)

    @classmethod
    def scaling(cls, factor):
        return cls(factor, 0, 0, 1)

    @classmethod
    def inversion(cls):
        return cls(0, 1, -1, 0)

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self):
        return self.a + self.d

    def __call__(self, z):
        if is_infinite(z):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if den == 0:
            return INF
        return (self.a * z + self.b) / den

    def derivative(self, z):
        return 1.0 / (self.c * z + self.d) ** 2

    def inverse(self):
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        return MoebiusMap.from_unimodular(self.matrix @ other.matrix)

    def multiplier(self):
        """Eigenvalue ratio ``q`` with ``|q| <= 1``."""
        t = self.trace
        s = cmath.sqrt(t * t - 4)
        big = (t + s) / 2 if abs(t + s) >= abs(t - s) else (t - s) / 2
        return 1.0 / (big * big)

    def fixed_points(self):
        """``(attracting, repelling)`` fixed points of a loxodromic map."""
        if self.c == 0:
            # z = inf is fixed; the other is b / (d - a)
            finite = self.b / (self.d - self.a)
            return (INF, finite) if abs(self.a) > abs(self.d) else (finite, INF)
        t = self.trace
        s = cmath.sqrt(t * t - 4)
        p1 = (self.a - self.d + s) / (2 * self.c)
        p2 = (self.a - self.d - s) / (2 * self.c)
        # attracting fixed point has |derivative| < 1
        if abs(self.derivative(p1)) < abs(self.derivative(p2)):
            return p1, p2
        return p2, p1

    def allclose(self, other, tol=1e-12):
        """Entrywise equality up to the overall sign of the SL(2) matrix."""
        m1, m2 = self.matrix, other.matrix
        return min(np.abs(m1 - m2).max(), np.abs(m1 + m2).max()) <= tol


INF = complex("inf")


def is_infinite(z):
    return not cmath.isfinite(z)


def generator(surface, a):
    """Schottky generator ``gamma_a z = w_{-a} + rho_a / (z - w_a)``."""
    if a == 0 or abs(a) > surface.genus:
        raise ValueError(f"label {a} not in +-1..+-{surface.genus}")
    wa, wma, rho = surface.w(a), surface.w(-a), surface.rho_of(a)
    return MoebiusMap(wma, rho - wa * wma, 1.0, -wa)


def catalan_c(x):
    """Catalan series ``c(x) = sum_n binom(2n, n+1) x^n / n``, in closed form.

    Evaluates ``(1 - sqrt(1 - 4x)) / (2x) - 1`` as ``4x / (1 + sqrt(1-4x))^2``
    (no cancellation near ``x = 0``), principal square root.
    """
    x = complex(x)
    if abs(x) >= 0.25:
        warnings.warn(
            f"|x| = {abs(x):.4g} >= 1/4: outside the disc of convergence of the series",
            DivergenceWarning,
            stacklevel=2,
        )
    s = cmath.sqrt(1 - 4 * x)
    return 4 * x / (1 + s) ** 2


def multiplier_and_fixed_points(surface, a):
    """Multiplier ``q_a`` and fixed points ``(W_a, W_{-a})`` of ``gamma_a``.

    ``q_a = c(-rho_a / (w_a - w_{-a})^2)``; ``W_a`` is repelling and
    ``W_{-a}`` attracting.
    """
    if not 1 <= a <= surface.genus:
        raise ValueError("a must be a positive handle label")
    wa, wma = surface.w(a), surface.w(-a)
    q = catalan_c(-surface.rho_of(a) / (wa - wma) ** 2)
    if not abs(q) < 1:
        raise SchottkyError(f"multiplier |q_{a}| = {abs(q)} >= 1 on a validated surface")
    W_a = (wa + q * wma) / (1 + q)
    W_ma = (wma + q * wa) / (1 + q)
    return q, W_a, W_ma


@dataclass(frozen=True)
class GroupWord:
    """Reduced word ``gamma_{a_1} ... gamma_{a_n}`` in the Schottky generators."""

    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise ValueError("letters must be non-zero handle labels")
        for u, v in zip(letters, letters[1:]):
            if u == -v:
                raise ValueError(f"word {letters} is not reduced")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def inverse(self):
        return GroupWord(tuple(-x for x in reversed(self.letters)))

    def is_cyclically_reduced(self):
        return len(self.letters) <= 1 or self.letters[0] != -self.letters[-1]

    def rotations(self):
        n = len(self.letters)
        return [self.letters[i:] + self.letters[:i] for i in range(max(n, 1))]

    def canonical(self):
        """Least cyclic rotation under the letter order ``-1 < 1 < -2 < ...``."""
        return GroupWord(min(self.rotations(), key=lambda w: [letter_key(x) for x in w]))

    def is_primitive(self):
        """False when the word is a proper power of a shorter word."""
        n = len(self.letters)
        for d in range(1, n):
            if n % d == 0 and self.letters == self.letters[:d] * (n // d):
                return False
        return n > 0

    def power(self, m):
        return GroupWord(self.letters * m)

    def moebius(self, surface):
        """The Moebius map ``gamma_{a_1} o ... o gamma_{a_n}``."""
        out = np.eye(2, dtype=complex)
        for x in self.letters:
            out = out @ generator(surface, x).matrix
        return MoebiusMap.from_unimodular(out)


def _genus(surface_or_genus):
    return getattr(surface_or_genus, "genus", surface_or_genus)


def _sorted_letters(g):
    return sorted(handle_labels(g), key=letter_key)


def reduced_words(surface, n):
    """Yield all ``2g (2g-1)^{n-1}`` reduced words of length `n` in letter order.

    `surface` may be a :class:`SchottkySurface` or a genus.
    """
    g = _genus(surface)
    letters = _sorted_letters(g)
    if n < 0:
        raise ValueError("word length must be non-negative")

    def grow(prefix):
        if len(prefix) == n:
            yield GroupWord(tuple(prefix))
            return
        for x in letters:
            if prefix and x == -prefix[-1]:
                continue
            prefix.append(x)
            yield from grow(prefix)
            prefix.pop()

    yield from grow([])


def cyclically_reduced_words(surface, n):
    for word in reduced_words(surface, n):
        if word.is_cyclically_reduced():
            yield word


def primitive_class_reps(surface, max_length):
    """One representative per primitive conjugacy class, word length <= `max_length`.

    Conjugacy classes of non-identity elements correspond to cyclic-rotation
    orbits of cyclically reduced words; the representative is the least
    rotation (:meth:`GroupWord.canonical`).  Yielded by length, then in
    letter order.
    """
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    for n in range(1, max_length + 1):
        for word in cyclically_reduced_words(surface, n):
            if word.is_primitive() and word.canonical() == word:
                yield word


def transform_surface(surface, sigma):
    """Parameters of the conjugated group ``sigma gamma_a sigma^{-1}``.

    For a normalized conjugate ``[[A, B], [C, D]]`` the new parameters are
    ``w'_{-a} = A/C``, ``w'_a = -D/C`` and ``rho'_a = -1/C^2``.

    Raises
    ------
    SchottkyError
        If some conjugated generator fixes infinity (``C = 0``).
    SurfaceError
        If the new parameters violate the disjoint-circle condition.
    """
    w_plus, w_minus, rho = [], [], []
    sigma_inv = sigma.inverse()
    for a in range(1, surface.genus + 1):
        conj = sigma @ generator(surface, a) @ sigma_inv
        if abs(conj.c) < 1e-300:
            raise SchottkyError(f"conjugated generator {a} fixes infinity")
        w_minus.append(conj.a / conj.c)
        w_plus.append(-conj.d / conj.c)
        rho.append(-1.0 / conj.c**2)
    return validate_surface(w_plus, w_minus, rho)
