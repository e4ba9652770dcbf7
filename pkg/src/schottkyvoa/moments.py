"""Truncated moment matrices of the sewing construction.

Rows and columns are indexed by pairs ``(a, k)`` with ``a`` a handle label in
the order ``-1, 1, -2, 2, ...`` and ``k = 1..K`` running fastest.  The entry

    A_ab(k, l) = (-1)^k (k+l-1)! / (sqrt(kl) (k-1)! (l-1)!)
                 * rho_a^{k/2} rho_b^{l/2} / (w_{-a} - w_b)^{k+l}

vanishes for ``a = -b``.  Half-integer powers always use the surface's fixed
``sqrt_rho``.  Form-valued vectors (``L``, ``R``, ``d``) are plain arrays of
coefficients in the global coordinate; the ``dx`` factors are implicit.
"""

import math
import warnings

import numpy as np
import scipy.linalg

from ._validation import (
    ConvergenceError,
    DomainWarning,
    FactorizationError,
    PoleError,
    check_positive,
)
from .schottky import MoebiusMap, handle_labels

K_MAX = 200


def log_moment_coefficients(K):
    """``log[(k+l-1)! / ((k-1)! (l-1)! sqrt(kl))]`` for ``k, l = 1..K``.

    Built by the multiplicative recurrence
    ``C(k, l+1) = C(k, l) (k+l) / l`` with ``C(k, 1) = k``, in log space.
    """
    k = np.arange(1, K + 1, dtype=float)
    steps = np.log((k[:, None] + k[None, :-1]) / k[None, :-1])  # (k+l)/l, l=1..K-1
    logc = np.empty((K, K))
    logc[:, 0] = np.log(k)
    if K > 1:
        logc[:, 1:] = np.log(k)[:, None] + np.cumsum(steps, axis=1)
    return logc - 0.5 * np.log(k[:, None] * k[None, :])


def moment_matrix(surface, K):
    """The ``2gK x 2gK`` matrix ``A`` in canonical index order."""
    labels = handle_labels(surface.genus)
    n = len(labels)
    kk = np.arange(1, K + 1)
    logc = log_moment_coefficients(K)
    sign = np.where(kk % 2, -1.0, 1.0)[:, None]
    A = np.zeros((n * K, n * K), dtype=complex)
    for i, a in enumerate(labels):
        log_sa = np.log(surface.sqrt_rho_of(a))
        for j, b in enumerate(labels):
            if a == -b:
                continue
            log_delta = np.log(surface.w(-a) - surface.w(b))
            u = kk * (log_sa - log_delta)
            v = kk * (np.log(surface.sqrt_rho_of(b)) - log_delta)
            block = sign * np.exp(logc + u[:, None] + v[None, :])
            A[i * K:(i + 1) * K, j * K:(j + 1) * K] = block
    return A


class MomentSystem:
    """Moment matrix ``A`` at truncation `K` with a cached factorization of ``I - A``.

    Parameters
    ----------
    surface : SchottkySurface
    K : int
        Largest mode index kept, ``1 <= K <= 200``.

    Attributes
    ----------
    A : ndarray, shape (2gK, 2gK)
    det : complex
        ``det(I - A)``.
    """

    def __init__(self, surface, K):
        K = int(K)
        if not 1 <= K <= K_MAX:
            raise ValueError(f"K must lie in 1..{K_MAX}, got {K}")
        self.surface = surface
        self.K = K
        self.tol_achieved = None
        self.labels = handle_labels(surface.genus)
        self.A = moment_matrix(surface, K)
        self.A.setflags(write=False)
        n = self.A.shape[0]
        with np.errstate(all="raise"):
            try:
                self._lu = scipy.linalg.lu_factor(np.eye(n) - self.A)
            except (FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
                raise FactorizationError(f"cannot factorize I - A: {exc}") from exc
        diag = np.diag(self._lu[0])
        if np.any(diag == 0):
            raise FactorizationError("I - A is singular")
        swaps = np.count_nonzero(self._lu[1] != np.arange(n))
        self.logdet = complex(np.sum(np.log(diag.astype(complex)))) + (
            1j * math.pi if swaps % 2 else 0.0
        )
        self.det = complex(np.exp(self.logdet))

    @property
    def size(self):
        return self.A.shape[0]

    def index(self, a, k):
        """Flat position of ``(a, k)``."""
        return self.labels.index(a) * self.K + (k - 1)

    def block(self, a, b):
        i, j = self.labels.index(a), self.labels.index(b)
        K = self.K
        return self.A[i * K:(i + 1) * K, j * K:(j + 1) * K]

    def solve(self, v):
        """``(I - A)^{-1} v`` for a column vector (or matrix of columns)."""
        return scipy.linalg.lu_solve(self._lu, v)

    def solve_left(self, v):
        """``v (I - A)^{-1}`` for a row vector (or rows)."""
        v = np.asarray(v)
        if v.ndim == 1:
            return scipy.linalg.lu_solve(self._lu, v, trans=1)
        return scipy.linalg.lu_solve(self._lu, v.T, trans=1).T

    def bilinear(self, left, right):
        """``left (I - A)^{-1} right`` with broadcasting over leading axes.

        `left` has shape ``(..., N)`` and `right` shape ``(..., N)``; the
        result pairs them elementwise over the leading axes.
        """
        left = np.asarray(left)
        right = np.asarray(right)
        flat = right.reshape(-1, self.size).T
        solved = self.solve(flat).T.reshape(right.shape)
        return np.sum(left * solved, axis=-1)

    def __repr__(self):
        return f"MomentSystem(g={self.surface.genus}, K={self.K}, det={self.det:.12g})"


def build_moment_system(surface, K):
    return MomentSystem(surface, K)


def resolvent_apply(system, v, side="left"):
    """Apply ``(I - A)^{-1}``: ``side="left"`` gives ``(I-A)^{-1} v``, ``"right"`` gives ``v (I-A)^{-1}``."""
    v = np.asarray(v, dtype=complex)
    if side == "left":
        return system.solve(v)
    if side == "right":
        return system.solve_left(v)
    raise ValueError("side must be 'left' or 'right'")


def _escalation_schedule(K0):
    K = max(1, int(K0))
    while K < K_MAX:
        yield K
        K *= 2
    yield K_MAX


def det_I_minus_A(surface, K=8, tol=1e-12):
    """``det(I - A)`` with the truncation doubled until it settles.

    Returns
    -------
    (complex, int)
        The value and the truncation ``K_used`` at which two successive
        values first differ by less than `tol` relative.
    """
    system = auto_moment_system(surface, K, tol)
    return system.det, system.K


def auto_moment_system(surface, K=8, tol=1e-12):
    """:class:`MomentSystem` at the first truncation where ``det`` has settled.

    The returned system carries ``tol_achieved``, the relative change of
    ``det`` over the last doubling.
    """
    check_positive(tol, "tol")
    prev = None
    for K_try in _escalation_schedule(K):
        system = MomentSystem(surface, K_try)
        if system.det == 0:
            raise FactorizationError("det(I - A) vanished")
        if prev is not None:
            change = abs(system.det - prev.det) / abs(system.det)
            if change < tol:
                system.tol_achieved = change
                return system
        prev = system
    raise ConvergenceError(
        f"det(I - A) did not settle to tol={tol} by K={K_MAX}",
        (prev.det, system.det),
    )


def _check_points(surface, x):
    x = np.asarray(x, dtype=complex)
    centres = surface.centres()
    dist = np.abs(x[..., None] - centres)
    if np.any(dist == 0):
        raise PoleError("evaluation point coincides with a circle centre")
    if np.any(dist < surface.radii()):
        warnings.warn(
            "evaluation point lies inside a sewing circle", DomainWarning, stacklevel=3
        )
    return x


def _power_table(surface, x, K, centre_of, scale_power):
    """Entries ``sqrt_rho_a^k (x - centre_of(a))^{-(k + scale_power)}`` for all (a, k)."""
    x = _check_points(surface, x)
    labels = handle_labels(surface.genus)
    kk = np.arange(1, K + 1)
    out = np.empty(x.shape + (len(labels) * K,), dtype=complex)
    for i, a in enumerate(labels):
        diff = x[..., None] - centre_of(a)
        ratio = surface.sqrt_rho_of(a) / diff
        out[..., i * K:(i + 1) * K] = ratio ** kk / diff**scale_power
    return out


def L_vector(system, x):
    """Components ``sqrt(k) rho_a^{k/2} / (x - w_a)^{k+1}``; broadcasts over `x`."""
    s = system.surface
    root = np.tile(np.sqrt(np.arange(1, system.K + 1)), 2 * s.genus)
    return root * _power_table(s, x, system.K, s.w, 1)


def R_vector(system, y):
    """Components ``L_{-a}(k, y) = sqrt(k) rho_a^{k/2} / (y - w_{-a})^{k+1}``."""
    s = system.surface
    root = np.tile(np.sqrt(np.arange(1, system.K + 1)), 2 * s.genus)
    return root * _power_table(s, y, system.K, lambda a: s.w(-a), 1)


def antiderivative_vectors(system, x, kind="L"):
    """Termwise antiderivatives of ``L`` (``kind="L"``) or ``R`` (``kind="R"``).

    Component ``(a, k)`` is ``-(rho_a^{k/2} / sqrt k) (x - c_a)^{-k}`` with
    ``c_a = w_a`` for ``L`` and ``w_{-a}`` for ``R``; vanishes as ``x -> inf``.
    """
    s = system.surface
    if kind == "L":
        centre = s.w
    elif kind == "R":
        centre = lambda a: s.w(-a)  # noqa: E731
    else:
        raise ValueError("kind must be 'L' or 'R'")
    inv_root = np.tile(1.0 / np.sqrt(np.arange(1, system.K + 1)), 2 * s.genus)
    return -inv_root * _power_table(s, x, system.K, centre, 0)


def d_vectors(system, b):
    """Moment vectors ``(d_b, dbar_b)`` of the genus-zero form ``dx/(x-w_b) - dx/(x-w_{-b})``.

    ``dbar_b`` at ``(a, k)`` is ``d_b`` at ``(-a, k)``.
    """
    s = system.surface
    if not 1 <= b <= s.genus:
        raise ValueError("b must be a positive handle label")
    K = system.K
    kk = np.arange(1, K + 1)
    d = np.empty(system.size, dtype=complex)
    for i, a in enumerate(system.labels):
        wa = s.w(a)
        pref = s.sqrt_rho_of(a) ** kk / np.sqrt(kk)
        if abs(a) != b:
            vals = pref * ((s.w(-b) - wa) ** (-kk) - (s.w(b) - wa) ** (-kk))
        else:
            sgn = 1 if a > 0 else -1
            vals = sgn * pref * (s.w(-b * sgn) - wa) ** (-kk)
        d[i * K:(i + 1) * K] = vals
    swap = np.concatenate(
        [np.arange(K) + system.labels.index(-a) * K for a in system.labels]
    )
    return d, d[swap]


def lambda_mu(surface, a):
    """The maps ``lambda_a z = (z - w_a) / rho_a^{1/2}`` and ``mu_a z = rho_a^{1/2} / (z - w_{-a})``.

    They satisfy ``lambda_a^{-1} mu_a = gamma_{-a}`` for the generators of
    :func:`schottky.generator`.
    """
    s = surface.sqrt_rho_of(a)
    lam = np.array([[1 / s, 0], [0, 1]]) @ np.array([[1, -surface.w(a)], [0, 1]])
    mu = np.array([[s, 0], [0, 1]]) @ np.array([[0, 1], [1, -surface.w(-a)]])
    return MoebiusMap.from_matrix(lam), MoebiusMap.from_matrix(mu)


def d_matrix(gamma, K):
    """``D_kl(gamma) = sqrt(l/k) [y^l] (gamma y)^k`` for ``k, l = 1..K``.

    Taylor coefficients of ``gamma y`` at ``y = 0`` are raised to successive
    powers by truncated series multiplication.  Zero when ``gamma(0) = inf``.
    """
    if not 1 <= K <= K_MAX:
        raise ValueError(f"K must lie in 1..{K_MAX}")
    a, b, c, d = gamma.a, gamma.b, gamma.c, gamma.d
    D = np.zeros((K, K), dtype=complex)
    if d == 0:
        return D
    series = np.empty(K + 1, dtype=complex)
    series[0] = b / d
    if K:
        ratio = -c / d
        series[1:] = (a * d - b * c) / d**2 * ratio ** np.arange(K)
    power = np.zeros(K + 1, dtype=complex)
    power[0] = 1.0
    ll = np.arange(1, K + 1)
    for k in range(1, K + 1):
        power = np.convolve(power, series)[: K + 1]
        D[k - 1] = np.sqrt(ll / k) * power[1:]
    return D


def dump_system(system, path):
    """Write ``det`` and ``A`` as little-endian float64 pairs after a 16-byte header.

    Header: 8-byte magic ``b"SCHTKYA\\0"``, then ``g`` and ``K`` as
    little-endian uint32.  Body: ``det`` (one complex pair), then ``A``
    row-major.
    """
    header = b"SCHTKYA\0" + np.array(
        [system.surface.genus, system.K], dtype="<u4"
    ).tobytes()
    body = np.concatenate([[system.det], system.A.ravel()]).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + body)


def load_dump(path):
    """Inverse of :func:`dump_system`; returns ``(g, K, det, A)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != b"SCHTKYA\0":
        raise ValueError("not a moment-system dump")
    g, K = np.frombuffer(raw[8:16], dtype="<u4")
    data = np.frombuffer(raw[16:], dtype="<c16")
    n = 2 * int(g) * int(K)
    if data.size != 1 + n * n:
        raise ValueError("truncated moment-system dump")
    return int(g), int(K), complex(data[0]), data[1:].reshape(n, n).copy()
