"""Cross-route invariant checks, grouped by acceptance criterion.

Each ``check_*`` function returns a list of :class:`Check` records holding the
observed error and its threshold; nothing is asserted here, so the same code
drives the CLI ``verify`` command and the acceptance tests.
"""

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import SurfaceError
from .correlators import (
    InsertionSet,
    fermion_generating,
    generating_rank1,
    generating_rank2,
)
from .forms import (
    alpha_cycle,
    contour_integral,
    log_prime_form,
    nu,
    omega,
    omega_poincare,
    omega_third_kind,
    period_matrix,
    symmetry_residual,
)
from .mmt import mmt_identity_check, permanent
from .moments import (
    MomentSystem,
    auto_moment_system,
    d_matrix,
    lambda_mu,
)
from .partition import (
    fock_oracle,
    montonen_zograf,
    multiplier_product,
    partition_charged,
)
from .schottky import (
    MoebiusMap,
    cyclically_reduced_words,
    generator,
    multiplier_and_fixed_points,
    transform_surface,
    validate_surface,
)


@dataclass(frozen=True)
class Check:
    criterion: str
    name: str
    error: float
    threshold: float

    @property
    def passed(self):
        return bool(np.isfinite(self.error) and self.error <= self.threshold)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.criterion}] {self.name}: error={self.error:.3e} threshold={self.threshold:.1e}"

    def as_dict(self):
        return {
            "criterion": self.criterion,
            "name": self.name,
            "error": self.error,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def rel_err(value, reference):
    value, reference = complex(value), complex(reference)
    scale = abs(reference) if reference != 0 else 1.0
    return abs(value - reference) / scale


def _max(errors):
    """Largest error; NaN if any error is NaN (plain ``max`` would drop it)."""
    errors = np.asarray(list(errors), dtype=float)
    return float(np.max(errors)) if errors.size else 0.0


# -- random inputs ---------------------------------------------------------------


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _scaled_to_norm(M, norm):
    M = np.atleast_1d(M)
    size = np.linalg.norm(M, 2) if M.ndim == 2 else np.linalg.norm(M)
    return M * (norm / size)


def sample_domain_points(surface, rng, count, margin=2.5, pad=1.5):
    """Points of the fundamental domain at least ``margin`` radii from every circle."""
    centres = surface.centres()
    radii = surface.radii()
    lo_re, hi_re = centres.real.min() - pad, centres.real.max() + pad
    lo_im, hi_im = centres.imag.min() - pad, centres.imag.max() + pad
    out = []
    while len(out) < count:
        z = complex(rng.uniform(lo_re, hi_re), rng.uniform(lo_im, hi_im))
        if np.all(np.abs(z - centres) > margin * radii) and all(
            abs(z - p) > 0.2 for p in out
        ):
            out.append(z)
    return np.array(out)


def random_surface_map(surface, rng, attempts=500):
    """A seeded random Moebius map ``sigma`` for which the conjugated group is admissible.

    ``sigma z = s / (z - p) + t`` with a pole ``p`` drawn well outside all circles.
    """
    centres = surface.centres()
    radii = surface.radii()
    span = float(np.max(np.abs(centres - centres.mean()))) + 1.0
    for _ in range(attempts):
        p = centres.mean() + span * (1.0 + rng.uniform(0, 1.5)) * cmath.exp(
            2j * math.pi * rng.uniform()
        )
        if np.any(np.abs(p - centres) < 3 * radii):
            continue
        s = cmath.rect(rng.uniform(0.5, 4.0), 2 * math.pi * rng.uniform())
        t = complex(*rng.uniform(-2, 2, 2))
        sigma = MoebiusMap(t, s - t * p, 1.0, -p)
        try:
            new = transform_surface(surface, sigma)
        except (SurfaceError, ArithmeticError, ValueError):
            continue
        return sigma, new
    raise RuntimeError("no admissible random conjugation found")


# -- criterion 1 -------------------------------------------------------------------


def mmt_instance(rng, variant, norm=0.3):
    n = int(rng.integers(1, 4))
    kwargs = {}
    A = _scaled_to_norm(_random_complex(rng, (n, n)), norm)
    if variant in ("submatrix", "general"):
        m = int(rng.integers(1, 4))
        kwargs["B"] = _scaled_to_norm(_random_complex(rng, (m, m)), norm)
        kwargs["U"] = _scaled_to_norm(_random_complex(rng, (m, n)), norm)
        kwargs["V"] = _scaled_to_norm(_random_complex(rng, (n, m)), norm)
    if variant in ("pperm", "general"):
        kwargs["theta"] = _scaled_to_norm(_random_complex(rng, n), norm)
        kwargs["phi"] = _scaled_to_norm(_random_complex(rng, n), norm)
    if variant == "general":
        m = kwargs["B"].shape[0]
        kwargs["theta_prime"] = _scaled_to_norm(_random_complex(rng, m), norm)
        kwargs["phi_prime"] = _scaled_to_norm(_random_complex(rng, m), norm)
    return A, kwargs


def check_mmt(seed=0, instances=20, max_size=8, norm=0.3, threshold=1e-6):
    """MMT identities on random instances with ``||A||_2 = norm`` (worst case of ``<= norm``)."""
    rng = np.random.default_rng(seed)
    checks = []
    for variant in ("basic", "submatrix", "pperm", "general"):
        errs = []
        for _ in range(instances):
            A, kwargs = mmt_instance(rng, variant, norm)
            lhs, rhs = mmt_identity_check(A, variant, max_size, **kwargs)
            errs.append(rel_err(lhs, rhs))
        checks.append(
            Check("C1", f"MMT {variant} ({instances} instances, size {max_size})", _max(errs), threshold)
        )
    return checks


# -- criterion 2 -------------------------------------------------------------------


def with_rho_magnitude(surface, magnitude):
    """Same centres, every ``rho_a`` rescaled to modulus `magnitude` (phase kept)."""
    rho = [magnitude * r / abs(r) for r in surface.rho]
    return validate_surface(list(surface.w_plus), list(surface.w_minus), rho)


def _three_routes(surface, tag, threshold, word_length, power, fock_weight, K, tol):
    det = auto_moment_system(surface, K, tol).det
    mz = montonen_zograf(surface, power, word_length)
    fock = 1.0 / fock_oracle(surface, fock_weight)
    return [
        Check("C2", f"{tag}det vs Montonen-Zograf", rel_err(mz, det), threshold),
        Check("C2", f"{tag}det vs Fock", rel_err(fock, det), threshold),
        Check("C2", f"{tag}Montonen-Zograf vs Fock", rel_err(fock, mz), threshold),
    ]


def check_determinant_routes(
    surface,
    threshold,
    word_length=6,
    power=40,
    fock_weight=6,
    fock_rho=None,
    K=8,
    tol=1e-12,
    tag="",
):
    """Determinant, product formula and Fock sum pairwise.

    With `fock_rho` set, the three-way comparison runs on the surface with
    ``|rho_a| = fock_rho``, and the determinant/product comparison is repeated
    on the original surface.
    """
    checks = []
    tag = f"{tag} " if tag else ""
    if fock_rho is None:
        return _three_routes(surface, tag, threshold, word_length, power, fock_weight, K, tol)
    det = auto_moment_system(surface, K, tol).det
    mz = montonen_zograf(surface, power, word_length)
    checks.append(Check("C2", f"{tag}det vs Montonen-Zograf", rel_err(mz, det), threshold))
    small = with_rho_magnitude(surface, fock_rho)
    checks += _three_routes(
        small, f"{tag}|rho|={fock_rho:g} ", threshold, word_length, power, fock_weight, K, tol
    )
    return checks


# -- criterion 3 -------------------------------------------------------------------


def check_genus1(surface, K=8, tol=1e-12, power=60):
    if surface.genus != 1:
        return []
    q_cat, _, _ = multiplier_and_fixed_points(surface, 1)
    q_eig = generator(surface, 1).multiplier()
    system = auto_moment_system(surface, K, tol)
    product = multiplier_product([q_cat, q_cat], power)
    Omega = period_matrix(system)
    return [
        Check("C3", "Catalan multiplier vs eigenvalue ratio", rel_err(q_cat, q_eig), 1e-10),
        Check("C3", "det(I-A) vs prod (1-q^k)^2", rel_err(system.det, product), 1e-8),
        Check("C3", "exp(2 pi i Omega_11) vs q", rel_err(cmath.exp(2j * math.pi * Omega[0, 0]), q_cat), 1e-8),
    ]


# -- criterion 4 -------------------------------------------------------------------


def check_surface_forms(system, rng, pairs=50, poincare_length=8, nodes=256):
    s = system.surface
    g = s.genus
    pts = sample_domain_points(s, rng, 2 * pairs)
    x, y = pts[:pairs], pts[pairs:]
    w_xy = omega(system, x, y)
    w_yx = omega(system, y, x)
    sym = _max(np.abs(w_xy - w_yx) / np.abs(w_xy))
    poinc = omega_poincare(system, x, y, poincare_length)
    sew = _max(np.abs(w_xy - poinc) / np.abs(poinc))

    alpha_errs = []
    for a in range(1, g + 1):
        centre, radius, cw = alpha_cycle(s, a)
        for b in range(1, g + 1):
            val = contour_integral(lambda z: nu(system, b, z), centre, radius, nodes, cw)
            alpha_errs.append(abs(val - 2j * math.pi * (a == b)))
    Omega = period_matrix(system)

    h = 1e-4
    pf = []
    for xi, yi in zip(x, y):
        f = lambda u, v: log_prime_form(system, u, v)
        d2 = (f(xi + h, yi + h) - f(xi + h, yi - h) - f(xi - h, yi + h) + f(xi - h, yi - h)) / (4 * h * h)
        pf.append(rel_err(d2, omega(system, xi, yi)))

    res = []
    for p, q, xx in zip(x[:10], y[:10], pts[::-1][:10]):
        r = 0.25 * min(abs(p - q), np.min(np.abs(np.array([p, q])[:, None] - s.centres()) - s.radii()))
        r = min(r, 0.1)
        for pole, sign in ((p, 1), (q, -1)):
            val = contour_integral(lambda z: omega_third_kind(system, p, q, z), pole, r, 128)
            res.append(abs(val / (2j * math.pi) - sign))
    return [
        Check("C4", f"omega symmetry ({pairs} pairs)", sym, 1e-10),
        Check("C4", f"omega sewing vs Poincare (length {poincare_length})", sew, 1e-6),
        Check("C4", f"alpha-period normalization ({nodes} nodes)", _max(alpha_errs), 1e-8),
        Check("C4", "period matrix symmetry", symmetry_residual(Omega), 1e-9),
        Check("C4", "prime form d_x d_y log K = omega", _max(pf), 1e-5),
        Check("C4", "third-kind residues +-1", _max(res), 1e-8),
    ]


# -- criterion 5 -------------------------------------------------------------------


def random_admissible_pair(rng, scale=0.3):
    """Two contracting Moebius maps near the origin with all compositions admissible."""
    while True:
        mats = []
        for _ in range(2):
            a = cmath.rect(rng.uniform(0.2, 0.6), 2 * math.pi * rng.uniform())
            b = scale * complex(*rng.uniform(-1, 1, 2))
            c = scale * complex(*rng.uniform(-1, 1, 2))
            mats.append(MoebiusMap(a, b, c, 1.0))
        g1, g2 = mats
        if abs(g1.d) > 1e-3 and abs(g2.d) > 1e-3 and abs((g1 @ g2).d) > 1e-3:
            return g1, g2


def check_appendix(surface, rng, K=20, pairs=10, drep_K=80, max_n=3):
    system = MomentSystem(surface, K)
    block_errs = []
    for a in system.labels:
        for b in system.labels:
            if a == -b:
                continue
            lam_b, _ = lambda_mu(surface, b)
            _, mu_a = lambda_mu(surface, a)
            D = d_matrix(mu_a @ lam_b.inverse(), K)
            block_errs.append(np.max(np.abs(system.block(a, b) - D)))
    err = _max(block_errs)
    half = drep_K // 2
    comps = []
    for _ in range(pairs):
        g1, g2 = random_admissible_pair(rng)
        prod = d_matrix(g1, drep_K) @ d_matrix(g2, drep_K)
        direct = d_matrix(g1 @ g2, drep_K)
        comps.append(np.max(np.abs(prod[:half, :half] - direct[:half, :half])))
    big = MomentSystem(surface, drep_K)
    trace_errs = []
    for n in range(1, max_n + 1):
        lhs = np.trace(np.linalg.matrix_power(big.A, n))
        rhs = 0j
        for word in cyclically_reduced_words(surface, n):
            lam, _ = lambda_mu(surface, -word.letters[0])
            conj = lam @ word.moebius(surface) @ lam.inverse()
            rhs += np.trace(d_matrix(conj, drep_K))
        trace_errs.append(rel_err(rhs, lhs))
    return [
        Check("C5", f"A_ab = D(mu_a lambda_b^-1) (K={K})", err, 1e-10),
        Check("C5", f"D(g1) D(g2) = D(g1 g2) top-left {half} block", _max(comps), 1e-9),
        Check("C5", f"Tr A^n = sum_CR Tr D, n<={max_n}", _max(trace_errs), 1e-8),
    ]


# -- criterion 6 -------------------------------------------------------------------


def check_generating(system, rng, fermion_system=None, lattice_cutoff=2):
    s = system.surface
    g = s.genus
    alpha = 0.4 * (rng.uniform(-1, 1, (g, 2)) + 1j * rng.uniform(-0.3, 0.3, (g, 2)))
    pts = sample_domain_points(s, rng, 9)
    yp, ym, z, bases = pts[:2], pts[2:4], pts[4:7], pts[7:9]
    beta = 0.4 * rng.uniform(-1, 1, (3, 2))
    beta[-1] = -beta[:-1].sum(axis=0)

    plain = generating_rank2(system, InsertionSet(), alpha)
    e1 = rel_err(plain, partition_charged(system, alpha))
    om = omega(system, yp[:, None], ym[None, :])
    e2 = rel_err(
        generating_rank2(system, InsertionSet(yp, ym), np.zeros((g, 2))),
        permanent(om) / system.det,
    )
    v0 = generating_rank2(system, InsertionSet(yp, ym, z, beta, bases[0]), alpha)
    v1 = generating_rank2(system, InsertionSet(yp, ym, z, beta, bases[1]), alpha)
    checks = [
        Check("C6", "generating_rank2 (m=n=0) vs partition_charged", e1, 1e-9),
        Check("C6", "generating_rank2 (alpha=beta=0) vs perm omega / det", e2, 1e-9),
        Check("C6", "generating_rank2 z0-independence", rel_err(v1, v0), 1e-9),
    ]
    fsys = fermion_system or system
    fs = fsys.surface
    fp = sample_domain_points(fs, rng, 4)
    x, y = list(fp[:2]), list(fp[2:])
    shift = rng.uniform(-0.5, 0.5, fs.genus)
    direct = fermion_generating(fsys, x, y, shift, theta_cutoff=lattice_cutoff)
    grid = np.array(np.meshgrid(*[np.arange(-lattice_cutoff, lattice_cutoff + 1)] * fs.genus)).reshape(fs.genus, -1).T
    total = 0j
    for m in grid:
        ins = InsertionSet(z=x + y, beta=np.array([1, 1, -1, -1]), z0=complex(fp[0]) + 0.3)
        total += generating_rank1(fsys, ins, m + shift)
    checks.append(
        Check("C6", f"fermion_generating vs charge-lattice sum (|m|<={lattice_cutoff}, g={fs.genus})", rel_err(direct, total), 1e-6)
    )
    return checks


# -- criterion 7 -------------------------------------------------------------------


def check_moebius(surface, rng, count=3, K=8, tol=1e-12, threshold=1e-6):
    base = auto_moment_system(surface, K, tol).det
    errs = []
    for _ in range(count):
        _, new = random_surface_map(surface, rng)
        errs.append(rel_err(auto_moment_system(new, K, tol).det, base))
    return [Check("C7", f"det(I-A) under {count} random conjugations", _max(errs), threshold)]


# -- driver ------------------------------------------------------------------------


def run_suite(surface, seed=0, K=8, tol=1e-12, word_length=6, power=40, fock_weight=6, include_mmt=True):
    """All surface-dependent checks (criteria 2-7) plus the MMT suite (criterion 1)."""
    rng = np.random.default_rng(seed)
    system = auto_moment_system(surface, K, tol)
    checks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if include_mmt:
            checks += check_mmt(seed)
        threshold = 1e-6 if surface.genus == 1 else 1e-5
        fock_rho = None if surface.genus == 1 else 1e-3
        checks += check_determinant_routes(
            surface, threshold, word_length, power, fock_weight, fock_rho, K, tol
        )
        checks += check_genus1(surface, K, tol)
        checks += check_surface_forms(system, rng)
        checks += check_appendix(surface, rng)
        checks += check_generating(system, rng)
        checks += check_moebius(surface, rng, K=K, tol=tol)
    return checks
