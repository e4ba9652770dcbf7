import cmath
import math
import warnings

import numpy as np
import pytest

from schottkyvoa._validation import (
    BranchWarning,
    ConvergenceError,
    DimensionError,
    DivergenceWarning,
    DomainError,
)
from schottkyvoa.forms import period_matrix
from schottkyvoa.moments import auto_moment_system
from schottkyvoa.partition import (
    charge_dot,
    charged_exponent,
    fock_oracle,
    lattice_partition,
    lattice_theta,
    light_cone,
    montonen_zograf,
    multiplier_product,
    partition_charged,
    partition_rank1,
    partition_rank2,
    riemann_theta,
)
from schottkyvoa.schottky import multiplier_and_fixed_points, validate_surface
from schottkyvoa.verify import rel_err, with_rho_magnitude

from conftest import tiny_rho

pytestmark = pytest.mark.filterwarnings("ignore::schottkyvoa._validation.BranchWarning")


def _eta_like(q, power, kmax=60):
    return np.prod([(1 - q**k) for k in range(1, kmax + 1)]) ** power


def test_small_rho_limits(genus2):
    s = tiny_rho(genus2)
    assert partition_rank2(s) == pytest.approx(1.0, abs=1e-8)
    assert partition_rank1(s) == pytest.approx(1.0, abs=1e-8)
    assert montonen_zograf(s, 10, 3) == pytest.approx(1.0, abs=1e-8)
    assert fock_oracle(s, 3) == pytest.approx(1.0, abs=1e-8)


def test_genus1_products(genus1):
    q, _, _ = multiplier_and_fixed_points(genus1, 1)
    assert rel_err(partition_rank2(genus1), 1 / _eta_like(q, 2)) <= 1e-8
    assert rel_err(partition_rank1(genus1), 1 / _eta_like(q, 1)) <= 1e-8
    assert rel_err(montonen_zograf(genus1, 60, 3), _eta_like(q, 2)) <= 1e-12


def test_rank1_squared_is_rank2(sys2):
    assert partition_rank1(sys2) ** 2 == pytest.approx(partition_rank2(sys2), rel=1e-14)


def test_montonen_zograf_genus2(genus2, sys2):
    assert rel_err(montonen_zograf(genus2, 40, 6), sys2.det) <= 1e-6


def test_multiplier_product():
    assert multiplier_product([], 5) == 1
    assert multiplier_product([0.5], 2) == pytest.approx(0.5 * 0.75)


def test_fock_weight_zero_and_bounds(genus1):
    assert fock_oracle(genus1, 0) == 1
    with pytest.raises(ValueError):
        fock_oracle(genus1, 9)


@pytest.mark.parametrize("name", ["genus1", "genus2"])
def test_fock_matches_determinant_at_small_rho(name, request):
    small = with_rho_magnitude(request.getfixturevalue(name), 1e-3)
    assert rel_err(fock_oracle(small, 6), partition_rank2(small)) <= 1e-8


def test_fock_low_weight_reproduces_rho_series():
    # the weight <= 2 sum misses only O(rho^3) terms of 1/det
    errs = []
    for rho in (1e-2, 5e-3):
        s = validate_surface([1.0], [-1.0], [rho])
        errs.append(abs(fock_oracle(s, 2) - partition_rank2(s)))
    assert errs[0] / errs[1] == pytest.approx(8.0, rel=0.05)


# -- charges -----------------------------------------------------------------------


def test_charge_helpers():
    a, b = np.array([1.0, 2.0]), np.array([0.5, -1.0])
    assert charge_dot(a, b) == pytest.approx(0.5 - 2.0)
    ap, am = light_cone(a)
    bp, bm = light_cone(b)
    assert ap * bm + am * bp == pytest.approx(charge_dot(a, b))


def test_charged_exponent_is_symmetric_in_handles(sys2, rng):
    Omega = period_matrix(sys2)
    alpha = rng.standard_normal((2, 2))
    assert charged_exponent(Omega, alpha) == pytest.approx(charged_exponent(Omega.T, alpha), rel=1e-12)


def test_zero_charge_is_uncharged(sys2):
    assert partition_charged(sys2, np.zeros((2, 2))) == pytest.approx(partition_rank2(sys2), rel=1e-15)


def test_charged_genus1_ratio(sys1):
    a1 = 0.7
    ratio = partition_charged(sys1, [a1]) / partition_rank2(sys1)
    Omega = period_matrix(sys1)
    assert ratio == pytest.approx(cmath.exp(1j * math.pi * a1**2 * Omega[0, 0]), rel=1e-12)
    q, _, _ = multiplier_and_fixed_points(sys1.surface, 1)
    assert ratio == pytest.approx(cmath.exp(a1**2 / 2 * cmath.log(q)), rel=1e-8)


@pytest.mark.parametrize("fixture", ["sys1", "sys2"])
def test_charged_two_routes(fixture, request, rng):
    system = request.getfixturevalue(fixture)
    alpha = rng.uniform(-1, 1, (system.surface.genus, 2)) + 0.2j * rng.uniform(-1, 1, (system.surface.genus, 2))
    assert rel_err(
        partition_charged(system, alpha, route="phi"), partition_charged(system, alpha)
    ) <= 1e-8


def test_charged_rejects_bad_shape(sys2):
    with pytest.raises(DimensionError):
        partition_charged(sys2, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        partition_charged(sys2, np.zeros((2, 2)), route="other")


# -- lattices and theta functions --------------------------------------------------


def test_lattice_sqrt2_matches_charge_sum(sys1):
    charged = sum(partition_charged(sys1, [m * math.sqrt(2)]) for m in range(-6, 7))
    lattice = lattice_partition(sys1, [[2.0]], 6)
    assert rel_err(lattice, charged * cmath.sqrt(sys1.det)) <= 1e-12


def test_lattice_theta_explicit_sum(sys2):
    Omega = period_matrix(sys2)
    value, tail = lattice_theta(Omega, [[2.0]], 3)
    ref = sum(
        cmath.exp(2j * math.pi * (m * m * Omega[0, 0] + 2 * m * n * Omega[0, 1] + n * n * Omega[1, 1]))
        for m in range(-3, 4)
        for n in range(-3, 4)
    )
    assert value == pytest.approx(ref, rel=1e-13)
    assert tail >= 0


def test_lattice_empty_cutoff_is_one(sys1):
    value, _ = lattice_theta(period_matrix(sys1), [[2.0]], 0)
    assert value == 1


def test_lattice_partition_reports_small_cutoff(sys1):
    with pytest.raises(ConvergenceError):
        lattice_partition(sys1, [[2.0]], 0)


def test_theta_two_term_dominance():
    Omega = np.array([[3j]])
    val = riemann_theta(Omega, [0.0], [0.0], cutoff=4)
    nome = cmath.exp(1j * math.pi * Omega[0, 0])
    assert val == pytest.approx(1 + 2 * nome + 2 * nome**4, rel=1e-15)


def _omega2():
    return np.array([[1.1j + 0.2, 0.3 + 0.1j], [0.3 + 0.1j, 0.9j - 0.4]])


def test_theta_quasi_periodicity():
    Omega = _omega2()
    alpha = np.array([0.25, -0.1])
    zeta = np.array([0.2 - 0.3j, -0.1 + 0.4j])
    base = riemann_theta(Omega, alpha, zeta, cutoff=12)
    for j in range(2):
        shifted = riemann_theta(Omega, alpha, zeta + 2j * math.pi * Omega[:, j], cutoff=12)
        factor = cmath.exp(-1j * math.pi * Omega[j, j] - zeta[j])
        assert shifted == pytest.approx(factor * base, rel=1e-10)
        e = np.eye(2)[j]
        assert riemann_theta(Omega, alpha, zeta + 2j * math.pi * e, cutoff=12) == pytest.approx(
            cmath.exp(2j * math.pi * alpha[j]) * base, rel=1e-10
        )


def test_theta_integer_characteristic_shift():
    Omega = np.array([[1.3j + 0.1]])
    zeta = np.array([0.3 + 0.2j])
    a = riemann_theta(Omega, [0.3], zeta, cutoff=12)
    b = riemann_theta(Omega, [1.3], zeta, cutoff=12)
    assert b == pytest.approx(a, rel=1e-12)


def test_theta_warns_on_small_cutoff():
    with pytest.warns(DivergenceWarning):
        riemann_theta(np.array([[0.3j]]), [0.0], [0.0], cutoff=1)


def test_theta_rejects_non_positive_imaginary_part():
    with pytest.raises(DomainError):
        riemann_theta(np.array([[-0.5j]]), [0.0], [0.0])
