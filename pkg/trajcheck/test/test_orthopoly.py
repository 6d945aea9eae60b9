import numpy as np
import pytest

from trajcheck.basis import build_shifted_legendre, lebesgue_moments
from trajcheck.config import Settings
from trajcheck.errors import DegreeCapError, IllConditionedError, \
    InsufficientMomentsError, MarginalMismatchError, SingularHankelError
from trajcheck.moments import MomentTable
from trajcheck.orthopoly import basis_for_table, build_from_moments, \
    general_coefficient_row
from trajcheck.series import LegendreSeries, evaluate, project, star_product


def linear_moments(count):
    """Moments 2/(j+2) of h(t) = 2t."""
    return 2.0 / np.arange(2, count + 2, dtype=float)


@pytest.mark.parametrize('degree', [0, 1, 2, 3])
def test_lebesgue_moments_reproduce_legendre_rows(degree):
    basis = build_from_moments(lebesgue_moments(2 * degree + 1), degree)
    expected = build_shifted_legendre(degree).entries
    assert np.max(np.abs(basis.entries - expected)) <= 1e-10


def test_lebesgue_moments_reproduce_legendre_rows_higher_degree():
    basis = build_from_moments(lebesgue_moments(13), 6)
    expected = build_shifted_legendre(6).entries
    assert np.allclose(basis.entries, expected, rtol=1e-7, atol=1e-7)


def test_lebesgue_recurrence():
    basis = build_from_moments(lebesgue_moments(9))
    alpha, beta = basis.recurrence(4)
    k = np.arange(1, 5)
    assert np.allclose(alpha, 0.5, atol=1e-10)
    assert np.allclose(beta[1:], k / (2 * np.sqrt(4 * k * k - 1)),
                       atol=1e-10)
    assert beta[0] == 0.0


@pytest.mark.parametrize('degree', [1, 2, 3, 4])
def test_linear_density_orthonormality(degree):
    moments = linear_moments(2 * degree + 1)
    basis = build_from_moments(moments, degree)
    gram = np.array([[moments[a + b] for b in range(degree + 1)]
                     for a in range(degree + 1)])
    product = basis.entries.dot(gram).dot(basis.entries.T)
    assert np.allclose(product, np.eye(degree + 1), atol=1e-8)


def test_linear_density_first_polynomials():
    basis = build_from_moments(linear_moments(3), 1)
    # H_1 = (t - 2/3) / sqrt(1/18)
    scale = np.sqrt(18.0)
    assert np.allclose(basis.entries[1], [-2.0 / 3 * scale, scale])


def test_quadrature_for_linear_density():
    basis = build_from_moments(linear_moments(11), 5)
    rule = basis.quadrature(5)
    assert np.all((rule.nodes > 0) & (rule.nodes < 1))
    for k in range(10):
        assert rule.integrate(rule.nodes ** k) == \
            pytest.approx(2.0 / (k + 2), rel=1e-10)


def test_quadrature_order_limited():
    basis = build_from_moments(linear_moments(7), 3)
    with pytest.raises(InsufficientMomentsError):
        basis.quadrature(4)
    assert basis.clip_order(64) == 3


def test_values_match_monomial_rows():
    basis = build_from_moments(linear_moments(9), 4)
    t = np.linspace(0.0, 1.0, 11)
    values = basis.values(t, 4)
    for j in range(5):
        direct = np.polynomial.polynomial.polyval(t, basis.entries[j, :j + 1])
        assert np.allclose(values[:, j], direct, atol=1e-8)


def test_series_algebra_on_general_basis():
    basis = build_from_moments(linear_moments(9), 4)
    t = project(lambda x: x, 1, basis=basis)
    t2 = star_product(t, t)
    assert t2.basis_tag == basis.tag
    assert evaluate(t2, 0.3) == pytest.approx(0.09, abs=1e-10)


def test_basis_tag_depends_on_moments():
    a = build_from_moments(linear_moments(5))
    b = build_from_moments(lebesgue_moments(5))
    assert a.tag != b.tag
    assert a.tag.startswith('nu:')
    assert a == build_from_moments(linear_moments(5))


def test_singular_hankel_for_atomic_marginal():
    # Two atoms at 0.25 and 0.75
    moments = [0.5 * (0.25 ** j + 0.75 ** j) for j in range(7)]
    with pytest.raises(SingularHankelError) as exc:
        build_from_moments(moments, 3)
    assert exc.value.index == 2


def test_non_positive_mass():
    with pytest.raises(SingularHankelError):
        build_from_moments([0.0, 0.0, 0.0])


def test_ill_conditioned_guard():
    settings = Settings.from_dict({'min_reliable_digits': 14})
    with pytest.raises(IllConditionedError):
        build_from_moments(lebesgue_moments(9), 4, settings=settings)


def test_insufficient_marginal_moments():
    with pytest.raises(InsufficientMomentsError):
        build_from_moments(linear_moments(4), 2)


def test_general_degree_cap():
    with pytest.raises(DegreeCapError):
        build_from_moments(lebesgue_moments(27), 13)


def test_general_coefficient_row(linear_marginal_table):
    basis = basis_for_table(linear_marginal_table, 3)
    row = general_coefficient_row(linear_marginal_table, basis, 1, 3)
    assert isinstance(row, LegendreSeries)
    # f_1(t) = t lies in span(H_0, H_1)
    assert np.allclose(row.coeffs[2:], 0.0, atol=1e-10)
    assert evaluate(row, 0.4) == pytest.approx(0.4, abs=1e-10)


def test_general_coefficient_row_marginal_mismatch(linear_marginal_table):
    basis = build_from_moments(lebesgue_moments(9), 4)
    with pytest.raises(MarginalMismatchError):
        general_coefficient_row(linear_marginal_table, basis, 1, 3)


def test_basis_for_table_needs_marginal_moments():
    table = MomentTable.build([[1.0, 2.0 / 3]], marginal=linear_moments(3))
    with pytest.raises(InsufficientMomentsError):
        basis_for_table(table, 2)


def test_basis_for_table_is_shared(linear_marginal_table):
    basis = basis_for_table(linear_marginal_table)
    assert basis_for_table(linear_marginal_table) is basis
    assert basis_for_table(linear_marginal_table, 2) is basis
    assert basis.marginal_moments.shape[0] == \
        linear_marginal_table.marginal.shape[0]


def test_basis_for_table_stops_before_unreliable_pivots():
    gamma = [lebesgue_moments(27).tolist()]
    table = MomentTable.build(gamma, marginal=lebesgue_moments(27))
    basis = basis_for_table(table)
    assert 7 <= basis.degree <= 10
    assert basis.tag == build_from_moments(lebesgue_moments(27), 3).tag

    with pytest.raises((IllConditionedError, SingularHankelError)):
        basis_for_table(table, 12)
