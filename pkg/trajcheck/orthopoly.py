"""
Orthonormal polynomials H_j for a marginal dν = h(t) dt known only through
its moments m_0, m_1, ...

The Hankel matrix H[j][k] = m_{j+k} is factored as L Lᵀ; the rows of L⁻¹ are
the monomial coefficients of H_0..H_n. Gauss rules for ν come from the
eigen-decomposition of the Jacobi matrix of the three-term recurrence.
"""

import hashlib
import logging
import math
from functools import lru_cache

import numpy as np
from scipy import linalg

from trajcheck.basis import BasisTransform, OrthonormalFamily, \
    QuadratureRule
from trajcheck.config import resolve
from trajcheck.errors import DegreeCapError, DomainError, \
    IllConditionedError, InsufficientMomentsError, MarginalMismatchError, \
    SingularHankelError
from trajcheck.series import LegendreSeries
from trajcheck.util import frozen_array


logger = logging.getLogger('trajcheck.orthopoly')

EPS = np.finfo(float).eps


class OrthonormalBasis(OrthonormalFamily):
    def __init__(self, entries, marginal_moments, alpha, beta,
                 pivot_digits=()):
        self._entries = frozen_array(entries)
        self._marginal_moments = frozen_array(marginal_moments)
        self._alpha = frozen_array(alpha)
        self._beta = frozen_array(beta)
        self._pivot_digits = tuple(pivot_digits)

        digest = hashlib.sha1(self._marginal_moments.tobytes()).hexdigest()
        self._tag = 'nu:{}'.format(digest[:12])

    @property
    def tag(self):
        return self._tag

    @property
    def degree(self):
        return self._entries.shape[0] - 1

    @property
    def entries(self):
        return self._entries

    @property
    def marginal_moments(self):
        return self._marginal_moments

    @property
    def pivot_digits(self):
        """Estimated reliable digits left at each Cholesky pivot."""
        return self._pivot_digits

    def degree_cap(self, settings=None):
        return self.degree

    def check_degree(self, degree, settings=None):
        if degree < 0:
            raise DomainError('degree must be >= 0, got {}'.format(degree))
        if degree > self.degree:
            raise InsufficientMomentsError(
                2 * degree, self._marginal_moments.shape[0] - 1,
                'marginal moment index')

    def recurrence(self, degree):
        self.check_degree(degree)
        return self._alpha[:degree], self._beta[:degree + 1]

    def quadrature(self, order):
        """
        Gauss rule for ν with `order` nodes (Golub-Welsch).

        A basis of degree n knows the recurrence up to n, so at most n
        nodes are available; the rule is exact up to degree 2·order - 1.
        """
        if order < 1:
            raise DomainError('quadrature order must be >= 1, got {}'.format(
                order))
        if order > self.degree:
            raise InsufficientMomentsError(
                2 * order, self._marginal_moments.shape[0] - 1,
                'marginal moment index')

        nodes, vectors = linalg.eigh_tridiagonal(
            self._alpha[:order], self._beta[1:order])
        weights = self._marginal_moments[0] * vectors[0, :] ** 2

        return QuadratureRule(nodes=frozen_array(nodes),
                              weights=frozen_array(weights),
                              order=order)

    def transform(self, degree, settings=None):
        self.check_degree(degree)
        return BasisTransform(
            degree=degree,
            entries=frozen_array(self._entries[:degree + 1, :degree + 1]))

    def clip_order(self, order):
        return min(order, self.degree)

    def __eq__(self, other):
        return isinstance(other, OrthonormalBasis) and other.tag == self.tag \
            and other.degree == self.degree

    def __hash__(self):
        return hash((self.tag, self.degree))


def _hankel(moments, size, shift=0):
    return linalg.hankel(moments[shift:shift + size],
                         moments[shift + size - 1:shift + 2 * size - 1])


def build_from_moments(marginal_moments, degree=None, settings=None):
    """
    Orthonormal basis H_0..H_degree for the measure with the given moments.

    Needs the 2·degree + 1 moments m_0..m_{2·degree}; when `degree` is not
    given the largest degree the moments allow is used.
    """
    settings = resolve(settings)
    moments = np.asarray(marginal_moments, dtype=float)
    if moments.ndim != 1 or not np.all(np.isfinite(moments)):
        raise DomainError('marginal moments must be a vector of finite '
                          'numbers')

    if degree is None:
        degree = (moments.shape[0] - 1) // 2
    if degree < 0:
        raise DomainError('degree must be >= 0, got {}'.format(degree))
    if degree > settings.general_degree_cap:
        raise DegreeCapError(degree, settings.general_degree_cap)
    if moments.shape[0] < 2 * degree + 1:
        raise InsufficientMomentsError(2 * degree, moments.shape[0] - 1,
                                       'marginal moment index')
    if not moments[0] > 0:
        raise SingularHankelError(0)

    gram = _hankel(moments, degree + 1)
    lower, info = linalg.lapack.dpotrf(gram, lower=1, clean=1)
    if info > 0:
        raise SingularHankelError(info - 1)
    elif info < 0:  # pragma: nocover
        raise DomainError('invalid Hankel matrix argument {}'.format(-info))

    pivot_digits = _check_pivots(gram, lower, settings)

    entries = linalg.solve_triangular(lower, np.eye(degree + 1), lower=True)
    alpha, beta = _recurrence_from_entries(entries, moments)

    logger.debug('Built orthonormal basis of degree %d; reliable digits '
                 'per pivot: %s', degree,
                 ', '.join('{:.1f}'.format(d) for d in pivot_digits))
    return OrthonormalBasis(entries, moments, alpha, beta, pivot_digits)


def _check_pivots(gram, lower, settings):
    """
    Each squared pivot L[k][k]² is a ratio of consecutive leading minors;
    its size relative to H[k][k] tells how many digits cancelled.
    """
    digits = []
    for k in range(gram.shape[0]):
        pivot = lower[k, k] ** 2
        if not pivot > EPS * gram[k, k] * (k + 1):
            raise SingularHankelError(k)

        remaining = -math.log10(EPS) - math.log10(gram[k, k] / pivot)
        if remaining < settings.min_reliable_digits:
            raise IllConditionedError(k, remaining,
                                      settings.min_reliable_digits)
        digits.append(remaining)

    return digits


def _recurrence_from_entries(entries, moments):
    """
    beta_j is the ratio of consecutive leading coefficients; alpha_j is
    ∫ t H_j² dν, read off the shifted Hankel matrix.
    """
    degree = entries.shape[0] - 1
    lead = np.diag(entries)
    beta = np.zeros(degree + 1)
    beta[1:] = lead[:-1] / lead[1:]

    alpha = np.zeros(degree)
    if degree:
        head = entries[:degree, :degree]
        shifted = _hankel(moments, degree, shift=1)
        alpha = np.einsum('jk,kl,jl->j', head, shifted, head)

    return alpha, beta


@lru_cache(maxsize=32)
def _shared_basis(key, settings):
    moments = np.frombuffer(key)
    degree = min((moments.shape[0] - 1) // 2, settings.general_degree_cap)
    while True:
        try:
            return build_from_moments(moments, degree, settings=settings)
        except (SingularHankelError, IllConditionedError) as e:
            # Leading blocks of the factorization stay valid
            if e.index < 1:
                raise
            logger.debug('Hankel factorization stops at index %d (%s); '
                         'keeping degree %d', e.index, e, e.index - 1)
            degree = e.index - 1


def basis_for_table(table, degree=None, settings=None):
    """
    The basis every coefficient row of `table` lives on: built once per
    marginal, at the largest degree its moments support within the degree
    cap and the conditioning guard. Asking for a higher `degree` raises the
    error that limits it.
    """
    settings = resolve(settings)
    moments = np.ascontiguousarray(table.marginal_moments(), dtype=float)
    basis = _shared_basis(moments.tobytes(), settings)
    if degree is not None and degree > basis.degree:
        return build_from_moments(moments, degree, settings=settings)
    return basis


def general_coefficient_row(table, basis, i, degree, settings=None):
    """
    ν-basis coefficients f̂_hi(j) = ∫ H_j f_i dν, j = 0..degree, computed as
    Δ_h gamma_i.
    """
    settings = resolve(settings)
    if degree < 0:
        raise DomainError('degree must be >= 0, got {}'.format(degree))
    if degree > table.max_j:
        raise InsufficientMomentsError(degree, table.max_j)
    basis.check_degree(degree)

    common = min(basis.marginal_moments.shape[0],
                 table.marginal_moments().shape[0])
    deviation = np.abs(basis.marginal_moments[:common]
                       - table.marginal_moments(common))
    if np.any(deviation > settings.marginal_tolerance):
        j = int(np.argmax(deviation > settings.marginal_tolerance))
        raise MarginalMismatchError(
            'table and basis marginals differ at j={} by {:.3g}'.format(
                j, float(deviation[j])))

    row = table.row(i)
    coeffs = basis.transform(degree).apply(row, degree)
    return LegendreSeries.new(coeffs, basis)
