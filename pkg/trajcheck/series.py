"""
Finite coefficient vectors in an orthonormal polynomial basis.

A `LegendreSeries` stands for the L2 function sum_j coeffs[j] p_j with an
implicit zero tail. The ⋆-product of two series is the coefficient vector of
the pointwise product of their (polynomial) partial sums, computed by
projecting the product with a Gauss rule that integrates it exactly.
"""

import csv
import io
import logging
import math
from collections import namedtuple

import numpy as np

from trajcheck.basis import LEBESGUE
from trajcheck.config import resolve
from trajcheck.errors import BasisMismatchError, DomainError, InputError
from trajcheck.util import frozen_array


logger = logging.getLogger('trajcheck.series')

MIN_PROJECTION_ORDER = 32


class LegendreSeries(namedtuple('LegendreSeries', 'coeffs basis')):
    __slots__ = ()

    @classmethod
    def new(cls, coeffs, basis=LEBESGUE):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.shape[0] == 0:
            raise DomainError('series needs a non-empty coefficient vector')

        return cls(coeffs=frozen_array(coeffs), basis=basis)

    @property
    def basis_tag(self):
        return self.basis.tag

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def padded(self, length):
        out = np.zeros(max(length, self.coeffs.shape[0]))
        out[:self.coeffs.shape[0]] = self.coeffs
        return out

    def truncate(self, degree):
        return self.new(self.padded(degree + 1)[:degree + 1], self.basis)

    def equals(self, other, tolerance=None, settings=None):
        if tolerance is None:
            tolerance = resolve(settings).series_tolerance

        if self.basis_tag != other.basis_tag:
            return False

        length = max(self.coeffs.shape[0], other.coeffs.shape[0])
        diff = self.padded(length) - other.padded(length)
        return bool(np.all(np.abs(diff) <= tolerance))

    def to_dict(self):
        return {'basis': self.basis_tag, 'coeffs': self.coeffs.tolist()}

    def __eq__(self, other):
        if not isinstance(other, LegendreSeries):
            return NotImplemented
        return self.equals(other)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None


def _check_same_basis(a, b):
    if a.basis_tag != b.basis_tag:
        raise BasisMismatchError(a.basis_tag, b.basis_tag)


def projection_order(degree, degree_hint=None, settings=None):
    """
    Number of Gauss nodes used by `project` when no rule is given.

    With a polynomial degree hint the rule is just large enough to be exact;
    otherwise the configured order for smooth functions is used.
    """
    if degree_hint is not None:
        return max(MIN_PROJECTION_ORDER,
                   int(math.ceil((degree_hint + degree) / 2.0)) + 1)

    return max(resolve(settings).projection_order, degree + 1)


def project(f, degree, rule=None, basis=LEBESGUE, degree_hint=None,
            settings=None):
    """
    Basis coefficients f̂(j) = ∫ p_j f dν for j = 0..degree.

    `f` is called once with the array of quadrature nodes. The rule must be
    a Gauss rule for the basis measure.
    """
    basis.check_degree(degree, settings)
    if rule is None:
        rule = basis.quadrature(basis.clip_order(
            projection_order(degree, degree_hint, settings)))

    values = np.asarray(f(rule.nodes), dtype=float)
    values = np.broadcast_to(values, rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        raise DomainError('function is not finite at every quadrature node')

    vander = basis.values(rule.nodes, degree)
    return LegendreSeries.new(vander.T.dot(rule.weights * values), basis)


def star_product(a, b, settings=None):
    """
    Coefficients of the pointwise product of the partial sums of a and b.

    The result has deg(a) + deg(b) + 1 entries and is exact: a Gauss rule
    with deg(a) + deg(b) + 1 nodes integrates the product times any basis
    polynomial of the output degree.
    """
    _check_same_basis(a, b)
    degree = a.degree + b.degree
    a.basis.check_degree(degree, settings)

    rule = a.basis.quadrature(degree + 1)
    vander = a.basis.values(rule.nodes, degree)
    values_a = vander[:, :a.degree + 1].dot(a.coeffs)
    values_b = vander[:, :b.degree + 1].dot(b.coeffs)

    coeffs = vander.T.dot(rule.weights * values_a * values_b)
    return LegendreSeries.new(coeffs, a.basis)


def star_power(a, k, settings=None):
    if k < 1:
        raise DomainError('star power needs k >= 1, got {}'.format(k))
    a.basis.check_degree(k * a.degree, settings)

    result = a
    for _ in range(k - 1):
        result = star_product(result, a, settings=settings)

    return result


def _difference(a, b):
    _check_same_basis(a, b)
    length = max(a.coeffs.shape[0], b.coeffs.shape[0])
    return a.padded(length) - b.padded(length)


def l2_distance(a, b):
    return float(np.linalg.norm(_difference(a, b)))


def linf_distance(a, b):
    return float(np.max(np.abs(_difference(a, b))))


def evaluate(a, t):
    """Partial sum sum_j a(j) p_j(t) by Clenshaw's backward recurrence."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)) \
       or np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise DomainError('evaluation points must lie in [0, 1]')

    values = a.basis.clenshaw(a.coeffs, t_arr)
    if t_arr.ndim == 0:
        return float(values)
    return values


def power_gap(f, degree, k, settings=None):
    """
    Distance between the k-th star power of the degree-n projection of f
    and the degree k·n projection of f^k.
    """
    approx = star_power(project(f, degree, settings=settings), k,
                        settings=settings)
    exact = project(lambda t: f(t) ** k, k * degree, settings=settings)
    return l2_distance(approx, exact)


def load_series(stream, basis=LEBESGUE):
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode('utf-8'))

    reader = csv.DictReader(stream)
    if reader.fieldnames is None \
       or not {'j', 'coefficient'} <= set(reader.fieldnames):
        raise InputError('series CSV needs a header "j,coefficient"')

    entries = {}
    try:
        for row in reader:
            entries[int(row['j'])] = float(row['coefficient'])
    except (TypeError, ValueError) as e:
        raise InputError('malformed series CSV: {}'.format(e))

    if not entries:
        raise InputError('series CSV holds no coefficients')

    degree = max(entries)
    missing = sorted(set(range(degree + 1)) - set(entries))
    if missing or min(entries) < 0:
        raise InputError('series CSV must list j = 0..{} exactly; missing '
                         '{}'.format(degree, missing))

    return LegendreSeries.new([entries[j] for j in range(degree + 1)], basis)


def dump_series(series, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['j', 'coefficient'])
    for j, c in enumerate(series.coeffs):
        writer.writerow([j, '{:.17g}'.format(c)])
