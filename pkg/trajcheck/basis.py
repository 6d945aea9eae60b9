"""
Shifted orthonormal Legendre polynomials on [0,1].

ℒ_j(t) = sqrt(2j+1) P_j(2t-1), with P_j the classical Legendre polynomial.
Values always come from a three-term recurrence; the monomial coefficient
matrix (`BasisTransform`) is only used to map raw moments to basis
coefficients and for low-degree cross-checks.
"""

import logging
import math
from abc import ABCMeta, abstractmethod
from collections import namedtuple
from functools import lru_cache

import numpy as np

from trajcheck.config import resolve
from trajcheck.errors import DegreeCapError, DomainError
from trajcheck.util import frozen_array


logger = logging.getLogger('trajcheck.basis')

NEWTON_TOLERANCE = 1e-15
NEWTON_MAX_ITER = 100
HANKEL_ORACLE_MAX_DEGREE = 5


class QuadratureRule(namedtuple('QuadratureRule', 'nodes weights order')):
    __slots__ = ()

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def to_dict(self):
        return {'order': self.order,
                'nodes': self.nodes.tolist(),
                'weights': self.weights.tolist()}


class BasisTransform(namedtuple('BasisTransform', 'degree entries')):
    """
    Lower-triangular matrix whose row j holds the monomial coefficients of
    the j-th orthonormal polynomial.
    """
    __slots__ = ()

    def apply(self, moments, degree=None):
        degree = self.degree if degree is None else degree
        if degree > self.degree:
            raise DomainError('transform has degree {}, {} requested'.format(
                self.degree, degree))

        moments = np.asarray(moments, dtype=float)
        if moments.shape[0] < degree + 1:
            raise DomainError('{} moments given, {} needed'.format(
                moments.shape[0], degree + 1))

        entries = self.entries[:degree + 1, :degree + 1]
        return entries.dot(moments[:degree + 1])

    def horner(self, j, t):
        return float(np.polynomial.polynomial.polyval(
            t, self.entries[j, :j + 1]))

    def rows(self):
        for j in range(self.degree + 1):
            yield j, self.entries[j, :j + 1].tolist()


def lebesgue_moments(count):
    return 1.0 / np.arange(1, count + 1, dtype=float)


class OrthonormalFamily(metaclass=ABCMeta):
    """
    Polynomials p_0, p_1, ... orthonormal for a probability measure on
    [0,1], given by the Jacobi recurrence

        t p_k = beta[k+1] p_{k+1} + alpha[k] p_k + beta[k] p_{k-1}

    with p_0 = 1.
    """

    @property
    @abstractmethod
    def tag(self):
        pass

    @abstractmethod
    def degree_cap(self, settings=None):
        pass

    @abstractmethod
    def recurrence(self, degree):
        """
        Return (alpha[0..degree-1], beta[0..degree]) with beta[0] = 0.
        """

    @abstractmethod
    def quadrature(self, order):
        pass

    @abstractmethod
    def transform(self, degree):
        pass

    def clip_order(self, order):
        return order

    def check_degree(self, degree, settings=None):
        if degree < 0:
            raise DomainError('degree must be >= 0, got {}'.format(degree))

        cap = self.degree_cap(settings)
        if degree > cap:
            raise DegreeCapError(degree, cap)

    def values(self, t, degree):
        """Matrix of p_j(t_k), shape (len(t), degree + 1)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        alpha, beta = self.recurrence(degree)

        out = np.empty((t.shape[0], degree + 1))
        out[:, 0] = 1.0
        if degree >= 1:
            out[:, 1] = (t - alpha[0]) / beta[1]
        for k in range(1, degree):
            out[:, k + 1] = ((t - alpha[k]) * out[:, k]
                             - beta[k] * out[:, k - 1]) / beta[k + 1]

        return out

    def clenshaw(self, coeffs, t):
        coeffs = np.asarray(coeffs, dtype=float)
        t = np.asarray(t, dtype=float)
        n = coeffs.shape[0] - 1
        if n < 0:
            return np.zeros_like(t)
        if n == 0:
            return np.full_like(t, coeffs[0])

        alpha, beta = self.recurrence(n)
        b1 = np.zeros_like(t)
        b2 = np.zeros_like(t)
        for k in range(n, 0, -1):
            bk = coeffs[k] + np.zeros_like(t)
            if k < n:
                bk = bk + (t - alpha[k]) / beta[k + 1] * b1
            if k + 1 < n:
                bk = bk - beta[k + 1] / beta[k + 2] * b2
            b1, b2 = bk, b1

        result = coeffs[0] + (t - alpha[0]) / beta[1] * b1
        if n >= 2:
            result = result - beta[1] / beta[2] * b2

        return result

    def __repr__(self):
        return '{}({})'.format(type(self).__name__, self.tag)


class ShiftedLegendre(OrthonormalFamily):

    @property
    def tag(self):
        return 'legendre'

    def degree_cap(self, settings=None):
        return resolve(settings).legendre_degree_cap

    def recurrence(self, degree):
        k = np.arange(1, degree + 1, dtype=float)
        alpha = np.full(degree, 0.5)
        beta = np.concatenate(([0.0], k / (2.0 * np.sqrt(4.0 * k * k - 1))))
        return alpha, beta

    def quadrature(self, order):
        return gauss_legendre_01(order)

    def transform(self, degree, settings=None):
        return build_shifted_legendre(degree, settings=settings)

    def values(self, t, degree):
        # Classical recurrence on P_j(2t-1), then the sqrt(2j+1) scaling
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = 2.0 * t - 1.0

        out = np.empty((t.shape[0], degree + 1))
        out[:, 0] = 1.0
        if degree >= 1:
            out[:, 1] = x
        for k in range(1, degree):
            out[:, k + 1] = ((2 * k + 1) * x * out[:, k]
                             - k * out[:, k - 1]) / (k + 1)

        out *= np.sqrt(2.0 * np.arange(degree + 1) + 1.0)
        return out

    def __eq__(self, other):
        return isinstance(other, ShiftedLegendre)

    def __hash__(self):
        return hash(self.tag)


LEBESGUE = ShiftedLegendre()


@lru_cache(maxsize=None)
def _shifted_legendre_entries(degree):
    entries = np.zeros((degree + 1, degree + 1))
    for j in range(degree + 1):
        scale = math.sqrt(2 * j + 1)
        for k in range(j + 1):
            c = math.comb(j, k) * math.comb(j + k, k)
            sign = -1.0 if (j + k) % 2 else 1.0
            entries[j, k] = sign * scale * float(c)

    entries.setflags(write=False)
    return entries


def build_shifted_legendre(degree, settings=None):
    """
    Return Δ truncated to rows and columns 0..degree.

    Built from the closed form
    ℒ_j(t) = sqrt(2j+1) sum_k (-1)^(j+k) C(j,k) C(j+k,k) t^k.
    """
    LEBESGUE.check_degree(degree, settings)
    return BasisTransform(degree=degree,
                          entries=_shifted_legendre_entries(degree))


def eval_basis(transform, j, t):
    if not 0 <= j <= transform.degree:
        raise DomainError('basis index {} outside 0..{}'.format(
            j, transform.degree))
    if not (np.isfinite(t) and 0.0 <= t <= 1.0):
        raise DomainError('t = {!r} outside [0, 1]'.format(t))

    return float(LEBESGUE.values(t, j)[0, j])


@lru_cache(maxsize=64)
def gauss_legendre_01(order):
    """
    Gauss-Legendre rule with `order` nodes mapped to [0,1].

    Nodes are found by Newton iteration on P_order starting from the usual
    cos(pi (k - 1/4) / (order + 1/2)) guesses.
    """
    if order < 1:
        raise DomainError('quadrature order must be >= 1, got {}'.format(
            order))

    k = np.arange(1, order + 1, dtype=float)
    x = np.cos(np.pi * (k - 0.25) / (order + 0.5))

    for it in range(NEWTON_MAX_ITER):
        p, dp = _legendre_with_derivative(order, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOLERANCE:
            break
    else:
        logger.debug('Newton iteration for order %d stopped after %d steps',
                     order, NEWTON_MAX_ITER)

    _, dp = _legendre_with_derivative(order, x)
    weights = 1.0 / ((1.0 - x * x) * dp * dp)
    # cos guesses are descending, so (1 - x) / 2 comes out ascending
    nodes = (1.0 - x) / 2.0

    return QuadratureRule(nodes=frozen_array(nodes),
                          weights=frozen_array(weights),
                          order=order)


def _legendre_with_derivative(m, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, m):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)

    if m == 0:  # pragma: nocover
        return np.ones_like(x), np.zeros_like(x)

    dp = m * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def shifted_legendre_from_hankel(degree):
    """
    Build ℒ_0..ℒ_degree from Hankel determinants of the Lebesgue moments.

    Only meant as an independent cross-check of `build_shifted_legendre`;
    determinants of Hilbert-type matrices lose precision quickly, so the
    degree is limited.
    """
    if not 0 <= degree <= HANKEL_ORACLE_MAX_DEGREE:
        raise DomainError('determinant construction limited to degree '
                          '0..{}'.format(HANKEL_ORACLE_MAX_DEGREE))

    m = lebesgue_moments(2 * degree + 1)
    entries = np.zeros((degree + 1, degree + 1))
    entries[0, 0] = 1.0

    for j in range(1, degree + 1):
        hankel = np.array([[m[a + b] for b in range(j + 1)]
                           for a in range(j)])
        previous = np.linalg.det(hankel[:, :j])
        coeffs = np.empty(j + 1)
        for k in range(j + 1):
            minor = np.delete(hankel, k, axis=1)
            sign = -1.0 if (j + k) % 2 else 1.0
            coeffs[k] = sign * np.linalg.det(minor) / previous

        gram = np.array([[m[a + b] for b in range(j + 1)]
                         for a in range(j + 1)])
        entries[j, :j + 1] = coeffs / np.sqrt(coeffs.dot(gram).dot(coeffs))

    return BasisTransform(degree=degree, entries=frozen_array(entries))
