"""
Trajectory detection from moments.

A measure μ on [0,1]² with t-marginal ν is supported on a graph
{(t, x(t))} exactly when every disintegration density f_i equals f_1^i.
In coefficient form: Δ gamma_i = (Δ gamma_1)^(i) for every i, where (·)^(i)
is the i-th ⋆-power. With finitely many moments the test is run at a
truncation n and for powers up to K, and the per-power residuals decide a
three-way verdict.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from trajcheck.basis import LEBESGUE
from trajcheck.config import resolve
from trajcheck.errors import DomainError, InsufficientMomentsError
from trajcheck.moments import coefficient_row
from trajcheck.orthopoly import basis_for_table, general_coefficient_row
from trajcheck.series import evaluate, l2_distance, linf_distance, \
    star_power
from trajcheck.util import parallel_map


logger = logging.getLogger('trajcheck.detector')

TRAJECTORY_CONSISTENT = 'trajectory_consistent'
INCONSISTENT = 'inconsistent'
INCONCLUSIVE = 'inconclusive'

EXIT_CODES = {
    TRAJECTORY_CONSISTENT: 0,
    INCONSISTENT: 2,
    INCONCLUSIVE: 3,
}

# Relative growth tolerated between consecutive residuals of a trend
TREND_NOISE = 0.10
TREND_FLOOR = 1e-12

EPS = np.finfo(float).eps


class Residual(namedtuple('Residual', 'power value compared_length')):
    __slots__ = ()

    def to_dict(self):
        return {'power': self.power, 'value': self.value,
                'compared_length': self.compared_length}


class DetectionReport(namedtuple('DetectionReport',
                                 'truncation_n max_power_K tolerance '
                                 'residuals verdict reconstruction '
                                 'sup_norm_estimate norm escalation_factor '
                                 'noise_floor warnings downgraded')):
    __slots__ = ()

    @property
    def max_residual(self):
        return max(r.value for r in self.residuals)

    @property
    def exit_code(self):
        return EXIT_CODES[self.verdict]

    def residual(self, power):
        return next(r.value for r in self.residuals if r.power == power)

    def to_dict(self):
        return {
            'truncation_n': self.truncation_n,
            'max_power_K': self.max_power_K,
            'tolerance': self.tolerance,
            'norm': self.norm,
            'escalation_factor': self.escalation_factor,
            'residuals': [r.to_dict() for r in self.residuals],
            'max_residual': self.max_residual,
            'verdict': self.verdict,
            'reconstruction': self.reconstruction.to_dict(),
            'sup_norm_estimate': self.sup_norm_estimate,
            'noise_floor': self.noise_floor,
            'warnings': list(self.warnings),
            'downgraded': self.downgraded,
        }


def decide_verdict(max_residual, tolerance, escalation_factor):
    if max_residual <= tolerance:
        return TRAJECTORY_CONSISTENT
    elif max_residual > escalation_factor * tolerance:
        return INCONSISTENT
    else:
        return INCONCLUSIVE


def _check_arguments(table, truncation_n, max_power_K):
    if truncation_n < 0:
        raise DomainError('truncation n must be >= 0, got {}'.format(
            truncation_n))
    if max_power_K < 2:
        raise DomainError('max power K must be >= 2, got {}'.format(
            max_power_K))
    if table.max_i < max_power_K:
        raise InsufficientMomentsError(max_power_K, table.max_i, 'max_i')
    if table.max_j < truncation_n * max_power_K:
        raise InsufficientMomentsError(truncation_n * max_power_K,
                                       table.max_j, 'max_j')


class _RowSource(object):
    """Coefficient rows of a table in the basis of its marginal."""

    def __init__(self, table, degree, settings):
        self.table = table
        self.settings = settings
        if table.is_lebesgue:
            self.basis = LEBESGUE
        else:
            # One extra degree so the ν-Gauss rule integrates products of
            # the compared length exactly
            self.basis = basis_for_table(table, degree + 1,
                                         settings=settings)

    def row(self, i, degree):
        if self.table.is_lebesgue:
            return coefficient_row(self.table, i, degree,
                                   settings=self.settings)
        return general_coefficient_row(self.table, self.basis, i, degree,
                                       settings=self.settings)

    def noise_floor(self, degree):
        """
        Rounding in the moments is amplified by the row sums of |Δ|; this
        is the resulting coefficient error scale.
        """
        entries = self.basis.transform(degree).entries
        scale = np.max(np.abs(self.table.gamma[:, :degree + 1]))
        return float(EPS * np.max(np.sum(np.abs(entries), axis=1)) * scale)


def _residuals(source, truncation_n, max_power_K, linf, settings):
    distance = linf_distance if linf else l2_distance
    x_hat = source.row(1, truncation_n)

    def residual(i):
        degree = truncation_n * i
        target = source.row(i, degree)
        value = distance(target, star_power(x_hat, i, settings=settings))
        logger.debug('power %d: residual %.3e over %d coefficients', i,
                     value, degree + 1)
        return Residual(power=i, value=value, compared_length=degree + 1)

    residuals = parallel_map(residual, range(2, max_power_K + 1),
                             settings.workers)
    return x_hat, tuple(residuals)


def check_trajectory(table, truncation_n, max_power_K, tolerance,
                     linf=False, settings=None):
    """
    Compare Δ gamma_i against the i-th ⋆-power of Δ gamma_1 (truncated at
    n) over indices 0..n·i for i = 2..K, and decide a verdict.
    """
    settings = resolve(settings)
    if not tolerance > 0:
        raise DomainError('tolerance must be > 0, got {}'.format(tolerance))
    _check_arguments(table, truncation_n, max_power_K)

    degree = truncation_n * max_power_K
    source = _RowSource(table, degree, settings)
    x_hat, residuals = _residuals(source, truncation_n, max_power_K, linf,
                                  settings)

    warnings = []
    grid = np.linspace(0.0, 1.0, settings.sup_norm_grid)
    values = evaluate(x_hat, grid)
    sup_norm = float(np.max(np.abs(values)))
    if sup_norm > settings.sup_norm_warning:
        warnings.append('partial sum of the reconstruction reaches {:.4g} '
                        'on the grid, above {:.4g}'.format(
                            sup_norm, settings.sup_norm_warning))

    noise_floor = source.noise_floor(degree)
    if noise_floor > tolerance:
        warnings.append('moment rounding amplified by the transform is '
                        'about {:.2g}, above the tolerance'.format(
                            noise_floor))

    max_residual = max(r.value for r in residuals)
    verdict = decide_verdict(max_residual, tolerance,
                             settings.escalation_factor)

    downgraded = False
    slack = settings.support_slack
    if verdict == TRAJECTORY_CONSISTENT \
       and (np.min(values) < -slack or np.max(values) > 1.0 + slack):
        warnings.append('reconstruction leaves [0, 1] by more than {:g}; '
                        'verdict downgraded'.format(slack))
        verdict = INCONCLUSIVE
        downgraded = True

    for message in warnings:
        logger.warning(message)
    logger.info('Verdict %s (max residual %.3e, tolerance %.3e)', verdict,
                max_residual, tolerance)

    return DetectionReport(truncation_n=truncation_n,
                           max_power_K=max_power_K,
                           tolerance=float(tolerance),
                           residuals=residuals,
                           verdict=verdict,
                           reconstruction=x_hat,
                           sup_norm_estimate=sup_norm,
                           norm='linf' if linf else 'l2',
                           escalation_factor=settings.escalation_factor,
                           noise_floor=noise_floor,
                           warnings=tuple(warnings),
                           downgraded=downgraded)


def reconstruct_trajectory(report, samples, clamp=False):
    if report.verdict == INCONSISTENT:
        raise DomainError('no trajectory to reconstruct: verdict is '
                          'inconsistent')

    return sample_series(report.reconstruction, samples, clamp=clamp)


def sample_series(series, samples, clamp=False):
    if samples < 2:
        raise DomainError('need at least 2 samples, got {}'.format(samples))

    grid = np.linspace(0.0, 1.0, samples)
    values = evaluate(series, grid)
    if clamp:
        values = np.clip(values, 0.0, 1.0)

    return [(float(t), float(x)) for t, x in zip(grid, values)]


class ResidualTrend(namedtuple('ResidualTrend',
                               'truncations max_power_K norm residuals '
                               'nonincreasing')):
    __slots__ = ()

    def to_dict(self):
        return {
            'truncations': list(self.truncations),
            'max_power_K': self.max_power_K,
            'norm': self.norm,
            'residuals': {i: list(v) for i, v in self.residuals.items()},
            'nonincreasing': dict(self.nonincreasing),
        }


def residual_trend(table, truncations, max_power_K, linf=False,
                   settings=None):
    """
    Run the residual computation at each truncation n and flag, per power,
    whether residuals are nonincreasing in n up to 10% noise.
    """
    settings = resolve(settings)
    truncations = sorted(set(int(n) for n in truncations))
    if not truncations:
        raise DomainError('no truncations given')
    _check_arguments(table, truncations[-1], max_power_K)

    source = _RowSource(table, truncations[-1] * max_power_K, settings)
    per_power = {i: [] for i in range(2, max_power_K + 1)}
    for n in truncations:
        _, residuals = _residuals(source, n, max_power_K, linf, settings)
        for r in residuals:
            per_power[r.power].append(r.value)

    nonincreasing = {}
    for i, values in per_power.items():
        nonincreasing[i] = all(
            later <= (1.0 + TREND_NOISE) * earlier + TREND_FLOOR
            for earlier, later in zip(values, values[1:]))

    return ResidualTrend(truncations=tuple(truncations),
                         max_power_K=max_power_K,
                         norm='linf' if linf else 'l2',
                         residuals={i: tuple(v)
                                    for i, v in per_power.items()},
                         nonincreasing=nonincreasing)


class AlgebraicSupportResult(namedtuple('AlgebraicSupportResult',
                                        'degree_s smallest_singular_value '
                                        'largest_singular_value '
                                        'kernel_polynomial')):
    """
    `kernel_polynomial` is None or a tuple of (coefficient, a, b) terms of
    p(x, t) = sum coefficient x^a t^b, unit ℓ² norm.
    """
    __slots__ = ()

    def to_dict(self):
        kernel = None
        if self.kernel_polynomial is not None:
            kernel = [{'coefficient': c, 'x_power': a, 't_power': b}
                      for c, a, b in self.kernel_polynomial]
        return {
            'degree_s': self.degree_s,
            'smallest_singular_value': self.smallest_singular_value,
            'largest_singular_value': self.largest_singular_value,
            'kernel_polynomial': kernel,
        }

    def format_polynomial(self, precision=6):
        if self.kernel_polynomial is None:
            return None

        terms = []
        for c, a, b in self.kernel_polynomial:
            if abs(c) < 10.0 ** -precision:
                continue
            factors = ['{:+.{}g}'.format(c, precision)]
            if a:
                factors.append('x' if a == 1 else 'x^{}'.format(a))
            if b:
                factors.append('t' if b == 1 else 't^{}'.format(b))
            terms.append('*'.join(factors))
        return ' '.join(terms)


def moment_monomials(degree_s):
    """Exponent pairs (a, b) of x^a t^b with a + b <= s, graded order."""
    return [(a, d - a) for d in range(degree_s + 1)
            for a in range(d + 1)]


def moment_matrix(table, degree_s):
    """M_s[(a,b),(c,d)] = gamma[a+c][b+d]."""
    if degree_s < 0:
        raise DomainError('degree s must be >= 0, got {}'.format(degree_s))
    if table.max_i < 2 * degree_s:
        raise InsufficientMomentsError(2 * degree_s, table.max_i, 'max_i')
    if table.max_j < 2 * degree_s:
        raise InsufficientMomentsError(2 * degree_s, table.max_j, 'max_j')

    monomials = moment_monomials(degree_s)
    size = len(monomials)
    matrix = np.empty((size, size))
    for r, (a, b) in enumerate(monomials):
        for c, (x_pow, t_pow) in enumerate(monomials):
            matrix[r, c] = table.gamma[a + x_pow, b + t_pow]

    return monomials, matrix


def algebraic_support_check(table, degree_s, settings=None):
    """
    Smallest singular value of the moment matrix M_s and, when it is below
    the relative kernel threshold, the polynomial of the corresponding
    singular vector, which vanishes on the support of μ.
    """
    settings = resolve(settings)
    monomials, matrix = moment_matrix(table, degree_s)

    _, singular, vh = linalg.svd(matrix)
    smallest = float(singular[-1])
    largest = float(singular[0])

    kernel = None
    if smallest <= settings.kernel_threshold * largest:
        vector = vh[-1] / np.linalg.norm(vh[-1])
        if vector[np.argmax(np.abs(vector))] < 0:
            vector = -vector
        kernel = tuple((float(c), a, b)
                       for c, (a, b) in zip(vector, monomials))
        logger.warning('Moment matrix of degree %d is singular (smallest '
                       'singular value %.3e): the support lies on an '
                       'algebraic curve', degree_s, smallest)
    else:
        logger.info('Moment matrix of degree %d has full rank (smallest '
                    'singular value %.3e)', degree_s, smallest)

    return AlgebraicSupportResult(degree_s=degree_s,
                                  smallest_singular_value=smallest,
                                  largest_singular_value=largest,
                                  kernel_polynomial=kernel)
