"""
Moment tables of synthetic measures on [0,1]²: a single trajectory
δ_{x(t)} dν(t), a mixture of trajectories, or the product of the uniform
distribution in x with the marginal ν.
"""

import logging
import math
from abc import ABCMeta, abstractmethod
from collections import namedtuple

import numpy as np

from trajcheck.basis import gauss_legendre_01, lebesgue_moments
from trajcheck.config import resolve
from trajcheck.errors import DomainError, SpecError
from trajcheck.moments import LEBESGUE_MARGINAL, MomentTable
from trajcheck.util import parallel_map


logger = logging.getLogger('trajcheck.synth')

KINDS = ('trajectory', 'product', 'mixture')
RANGE_CHECK_GRID = 1024
RANGE_SLACK = 1e-12
WEIGHT_TOLERANCE = 1e-12


class TrajectoryFunction(metaclass=ABCMeta):

    _types = {}

    # Polynomial degree, or None for non-polynomial functions
    degree = None

    @classmethod
    def register_type(cls, fn_cls):
        for name in fn_cls.NAMES:
            if name in cls._types:
                raise ValueError(
                    'Trajectory function {} already registered'.format(name))
            cls._types[name] = fn_cls

    @classmethod
    def available_names(cls):
        return sorted(cls._types)

    @classmethod
    def parse(cls, descriptor):
        """
        Build a function from a descriptor such as `exp_neg`,
        `constant:0.7` or `poly:0,1` (ascending coefficients).
        """
        if isinstance(descriptor, TrajectoryFunction):
            return descriptor

        name, _, arg = str(descriptor).partition(':')
        try:
            fn_cls = cls._types[name.strip()]
        except KeyError:
            raise SpecError("Unknown trajectory function '{}'".format(name))

        return fn_cls.from_argument(arg.strip())

    @classmethod
    def from_argument(cls, arg):
        if arg:
            raise SpecError('{} takes no argument'.format(cls.NAMES[0]))
        return cls()

    @abstractmethod
    def __call__(self, t):
        pass

    @property
    @abstractmethod
    def descriptor(self):
        pass

    def __eq__(self, other):
        return isinstance(other, TrajectoryFunction) \
            and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return '{}({!r})'.format(type(self).__name__, self.descriptor)


class Polynomial(TrajectoryFunction):
    NAMES = ('poly',)

    def __init__(self, coeffs):
        coeffs = [float(c) for c in coeffs]
        if not coeffs:
            raise SpecError('poly needs at least one coefficient')
        self.coeffs = tuple(coeffs)
        self.degree = len(coeffs) - 1

    @classmethod
    def from_argument(cls, arg):
        try:
            return cls(c for c in arg.split(',') if c.strip())
        except ValueError:
            raise SpecError('poly coefficients must be numbers: {!r}'.format(
                arg))

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    @property
    def descriptor(self):
        return 'poly:' + ','.join('{!r}'.format(c) for c in self.coeffs)


class ExpNeg(TrajectoryFunction):
    NAMES = ('exp_neg',)

    def __call__(self, t):
        return np.exp(-np.asarray(t, dtype=float))

    @property
    def descriptor(self):
        return 'exp_neg'


class SinScaled(TrajectoryFunction):
    NAMES = ('sin_scaled',)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (1.0 + np.sin(2.0 * np.pi * t)) / 2.0 * 0.9 + 0.05

    @property
    def descriptor(self):
        return 'sin_scaled'


class Constant(TrajectoryFunction):
    NAMES = ('constant',)
    degree = 0

    def __init__(self, value):
        self.value = float(value)

    @classmethod
    def from_argument(cls, arg):
        try:
            return cls(arg)
        except ValueError:
            raise SpecError('constant needs a numeric value, got {!r}'.format(
                arg))

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    @property
    def descriptor(self):
        return 'constant:{!r}'.format(self.value)


TrajectoryFunction.register_type(Polynomial)
TrajectoryFunction.register_type(ExpNeg)
TrajectoryFunction.register_type(SinScaled)
TrajectoryFunction.register_type(Constant)


class Density(namedtuple('Density', 'name degree')):
    __slots__ = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == 'linear':
            return 2.0 * t
        return np.ones_like(t)

    def moments(self, count):
        if self.name == 'linear':
            return 2.0 / np.arange(2, count + 2, dtype=float)
        return lebesgue_moments(count)


DENSITIES = {
    'lebesgue': Density('lebesgue', 0),
    'uniform': Density('lebesgue', 0),
    'linear': Density('linear', 1),
}


class MeasureSpec(namedtuple('MeasureSpec',
                             'kind trajectories weights marginal')):
    __slots__ = ()

    DEFAULTS = {
        'kind': 'trajectory',
        'trajectories': (),
        'weights': None,
        'marginal': 'lebesgue',
    }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SpecError('Measure spec must be a mapping')

        unknown = set(data) - set(cls.DEFAULTS)
        if unknown:
            raise SpecError('Unknown measure spec fields: {}'.format(
                ', '.join(sorted(unknown))))

        d = dict(cls.DEFAULTS)
        d.update(data)

        kind = d['kind']
        if kind not in KINDS:
            raise SpecError("Unknown measure kind '{}'".format(kind))

        trajectories = d['trajectories']
        if isinstance(trajectories, (str, TrajectoryFunction)):
            trajectories = [trajectories]
        trajectories = tuple(TrajectoryFunction.parse(t)
                             for t in trajectories)

        if kind == 'trajectory' and len(trajectories) != 1:
            raise SpecError('trajectory measures need exactly one function')
        if kind == 'mixture' and len(trajectories) < 2:
            raise SpecError('mixtures need at least two functions')
        if kind == 'product' and trajectories:
            raise SpecError('product measures take no trajectory functions')

        weights = d['weights']
        if weights is None:
            weights = [1.0 / len(trajectories)] * len(trajectories) \
                if trajectories else []
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(trajectories):
            raise SpecError('{} weights given for {} functions'.format(
                len(weights), len(trajectories)))
        if any(w < 0 for w in weights) \
           or (weights and abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE):
            raise SpecError('weights must be nonnegative and sum to 1')

        marginal = d['marginal']
        if isinstance(marginal, str):
            try:
                marginal = DENSITIES[marginal]
            except KeyError:
                raise SpecError("Unknown marginal density '{}'".format(
                    marginal))
        elif not isinstance(marginal, Density):
            raise SpecError('marginal must name a catalogue density')

        spec = cls(kind=kind, trajectories=trajectories, weights=weights,
                   marginal=marginal)
        spec.check_ranges()
        return spec

    def check_ranges(self):
        grid = np.linspace(0.0, 1.0, RANGE_CHECK_GRID)
        for fn in self.trajectories:
            values = fn(grid)
            if np.min(values) < -RANGE_SLACK \
               or np.max(values) > 1.0 + RANGE_SLACK:
                raise SpecError(
                    '{} leaves [0, 1] on [0, 1] (range {:.6g}..{:.6g})'.format(
                        fn.descriptor, float(np.min(values)),
                        float(np.max(values))))

    @property
    def polynomial_degree(self):
        degrees = [fn.degree for fn in self.trajectories]
        if any(d is None for d in degrees):
            return None
        return max(degrees, default=0)

    def conditional_moment(self, i, t):
        """f_i(t) = ∫ x^i ψ(dx|t), evaluated pointwise."""
        t = np.asarray(t, dtype=float)
        if self.kind == 'product':
            return np.full_like(t, 1.0 / (i + 1))

        total = np.zeros_like(t)
        for w, fn in zip(self.weights, self.trajectories):
            total = total + w * fn(t) ** i
        return total

    def to_dict(self):
        return {'kind': self.kind,
                'trajectories': [fn.descriptor for fn in self.trajectories],
                'weights': list(self.weights),
                'marginal': self.marginal.name}


def _synthesis_order(spec, max_i, max_j, order, settings):
    if order is not None:
        return order

    degree = spec.polynomial_degree
    if degree is None:
        return settings.synth_order

    needed = max_j + max_i * degree + spec.marginal.degree
    return max(settings.synth_order, needed // 2 + 1)


def synthesize(spec, max_i, max_j, order=None, noise=0.0, seed=None,
               settings=None):
    """
    Moment table of `spec` up to x-power max_i and t-power max_j.

    gamma[i][j] = sum_r w_r ∫ t^j x_r(t)^i h(t) dt by Gauss-Legendre
    quadrature; product measures use (1/(i+1)) m_j directly. An explicit
    marginal carries 2·max_j + 3 closed-form moments, enough for the
    orthonormal basis the detector needs. `noise` adds seeded uniform
    perturbations in [-noise, noise] to every row but the marginal one.
    """
    settings = resolve(settings)
    if max_i < 0 or max_j < 0:
        raise DomainError('max_i and max_j must be >= 0')
    if noise < 0:
        raise DomainError('noise amplitude must be >= 0')

    order = _synthesis_order(spec, max_i, max_j, order, settings)
    density = spec.marginal
    is_lebesgue = density.name == 'lebesgue'
    marginal = (LEBESGUE_MARGINAL if is_lebesgue
                else density.moments(2 * max_j + 3))

    if spec.kind == 'product':
        m = density.moments(max_j + 1)
        gamma = np.outer(1.0 / np.arange(1, max_i + 2, dtype=float), m)
    else:
        rule = gauss_legendre_01(order)
        weighted = rule.weights * density(rule.nodes)
        powers_t = rule.nodes[None, :] ** np.arange(max_j + 1)[:, None]

        def synthesize_row(i):
            return powers_t.dot(weighted * spec.conditional_moment(
                i, rule.nodes))

        gamma = np.array(parallel_map(synthesize_row, range(max_i + 1),
                                      settings.workers))

    if noise:
        rng = np.random.default_rng(seed)
        gamma[1:, :] += rng.uniform(-noise, noise,
                                    size=gamma[1:, :].shape)

    logger.info('Synthesized %dx%d moments for %s measure (order %d)',
                max_i + 1, max_j + 1, spec.kind, order)
    return MomentTable.build(gamma, marginal=marginal, settings=settings)


def oracle_residual(spec, i, order=None, settings=None):
    """
    ‖f_i - f_1^i‖ in L2(ν) by direct quadrature of the known conditional
    moments; zero for trajectory measures.
    """
    settings = resolve(settings)
    if i < 2:
        raise DomainError('oracle residual needs i >= 2, got {}'.format(i))

    rule = gauss_legendre_01(order or settings.synth_order)
    t = rule.nodes
    gap = spec.conditional_moment(i, t) - spec.conditional_moment(1, t) ** i
    value = rule.integrate(spec.marginal(t) * gap * gap)
    return math.sqrt(max(value, 0.0))
