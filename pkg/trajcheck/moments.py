"""
Moment tables gamma[i][j] = ∫ x^i t^j dμ(x, t) of measures on [0,1]².
"""

import csv
import io
import logging
import math
from collections import namedtuple

import numpy as np
import yaml

from trajcheck.basis import LEBESGUE, build_shifted_legendre, \
    lebesgue_moments
from trajcheck.config import resolve
from trajcheck.errors import BoxBoundError, DomainError, InputError, \
    InsufficientMomentsError, MarginalViolationError, MassError, \
    MissingMomentsError
from trajcheck.orthopoly import basis_for_table, general_coefficient_row
from trajcheck.series import LegendreSeries
from trajcheck.util import FrozenDict, frozen_array, is_collection, plain


logger = logging.getLogger('trajcheck.moments')

LEBESGUE_MARGINAL = 'lebesgue'
FORMATS = ('csv', 'structured')


class MomentTable(namedtuple('MomentTable', 'max_i max_j gamma marginal')):
    """
    Dense, validated moment table.

    `marginal` is either the string 'lebesgue' or a read-only vector of
    t-marginal moments m_0, m_1, ...; the vector may be longer than the
    table's rows, extra entries feed the orthonormal basis construction.
    """
    __slots__ = ()

    @classmethod
    def build(cls, gamma, marginal=LEBESGUE_MARGINAL, box=None,
              normalize=False, settings=None):
        settings = resolve(settings)
        gamma = np.array(gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] < 1 or gamma.shape[1] < 1:
            raise InputError('moment table must be a non-empty matrix')
        if not np.all(np.isfinite(gamma)):
            raise InputError('moment table holds non-finite values')

        if is_collection(marginal):
            marginal = np.array(marginal, dtype=float)
            if marginal.ndim != 1 or not np.all(np.isfinite(marginal)):
                raise InputError('marginal moments must be finite numbers')
        elif marginal != LEBESGUE_MARGINAL:
            raise InputError("marginal must be 'lebesgue' or a list of "
                             "moments, got {!r}".format(marginal))

        gamma, marginal = _normalize(gamma, marginal, normalize, settings)
        if box is not None:
            gamma, marginal = _rescale_box(gamma, marginal, box)

        table = cls(max_i=gamma.shape[0] - 1, max_j=gamma.shape[1] - 1,
                    gamma=frozen_array(gamma),
                    marginal=(marginal if isinstance(marginal, str)
                              else frozen_array(marginal)))
        table.validate(settings)
        return table

    @property
    def is_lebesgue(self):
        return isinstance(self.marginal, str)

    def marginal_moments(self, count=None):
        if count is None:
            count = (self.max_j + 1 if self.is_lebesgue
                     else self.marginal.shape[0])

        if self.is_lebesgue:
            return lebesgue_moments(count)

        if count > self.marginal.shape[0]:
            raise InsufficientMomentsError(count - 1,
                                           self.marginal.shape[0] - 1,
                                           'marginal moment index')
        return self.marginal[:count]

    def row(self, i):
        if not 0 <= i <= self.max_i:
            raise DomainError('power i = {} outside 0..{}'.format(
                i, self.max_i))
        return self.gamma[i]

    def validate(self, settings=None):
        tolerance = resolve(settings).marginal_tolerance

        if abs(self.gamma[0, 0] - 1.0) > tolerance:
            raise MassError(float(self.gamma[0, 0]))

        if not self.is_lebesgue and self.marginal.shape[0] < self.max_j + 1:
            raise InputError(
                'explicit marginal lists {} moments, the table needs at '
                'least {}'.format(self.marginal.shape[0], self.max_j + 1))

        expected = self.marginal_moments(self.max_j + 1)
        for j in range(self.max_j + 1):
            if abs(self.gamma[0, j] - expected[j]) > tolerance:
                raise MarginalViolationError(j, float(expected[j]),
                                             float(self.gamma[0, j]))

        # 0 <= x^i <= 1 on the unit box
        for i in range(1, self.max_i + 1):
            for j in range(self.max_j + 1):
                value = self.gamma[i, j]
                bound = self.gamma[0, j]
                if value < -tolerance or value > bound + tolerance:
                    raise BoxBoundError(i, j, float(value), float(bound))

    def to_dict(self):
        return {
            'max_i': self.max_i,
            'max_j': self.max_j,
            'marginal': (self.marginal if self.is_lebesgue
                         else plain(self.marginal)),
            'gamma': plain(self.gamma),
        }


def _normalize(gamma, marginal, normalize, settings):
    mass = gamma[0, 0]
    if abs(mass - 1.0) <= settings.marginal_tolerance:
        return gamma, marginal

    if not normalize or not (math.isfinite(mass) and mass > 0):
        raise MassError(float(mass))

    logger.info('Normalizing moment table by total mass %r', mass)
    gamma = gamma / mass
    if not isinstance(marginal, str) and marginal.shape[0] \
       and abs(marginal[0] - 1.0) > settings.marginal_tolerance:
        marginal = marginal / marginal[0]

    return gamma, marginal


def _affine_matrix(size, lower, upper):
    """
    Row k holds the coefficients of ((s - lower) / (upper - lower))^k in
    powers of s.
    """
    width = upper - lower
    out = np.zeros((size, size))
    for k in range(size):
        for p in range(k + 1):
            out[k, p] = (math.comb(k, p) * (-lower) ** (k - p)
                         / width ** k)
    return out


def _rescale_box(gamma, marginal, box):
    """
    Map moments of a measure on [a,b] x [c,d] (t in [a,b], x in [c,d]) to
    the moments of its image on [0,1]².
    """
    try:
        a, b, c, d = (float(v) for v in box)
    except (TypeError, ValueError):
        raise InputError('box must be four numbers [a, b, c, d]')
    if not (a < b and c < d):
        raise InputError('box [a, b, c, d] needs a < b and c < d')

    logger.info('Rescaling moments from box t in [%g, %g], x in [%g, %g]',
                a, b, c, d)
    x_map = _affine_matrix(gamma.shape[0], c, d)
    t_map = _affine_matrix(gamma.shape[1], a, b)
    gamma = x_map.dot(gamma).dot(t_map.T)

    if not isinstance(marginal, str):
        marginal = _affine_matrix(marginal.shape[0], a, b).dot(marginal)

    return gamma, marginal


def _read_text(source):
    if isinstance(source, bytes):
        return source.decode('utf-8')
    elif isinstance(source, str):
        return source

    data = source.read()
    if isinstance(data, bytes):
        data = data.decode('utf-8')
    return data


def _parse_float(value, where):
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise InputError('{}: not a number: {!r}'.format(where, value))

    if not math.isfinite(result):
        raise InputError('{}: not a finite number: {!r}'.format(
            where, value))
    return result


def _parse_index(value, where):
    try:
        result = int(value)
    except (TypeError, ValueError):
        raise InputError('{}: not an integer index: {!r}'.format(
            where, value))

    if result < 0:
        raise InputError('{}: negative index {}'.format(where, result))
    return result


def _read_csv_cells(text):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None \
       or not {'i', 'j', 'value'} <= set(reader.fieldnames):
        raise InputError('moment CSV needs a header "i,j,value"')

    cells = {}
    for lineno, row in enumerate(reader, start=2):
        where = 'line {}'.format(lineno)
        key = (_parse_index(row['i'], where), _parse_index(row['j'], where))
        if key in cells:
            raise InputError('{}: duplicate moment ({},{})'.format(
                where, *key))
        cells[key] = _parse_float(row['value'], where)

    if not cells:
        raise InputError('moment CSV holds no moments')
    return cells


def _dense_from_cells(cells, max_i=None, max_j=None):
    if max_i is None:
        max_i = max(i for (i, _) in cells)
    if max_j is None:
        max_j = max(j for (_, j) in cells)

    missing = [(i, j) for i in range(max_i + 1) for j in range(max_j + 1)
               if (i, j) not in cells]
    if missing:
        raise MissingMomentsError(missing)

    gamma = np.empty((max_i + 1, max_j + 1))
    for (i, j), value in cells.items():
        if i > max_i or j > max_j:
            raise InputError('moment ({},{}) outside declared table '
                             '{}x{}'.format(i, j, max_i, max_j))
        gamma[i, j] = value
    return gamma


def _parse_marginal(value):
    if value is None or value == LEBESGUE_MARGINAL:
        return LEBESGUE_MARGINAL
    if isinstance(value, str) or not is_collection(value):
        raise InputError("marginal must be 'lebesgue' or a list of "
                         "numbers, got {!r}".format(value))

    return [_parse_float(v, 'marginal[{}]'.format(k))
            for k, v in enumerate(value)]


def _read_structured(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise InputError('cannot parse structured moment file: {}'.format(e))

    if not isinstance(data, dict):
        raise InputError('structured moment file must hold a mapping')

    for field in ('max_i', 'max_j', 'gamma'):
        if field not in data:
            raise InputError(
                'structured moment file lacks field {!r}'.format(field))

    max_i = _parse_index(data['max_i'], 'max_i')
    max_j = _parse_index(data['max_j'], 'max_j')
    rows = data['gamma']
    if not is_collection(rows) or isinstance(rows, dict):
        raise InputError('gamma must be a list of rows')

    cells = {}
    for i, row in enumerate(rows):
        if not is_collection(row) or isinstance(row, dict):
            raise InputError('gamma[{}] must be a list'.format(i))
        for j, value in enumerate(row):
            if value is not None:
                cells[(i, j)] = _parse_float(
                    value, 'gamma[{}][{}]'.format(i, j))

    gamma = _dense_from_cells(cells, max_i, max_j)
    return gamma, _parse_marginal(data.get('marginal')), data.get('box')


def load_marginal(source):
    reader = csv.DictReader(io.StringIO(_read_text(source)))
    if reader.fieldnames is None \
       or not {'j', 'value'} <= set(reader.fieldnames):
        raise InputError('marginal moment CSV needs a header "j,value"')

    entries = {}
    for lineno, row in enumerate(reader, start=2):
        where = 'line {}'.format(lineno)
        entries[_parse_index(row['j'], where)] = \
            _parse_float(row['value'], where)

    if not entries:
        raise InputError('marginal moment CSV holds no moments')

    count = max(entries) + 1
    missing = sorted(set(range(count)) - set(entries))
    if missing:
        raise InputError('marginal moments missing for j = {}'.format(
            missing))
    return [entries[j] for j in range(count)]


def load_moments(source, fmt='csv', marginal=None, normalize=False,
                 settings=None):
    """
    Parse and validate a moment table.

    CSV input carries no marginal description: the marginal is Lebesgue
    unless `marginal` gives explicit moments. Structured files may declare
    `marginal` and `box` themselves.
    """
    if fmt not in FORMATS:
        raise InputError('unknown moment format {!r}'.format(fmt))

    text = _read_text(source)
    box = None
    if fmt == 'csv':
        gamma = _dense_from_cells(_read_csv_cells(text))
        file_marginal = LEBESGUE_MARGINAL
    else:
        gamma, file_marginal, box = _read_structured(text)

    if marginal is None:
        marginal = file_marginal

    table = MomentTable.build(gamma, marginal=marginal, box=box,
                              normalize=normalize, settings=settings)
    logger.info('Loaded %dx%d moment table (%s marginal)', table.max_i + 1,
                table.max_j + 1,
                'Lebesgue' if table.is_lebesgue else 'explicit')
    return table


def dump_moments(table, stream, fmt='csv'):
    if fmt == 'csv':
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['i', 'j', 'value'])
        for i in range(table.max_i + 1):
            for j in range(table.max_j + 1):
                writer.writerow([i, j, '{:.17g}'.format(table.gamma[i, j])])
    elif fmt == 'structured':
        yaml.safe_dump(table.to_dict(), stream, default_flow_style=None,
                       sort_keys=False)
    else:
        raise InputError('unknown moment format {!r}'.format(fmt))


def coefficient_row(table, i, degree, settings=None):
    """
    Basis coefficients (Δ gamma_i)(0..degree) of the disintegration density
    f_i(t) = ∫ x^i ψ(dx|t).

    Lebesgue tables use the shifted Legendre transform; tables with an
    explicit marginal use the orthonormal basis built from its moments.
    """
    if degree < 0:
        raise DomainError('degree must be >= 0, got {}'.format(degree))
    if degree > table.max_j:
        raise InsufficientMomentsError(degree, table.max_j)

    row = table.row(i)
    if table.is_lebesgue:
        transform = build_shifted_legendre(degree, settings=settings)
        return LegendreSeries.new(transform.apply(row, degree), LEBESGUE)

    basis = basis_for_table(table, degree, settings=settings)
    return general_coefficient_row(table, basis, i, degree,
                                   settings=settings)


class MomentStore(namedtuple('MomentStore',
                             'dimension max_i max_j entries marginal')):
    """
    Moments γ(j, α) of a measure on [0,1] x [0,1]^dimension, keyed by
    (j, α) with α a multi-index tuple.
    """
    __slots__ = ()

    @classmethod
    def new(cls, dimension, entries, marginal=LEBESGUE_MARGINAL,
            max_i=None, max_j=None):
        if dimension < 1:
            raise InputError('store dimension must be >= 1')

        frozen = {}
        for (j, alpha), value in dict(entries).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dimension:
                raise InputError(
                    'multi-index {} does not have {} entries'.format(
                        alpha, dimension))
            frozen[(int(j), alpha)] = float(value)

        if not frozen:
            raise InputError('moment store is empty')

        if max_i is None:
            max_i = max(max(alpha) for (_, alpha) in frozen)
        if max_j is None:
            max_j = max(j for (j, _) in frozen)

        if not isinstance(marginal, str):
            marginal = tuple(float(v) for v in marginal)

        return cls(dimension=dimension, max_i=max_i, max_j=max_j,
                   entries=FrozenDict(frozen), marginal=marginal)


def _parse_alpha(value, where):
    if isinstance(value, str):
        parts = [p for p in value.replace(' ', '').split(';') if p]
    elif is_collection(value):
        parts = list(value)
    else:
        parts = [value]

    return tuple(_parse_index(p, where) for p in parts)


def load_store(source, fmt='csv'):
    """
    Read a multi-coordinate moment store.

    CSV: header `j,alpha,value` with alpha written as `k1;k2;...`.
    Structured: mapping with `dimension`, optional `marginal`, `max_i`,
    `max_j`, and `moments`, a list of {j, alpha, value}.
    """
    text = _read_text(source)
    marginal = LEBESGUE_MARGINAL
    max_i = max_j = None

    if fmt == 'csv':
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None \
           or not {'j', 'alpha', 'value'} <= set(reader.fieldnames):
            raise InputError('store CSV needs a header "j,alpha,value"')
        records = list(enumerate(reader, start=2))
        label = 'line {}'
    elif fmt == 'structured':
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise InputError('cannot parse structured store: {}'.format(e))
        if not isinstance(data, dict) or 'moments' not in data:
            raise InputError('structured store needs a "moments" list')

        marginal = _parse_marginal(data.get('marginal'))
        if data.get('max_i') is not None:
            max_i = _parse_index(data['max_i'], 'max_i')
        if data.get('max_j') is not None:
            max_j = _parse_index(data['max_j'], 'max_j')
        records = list(enumerate(data['moments']))
        label = 'moments[{}]'
    else:
        raise InputError('unknown store format {!r}'.format(fmt))

    entries = {}
    dimension = None
    for n, record in records:
        where = label.format(n)
        if not isinstance(record, dict):
            raise InputError('{}: expected a mapping'.format(where))
        try:
            key = (_parse_index(record['j'], where),
                   _parse_alpha(record['alpha'], where))
            value = _parse_float(record['value'], where)
        except KeyError as e:
            raise InputError('{}: missing field {}'.format(where, e))

        if dimension is None:
            dimension = len(key[1])
        entries[key] = value

    if dimension is None:
        raise InputError('moment store holds no moments')

    if fmt == 'structured' and data.get('dimension') is not None:
        dimension = _parse_index(data['dimension'], 'dimension')

    return MomentStore.new(dimension, entries, marginal=marginal,
                           max_i=max_i, max_j=max_j)


def slice_coordinate(store, coordinate, settings=None):
    """
    Table of the (t, x_c) marginal: gamma[k][j] = γ(j, k e_c).

    Coordinates are numbered from 1.
    """
    if not 1 <= coordinate <= store.dimension:
        raise DomainError('coordinate {} outside 1..{}'.format(
            coordinate, store.dimension))

    cells = {}
    missing = []
    for k in range(store.max_i + 1):
        alpha = tuple(k if c == coordinate - 1 else 0
                      for c in range(store.dimension))
        for j in range(store.max_j + 1):
            try:
                cells[(k, j)] = store.entries[(j, alpha)]
            except KeyError:
                missing.append((k, j))

    if missing:
        raise MissingMomentsError(missing)

    gamma = _dense_from_cells(cells, store.max_i, store.max_j)
    return MomentTable.build(gamma, marginal=store.marginal,
                             settings=settings)
