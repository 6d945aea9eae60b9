class TrajcheckError(Exception):
    pass


class ConfigurationError(TrajcheckError):
    pass


class SpecError(ConfigurationError):
    pass


class InputError(TrajcheckError):
    pass


class MissingMomentsError(InputError):
    MAX_LISTED = 10

    def __init__(self, missing):
        self.missing = sorted(missing)

    def __str__(self):
        listed = ', '.join(map('({0[0]},{0[1]})'.format,
                               self.missing[:self.MAX_LISTED]))
        more = len(self.missing) - self.MAX_LISTED
        if more > 0:
            listed += ' and {} more'.format(more)

        return 'missing moments (i,j): {}'.format(listed)


class MarginalViolationError(InputError):
    def __init__(self, j, expected, actual):
        self.j = j
        self.expected = expected
        self.actual = actual

    def __str__(self):
        return ('marginal violation at j={}: expected {!r} (got {!r}, '
                'deviation {:.3g})').format(
                    self.j, self.expected, self.actual,
                    abs(self.actual - self.expected))


class MassError(InputError):
    def __init__(self, mass):
        self.mass = mass

    def __str__(self):
        return ('total mass gamma[0][0] = {!r} is not 1; pass --normalize '
                'to rescale a finite positive mass').format(self.mass)


class BoxBoundError(InputError):
    def __init__(self, i, j, value, bound):
        self.i = i
        self.j = j
        self.value = value
        self.bound = bound

    def __str__(self):
        return ('moment gamma[{}][{}] = {!r} outside [0, {!r}] required by '
                'support in the unit box').format(
                    self.i, self.j, self.value, self.bound)


class MarginalMismatchError(InputError):
    pass


class InsufficientMomentsError(TrajcheckError):
    def __init__(self, needed, available, what='max_j'):
        self.needed = needed
        self.available = available
        self.what = what

    def __str__(self):
        return 'need {} >= {} (have {} = {})'.format(
            self.what, self.needed, self.what, self.available)


class DomainError(TrajcheckError, ValueError):
    pass


class DegreeCapError(TrajcheckError):
    def __init__(self, degree, cap):
        self.degree = degree
        self.cap = cap

    def __str__(self):
        return 'degree {} exceeds the configured cap of {}'.format(
            self.degree, self.cap)


class BasisMismatchError(TrajcheckError):
    def __init__(self, left, right):
        self.left = left
        self.right = right

    def __str__(self):
        return 'series live on different bases: {} and {}'.format(
            self.left, self.right)


class SingularHankelError(TrajcheckError):
    def __init__(self, index):
        self.index = index

    def __str__(self):
        return ('singular Hankel minor at index {}: the marginal is '
                'supported on at most {} points or the degree is too high '
                'for double precision').format(self.index, self.index)


class IllConditionedError(TrajcheckError):
    def __init__(self, index, digits, required):
        self.index = index
        self.digits = digits
        self.required = required

    def __str__(self):
        return ('Hankel factorization at index {} keeps about {:.1f} '
                'reliable digits, fewer than the required {}').format(
                    self.index, self.digits, self.required)
